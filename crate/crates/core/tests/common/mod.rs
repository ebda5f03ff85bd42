#![allow(dead_code)]

pub mod checks;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use whittaker::padic::{Field, FieldSpec};
use whittaker::redtree::{DoubledGraph, Skeleton};
use whittaker::theta::chart::{ChartKind, ChartTuple};

pub fn field(short: &str, precision: u32) -> Field {
    Field::new(FieldSpec::parse_short(short, precision).unwrap()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Field in which a chart has restricted samples.
pub fn chart_field(chart: ChartKind, precision: u32) -> Field {
    match chart {
        ChartKind::G3c8 => field("5,2", precision),
        _ => field("5", precision),
    }
}

pub fn sample(chart: ChartKind, field: Field, seed: u64) -> ChartTuple {
    let mut r = rng(seed);
    ChartTuple::new(chart, chart.sample(field, 2, &mut r).unwrap()).unwrap()
}

/// Number of sub-graphs of the doubled graph that project bijectively onto
/// the vertices and edges of the tree, by trying every subset.
pub fn brute_force_domain_count(sk: &Skeleton, dg: &DoubledGraph) -> usize {
    let nv = dg.vertices.len();
    let ne = dg.edges.len();
    assert!(nv + ne <= 24, "graph too large for brute force");
    let mut count = 0;
    for mask in 0u32..(1u32 << (nv + ne)) {
        let vs: Vec<usize> = (0..nv).filter(|&i| mask >> i & 1 == 1).collect();
        let es: Vec<usize> = (0..ne).filter(|&i| mask >> (nv + i) & 1 == 1).collect();
        if vs.len() != sk.num_vertices() || es.len() != sk.edges.len() {
            continue;
        }
        let mut seen_v = vec![false; sk.num_vertices()];
        if !vs.iter().all(|&i| !std::mem::replace(&mut seen_v[dg.vertices[i].0], true)) {
            continue;
        }
        let mut seen_e = vec![false; sk.edges.len()];
        if !es.iter().all(|&i| !std::mem::replace(&mut seen_e[dg.edges[i].0], true)) {
            continue;
        }
        if es.iter().all(|&i| {
            let (a, b) = dg.edges[i].2;
            vs.contains(&a) && vs.contains(&b)
        }) {
            count += 1;
        }
    }
    count
}

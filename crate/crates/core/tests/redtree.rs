mod common;

use common::{brute_force_domain_count, field, rng, sample};
use proptest::prelude::*;
use whittaker::catalog::{self, CatalogShape};
use whittaker::padic::Field;
use whittaker::projline::{Mobius, ProjPoint};
use whittaker::redtree::{classify, standard_pairs, van_steen_check, DoubledGraph, ReductionTree, VertexType};
use whittaker::theta::chart::ChartKind;
use whittaker::Error;

fn points(f: Field, texts: &[&str]) -> Vec<ProjPoint> {
    texts.iter().map(|t| ProjPoint::parse(f, t).unwrap()).collect()
}

fn pairs_of(pts: &[ProjPoint]) -> Vec<(ProjPoint, ProjPoint)> {
    pts.chunks(2).map(|c| (c[0], c[1])).collect()
}

fn random_mobius(f: Field, seed: u64) -> Mobius {
    use rand::Rng;
    let mut r = rng(seed);
    loop {
        let mut entry = || {
            let v: i64 = r.gen_range(-1..3);
            f.random_with_valuation(&mut r, v.into())
        };
        let (a, b, c, d) = (entry(), entry(), entry(), entry());
        if let Ok(m) = Mobius::new(a, b, c, d) {
            return m;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn tree_is_pgl2_equivariant(shape in 0..catalog::shapes().len(), seed in any::<u64>()) {
        let f = field("5,2", 24);
        let s: &CatalogShape = &catalog::shapes()[shape];
        let pts = s.realize(f, 2, &mut rng(seed)).unwrap();
        let m = random_mobius(f, seed ^ 0x9e37);
        let moved: Vec<ProjPoint> = pts.iter().map(|p| m.apply(p).unwrap()).collect();
        let t1 = ReductionTree::build(&pts).unwrap();
        let t2 = ReductionTree::build(&moved).unwrap();
        prop_assert_eq!(t1.metric_signature(), t2.metric_signature());
    }

    #[test]
    fn edge_sides_have_equal_parity(shape in 0..catalog::shapes().len(), seed in any::<u64>()) {
        let f = field("5,2", 16);
        let s = &catalog::shapes()[shape];
        let tree = ReductionTree::build(&s.realize(f, 2, &mut rng(seed)).unwrap()).unwrap();
        let sk = &tree.skeleton;
        for e in 0..sk.edges.len() {
            let (a, b) = sk.edges[e];
            prop_assert_eq!(sk.side_labels(e, a).len() % 2, sk.side_labels(e, b).len() % 2);
        }
    }
}

#[test]
fn normalized_kadziela_points_form_a_chain_of_pairs() {
    let f = field("5", 20);
    let tree = ReductionTree::build(&points(f, &["0", "25", "1", "39", "1/5", "inf"])).unwrap();
    let sk = &tree.skeleton;
    assert_eq!(sk.num_vertices(), 3);
    assert_eq!(sk.edges.len(), 2);
    let mut marks: Vec<Vec<usize>> = sk.marks.iter().map(|m| { let mut m = m.clone(); m.sort(); m }).collect();
    marks.sort();
    assert_eq!(marks, vec![vec![0, 1], vec![2, 3], vec![4, 5]]);
    let config = classify(sk, &standard_pairs(6)).unwrap();
    assert_eq!(config.catalog_name.as_deref(), Some("g2b"));
    assert!(config.even_edges.iter().all(|&e| e));
    assert!(config.even_vertices.iter().all(|&v| !v));
}

#[test]
fn closed_disk_genus_two_tree_has_an_even_center() {
    let fix = sample(ChartKind::G2a, field("5", 20), 1);
    let tree = ReductionTree::build(&fix.points().unwrap()).unwrap();
    let config = classify(&tree.skeleton, &standard_pairs(6)).unwrap();
    let center = (0..tree.skeleton.num_vertices()).find(|&v| tree.skeleton.marks[v].is_empty()).unwrap();
    assert_eq!(config.vertex_types[center], VertexType::A);
    assert!(config.even_vertices[center]);
    assert_eq!(config.even_edges, vec![true; 3]);
    for v in (0..4).filter(|&v| v != center) {
        assert_eq!(config.vertex_types[v], VertexType::C);
    }
    assert!(tree.skeleton.closed_disk(&standard_pairs(6)));
}

#[test]
fn chain_configuration_c_has_an_odd_middle_edge() {
    let fix = sample(ChartKind::G2c, field("5", 20), 2);
    let tree = ReductionTree::build(&fix.points().unwrap()).unwrap();
    let sk = &tree.skeleton;
    let config = classify(sk, &standard_pairs(6)).unwrap();
    assert_eq!(config.catalog_name.as_deref(), Some("g2c"));
    for e in 0..sk.edges.len() {
        let (a, b) = sk.edges[e];
        let middle = sk.marks[a].len() == 1 && sk.marks[b].len() == 1;
        assert_eq!(config.even_edges[e], !middle);
    }
    assert!(!sk.closed_disk(&standard_pairs(6)));
}

#[test]
fn six_points_in_distinct_residue_classes_have_no_pairing() {
    let f = field("7", 12);
    let tree = ReductionTree::build(&points(f, &["0", "1", "2", "3", "4", "5"])).unwrap();
    assert!(!tree.skeleton.is_potential_mumford());
    assert!(tree.skeleton.canonical_pairing().is_err());
}

#[test]
fn five_points_in_one_disk_and_one_outside_fail_the_parity_criterion() {
    let f = field("7", 12);
    let tree = ReductionTree::build(&points(f, &["0", "7", "14", "21", "28", "1"])).unwrap();
    assert!(!tree.skeleton.is_potential_mumford());
}

#[test]
fn restricted_case_b_depends_on_the_middle_residue() {
    let f = field("5", 20);
    // b1 = -1 mod 5 is the excluded residue
    for (b1, restricted) in [("39", false), ("2", true), ("3", true)] {
        let tree = ReductionTree::build(&points(f, &["0", "25", "1", b1, "1/5", "inf"])).unwrap();
        assert_eq!(tree.restricted_check(), restricted, "b1 = {b1}");
    }
}

#[test]
fn samples_of_charts_a_and_c_are_restricted() {
    for chart in [ChartKind::G2a, ChartKind::G2c] {
        for seed in 0..10 {
            let fix = sample(chart, field("5", 20), seed);
            assert!(ReductionTree::build(&fix.points().unwrap()).unwrap().restricted_check());
        }
    }
}

#[test]
fn four_points_on_one_line_separate_two_pairs() {
    let f = field("5", 12);
    let tree = ReductionTree::build(&points(f, &["0", "1", "2", "inf"])).unwrap();
    assert!(!tree.separates_one_pair(&standard_pairs(4)));
}

#[test]
fn disjoint_closed_disks_satisfy_all_disk_conditions() {
    let fix = sample(ChartKind::G2a, field("5", 20), 4);
    let pts = fix.points().unwrap();
    let tree = ReductionTree::build(&pts).unwrap();
    let w = tree.generic_points(1, &mut rng(9)).unwrap()[0];
    assert!(van_steen_check(&pairs_of(&pts), &w).unwrap().all());
}

#[test]
fn bad_position_tuple_fails_a_disk_condition() {
    let f = field("5", 20);
    let pts = points(f, &["0", "5", "1", "-1", "1/5", "inf"]);
    let w = ProjPoint::parse(f, "2").unwrap();
    assert!(!van_steen_check(&pairs_of(&pts), &w).unwrap().all());
}

#[test]
fn a_single_pair_satisfies_the_disk_conditions_vacuously() {
    let f = field("5", 20);
    let pts = points(f, &["0", "1"]);
    assert!(van_steen_check(&pairs_of(&pts), &ProjPoint::Infinity).unwrap().all());
}

#[test]
fn doubled_graph_sizes_for_small_configurations() {
    let expect = [("g2a", 5, 6, 2, 2), ("g2b", 3, 4, 2, 4), ("g3c10", 6, 8, 3, 2), ("g3c8", 4, 6, 3, 8)];
    for (name, nv, ne, betti, domains) in expect {
        let sk = catalog::by_name(name).unwrap().skeleton();
        let dg = DoubledGraph::new(&sk);
        assert_eq!((dg.vertices.len(), dg.edges.len(), dg.betti()), (nv, ne, betti), "{name}");
        assert_eq!(dg.fundamental_domains(&sk).len(), domains, "{name}");
        assert_eq!(1usize << dg.domain_exponent(&sk), domains, "{name}");
    }
}

#[test]
fn domain_enumeration_matches_brute_force_for_every_catalog_shape() {
    for shape in catalog::shapes() {
        let sk = shape.skeleton();
        let dg = DoubledGraph::new(&sk);
        assert_eq!(dg.betti(), shape.genus, "{}", shape.name);
        let domains = dg.fundamental_domains(&sk);
        assert!(domains.len().is_power_of_two());
        assert!(domains.iter().all(|c| dg.is_fundamental_domain(c)), "{}", shape.name);
        assert_eq!(domains.len(), brute_force_domain_count(&sk, &dg), "{}", shape.name);
    }
}

#[test]
fn indistinguishable_points_are_rejected() {
    let f = field("5", 6);
    let pts = points(f, &["0", "1", "1 + O(p^3)", "2"]);
    assert!(matches!(ReductionTree::build(&pts), Err(Error::Precision(_))));
}

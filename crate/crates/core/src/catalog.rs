//! Named configuration shapes of genus 2 and 3 and a random realizer
//! producing point sets with a given shape.

use crate::error::{Error, Result};
use crate::padic::{Field, FieldElement};
use crate::projline::ProjPoint;
use crate::redtree::{standard_pairs, ReductionTree, Skeleton};
use rand::seq::SliceRandom;
use rand::Rng;

/// A tree shape given by per-vertex mark counts and edges.
#[derive(Debug, Clone, Copy)]
pub struct CatalogShape {
    pub name: &'static str,
    pub genus: usize,
    pub counts: &'static [usize],
    pub edges: &'static [(usize, usize)],
}

const SHAPES: &[CatalogShape] = &[
    CatalogShape { name: "g2a", genus: 2, counts: &[0, 2, 2, 2], edges: &[(0, 1), (0, 2), (0, 3)] },
    CatalogShape { name: "g2b", genus: 2, counts: &[2, 2, 2], edges: &[(0, 1), (1, 2)] },
    CatalogShape { name: "g2c", genus: 2, counts: &[2, 1, 1, 2], edges: &[(0, 1), (1, 2), (2, 3)] },
    CatalogShape {
        name: "g3c1",
        genus: 3,
        counts: &[2, 1, 1, 1, 1, 2],
        edges: &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)],
    },
    CatalogShape { name: "g3c2", genus: 3, counts: &[2, 2, 1, 1, 2], edges: &[(0, 1), (1, 2), (2, 3), (3, 4)] },
    CatalogShape { name: "g3c3", genus: 3, counts: &[2, 2, 2, 2], edges: &[(0, 1), (1, 2), (2, 3)] },
    CatalogShape {
        name: "g3c4",
        genus: 3,
        counts: &[0, 1, 2, 1, 2, 2],
        edges: &[(0, 1), (1, 2), (0, 3), (3, 4), (0, 5)],
    },
    CatalogShape {
        name: "g3c5",
        genus: 3,
        counts: &[0, 1, 1, 2, 2, 2],
        edges: &[(0, 1), (1, 2), (2, 3), (0, 4), (0, 5)],
    },
    CatalogShape { name: "g3c6", genus: 3, counts: &[0, 2, 2, 2, 2], edges: &[(0, 1), (1, 2), (0, 3), (0, 4)] },
    CatalogShape { name: "g3c7", genus: 3, counts: &[1, 1, 2, 2, 2], edges: &[(0, 1), (1, 2), (0, 3), (0, 4)] },
    CatalogShape { name: "g3c8", genus: 3, counts: &[2, 2, 2, 2], edges: &[(0, 1), (0, 2), (0, 3)] },
    CatalogShape {
        name: "g3c9",
        genus: 3,
        counts: &[0, 0, 2, 2, 2, 2],
        edges: &[(0, 1), (0, 2), (0, 3), (1, 4), (1, 5)],
    },
    CatalogShape {
        name: "g3c10",
        genus: 3,
        counts: &[0, 2, 2, 2, 2],
        edges: &[(0, 1), (0, 2), (0, 3), (0, 4)],
    },
];

pub fn shapes() -> &'static [CatalogShape] {
    SHAPES
}

pub fn genus3_shapes() -> impl Iterator<Item = &'static CatalogShape> {
    SHAPES.iter().filter(|s| s.genus == 3)
}

pub fn by_name(name: &str) -> Option<&'static CatalogShape> {
    SHAPES.iter().find(|s| s.name == name)
}

/// Catalog entry with the given label-free signature.
pub fn lookup(signature: &str) -> Option<&'static CatalogShape> {
    SHAPES.iter().find(|s| s.signature() == signature)
}

impl CatalogShape {
    /// Skeleton whose tree-determined pairs are `(0,1), (2,3), ...`.
    pub fn skeleton(&self) -> Skeleton {
        let raw = Skeleton::from_counts(self.counts, self.edges);
        let pairs = raw.canonical_pairing().expect("catalog shapes are valid configurations");
        raw.relabeled(&pairs)
    }

    pub fn signature(&self) -> String {
        Skeleton::from_counts(self.counts, self.edges).signature()
    }

    /// Random finite points whose tree has this shape, labelled so that the
    /// standard pairs are the tree pairs, and which pass the restricted
    /// check, with infinity at a generic point of the top component. Edge sizes are drawn from `1..=max_size` uniformizer units.
    pub fn realize<R: Rng + ?Sized>(&self, field: Field, max_size: i64, rng: &mut R) -> Result<Vec<ProjPoint>> {
        let sk = self.skeleton();
        let rf = field.residue_field();
        let need = (0..sk.num_vertices()).map(|v| sk.degree(v) + sk.marks[v].len()).max().unwrap_or(0);
        if need as u64 > rf.size() {
            return Err(Error::Domain(format!("residue field too small to realize {}", self.name)));
        }
        for _ in 0..500 {
            let mut pts = vec![field.zero(); sk.num_labels];
            place(&sk, field, 0, usize::MAX, field.zero(), 0, max_size, &mut pts, rng);
            let pts: Vec<ProjPoint> = pts.into_iter().map(ProjPoint::Finite).collect();
            let tree = ReductionTree::build(&pts)?;
            if tree.signature() == self.signature()
                && tree.skeleton.canonical_pairing().ok() == Some(standard_pairs(sk.num_labels))
                && tree.restricted_check()
                && tree.infinity_is_generic()
            {
                return Ok(pts);
            }
        }
        Err(Error::Domain(format!("no restricted realization of {} found", self.name)))
    }
}

#[allow(clippy::too_many_arguments)]
fn place<R: Rng + ?Sized>(
    sk: &Skeleton,
    field: Field,
    v: usize,
    parent: usize,
    center: FieldElement,
    depth: i64,
    max_size: i64,
    out: &mut [FieldElement],
    rng: &mut R,
) {
    let mut residues = field.residue_field().elements();
    residues.shuffle(rng);
    let mut next = residues.into_iter();
    for &l in &sk.marks[v] {
        let local = field.lift_residue(next.next().unwrap()).add(&field.random_unit(rng).shift(1));
        out[l] = center.add(&local.shift(depth));
    }
    for (_, w) in sk.neighbors(v) {
        if w == parent {
            continue;
        }
        let c = center.add(&field.lift_residue(next.next().unwrap()).shift(depth));
        let size = rng.gen_range(1..=max_size);
        place(sk, field, w, v, c, depth + size, max_size, out, rng);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::FieldSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn marked_star_not_restricted_over_f5() {
        let f = Field::new(FieldSpec::new(5, 12)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(by_name("g3c8").unwrap().realize(f, 2, &mut rng).is_err());
    }

    #[test]
    fn signatures_distinct() {
        let mut sigs: Vec<String> = shapes().iter().map(|s| s.signature()).collect();
        sigs.sort();
        sigs.dedup();
        assert_eq!(sigs.len(), shapes().len());
        assert_eq!(genus3_shapes().count(), 10);
    }

    #[test]
    fn realizations_rebuild_their_shape() {
        let q5 = Field::new(FieldSpec::new(5, 12)).unwrap();
        let q25 = Field::new(FieldSpec::new(5, 12).with_unramified(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for shape in shapes() {
            // three nodes on a line with two fixed residues need more than F_5
            let f = if matches!(shape.name, "g3c7" | "g3c8") { q25 } else { q5 };
            let pts = shape.realize(f, 2, &mut rng).unwrap();
            let tree = ReductionTree::build(&pts).unwrap();
            assert_eq!(lookup(&tree.signature()).map(|s| s.name), Some(shape.name));
            assert!(tree.separates_one_pair(&standard_pairs(pts.len())));
        }
    }
}

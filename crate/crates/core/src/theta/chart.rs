//! Coordinate charts on fixed-point and branch-point spaces.
//!
//! Each chart places `2g+2` points on the line, anchored at `0`, `1` and
//! `oo`, as a function of a few free coordinates, and reads the
//! coordinates back from a point list. The same chart describes a fixed
//! point tuple and its branch point image; `leading` is the first-order
//! approximation of the branch coordinates and `leading_inverse` inverts
//! it on a chosen sheet.

use crate::catalog::{by_name, CatalogShape};
use crate::error::{Error, Result};
use crate::padic::{Field, FieldElement};
use crate::projline::ProjPoint;
use crate::redtree::{standard_pairs, ReductionTree};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    G2a,
    G2b,
    G2c,
    RosenhainA,
    RosenhainB,
    RosenhainC,
    G3c1,
    G3c4,
    G3c8,
    G3c10,
}

/// Whether a tuple describes fixed points or branch points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Fix,
    Branch,
}

/// Rough size class of a free coordinate, used for sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Size {
    Small,
    Unit,
    Large,
}

pub const ALL_CHARTS: [ChartKind; 10] = [
    ChartKind::G2a,
    ChartKind::G2b,
    ChartKind::G2c,
    ChartKind::RosenhainA,
    ChartKind::RosenhainB,
    ChartKind::RosenhainC,
    ChartKind::G3c1,
    ChartKind::G3c4,
    ChartKind::G3c8,
    ChartKind::G3c10,
];

impl ChartKind {
    pub fn name(&self) -> &'static str {
        match self {
            ChartKind::G2a => "g2a",
            ChartKind::G2b => "g2b",
            ChartKind::G2c => "g2c",
            ChartKind::RosenhainA => "rosenhain_a",
            ChartKind::RosenhainB => "rosenhain_b",
            ChartKind::RosenhainC => "rosenhain_c",
            ChartKind::G3c1 => "g3c1",
            ChartKind::G3c4 => "g3c4",
            ChartKind::G3c8 => "g3c8",
            ChartKind::G3c10 => "g3c10",
        }
    }

    /// The catalog shape of both the fixed and the branch points.
    pub fn shape(&self) -> &'static CatalogShape {
        let name = match self {
            ChartKind::G2a | ChartKind::RosenhainA => "g2a",
            ChartKind::G2b | ChartKind::RosenhainB => "g2b",
            ChartKind::G2c | ChartKind::RosenhainC => "g2c",
            other => other.name(),
        };
        by_name(name).expect("chart shapes are in the catalog")
    }

    pub fn genus(&self) -> usize {
        self.shape().genus
    }

    pub fn coord_names(&self) -> &'static [&'static str] {
        match self {
            ChartKind::G2a | ChartKind::G2c => &["B0", "B1", "B2"],
            ChartKind::G2b => &["b0", "b1", "b2"],
            ChartKind::RosenhainA | ChartKind::RosenhainB => &["B0", "B1", "T"],
            ChartKind::RosenhainC => &["B0", "T", "B1"],
            ChartKind::G3c1 => &["B0", "A1", "B1", "A2", "B2"],
            ChartKind::G3c4 => &["B0", "B1", "B2", "A", "T"],
            ChartKind::G3c8 => &["B1", "B2", "B3", "T2", "T3"],
            ChartKind::G3c10 => &["B0", "T1", "T2", "A", "B3"],
        }
    }

    fn sizes(&self) -> &'static [Size] {
        use Size::*;
        match self {
            ChartKind::G2b => &[Small, Unit, Large],
            ChartKind::RosenhainB => &[Small, Small, Unit],
            ChartKind::G3c8 => &[Small, Small, Small, Unit, Unit],
            ChartKind::G3c10 => &[Small, Small, Small, Unit, Small],
            ChartKind::G2a | ChartKind::G2c | ChartKind::RosenhainA | ChartKind::RosenhainC => &[Small; 3],
            ChartKind::G3c1 | ChartKind::G3c4 => &[Small; 5],
        }
    }

    /// Number of preimages of a branch tuple.
    pub fn sheets(&self) -> usize {
        match self {
            ChartKind::G2a | ChartKind::RosenhainA | ChartKind::G3c10 => 1,
            ChartKind::G2b | ChartKind::G2c | ChartKind::RosenhainB | ChartKind::RosenhainC => 2,
            ChartKind::G3c1 | ChartKind::G3c4 | ChartKind::G3c8 => 4,
        }
    }

    /// The point list `a0, b0, a1, b1, ...` of the coordinates.
    pub fn points(&self, c: &[FieldElement]) -> Result<Vec<ProjPoint>> {
        self.check_arity(c)?;
        let f = c[0].field();
        let one = f.one();
        let fin = ProjPoint::Finite;
        let zero = fin(f.zero());
        let inf = ProjPoint::Infinity;
        let pts = match self {
            ChartKind::G2a => vec![zero, fin(c[0]), fin(one), fin(one.add(&c[1])), inf, fin(c[2].inv()?)],
            ChartKind::G2b => vec![zero, fin(c[0]), fin(one), fin(c[1]), inf, fin(c[2])],
            ChartKind::G2c => vec![zero, fin(c[0].mul(&c[1])), fin(one), fin(c[1]), inf, fin(c[2].inv()?)],
            ChartKind::RosenhainA => {
                let (b0, b1, t) = (c[0], c[1], c[2]);
                vec![zero, fin(b0.mul(&b1)), fin(b1.mul(&one.add(&t))), fin(b1), fin(one), inf]
            }
            ChartKind::RosenhainB => {
                let (b0, b1, t) = (c[0], c[1], c[2]);
                vec![zero, fin(b0.mul(&b1)), fin(b1.mul(&t)), fin(b1), fin(one), inf]
            }
            ChartKind::RosenhainC => {
                let (b0, t, b1) = (c[0], c[1], c[2]);
                let a1 = t.mul(&b1);
                vec![zero, fin(b0.mul(&a1)), fin(a1), fin(b1), fin(one), inf]
            }
            ChartKind::G3c1 => {
                // consecutive ratios of x1, ..., x5
                let mut x = vec![c[4]];
                for k in (0..4).rev() {
                    let prev = *x.last().unwrap();
                    x.push(c[k].mul(&prev));
                }
                x.reverse();
                let mut pts = vec![zero];
                pts.extend(x.into_iter().map(fin));
                pts.extend([fin(one), inf]);
                pts
            }
            ChartKind::G3c4 => {
                let (b0, b1, b2, a, t) = (c[0], c[1], c[2], c[3], c[4]);
                let x5 = b1.mul(&b2);
                let x2 = x5.mul(&a);
                vec![zero, fin(b0.mul(&x2)), fin(x2), fin(b1), fin(x5.mul(&one.add(&t))), fin(x5), fin(one), inf]
            }
            ChartKind::G3c8 => {
                let (b1, b2, b3, t2, t3) = (c[0], c[1], c[2], c[3], c[4]);
                vec![zero, inf, fin(one), fin(one.add(&b1)), fin(t2), fin(t2.add(&b2)), fin(t3), fin(t3.add(&b3))]
            }
            ChartKind::G3c10 => {
                let (b0, t1, t2, a, b3) = (c[0], c[1], c[2], c[3], c[4]);
                vec![zero, fin(b0), fin(one), fin(one.add(&t1)), fin(a), fin(a.add(&t2)), inf, fin(b3.inv()?)]
            }
        };
        Ok(pts)
    }

    /// Coordinates of a point list laid out as by [`ChartKind::points`].
    pub fn read(&self, pts: &[ProjPoint]) -> Result<Vec<FieldElement>> {
        if pts.len() != 2 * self.genus() + 2 {
            return Err(Error::Domain(format!("{} expects {} points", self.name(), 2 * self.genus() + 2)));
        }
        let x = |i: usize| -> Result<FieldElement> {
            pts[i].as_finite().copied().ok_or_else(|| Error::Domain(format!("point {i} is infinite")))
        };
        let f = pts.iter().find_map(|p| p.as_finite()).map(|e| e.field()).expect("finite point present");
        let one = f.one();
        let q = |a: usize, b: usize| -> Result<FieldElement> { Ok(x(a)?.checked_div(&x(b)?)?) };
        let c = match self {
            ChartKind::G2a => vec![x(1)?, x(3)?.sub(&one), x(5)?.inv()?],
            ChartKind::G2b => vec![x(1)?, x(3)?, x(5)?],
            ChartKind::G2c => vec![q(1, 3)?, x(3)?, x(5)?.inv()?],
            ChartKind::RosenhainA => vec![q(1, 3)?, x(3)?, q(2, 3)?.sub(&one)],
            ChartKind::RosenhainB => vec![q(1, 3)?, x(3)?, q(2, 3)?],
            ChartKind::RosenhainC => vec![q(1, 2)?, q(2, 3)?, x(3)?],
            ChartKind::G3c1 => vec![q(1, 2)?, q(2, 3)?, q(3, 4)?, q(4, 5)?, x(5)?],
            ChartKind::G3c4 => vec![q(1, 2)?, x(3)?, q(5, 3)?, q(2, 5)?, q(4, 5)?.sub(&one)],
            ChartKind::G3c8 => vec![x(3)?.sub(&one), x(5)?.sub(&x(4)?), x(7)?.sub(&x(6)?), x(4)?, x(6)?],
            ChartKind::G3c10 => vec![x(1)?, x(3)?.sub(&one), x(5)?.sub(&x(4)?), x(4)?, x(7)?.inv()?],
        };
        Ok(c)
    }

    /// First-order branch coordinates of a fixed-point tuple.
    pub fn leading(&self, c: &[FieldElement]) -> Result<Vec<FieldElement>> {
        self.check_arity(c)?;
        let f = c[0].field();
        let k = |n: i64| f.from_i64(n);
        let one = f.one();
        let out = match self {
            ChartKind::G2a => c.iter().map(|x| k(2).mul(x)).collect(),
            ChartKind::G2b => {
                let (b0, b1, b2) = (c[0], c[1], c[2]);
                let s = b1.add(&one);
                vec![k(4).mul(&b1).checked_div(&s)?.mul(&b0), b1.square(), s.mul(&b2).checked_div(&k(4))?]
            }
            ChartKind::G2c => vec![k(4).mul(&c[0]), c[1].square(), k(4).mul(&c[2])],
            ChartKind::RosenhainA => c.iter().map(|x| k(2).mul(x)).collect(),
            ChartKind::RosenhainB => {
                let (b0, b1, t) = (c[0], c[1], c[2]);
                let s = one.add(&t);
                vec![k(4).mul(&t).checked_div(&s)?.mul(&b0), k(4).checked_div(&s)?.mul(&b1), t.square()]
            }
            ChartKind::RosenhainC => vec![k(4).mul(&c[0]), c[1].square(), k(4).mul(&c[2])],
            ChartKind::G3c1 => vec![k(4).mul(&c[0]), c[1].square(), k(4).mul(&c[2]), c[3].square(), k(4).mul(&c[4])],
            ChartKind::G3c4 => {
                let (b0, b1, b2, a, t) = (c[0], c[1], c[2], c[3], c[4]);
                let s = k(2).add(&t);
                vec![
                    k(4).mul(&b0),
                    k(4).mul(&b1),
                    k(-2).checked_div(&s)?.mul(&b2.square()),
                    k(-2).mul(&one.add(&t)).checked_div(&s)?.mul(&a.square()),
                    k(4).mul(&t),
                ]
            }
            ChartKind::G3c8 => {
                let (b1, b2, b3, t2, t3) = (c[0], c[1], c[2], c[3], c[4]);
                vec![k(4).mul(&b1), k(4).mul(&t2).mul(&b2), k(4).mul(&t3).mul(&b3), t2.square(), t3.square()]
            }
            ChartKind::G3c10 => {
                let (b0, t1, t2, a, b3) = (c[0], c[1], c[2], c[3], c[4]);
                vec![k(2).mul(&b0), k(2).mul(&t1), k(2).mul(&t2), a, k(2).mul(&b3)]
            }
        };
        Ok(out)
    }

    /// Invert [`ChartKind::leading`]. Every square root is delegated to
    /// `root(index, square)`, which picks one of the two roots; the index
    /// counts square roots in the order they are taken.
    pub fn leading_inverse<R>(&self, t: &[FieldElement], mut root: R) -> Result<Vec<FieldElement>>
    where
        R: FnMut(usize, &FieldElement) -> Result<FieldElement>,
    {
        self.check_arity(t)?;
        let f = t[0].field();
        let k = |n: i64| f.from_i64(n);
        let one = f.one();
        let out = match self {
            ChartKind::G2a | ChartKind::RosenhainA => {
                t.iter().map(|x| x.checked_div(&k(2))).collect::<std::result::Result<Vec<_>, _>>()?
            }
            ChartKind::G2b => {
                let b1 = root(0, &t[1])?;
                let s = b1.add(&one);
                vec![s.checked_div(&k(4).mul(&b1))?.mul(&t[0]), b1, k(4).checked_div(&s)?.mul(&t[2])]
            }
            ChartKind::G2c | ChartKind::RosenhainC => {
                vec![t[0].checked_div(&k(4))?, root(0, &t[1])?, t[2].checked_div(&k(4))?]
            }
            ChartKind::RosenhainB => {
                let tt = root(0, &t[2])?;
                let s = one.add(&tt);
                vec![s.checked_div(&k(4).mul(&tt))?.mul(&t[0]), s.checked_div(&k(4))?.mul(&t[1]), tt]
            }
            ChartKind::G3c1 => vec![
                t[0].checked_div(&k(4))?,
                root(0, &t[1])?,
                t[2].checked_div(&k(4))?,
                root(1, &t[3])?,
                t[4].checked_div(&k(4))?,
            ],
            ChartKind::G3c4 => {
                let tt = t[4].checked_div(&k(4))?;
                let s = k(2).add(&tt);
                let b2sq = s.neg().checked_div(&k(2))?.mul(&t[2]);
                let asq = s.neg().checked_div(&k(2).mul(&one.add(&tt)))?.mul(&t[3]);
                vec![t[0].checked_div(&k(4))?, t[1].checked_div(&k(4))?, root(0, &b2sq)?, root(1, &asq)?, tt]
            }
            ChartKind::G3c8 => {
                let t2 = root(0, &t[3])?;
                let t3 = root(1, &t[4])?;
                vec![
                    t[0].checked_div(&k(4))?,
                    t[1].checked_div(&k(4).mul(&t2))?,
                    t[2].checked_div(&k(4).mul(&t3))?,
                    t2,
                    t3,
                ]
            }
            ChartKind::G3c10 => vec![
                t[0].checked_div(&k(2))?,
                t[1].checked_div(&k(2))?,
                t[2].checked_div(&k(2))?,
                t[3],
                t[4].checked_div(&k(2))?,
            ],
        };
        Ok(out)
    }

    /// Leading inverse on sheet `sheet`: bit `i` selects the negated root
    /// for the `i`-th square root.
    pub fn leading_inverse_on_sheet(&self, t: &[FieldElement], sheet: usize) -> Result<Vec<FieldElement>> {
        self.leading_inverse(t, |i, x| {
            let r = x.sqrt()?;
            Ok(if sheet >> i & 1 == 1 { r.neg() } else { r })
        })
    }

    /// Check the chart conditions: the points have the chart's tree shape
    /// with the chart's pairing, and fixed points are restricted.
    pub fn validate(&self, c: &[FieldElement], role: Role) -> Result<()> {
        if c.iter().any(|x| x.is_zero()) {
            return Err(Error::Domain(format!("{}: coordinates must be nonzero", self.name())));
        }
        let pts = self.points(c)?;
        let tree = ReductionTree::build(&pts)?;
        let shape = self.shape();
        if tree.signature() != shape.signature() {
            return Err(Error::Domain(format!("{}: points have tree {}, expected {}", self.name(), tree.signature(), shape.name)));
        }
        if tree.skeleton.canonical_pairing().ok() != Some(standard_pairs(pts.len())) {
            return Err(Error::Domain(format!("{}: pairs are not the pairs of the tree", self.name())));
        }
        if role == Role::Fix && !tree.restricted_check() {
            return Err(Error::Domain(format!("{}: fixed points are not restricted", self.name())));
        }
        Ok(())
    }

    /// Random coordinates satisfying the fixed-point chart conditions, with
    /// small coordinates of valuation `1..=max_val`.
    pub fn sample<R: Rng + ?Sized>(&self, field: Field, max_val: i64, rng: &mut R) -> Result<Vec<FieldElement>> {
        for _ in 0..200 {
            let c: Vec<FieldElement> = self
                .sizes()
                .iter()
                .map(|s| {
                    let u = field.random_unit(rng);
                    match s {
                        Size::Small => u.shift(rng.gen_range(1..=max_val) * field.ramification()),
                        Size::Unit => u,
                        Size::Large => u.shift(-rng.gen_range(1..=max_val) * field.ramification()),
                    }
                })
                .collect();
            if self.validate(&c, Role::Fix).is_ok() {
                return Ok(c);
            }
        }
        Err(Error::Domain(format!("no restricted sample of {} over this field", self.name())))
    }

    fn check_arity(&self, c: &[FieldElement]) -> Result<()> {
        if c.len() != self.coord_names().len() {
            return Err(Error::Domain(format!("{} takes {} coordinates, got {}", self.name(), self.coord_names().len(), c.len())));
        }
        Ok(())
    }
}

impl fmt::Display for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChartKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ALL_CHARTS
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Unsupported(format!("no chart named {s:?}")))
    }
}

/// A coordinate tuple in a chart.
#[derive(Debug, Clone)]
pub struct ChartTuple {
    pub chart: ChartKind,
    pub coords: Vec<FieldElement>,
}

pub type FixTuple = ChartTuple;
pub type BranchTuple = ChartTuple;

impl ChartTuple {
    pub fn new(chart: ChartKind, coords: Vec<FieldElement>) -> Result<Self> {
        chart.check_arity(&coords)?;
        Ok(ChartTuple { chart, coords })
    }

    /// Read a tuple off a point list laid out in chart order.
    pub fn from_points(chart: ChartKind, pts: &[ProjPoint]) -> Result<Self> {
        Ok(ChartTuple { chart, coords: chart.read(pts)? })
    }

    pub fn field(&self) -> Field {
        self.coords[0].field()
    }

    pub fn points(&self) -> Result<Vec<ProjPoint>> {
        self.chart.points(&self.coords)
    }

    pub fn pairs(&self) -> Result<Vec<(ProjPoint, ProjPoint)>> {
        Ok(self.points()?.chunks(2).map(|c| (c[0], c[1])).collect())
    }

    pub fn lift_to(&self, field: Field) -> Result<Self> {
        let coords = self.coords.iter().map(|c| c.lift_to(field)).collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(ChartTuple { chart: self.chart, coords })
    }

    /// Named coordinates as printable strings.
    pub fn named(&self) -> Vec<(&'static str, String)> {
        self.chart.coord_names().iter().copied().zip(self.coords.iter().map(|c| c.to_string())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::FieldSpec;
    use num_rational::Rational64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn points_and_read_round_trip() {
        let q5 = Field::new(FieldSpec::new(5, 16)).unwrap();
        let q25 = Field::new(FieldSpec::new(5, 16).with_unramified(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for chart in ALL_CHARTS {
            let f = if chart == ChartKind::G3c8 { q25 } else { q5 };
            let c = chart.sample(f, 2, &mut rng).unwrap();
            let back = chart.read(&chart.points(&c).unwrap()).unwrap();
            for (x, y) in c.iter().zip(&back) {
                assert!(x.eq_rel(y, Rational64::from_integer(10)), "{chart}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn leading_inverse_covers_every_sheet() {
        let q5 = Field::new(FieldSpec::new(5, 16)).unwrap();
        let q25 = Field::new(FieldSpec::new(5, 16).with_unramified(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for chart in ALL_CHARTS {
            let f = if chart == ChartKind::G3c8 { q25 } else { q5 };
            let c = chart.sample(f, 2, &mut rng).unwrap();
            let t = chart.leading(&c).unwrap();
            chart.validate(&t, Role::Branch).unwrap();
            let mut hits = 0;
            for sheet in 0..chart.sheets() {
                let x = chart.leading_inverse_on_sheet(&t, sheet).unwrap();
                chart.validate(&x, Role::Fix).unwrap();
                let again = chart.leading(&x).unwrap();
                assert!(again.iter().zip(&t).all(|(a, b)| a.eq_rel(b, Rational64::from_integer(8))));
                if x.iter().zip(&c).all(|(a, b)| a.eq_rel(b, Rational64::from_integer(8))) {
                    hits += 1;
                }
            }
            assert_eq!(hits, 1, "{chart}");
        }
    }

}

//! Points of the projective line and Mobius transformations.

use crate::error::{Error, Result};
use crate::padic::{Field, FieldElement};
use num_rational::Rational64;
use std::fmt;

#[derive(Clone, Copy, Debug)]
pub enum ProjPoint {
    Finite(FieldElement),
    Infinity,
}

impl ProjPoint {
    pub fn finite(x: FieldElement) -> Self {
        ProjPoint::Finite(x)
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, ProjPoint::Infinity)
    }

    pub fn as_finite(&self) -> Option<&FieldElement> {
        match self {
            ProjPoint::Finite(x) => Some(x),
            ProjPoint::Infinity => None,
        }
    }

    /// Homogeneous coordinates `(x : y)`.
    pub fn homog(&self, field: Field) -> (FieldElement, FieldElement) {
        match self {
            ProjPoint::Finite(x) => (*x, field.one()),
            ProjPoint::Infinity => (field.one(), field.zero()),
        }
    }

    pub fn from_homog(x: FieldElement, y: FieldElement) -> Result<Self> {
        if y.is_zero() {
            if x.is_zero() {
                return Err(Error::Precision("both homogeneous coordinates vanish".into()));
            }
            return Ok(ProjPoint::Infinity);
        }
        Ok(ProjPoint::Finite(x.checked_div(&y)?))
    }

    /// Valuation of the chordal distance; `None` when the points coincide
    /// exactly.
    pub fn chordal_valuation(&self, other: &ProjPoint) -> Option<Rational64> {
        fn neg_part(x: &FieldElement) -> Rational64 {
            x.valuation().map_or(Rational64::from_integer(0), |v| v.min(Rational64::from_integer(0)))
        }
        match (self, other) {
            (ProjPoint::Infinity, ProjPoint::Infinity) => None,
            (ProjPoint::Infinity, ProjPoint::Finite(y)) | (ProjPoint::Finite(y), ProjPoint::Infinity) => {
                Some(-neg_part(y))
            }
            (ProjPoint::Finite(x), ProjPoint::Finite(y)) => {
                let d = x.sub(y);
                d.val_lower().map(|v| v - neg_part(x) - neg_part(y))
            }
        }
    }

    /// Equality to chordal precision `prec` (p-units).
    pub fn eq_at(&self, other: &ProjPoint, prec: Rational64) -> bool {
        self.chordal_valuation(other).map_or(true, |v| v >= prec)
    }

    pub fn field_of(points: &[ProjPoint]) -> Option<Field> {
        points.iter().find_map(|p| p.as_finite().map(|x| x.field()))
    }

    pub fn to_text(&self) -> String {
        match self {
            ProjPoint::Finite(x) => x.to_string(),
            ProjPoint::Infinity => "inf".into(),
        }
    }

    pub fn parse(field: Field, text: &str) -> Result<Self> {
        let t = text.trim();
        if t == "inf" || t == "oo" || t == "∞" {
            return Ok(ProjPoint::Infinity);
        }
        Ok(ProjPoint::Finite(field.parse(t)?))
    }

    pub fn lift_to(&self, field: Field) -> Result<Self> {
        Ok(match self {
            ProjPoint::Finite(x) => ProjPoint::Finite(x.lift_to(field)?),
            ProjPoint::Infinity => ProjPoint::Infinity,
        })
    }
}

impl PartialEq for ProjPoint {
    /// Coincidence up to the joint precision of both points.
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ProjPoint::Infinity, ProjPoint::Infinity) => true,
            (ProjPoint::Finite(x), ProjPoint::Finite(y)) => x == y,
            _ => false,
        }
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn det2(p: &(FieldElement, FieldElement), q: &(FieldElement, FieldElement)) -> FieldElement {
    p.0.mul(&q.1).sub(&q.0.mul(&p.1))
}

/// `z -> (a z + b) / (c z + d)`.
#[derive(Clone, Copy, Debug)]
pub struct Mobius {
    pub a: FieldElement,
    pub b: FieldElement,
    pub c: FieldElement,
    pub d: FieldElement,
}

impl Mobius {
    pub fn new(a: FieldElement, b: FieldElement, c: FieldElement, d: FieldElement) -> Result<Self> {
        let m = Mobius { a, b, c, d };
        if m.det().is_zero() {
            return Err(Error::Domain("singular matrix".into()));
        }
        Ok(m)
    }

    pub fn identity(field: Field) -> Self {
        Mobius { a: field.one(), b: field.zero(), c: field.zero(), d: field.one() }
    }

    pub fn field(&self) -> Field {
        self.a.field()
    }

    pub fn entries(&self) -> [FieldElement; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> FieldElement {
        self.a.mul(&self.d).sub(&self.b.mul(&self.c))
    }

    /// Image of homogeneous coordinates.
    pub fn apply_homog(&self, p: &(FieldElement, FieldElement)) -> (FieldElement, FieldElement) {
        (self.a.mul(&p.0).add(&self.b.mul(&p.1)), self.c.mul(&p.0).add(&self.d.mul(&p.1)))
    }

    pub fn apply(&self, z: &ProjPoint) -> Result<ProjPoint> {
        let (x, y) = self.apply_homog(&z.homog(self.field()));
        ProjPoint::from_homog(x, y)
    }

    /// Matrix product `self * other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Mobius) -> Mobius {
        Mobius {
            a: self.a.mul(&other.a).add(&self.b.mul(&other.c)),
            b: self.a.mul(&other.b).add(&self.b.mul(&other.d)),
            c: self.c.mul(&other.a).add(&self.d.mul(&other.c)),
            d: self.c.mul(&other.b).add(&self.d.mul(&other.d)),
        }
    }

    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.d, b: self.b.neg(), c: self.c.neg(), d: self.a }
    }

    /// Multiply all entries by a power of the uniformizer so that the
    /// smallest entry valuation is zero. Same projective map.
    pub fn rescaled(&self) -> Mobius {
        let k = self.entries().iter().filter_map(|e| e.val_pi()).min().unwrap_or(0);
        if k == 0 {
            return *self;
        }
        Mobius { a: self.a.shift(-k), b: self.b.shift(-k), c: self.c.shift(-k), d: self.d.shift(-k) }
    }

    /// Scale so that the first entry of minimal valuation equals one.
    pub fn canonical(&self) -> Result<Mobius> {
        let entries = self.entries();
        let minv = entries
            .iter()
            .filter_map(|e| e.val_pi())
            .min()
            .ok_or_else(|| Error::Precision("all matrix entries vanish".into()))?;
        let pivot = entries.iter().find(|e| e.val_pi() == Some(minv)).unwrap();
        let inv = pivot.inv()?;
        let [a, b, c, d] = entries.map(|e| e.mul(&inv));
        Ok(Mobius { a, b, c, d })
    }

    fn pivot_index(&self) -> Option<usize> {
        let entries = self.entries();
        let minv = entries.iter().filter_map(|e| e.val_pi()).min()?;
        entries.iter().position(|e| e.val_pi() == Some(minv))
    }

    /// Projective equality with entries agreeing to absolute valuation
    /// `prec` after canonical scaling.
    pub fn eq_at(&self, other: &Mobius, prec: Rational64) -> Result<bool> {
        let x = self.canonical()?;
        let y = other.canonical()?;
        if x.pivot_index() != y.pivot_index() {
            return Ok(false);
        }
        Ok(x.entries().iter().zip(y.entries().iter()).all(|(e, f)| e.eq_abs(f, prec)))
    }

    /// Whether the map is the identity: after canonical scaling the
    /// off-diagonal entries and the difference of the diagonal entries have
    /// valuation at least `prec`.
    pub fn is_identity_at(&self, prec: Rational64) -> Result<bool> {
        let m = self.canonical()?;
        let zero = m.field().zero();
        Ok(m.b.eq_abs(&zero, prec) && m.c.eq_abs(&zero, prec) && m.a.eq_abs(&m.d, prec))
    }

    /// Key identifying the canonical form modulo `pi^abs` (uniformizer units).
    pub fn key_mod(&self, abs: i64) -> Result<Vec<(i64, [u128; 4])>> {
        let c = self.canonical()?;
        let mut key = vec![(c.pivot_index().unwrap_or(0) as i64, [0; 4])];
        key.extend(c.entries().iter().map(|e| e.key_mod(abs)));
        Ok(key)
    }

    /// The involution with fixed points `a` and `b`.
    pub fn involution_from_pair(a: &ProjPoint, b: &ProjPoint) -> Result<Mobius> {
        let field = ProjPoint::field_of(&[*a, *b]).ok_or_else(|| Error::Domain("both fixed points at infinity".into()))?;
        if a == b {
            return Err(Error::Domain("fixed points coincide".into()));
        }
        let two = field.from_i64(2);
        match (a, b) {
            (ProjPoint::Finite(x), ProjPoint::Finite(y)) => {
                let s = x.add(y);
                Mobius::new(s, two.mul(x).mul(y).neg(), two, s.neg())
            }
            (ProjPoint::Finite(x), ProjPoint::Infinity) | (ProjPoint::Infinity, ProjPoint::Finite(x)) => {
                Mobius::new(field.one().neg(), two.mul(x), field.zero(), field.one())
            }
            _ => unreachable!(),
        }
    }
}

/// Cross-ratio normalized so that `(0, 1, oo, z) -> z`.
pub fn cross_ratio(p1: &ProjPoint, p2: &ProjPoint, p3: &ProjPoint, p4: &ProjPoint) -> Result<ProjPoint> {
    let field = ProjPoint::field_of(&[*p1, *p2, *p3, *p4]).ok_or_else(|| Error::Domain("no finite point".into()))?;
    let [h1, h2, h3, h4] = [p1, p2, p3, p4].map(|p| p.homog(field));
    let num = det2(&h4, &h1).mul(&det2(&h2, &h3));
    let den = det2(&h4, &h3).mul(&det2(&h2, &h1));
    ProjPoint::from_homog(num, den)
}

/// The Mobius map sending `points[i], points[j], points[k]` to `0, 1, oo`,
/// together with the images of all points (anchors set exactly).
pub fn normalize_triple(points: &[ProjPoint], i: usize, j: usize, k: usize) -> Result<(Mobius, Vec<ProjPoint>)> {
    if i == j || j == k || i == k || i.max(j).max(k) >= points.len() {
        return Err(Error::Domain("anchor indices must be distinct and in range".into()));
    }
    let field = ProjPoint::field_of(points).ok_or_else(|| Error::Domain("no finite point".into()))?;
    let (hi, hj, hk) = (points[i].homog(field), points[j].homog(field), points[k].homog(field));
    let d1 = det2(&hj, &hk);
    let d2 = det2(&hj, &hi);
    if d1.is_zero() || d2.is_zero() || det2(&hi, &hk).is_zero() {
        return Err(Error::Domain("anchor points coincide".into()));
    }
    // z -> det(z, p_i) det(p_j, p_k) / (det(z, p_k) det(p_j, p_i))
    let m = Mobius::new(hi.1.mul(&d1), hi.0.mul(&d1).neg(), hk.1.mul(&d2), hk.0.mul(&d2).neg())?.rescaled();
    let mut images = Vec::with_capacity(points.len());
    for (idx, p) in points.iter().enumerate() {
        images.push(if idx == i {
            ProjPoint::Finite(field.zero())
        } else if idx == j {
            ProjPoint::Finite(field.one())
        } else if idx == k {
            ProjPoint::Infinity
        } else {
            m.apply(p)?
        });
    }
    Ok((m, images))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::FieldSpec;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q5() -> Field {
        Field::new(FieldSpec::new(5, 12)).unwrap()
    }

    fn pt(f: Field, n: i128, d: i128) -> ProjPoint {
        ProjPoint::Finite(f.from_ratio(n, d).unwrap())
    }

    #[test]
    fn involution_examples() {
        let f = q5();
        let s = Mobius::involution_from_pair(&pt(f, 1, 1), &pt(f, -1, 1)).unwrap();
        // z -> 1/z
        let z = pt(f, 7, 3);
        assert_eq!(s.apply(&z).unwrap(), pt(f, 3, 7));
        assert!(s.apply(&pt(f, 0, 1)).unwrap().is_infinity());
        let b0 = f.from_i64(25);
        let s0 = Mobius::involution_from_pair(&pt(f, 0, 1), &ProjPoint::Finite(b0)).unwrap();
        // b0 z / (2 z - b0)
        let w = f.from_i64(3);
        let expect = b0.mul(&w).checked_div(&f.from_i64(2).mul(&w).sub(&b0)).unwrap();
        assert_eq!(s0.apply(&ProjPoint::Finite(w)).unwrap(), ProjPoint::Finite(expect));
        let t = Mobius::involution_from_pair(&pt(f, 4, 1), &ProjPoint::Infinity).unwrap();
        assert_eq!(t.apply(&pt(f, 1, 1)).unwrap(), pt(f, 7, 1));
    }

    #[test]
    fn cross_ratio_examples() {
        let f = q5();
        let z = pt(f, 17, 3);
        let cr = cross_ratio(&pt(f, 0, 1), &pt(f, 1, 1), &ProjPoint::Infinity, &z).unwrap();
        assert_eq!(cr, z);
        let cr = cross_ratio(&ProjPoint::Infinity, &pt(f, 0, 1), &pt(f, 25, 1), &pt(f, 1, 1)).unwrap();
        assert_eq!(cr.as_finite().unwrap().valuation(), Some(Rational64::from_integer(2)));
    }

    #[test]
    fn normalize_triple_fixed_when_already_normal() {
        let f = q5();
        let pts = vec![
            pt(f, 0, 1),
            pt(f, 25, 1),
            pt(f, 1, 1),
            pt(f, 39, 1),
            pt(f, 1, 5),
            ProjPoint::Infinity,
        ];
        let (_, img) = normalize_triple(&pts, 0, 2, 5).unwrap();
        for (a, b) in pts.iter().zip(img.iter()) {
            assert_eq!(a, b);
        }
    }

    proptest! {
        #[test]
        fn involution_squares_to_identity(seed in any::<u64>(), va in -2i64..3, vb in -2i64..3) {
            let f = q5();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = ProjPoint::Finite(f.random_unit(&mut rng).shift(va));
            let b = ProjPoint::Finite(f.random_unit(&mut rng).shift(vb));
            prop_assume!(a.chordal_valuation(&b).map_or(false, |v| v < Rational64::from_integer(3)));
            let s = Mobius::involution_from_pair(&a, &b).unwrap();
            prop_assert!(s.compose(&s).eq_at(&Mobius::identity(f), Rational64::from_integer(6)).unwrap());
            prop_assert!(s.apply(&a).unwrap().eq_at(&a, Rational64::from_integer(6)));
            prop_assert!(s.apply(&b).unwrap().eq_at(&b, Rational64::from_integer(6)));
        }

        #[test]
        fn cross_ratio_invariant(seed in any::<u64>()) {
            let f = q5();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<ProjPoint> = (0..4).map(|i| ProjPoint::Finite(f.random_unit(&mut rng).shift(i))).collect();
            let m = Mobius::new(f.random_unit(&mut rng), f.random_unit(&mut rng).shift(1),
                f.random_unit(&mut rng).shift(1), f.random_unit(&mut rng)).unwrap();
            let img: Vec<ProjPoint> = pts.iter().map(|p| m.apply(p).unwrap()).collect();
            let a = cross_ratio(&pts[0], &pts[1], &pts[2], &pts[3]).unwrap();
            let b = cross_ratio(&img[0], &img[1], &img[2], &img[3]).unwrap();
            prop_assert!(a.eq_at(&b, Rational64::from_integer(8)));
        }

        #[test]
        fn normalize_sends_anchors(seed in any::<u64>()) {
            let f = q5();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<ProjPoint> = (0..5).map(|i| ProjPoint::Finite(f.random_unit(&mut rng).shift(i - 2))).collect();
            let (m, img) = normalize_triple(&pts, 1, 3, 4).unwrap();
            prop_assert!(m.apply(&pts[1]).unwrap().eq_at(&img[1], Rational64::from_integer(6)));
            prop_assert!(m.apply(&pts[3]).unwrap().eq_at(&img[3], Rational64::from_integer(6)));
            prop_assert!(m.apply(&pts[4]).unwrap().is_infinity());
        }
    }
}

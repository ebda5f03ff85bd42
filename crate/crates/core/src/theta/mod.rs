//! Truncated theta products over the free product of involutions and over
//! its even-word subgroup, with truncation error bounds.
//!
//! A product `prod_w (z - w x)/(z - w y)` is taken over reduced words `w` of
//! length at most `L`. A term whose numerator or denominator involves
//! infinity follows the conventions `(z - oo)/(z - y) = 1/(z - y)`,
//! `(z - x)/(z - oo) = z - x` and `(z - oo)/(z - oo) = 1`.

pub mod chart;
pub mod equation;
pub mod fb;

use crate::error::{Error, Result};
use crate::freegroup::ReducedWord;
use crate::padic::{Field, FieldElement};
use crate::projline::{Mobius, ProjPoint};
use crate::redtree::ReductionTree;
use num_rational::Rational64;
use rayon::prelude::*;

/// A truncated product value with the valuation of its certified
/// relative error.
#[derive(Debug, Clone, Copy)]
pub struct ThetaValue {
    pub value: ProjPoint,
    pub error: Rational64,
}

/// Generators and truncation data for theta products.
#[derive(Debug, Clone)]
pub struct ThetaContext {
    field: Field,
    pub fixed: Vec<(ProjPoint, ProjPoint)>,
    pub gens: Vec<Mobius>,
    pub length: usize,
    /// error gained per additional word letter (p-units)
    pub step: Rational64,
}

/// Per-point running product `num / den`.
#[derive(Clone, Copy)]
struct Acc {
    num: FieldElement,
    den: FieldElement,
}

impl ThetaContext {
    /// Context for the involutions with the given fixed-point pairs.
    pub fn new(fixed: Vec<(ProjPoint, ProjPoint)>, length: usize) -> Result<Self> {
        if fixed.len() < 2 {
            return Err(Error::Domain("need at least two fixed-point pairs".into()));
        }
        let all: Vec<ProjPoint> = fixed.iter().flat_map(|&(a, b)| [a, b]).collect();
        let field = ProjPoint::field_of(&all).ok_or_else(|| Error::Domain("no finite fixed point".into()))?;
        let gens = fixed
            .iter()
            .map(|(a, b)| Mobius::involution_from_pair(a, b))
            .collect::<Result<Vec<_>>>()?;
        let tree = ReductionTree::build(&all)?;
        let step = tree.min_edge_size().ok_or_else(|| Error::Domain("fixed points form a single component".into()))?;
        Ok(ThetaContext { field, fixed, gens, length, step })
    }

    /// Shortest length whose truncation error reaches `target`, capped at
    /// `max_length`.
    pub fn length_for(step: Rational64, target: Rational64, max_length: usize) -> usize {
        let n = (target / step).ceil().to_integer().max(2) as usize;
        n.min(max_length)
    }

    pub fn with_length(&self, length: usize) -> ThetaContext {
        ThetaContext { length, ..self.clone() }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn genus(&self) -> usize {
        self.gens.len() - 1
    }

    /// Certified relative error valuation for products whose arguments sit
    /// `offset` letters outside the fundamental domain.
    pub fn truncation_error(&self, offset: usize) -> Rational64 {
        Rational64::from_integer(self.length.saturating_sub(offset) as i64) * self.step
    }

    /// Context for the conjugated group `m s_i m^-1`.
    pub fn conjugated(&self, m: &Mobius) -> Result<ThetaContext> {
        let fixed = self
            .fixed
            .iter()
            .map(|(a, b)| Ok((m.apply(a)?, m.apply(b)?)))
            .collect::<Result<Vec<_>>>()?;
        let gens = fixed
            .iter()
            .map(|(a, b)| Mobius::involution_from_pair(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(ThetaContext { field: self.field, fixed, gens, length: self.length, step: self.step })
    }

    /// `prod (z - w x)/(z - w y)` for every `z`, over words of length at most
    /// `L` (even words only when `even_only`). Orbit points are produced by
    /// reflecting points one letter at a time, which keeps full precision
    /// even when the fixed points of a generator are close together.
    fn raw_product(&self, x: &ProjPoint, y: &ProjPoint, zs: &[ProjPoint], even_only: bool) -> Result<Vec<ProjPoint>> {
        let f = self.field;
        let init: Vec<Acc> = zs.iter().map(|_| Acc { num: f.one(), den: f.one() }).collect();
        let mut acc = init.clone();
        absorb(&mut acc, zs, x, y);
        let n = self.fixed.len() as u8;
        let parts: Vec<Vec<Acc>> = (0..n)
            .into_par_iter()
            .map(|first| {
                let mut local = init.clone();
                self.descend(first, (*x, *y), 1, &mut |len, (gx, gy)| {
                    if !even_only || len % 2 == 0 {
                        absorb(&mut local, zs, gx, gy);
                    }
                })?;
                Ok(local)
            })
            .collect::<Result<Vec<_>>>()?;
        for part in parts {
            for (a, p) in acc.iter_mut().zip(part) {
                a.num = a.num.mul(&p.num);
                a.den = a.den.mul(&p.den);
            }
        }
        acc.into_iter()
            .map(|a| {
                if a.num.is_zero() && a.den.is_zero() {
                    Err(Error::Domain("zero and pole of the product coincide".into()))
                } else {
                    ProjPoint::from_homog(a.num, a.den)
                }
            })
            .collect()
    }

    /// Visit `(s_l w x, s_l w y)` for every reduced word `l w` of length
    /// `len..=L`, extending words on the left.
    fn descend<V>(&self, l: u8, (x, y): (ProjPoint, ProjPoint), len: usize, visit: &mut V) -> Result<()>
    where
        V: FnMut(usize, (&ProjPoint, &ProjPoint)),
    {
        if len > self.length {
            return Ok(());
        }
        let (a, b) = &self.fixed[l as usize];
        let gx = reflect(a, b, &x)?;
        let gy = reflect(a, b, &y)?;
        visit(len, (&gx, &gy));
        for next in 0..self.fixed.len() as u8 {
            if next != l {
                self.descend(next, (gx, gy), len + 1, visit)?;
            }
        }
        Ok(())
    }

    /// Image of a point under a word, applying the rightmost letter first.
    pub fn apply_word(&self, w: &ReducedWord, z: &ProjPoint) -> Result<ProjPoint> {
        let mut p = *z;
        for &l in w.letters().iter().rev() {
            let (a, b) = self.fixed.get(l as usize).ok_or_else(|| Error::Domain(format!("letter {l} out of range")))?;
            p = reflect(a, b, &p)?;
        }
        Ok(p)
    }

    fn wrap(&self, values: Vec<ProjPoint>, offset: usize) -> Vec<ThetaValue> {
        let trunc = self.truncation_error(offset);
        values
            .into_iter()
            .map(|v| {
                let arith = match v {
                    ProjPoint::Finite(x) if !x.is_exact_zero() => x.rel_precision(),
                    _ => trunc,
                };
                ThetaValue { value: v, error: trunc.min(arith) }
            })
            .collect()
    }

    /// The theta function of the whole group at several points.
    pub fn theta_gamma_multi(&self, a: &ProjPoint, b: &ProjPoint, zs: &[ProjPoint]) -> Result<Vec<ThetaValue>> {
        if a == b {
            return Ok(zs.iter().map(|_| ThetaValue { value: ProjPoint::Finite(self.field.one()), error: self.truncation_error(0) }).collect());
        }
        Ok(self.wrap(self.raw_product(a, b, zs, false)?, 0))
    }

    pub fn theta_gamma(&self, a: &ProjPoint, b: &ProjPoint, z: &ProjPoint) -> Result<ThetaValue> {
        Ok(self.theta_gamma_multi(a, b, std::slice::from_ref(z))?[0])
    }

    /// The theta function of the even-word subgroup.
    pub fn theta_w_multi(&self, a: &ProjPoint, b: &ProjPoint, zs: &[ProjPoint]) -> Result<Vec<ThetaValue>> {
        self.theta_w_offset(a, b, zs, 0)
    }

    /// [`ThetaContext::theta_w_multi`] with arguments up to `offset`
    /// letters outside the fundamental domain.
    pub fn theta_w_offset(&self, a: &ProjPoint, b: &ProjPoint, zs: &[ProjPoint], offset: usize) -> Result<Vec<ThetaValue>> {
        if a == b {
            return Ok(zs.iter().map(|_| ThetaValue { value: ProjPoint::Finite(self.field.one()), error: self.truncation_error(offset) }).collect());
        }
        Ok(self.wrap(self.raw_product(a, b, zs, true)?, offset))
    }

    pub fn theta_w(&self, a: &ProjPoint, b: &ProjPoint, z: &ProjPoint) -> Result<ThetaValue> {
        Ok(self.theta_w_multi(a, b, std::slice::from_ref(z))?[0])
    }

    /// The automorphy unit of the even word `alpha`, built from `omega`.
    pub fn u_alpha(&self, alpha: &ReducedWord, omega: &ProjPoint, z: &ProjPoint) -> Result<ThetaValue> {
        Ok(self.u_alpha_multi(alpha, omega, std::slice::from_ref(z))?[0])
    }

    pub fn u_alpha_multi(&self, alpha: &ReducedWord, omega: &ProjPoint, zs: &[ProjPoint]) -> Result<Vec<ThetaValue>> {
        if !alpha.is_even() {
            return Err(Error::Domain(format!("word {alpha} has odd length")));
        }
        if alpha.is_empty() {
            return Ok(zs.iter().map(|_| ThetaValue { value: ProjPoint::Finite(self.field.one()), error: self.truncation_error(0) }).collect());
        }
        let image = self.apply_word(alpha, omega)?;
        Ok(self.wrap(self.raw_product(omega, &image, zs, true)?, alpha.len()))
    }
}

/// Multiply each accumulator by `(z - x)/(z - y)`.
fn absorb(acc: &mut [Acc], zs: &[ProjPoint], x: &ProjPoint, y: &ProjPoint) {
    for (a, z) in acc.iter_mut().zip(zs) {
        match z {
            ProjPoint::Infinity => match (x, y) {
                (ProjPoint::Infinity, ProjPoint::Finite(_)) => a.num = a.num.mul(&a.num.field().zero()),
                (ProjPoint::Finite(_), ProjPoint::Infinity) => a.den = a.den.mul(&a.den.field().zero()),
                _ => {}
            },
            ProjPoint::Finite(z) => {
                if let ProjPoint::Finite(x) = x {
                    a.num = a.num.mul(&z.sub(x));
                }
                if let ProjPoint::Finite(y) = y {
                    a.den = a.den.mul(&z.sub(y));
                }
            }
        }
    }
}

/// The involution with fixed points `a`, `b` applied to `x`:
/// `s(x) = a + (b - a)(x - a)/(2x - a - b)`, or `2a - x` when `b` is infinite.
pub fn reflect(a: &ProjPoint, b: &ProjPoint, x: &ProjPoint) -> Result<ProjPoint> {
    match (a, b) {
        (ProjPoint::Infinity, ProjPoint::Infinity) => Err(Error::Domain("degenerate fixed-point pair".into())),
        (ProjPoint::Finite(c), ProjPoint::Infinity) | (ProjPoint::Infinity, ProjPoint::Finite(c)) => match x {
            ProjPoint::Infinity => Ok(ProjPoint::Infinity),
            ProjPoint::Finite(x) => Ok(ProjPoint::Finite(c.add(c).sub(x))),
        },
        (ProjPoint::Finite(a), ProjPoint::Finite(b)) => match x {
            ProjPoint::Infinity => {
                let two = a.field().from_i64(2);
                Ok(ProjPoint::Finite(a.add(b).checked_div(&two)?))
            }
            ProjPoint::Finite(x) => {
                let d = x.add(x).sub(a).sub(b);
                if d.is_exact_zero() {
                    return Ok(ProjPoint::Infinity);
                }
                if d.is_zero() {
                    return Err(Error::Precision("orbit point indistinguishable from infinity".into()));
                }
                Ok(ProjPoint::Finite(a.add(&b.sub(a).mul(&x.sub(a)).checked_div(&d)?)))
            }
        },
    }
}

/// `t -> t/(t - 1)` on the projective line.
pub fn renormalize(field: Field, t: &ProjPoint) -> Result<ProjPoint> {
    match t {
        ProjPoint::Infinity => Ok(ProjPoint::Finite(field.one())),
        ProjPoint::Finite(x) => ProjPoint::from_homog(*x, x.sub(&field.one())),
    }
}

/// Cap the relative precision of `x` at `err` p-units.
pub fn cap_rel_error(x: &FieldElement, err: Rational64) -> FieldElement {
    let f = x.field();
    let pi = (err * Rational64::from_integer(f.ramification())).floor().to_integer();
    if x.is_zero() || pi >= x.rel_prec_pi() {
        *x
    } else {
        x.with_rel_prec_pi(pi.max(1))
    }
}

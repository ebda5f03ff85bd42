//! Hyperelliptic equations of Whittaker curves from theta products.
//!
//! Two normal forms are supported. With infinity an ordinary point of the
//! fundamental domain, `y^2 = c * prod (x - F(a_i))(x - F(b_i))` with
//! `1/c = prod (1 - F(a_i))(1 - F(b_i))`. With the first pair of fixed
//! points moved to `0` and `oo`, `y^2 = c * x * prod_{j>0} (x - F(a_j))(x - F(b_j))`
//! and `c` is read off at a sample point. In both cases `y = H(z)` is the
//! product of an automorphy unit and theta functions of the even-word
//! subgroup.

use super::{cap_rel_error, ThetaContext, ThetaValue};
use crate::error::{Error, Result};
use crate::freegroup::ReducedWord;
use crate::padic::{Field, FieldElement};
use crate::projline::{Mobius, ProjPoint};
use crate::redtree::ReductionTree;
use num_rational::Rational64;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquationChart {
    /// infinity is an ordinary point
    InfinityOrdinary,
    /// infinity is a branch point
    InfinityBranch,
}

/// Roots, leading constant and its square class.
#[derive(Debug, Clone)]
pub struct Equation {
    pub roots: Vec<FieldElement>,
    pub c: FieldElement,
    pub c_is_square: bool,
    /// certified relative error of `c` and the roots (p-units)
    pub error: Rational64,
}

/// A Whittaker group moved into position for one of the two normal forms,
/// with the auxiliary points of its theta function.
#[derive(Debug, Clone)]
pub struct Uniformization {
    pub chart: EquationChart,
    /// original coordinates to working coordinates
    pub to_working: Mobius,
    pub ctx: ThetaContext,
    /// auxiliary points `a`, `b` of `F`, in working coordinates
    pub aux: (ProjPoint, ProjPoint),
    /// base point of the automorphy unit, in working coordinates
    pub omega: ProjPoint,
    /// the word `(s_1 s_0)(s_2 s_0)...(s_g s_0)`
    pub gamma: ReducedWord,
    /// points of the original fundamental domain used for sampling
    samples: Vec<ProjPoint>,
}

impl Uniformization {
    /// Set up the normal form for the fixed-point pairs `fixed` (original
    /// coordinates). For the infinity-ordinary form, `aux` optionally fixes
    /// the auxiliary points (original coordinates); otherwise they are
    /// drawn from the fundamental domain.
    pub fn new<R: Rng + ?Sized>(
        fixed: &[(ProjPoint, ProjPoint)],
        chart: EquationChart,
        length: usize,
        aux: Option<(ProjPoint, ProjPoint)>,
        rng: &mut R,
    ) -> Result<Uniformization> {
        let all: Vec<ProjPoint> = fixed.iter().flat_map(|&(a, b)| [a, b]).collect();
        let field = ProjPoint::field_of(&all).ok_or_else(|| Error::Domain("no finite fixed point".into()))?;
        let tree = ReductionTree::build(&all)?;
        let failures = tree.restricted_failures();
        if !failures.is_empty() {
            return Err(Error::Domain(format!("fixed points are not restricted at tree vertices {failures:?}")));
        }
        let mut samples = tree.generic_points(12, rng)?;
        let base = ThetaContext::new(fixed.to_vec(), length)?;
        let g = fixed.len() - 1;
        let gamma = ReducedWord::from_letters((1..=g as u8).flat_map(|j| [j, 0]));
        let (to_working, aux_orig) = match chart {
            EquationChart::InfinityOrdinary => {
                let w = samples.pop().expect("samples drawn");
                let w = *w.as_finite().expect("generic points are finite");
                // z -> 1/(z - w)
                let m = Mobius::new(field.zero(), field.one(), field.one(), w.neg())?;
                let aux = match aux {
                    Some((a, b)) => {
                        if a == b {
                            return Err(Error::Domain("auxiliary points must differ".into()));
                        }
                        (a, b)
                    }
                    None => (samples.pop().expect("samples drawn"), samples.pop().expect("samples drawn")),
                };
                (m, aux)
            }
            EquationChart::InfinityBranch => {
                let (a0, b0) = fixed[0];
                let m = match (a0, b0) {
                    (ProjPoint::Finite(a), ProjPoint::Infinity) => Mobius::new(field.one(), a.neg(), field.zero(), field.one())?,
                    (ProjPoint::Infinity, ProjPoint::Finite(b)) => Mobius::new(field.zero(), field.one(), field.one(), b.neg())?,
                    (ProjPoint::Finite(a), ProjPoint::Finite(b)) => Mobius::new(field.one(), a.neg(), field.one(), b.neg())?,
                    _ => return Err(Error::Domain("degenerate first pair".into())),
                };
                (m, (a0, b0))
            }
        };
        let ctx = base.conjugated(&to_working)?;
        let aux = (to_working.apply(&aux_orig.0)?, to_working.apply(&aux_orig.1)?);
        if chart == EquationChart::InfinityBranch {
            debug_assert!(aux.1.is_infinity());
        }
        let omega = to_working.apply(&samples.pop().expect("samples drawn"))?;
        Ok(Uniformization { chart, to_working, ctx, aux, omega, gamma, samples })
    }

    pub fn field(&self) -> Field {
        self.ctx.field()
    }

    /// Points of the fundamental domain in original coordinates, drawn when
    /// the normal form was set up.
    pub fn sample_points(&self) -> &[ProjPoint] {
        &self.samples
    }

    fn working(&self, zs: &[ProjPoint]) -> Result<Vec<ProjPoint>> {
        zs.iter().map(|z| self.to_working.apply(z)).collect()
    }

    /// `F` at points given in original coordinates, `offset` letters
    /// outside the fundamental domain.
    pub fn f_values(&self, zs: &[ProjPoint], offset: usize) -> Result<Vec<ThetaValue>> {
        let w = self.working(zs)?;
        let mut out = self.ctx.theta_gamma_multi(&self.aux.0, &self.aux.1, &w)?;
        let trunc = self.ctx.truncation_error(offset);
        for v in &mut out {
            v.error = v.error.min(trunc);
        }
        Ok(out)
    }

    /// `H` at points given in original coordinates.
    pub fn h_values(&self, zs: &[ProjPoint], offset: usize) -> Result<Vec<ThetaValue>> {
        let w = self.working(zs)?;
        let f = self.field();
        let mut acc: Vec<(FieldElement, Rational64)> = w.iter().map(|_| (f.one(), self.ctx.truncation_error(offset))).collect();
        let mut absorb = |vals: Vec<ThetaValue>| -> Result<()> {
            for ((x, e), v) in acc.iter_mut().zip(vals) {
                let y = finite(&v)?;
                *x = x.mul(&y);
                *e = (*e).min(v.error);
            }
            Ok(())
        };
        let gamma_len = self.gamma.len();
        absorb(
            self.ctx
                .u_alpha_multi(&self.gamma, &self.omega, &w)?
                .into_iter()
                .map(|mut v| {
                    v.error = v.error.min(self.ctx.truncation_error(offset + gamma_len));
                    v
                })
                .collect(),
        )?;
        match self.chart {
            EquationChart::InfinityOrdinary => {
                let (a0, b0) = self.ctx.fixed[0];
                let b = self.aux.1;
                let s0b = super::reflect(&a0, &b0, &b)?;
                for &(ai, bi) in &self.ctx.fixed {
                    absorb(self.ctx.theta_w_offset(&ai, &b, &w, offset)?)?;
                    absorb(self.ctx.theta_w_offset(&bi, &s0b, &w, offset + 1)?)?;
                }
            }
            EquationChart::InfinityBranch => {
                let (a0, b0) = self.ctx.fixed[0];
                absorb(self.ctx.theta_w_offset(&a0, &b0, &w, offset)?)?;
                for &(aj, bj) in &self.ctx.fixed[1..] {
                    absorb(self.ctx.theta_w_offset(&aj, &b0, &w, offset)?)?;
                    absorb(self.ctx.theta_w_offset(&bj, &b0, &w, offset)?)?;
                }
            }
        }
        Ok(acc
            .into_iter()
            .map(|(x, e)| ThetaValue { value: ProjPoint::Finite(cap_rel_error(&x, e)), error: e })
            .collect())
    }

    /// Roots of the right hand side: `F` at every fixed point, or at every
    /// fixed point but the first pair for the infinity-branch form.
    pub fn roots(&self) -> Result<Vec<ThetaValue>> {
        let pts: Vec<ProjPoint> = match self.chart {
            EquationChart::InfinityOrdinary => self.ctx.fixed.iter().flat_map(|&(a, b)| [a, b]).collect(),
            EquationChart::InfinityBranch => self.ctx.fixed[1..].iter().flat_map(|&(a, b)| [a, b]).collect(),
        };
        let mut out = self.ctx.theta_gamma_multi(&self.aux.0, &self.aux.1, &pts)?;
        if self.chart == EquationChart::InfinityBranch {
            out.insert(0, ThetaValue { value: ProjPoint::Finite(self.field().zero()), error: self.ctx.truncation_error(0) });
        }
        Ok(out)
    }

    /// `prod (x - r)` over the roots, with `x` an `F` value.
    fn rhs_product(&self, x: &ThetaValue, roots: &[ThetaValue]) -> Result<FieldElement> {
        let xv = cap_rel_error(&finite(x)?, x.error);
        let mut out = self.field().one();
        for r in roots {
            out = out.mul(&xv.sub(&cap_rel_error(&finite(r)?, r.error)));
        }
        Ok(out)
    }

    /// Roots and leading constant of the equation.
    pub fn equation(&self) -> Result<Equation> {
        let roots = self.roots()?;
        let c = match self.chart {
            EquationChart::InfinityOrdinary => {
                let one = ThetaValue { value: ProjPoint::Finite(self.field().one()), error: self.ctx.truncation_error(0) };
                self.rhs_product(&one, &roots)?.inv()?
            }
            EquationChart::InfinityBranch => {
                let z = [self.samples[0]];
                let f = self.f_values(&z, 0)?[0];
                let h = self.h_values(&z, 0)?[0];
                let hv = finite(&h)?;
                hv.square().checked_div(&self.rhs_product(&f, &roots)?)?
            }
        };
        let c_is_square = c.is_square()?;
        let values: Vec<FieldElement> = roots.iter().map(|r| cap_rel_error(&finite(r).unwrap_or(self.field().zero()), r.error)).collect();
        let error = roots.iter().map(|r| r.error).min().unwrap_or(self.ctx.truncation_error(0)).min(c.rel_precision());
        Ok(Equation { roots: values, c, c_is_square, error })
    }

    /// Relative agreement of `H(z)^2` with `c * prod (F(z) - root)` at each
    /// point, and the certified precision the agreement must reach.
    pub fn check_equation(&self, eq: &Equation, zs: &[ProjPoint]) -> Result<Vec<(Rational64, Rational64)>> {
        let roots = self.roots()?;
        let fs = self.f_values(zs, 0)?;
        let hs = self.h_values(zs, 0)?;
        let mut out = Vec::new();
        for (f, h) in fs.iter().zip(&hs) {
            let lhs = finite(h)?.square();
            let rhs = eq.c.mul(&self.rhs_product(f, &roots)?);
            let agreement = lhs.checked_div(&rhs)?.sub(&self.field().one()).val_lower().unwrap_or(Rational64::from_integer(i64::MAX / 4));
            let certified = lhs.rel_precision().min(rhs.rel_precision());
            out.push((agreement, certified));
        }
        Ok(out)
    }
}

fn finite(v: &ThetaValue) -> Result<FieldElement> {
    v.value.as_finite().copied().ok_or_else(|| Error::Domain("theta product has a pole at the sample point".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::FieldSpec;
    use crate::theta::chart::{ChartKind, ChartTuple};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixed(chart: ChartKind, seed: u64) -> Vec<(ProjPoint, ProjPoint)> {
        let q5 = Field::new(FieldSpec::new(5, 14)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ChartTuple::new(chart, chart.sample(q5, 2, &mut rng).unwrap()).unwrap().pairs().unwrap()
    }

    #[test]
    fn h_squared_matches_the_equation() {
        for chart in [EquationChart::InfinityOrdinary, EquationChart::InfinityBranch] {
            for kind in [ChartKind::G2a, ChartKind::G2b, ChartKind::G2c] {
                let mut rng = ChaCha8Rng::seed_from_u64(11);
                let u = Uniformization::new(&fixed(kind, 3), chart, 8, None, &mut rng).unwrap();
                let eq = u.equation().unwrap();
                let expected = if chart == EquationChart::InfinityOrdinary { 6 } else { 5 };
                assert_eq!(eq.roots.len(), expected);
                assert!(eq.c_is_square, "{kind} {chart:?}");
                let zs: Vec<ProjPoint> = u.sample_points()[..5].to_vec();
                for (agree, cert) in u.check_equation(&eq, &zs).unwrap() {
                    assert!(cert >= Rational64::from_integer(3), "{kind} {chart:?}: certified {cert}");
                    assert!(agree >= cert, "{kind} {chart:?}: agreement {agree} below {cert}");
                }
            }
        }
    }

    #[test]
    fn h_is_odd_under_the_first_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = Uniformization::new(&fixed(ChartKind::G2a, 4), EquationChart::InfinityOrdinary, 8, None, &mut rng).unwrap();
        let (a0, b0) = u.ctx.fixed[0];
        let back = u.to_working.inverse();
        for z in &u.sample_points()[..4] {
            let wz = u.to_working.apply(z).unwrap();
            let s0z = back.apply(&crate::theta::reflect(&a0, &b0, &wz).unwrap()).unwrap();
            let h = u.h_values(&[*z], 1).unwrap()[0];
            let hs = u.h_values(&[s0z], 1).unwrap()[0];
            let (h, hs) = (finite(&h).unwrap(), finite(&hs).unwrap());
            let d = h.add(&hs).checked_div(&h).unwrap();
            let prec = h.rel_precision().min(hs.rel_precision());
            assert!(d.val_lower().map_or(true, |v| v >= prec), "{:?} vs {prec}", d.val_lower());
        }
    }

    #[test]
    fn leading_constant_class_is_stable_under_resampling() {
        let pairs = fixed(ChartKind::G2b, 8);
        let classes: Vec<bool> = (0..4)
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(100 + s);
                Uniformization::new(&pairs, EquationChart::InfinityOrdinary, 8, None, &mut rng)
                    .unwrap()
                    .equation()
                    .unwrap()
                    .c_is_square
            })
            .collect();
        assert!(classes.iter().all(|&c| c == classes[0]));
    }

    #[test]
    fn unrestricted_fixed_points_are_rejected() {
        let q5 = Field::new(FieldSpec::new(5, 12)).unwrap();
        let p = |t: &str| ProjPoint::parse(q5, t).unwrap();
        let pairs = [(p("0"), p("25")), (p("1"), p("39")), (p("1/5"), p("inf"))];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = Uniformization::new(&pairs, EquationChart::InfinityOrdinary, 4, None, &mut rng);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn equal_auxiliary_points_are_rejected() {
        let pairs = fixed(ChartKind::G2a, 1);
        let q5 = pairs[1].0.as_finite().unwrap().field();
        let p = ProjPoint::Finite(q5.from_i64(7));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(Uniformization::new(&pairs, EquationChart::InfinityOrdinary, 4, Some((p, p)), &mut rng).is_err());
    }
}

//! Univariate polynomials over a local field: evaluation, Taylor shifts,
//! root finding by residue-class descent with Newton lifting, and
//! factorization of integer polynomials modulo `p` into factors of degree
//! at most two.

use crate::error::{Error, Result};
use crate::padic::{Field, FieldElement, FieldSpec, Residue};
use crate::projline::ProjPoint;
use num_rational::Rational64;
use serde::Serialize;
use std::fmt;

/// Coefficients from the constant term upward.
#[derive(Debug, Clone)]
pub struct Polynomial {
    coeffs: Vec<FieldElement>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<FieldElement>) -> Self {
        Polynomial { coeffs }
    }

    /// From integer coefficients, constant term first.
    pub fn from_integers(field: Field, coeffs: &[i64]) -> Self {
        Polynomial { coeffs: coeffs.iter().map(|&c| field.from_i64(c)).collect() }
    }

    /// `prod (x - r)`.
    pub fn from_roots(field: Field, roots: &[FieldElement]) -> Self {
        let mut out = Polynomial { coeffs: vec![field.one()] };
        for r in roots {
            out = out.mul_linear(r);
        }
        out
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    /// Degree after dropping exact zero leading coefficients.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_exact_zero())
    }

    fn field(&self) -> Field {
        self.coeffs[0].field()
    }

    pub fn eval(&self, x: &FieldElement) -> FieldElement {
        let mut acc = self.field().zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn derivative(&self) -> Polynomial {
        let f = self.field();
        let coeffs: Vec<FieldElement> =
            self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c.mul(&f.from_i64(i as i64))).collect();
        Polynomial { coeffs: if coeffs.is_empty() { vec![f.zero()] } else { coeffs } }
    }

    /// `p(x + c)`.
    pub fn taylor_shift(&self, c: &FieldElement) -> Polynomial {
        let f = self.field();
        let mut out = Polynomial { coeffs: vec![f.zero()] };
        for a in self.coeffs.iter().rev() {
            // out <- out * (x + c) + a
            out = out.mul_linear(&c.neg());
            out.coeffs[0] = out.coeffs[0].add(a);
        }
        out
    }

    /// `p(x) * (x - r)`.
    fn mul_linear(&self, r: &FieldElement) -> Polynomial {
        let f = self.field();
        let mut coeffs = vec![f.zero(); self.coeffs.len() + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            coeffs[i + 1] = coeffs[i + 1].add(a);
            coeffs[i] = coeffs[i].sub(&a.mul(r));
        }
        Polynomial { coeffs }
    }

    /// `p(pi^k x)`.
    fn scale_argument(&self, k: i64) -> Polynomial {
        Polynomial { coeffs: self.coeffs.iter().enumerate().map(|(i, c)| c.shift(k * i as i64)).collect() }
    }

    /// Divide by the power of the uniformizer making the smallest
    /// coefficient valuation zero.
    fn normalized(&self) -> Polynomial {
        let m = self.coeffs.iter().filter(|c| !c.is_zero()).map(|c| c.val_lower_pi()).min().unwrap_or(0);
        Polynomial { coeffs: self.coeffs.iter().map(|c| c.shift(-m)).collect() }
    }

    fn reversed(&self) -> Polynomial {
        let d = self.degree().unwrap_or(0);
        Polynomial { coeffs: self.coeffs[..=d].iter().rev().copied().collect() }
    }

    /// All roots in the field, finite ones first, with infinity listed
    /// `deg_nominal - deg` times when `nominal_degree` exceeds the degree.
    pub fn roots_projective(&self, nominal_degree: usize) -> Result<Vec<ProjPoint>> {
        let d = self.degree().ok_or_else(|| Error::Domain("zero polynomial".into()))?;
        let mut out: Vec<ProjPoint> = self.roots()?.into_iter().map(ProjPoint::Finite).collect();
        out.extend(std::iter::repeat(ProjPoint::Infinity).take(nominal_degree.saturating_sub(d)));
        Ok(out)
    }

    /// All roots in the field, with multiplicity for exact roots. Fails with
    /// a precision error when a cluster of roots cannot be separated at the
    /// working precision, and with `NotSplit` when the roots do not all lie
    /// in the field.
    pub fn roots(&self) -> Result<Vec<FieldElement>> {
        let d = self.degree().ok_or_else(|| Error::Domain("zero polynomial".into()))?;
        let f = self.field();
        let trimmed = Polynomial { coeffs: self.coeffs[..=d].to_vec() };
        let mut out = Vec::new();
        integral_roots(&trimmed.normalized(), &f.zero(), 0, &mut out)?;
        let mut outer = Vec::new();
        integral_roots(&trimmed.reversed().normalized(), &f.zero(), 0, &mut outer)?;
        for y in outer {
            if !y.is_zero() && y.val_lower_pi() > 0 {
                out.push(y.inv()?);
            }
        }
        if out.len() != d {
            return Err(Error::NotSplit(format!("{} of {d} roots lie in the field", out.len())));
        }
        Ok(out)
    }
}

/// Roots `x = base + pi^k y` of `h(y)` with `y` integral; `h` normalized.
fn integral_roots(h: &Polynomial, base: &FieldElement, k: i64, out: &mut Vec<FieldElement>) -> Result<()> {
    let f = h.field();
    if k > f.cap() {
        return Err(Error::Precision("roots cannot be separated at the working precision".into()));
    }
    let mut h = h.clone();
    while h.coeffs.len() > 1 && h.coeffs[0].is_exact_zero() {
        out.push(*base);
        h.coeffs.remove(0);
    }
    if h.degree().unwrap_or(0) == 0 {
        return Ok(());
    }
    let scale = f.pi_pow(k);
    for r in f.residue_field().elements() {
        let lift = f.lift_residue(r);
        let shifted = h.taylor_shift(&lift);
        let mult = match shifted.coeffs.iter().position(|c| !c.is_zero() && c.val_lower_pi() == 0) {
            Some(m) => m,
            None => return Err(Error::Precision("polynomial lost all precision".into())),
        };
        if mult == 0 {
            continue;
        }
        let next_base = base.add(&scale.mul(&lift));
        if mult == 1 {
            let y = newton(&shifted, &f.zero())?;
            out.push(next_base.add(&scale.mul(&y)));
        } else {
            integral_roots(&shifted.scale_argument(1).normalized(), &next_base, k + 1, out)?;
        }
    }
    Ok(())
}

/// Newton iteration from `x0` for a simple root of `h` with `h'(x0)` a unit.
fn newton(h: &Polynomial, x0: &FieldElement) -> Result<FieldElement> {
    let dh = h.derivative();
    let mut x = *x0;
    for _ in 0..64 {
        let v = h.eval(&x);
        if v.is_zero() {
            return Ok(x);
        }
        let step = v.checked_div(&dh.eval(&x))?;
        x = x.sub(&step).padded();
        if step.val_lower().is_some_and(|s| s >= Rational64::from_integer(x.field().precision() as i64)) {
            return Ok(x);
        }
    }
    Err(Error::Precision("Newton iteration did not converge".into()))
}

/// Factor of an integer polynomial modulo `p`, coefficients in `0..p`
/// from the constant term up, monic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidueFactor {
    pub coeffs: Vec<u64>,
    pub multiplicity: usize,
}

/// Factorization into monic linear and quadratic factors over `F_p`, a
/// leading constant, and a cofactor without roots in `F_{p^2}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidueFactorization {
    pub p: u64,
    pub leading: u64,
    pub factors: Vec<ResidueFactor>,
    pub cofactor: Vec<u64>,
}

/// Factor `coeffs` (constant term first) modulo `p`.
pub fn factor_mod_p(coeffs: &[i64], p: u64) -> Result<ResidueFactorization> {
    let field = Field::new(FieldSpec::new(p, 1).with_unramified(FieldSpec::default_nonresidue(p)))?;
    let rf = field.residue_field();
    let mut rest: Vec<u64> = coeffs.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect();
    while rest.len() > 1 && *rest.last().unwrap() == 0 {
        rest.pop();
    }
    let leading = *rest.last().unwrap();
    if leading == 0 {
        return Err(Error::Domain("polynomial vanishes modulo p".into()));
    }
    let inv = rf.inv(Residue::new(leading, 0)).expect("nonzero").a;
    rest.iter_mut().for_each(|c| *c = *c * inv % p);
    let mut factors = Vec::new();
    let mut seen: Vec<Residue> = Vec::new();
    for r in rf.elements() {
        if seen.contains(&r) {
            continue;
        }
        let factor = if r.b == 0 {
            vec![(p - r.a) % p, 1]
        } else {
            let conj = Residue::new(r.a, (p - r.b) % p);
            seen.push(conj);
            let sum = rf.add(r, conj).a;
            let prod = rf.mul(r, conj).a;
            vec![prod, (p - sum) % p, 1]
        };
        let mut mult = 0;
        while let Some(q) = divide_exact(&rest, &factor, p) {
            rest = q;
            mult += 1;
        }
        if mult > 0 {
            factors.push(ResidueFactor { coeffs: factor, multiplicity: mult });
        }
    }
    Ok(ResidueFactorization { p, leading, factors, cofactor: rest })
}

/// Quotient of monic-divisor division over `F_p` when the remainder is zero.
fn divide_exact(num: &[u64], den: &[u64], p: u64) -> Option<Vec<u64>> {
    if num.len() < den.len() {
        return None;
    }
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    let mut q = vec![0u64; num.len() - dd];
    for i in (0..q.len()).rev() {
        let c = r[i + dd];
        q[i] = c;
        for (j, d) in den.iter().enumerate() {
            r[i + j] = (r[i + j] + p - c * d % p) % p;
        }
    }
    r[..dd].iter().all(|&c| c == 0).then_some(q)
}

/// Integer polynomial product modulo `p`, constant term first.
pub fn mul_mod_p(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y % p) % p;
        }
    }
    out
}

impl ResidueFactorization {
    /// Multiply the factors back together.
    pub fn expand(&self) -> Vec<u64> {
        let mut acc = vec![self.leading];
        for f in &self.factors {
            for _ in 0..f.multiplicity {
                acc = mul_mod_p(&acc, &f.coeffs, self.p);
            }
        }
        mul_mod_p(&acc, &self.cofactor, self.p)
    }
}

/// `x^2+8x+1` style rendering with coefficients in `(-p/2, p/2]`.
pub fn render_mod_p(coeffs: &[u64], p: u64) -> String {
    let mut terms = Vec::new();
    for (i, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let signed = if c > p / 2 { c as i64 - p as i64 } else { c as i64 };
        let mag = signed.unsigned_abs();
        let var = match i {
            0 => String::new(),
            1 => "x".to_string(),
            _ => format!("x^{i}"),
        };
        let body = if mag == 1 && i > 0 { var } else { format!("{mag}{var}") };
        let sign = if signed < 0 { "-" } else { "+" };
        if terms.is_empty() {
            terms.push(if signed < 0 { format!("-{body}") } else { body });
        } else {
            terms.push(format!("{sign}{body}"));
        }
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.concat()
    }
}

impl fmt::Display for ResidueFactorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.leading != 1 {
            parts.push(format!("{}", self.leading));
        }
        for fac in &self.factors {
            let body = format!("({})", render_mod_p(&fac.coeffs, self.p));
            parts.push(if fac.multiplicity > 1 { format!("{body}^{}", fac.multiplicity) } else { body });
        }
        if self.cofactor.len() > 1 {
            parts.push(format!("({})", render_mod_p(&self.cofactor, self.p)));
        }
        if parts.is_empty() {
            parts.push("1".into());
        }
        write!(f, "{}", parts.join(""))
    }
}

/// Residues of the reductions of `points` in the residue field, `None`
/// for points outside the unit disk.
pub fn residues(points: &[FieldElement]) -> Vec<Option<Residue>> {
    points.iter().map(|x| x.reduce()).collect()
}

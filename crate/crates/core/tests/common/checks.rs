//! Per-sample invariant checks shared by the property tests and the
//! acceptance suite. Each returns `Err` with a description on failure.

use super::{chart_field, rng, sample};
use num_rational::Rational64;
use whittaker::freegroup::ReducedWord;
use whittaker::padic::FieldElement;
use whittaker::projline::ProjPoint;
use whittaker::redtree::{DoubledGraph, ReductionTree};
use whittaker::theta::chart::{ChartKind, ChartTuple};
use whittaker::theta::equation::{EquationChart, Uniformization};
use whittaker::theta::fb::{fb_inverse, fb_map, relative_residual, InverseOptions};
use whittaker::theta::{reflect, ThetaValue};

pub type Check = Result<(), String>;

/// Working precision of the theta checks. Orbit points of the automorphy
/// units run through words of length up to `L + 4` and lose digits at every
/// reflection near a close fixed pair.
pub const PRECISION: u32 = 40;

pub const INVARIANT_CHARTS: [ChartKind; 7] = [
    ChartKind::G2a,
    ChartKind::G2b,
    ChartKind::G2c,
    ChartKind::G3c1,
    ChartKind::G3c4,
    ChartKind::G3c8,
    ChartKind::G3c10,
];

fn infinite() -> Rational64 {
    Rational64::from_integer(i64::MAX / 4)
}

fn finite(v: &ThetaValue) -> Result<FieldElement, String> {
    v.value.as_finite().copied().ok_or_else(|| "theta value is infinite".to_string())
}

/// Valuation of `x/y - 1`.
fn agreement(x: &FieldElement, y: &FieldElement) -> Result<Rational64, String> {
    let q = x.checked_div(y).map_err(|e| e.to_string())?;
    Ok(q.sub(&q.field().one()).val_lower().unwrap_or_else(infinite))
}

fn agree_within(what: &str, x: &ThetaValue, y: &ThetaValue, bound: Rational64) -> Check {
    let got = agreement(&finite(x)?, &finite(y)?)?;
    if got >= bound {
        Ok(())
    } else {
        Err(format!("{what}: agreement {got} below certified {bound}"))
    }
}

/// A sample tuple in normal form with points of its fundamental domain.
pub struct Setup {
    pub fix: ChartTuple,
    pub pairs: Vec<(ProjPoint, ProjPoint)>,
    pub uni: Uniformization,
}

impl Setup {
    pub fn new(chart: ChartKind, seed: u64) -> Result<Setup, String> {
        let fix = sample(chart, chart_field(chart, PRECISION), seed);
        let pairs = fix.pairs().map_err(|e| e.to_string())?;
        let length = if chart.genus() == 2 { 6 } else { 5 };
        let uni = Uniformization::new(&pairs, EquationChart::InfinityOrdinary, length, None, &mut rng(seed ^ 0x5eed))
            .map_err(|e| e.to_string())?;
        Ok(Setup { fix, pairs, uni })
    }

    /// Domain points `i` in working coordinates.
    fn working(&self, i: usize) -> Result<ProjPoint, String> {
        let z = self.uni.sample_points().get(i).ok_or("too few sample points")?;
        self.uni.to_working.apply(z).map_err(|e| e.to_string())
    }

    fn genus(&self) -> usize {
        self.pairs.len() - 1
    }
}

fn e<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// `F(s_i z) = F(z)` for every generator.
pub fn gamma_invariance(chart: ChartKind, seed: u64) -> Check {
    let s = Setup::new(chart, seed)?;
    let z = s.uni.sample_points()[0];
    let fz = e(s.uni.f_values(&[z], 0))?[0];
    for (i, (a, b)) in s.pairs.iter().enumerate() {
        let sz = e(reflect(a, b, &z))?;
        let fsz = e(s.uni.f_values(&[sz], 1))?[0];
        agree_within(&format!("F(s{i} z)"), &fsz, &fz, fz.error.min(fsz.error))?;
    }
    Ok(())
}

fn random_even_word(genus: usize, seed: u64) -> ReducedWord {
    let n = genus as u64 + 1;
    let i = (seed % n) as u8;
    let j = ((i as u64 + 1 + (seed / n) % (n - 1)) % n) as u8;
    ReducedWord::from_letters([i, j])
}

/// `u_alpha * u_beta = u_{alpha beta}`.
pub fn u_multiplicativity(chart: ChartKind, seed: u64) -> Check {
    let s = Setup::new(chart, seed)?;
    let ctx = &s.uni.ctx;
    let (z, omega) = (s.working(0)?, s.uni.omega);
    let alpha = random_even_word(s.genus(), seed);
    let beta = random_even_word(s.genus(), seed / 7 + 3);
    let ua = e(ctx.u_alpha(&alpha, &omega, &z))?;
    let ub = e(ctx.u_alpha(&beta, &omega, &z))?;
    let uab = e(ctx.u_alpha(&alpha.mul(&beta), &omega, &z))?;
    let product = ThetaValue { value: ProjPoint::Finite(finite(&ua)?.mul(&finite(&ub)?)), error: ua.error.min(ub.error) };
    agree_within(&format!("u_{alpha} u_{beta}"), &product, &uab, product.error.min(uab.error))
}

/// `u_alpha` built from two different base points.
pub fn omega_independence(chart: ChartKind, seed: u64) -> Check {
    let s = Setup::new(chart, seed)?;
    let ctx = &s.uni.ctx;
    let z = s.working(0)?;
    let alpha = random_even_word(s.genus(), seed);
    let u1 = e(ctx.u_alpha(&alpha, &s.uni.omega, &z))?;
    let u2 = e(ctx.u_alpha(&alpha, &s.working(1)?, &z))?;
    agree_within(&format!("u_{alpha}"), &u1, &u2, u1.error.min(u2.error))
}

/// Lengthening the truncation by one word letter moves `F` by at most the
/// certified error at the shorter length.
pub fn length_stability(chart: ChartKind, seed: u64) -> Check {
    let s = Setup::new(chart, seed)?;
    let ctx = &s.uni.ctx;
    let z = s.working(0)?;
    let (a, b) = s.uni.aux;
    let short = e(ctx.theta_gamma(&a, &b, &z))?;
    let long = e(ctx.with_length(ctx.length + 1).theta_gamma(&a, &b, &z))?;
    let bound = Rational64::from_integer(ctx.length as i64) * ctx.step;
    agree_within("F at L and L+1", &short, &long, bound.min(short.error).min(long.error))
}

/// `Theta_W(a,b) Theta_W(b,c) = Theta_W(a,c)`.
pub fn theta_w_telescoping(chart: ChartKind, seed: u64) -> Check {
    let s = Setup::new(chart, seed)?;
    let ctx = &s.uni.ctx;
    let z = s.working(0)?;
    let (a, b, c) = (s.working(1)?, s.working(2)?, s.working(3)?);
    let ab = e(ctx.theta_w(&a, &b, &z))?;
    let bc = e(ctx.theta_w(&b, &c, &z))?;
    let ac = e(ctx.theta_w(&a, &c, &z))?;
    let product = ThetaValue { value: ProjPoint::Finite(finite(&ab)?.mul(&finite(&bc)?)), error: ab.error.min(bc.error) };
    agree_within("Theta_W telescoping", &product, &ac, product.error.min(ac.error))
}

/// `H(s_1 s_0 z) = H(z)`.
pub fn h_invariance(chart: ChartKind, seed: u64) -> Check {
    let s = Setup::new(chart, seed)?;
    let z = s.uni.sample_points()[0];
    let moved = e(reflect(&s.pairs[1].0, &s.pairs[1].1, &e(reflect(&s.pairs[0].0, &s.pairs[0].1, &z))?))?;
    let h = e(s.uni.h_values(&[z], 0))?[0];
    let hm = e(s.uni.h_values(&[moved], 2))?[0];
    agree_within("H(s1 s0 z)", &hm, &h, h.error.min(hm.error))
}

/// `H^2 = c prod (F - root)` at five domain points.
pub fn equation_identity(chart: ChartKind, seed: u64) -> Result<bool, String> {
    let s = Setup::new(chart, seed)?;
    let eq = e(s.uni.equation())?;
    let zs = s.uni.sample_points()[..5].to_vec();
    for (agree, cert) in e(s.uni.check_equation(&eq, &zs))? {
        if cert < Rational64::from_integer(1) || agree < cert {
            return Err(format!("{chart}: H^2 agreement {agree}, certified {cert}"));
        }
    }
    Ok(eq.c_is_square)
}

/// Number of fundamental domains up to the swap of all copies.
pub fn expected_sheets(fix: &ChartTuple) -> Result<usize, String> {
    let tree = e(ReductionTree::build(&e(fix.points())?))?;
    let dg = DoubledGraph::new(&tree.skeleton);
    Ok(1 << (dg.domain_exponent(&tree.skeleton) - 1))
}

/// Outcome of inverting the image of a sample.
pub struct RoundTrip {
    pub sheets: usize,
    pub expected: usize,
}

/// Invert `fb_map(fix)`: every sheet maps back to the branch tuple, the
/// sheets are distinct mod p, and one of them is the sample itself.
pub fn fb_round_trip(chart: ChartKind, seed: u64, target: i64) -> Result<RoundTrip, String> {
    let fix = sample(chart, chart_field(chart, 20), seed);
    let length = if chart.genus() == 2 { 6 } else { 4 };
    let image = e(fb_map(&fix, length))?;
    let branch = e(ChartTuple::new(chart, image.branch.coords.iter().map(|c| c.padded()).collect()))?;
    let opts = InverseOptions { length: Some(length), ..InverseOptions::new(target) };
    let sheets = e(fb_inverse(&branch, &opts))?;
    let target = Rational64::from_integer(target);
    for s in &sheets {
        let back = e(whittaker::theta::fb::fb_map_truncated(&s.fix, length))?;
        let r = e(relative_residual(&back.branch.coords, &branch.coords))?;
        if r < target {
            return Err(format!("{chart}: sheet maps back with residual {r}"));
        }
    }
    for (i, x) in sheets.iter().enumerate() {
        for y in &sheets[i + 1..] {
            if e(relative_residual(&x.fix.coords, &y.fix.coords))? >= Rational64::from_integer(1) {
                return Err(format!("{chart}: two sheets agree mod p"));
            }
        }
    }
    let recovered = sheets
        .iter()
        .any(|s| relative_residual(&s.fix.coords, &fix.coords).map_or(false, |r| r >= Rational64::from_integer(1)));
    if !recovered {
        return Err(format!("{chart}: the sample is not among the sheets"));
    }
    Ok(RoundTrip { sheets: sheets.len(), expected: expected_sheets(&fix)? })
}

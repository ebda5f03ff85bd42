//! The fixed-points-to-branch-points map and its inverse.

use super::chart::{BranchTuple, ChartKind, ChartTuple, FixTuple, Role};
use super::{cap_rel_error, renormalize, ThetaContext};
use crate::error::{Error, Result};
use crate::padic::{Field, FieldElement, NotSquareKind};
use crate::projline::ProjPoint;
use crate::redtree::{standard_pairs, ReductionTree};
use num_rational::Rational64;

/// Longest truncation chosen automatically.
pub const MAX_LENGTH: usize = 24;

/// Branch tuple with the valuation of its certified relative error.
#[derive(Debug, Clone)]
pub struct FbImage {
    pub branch: BranchTuple,
    /// certified relative error against the untruncated map (p-units)
    pub error: Rational64,
    pub length: usize,
}

/// Truncation length for a target relative precision (p-units).
pub fn length_for_target(fix: &FixTuple, target: Rational64) -> Result<usize> {
    let ctx = ThetaContext::new(fix.pairs()?, 0)?;
    Ok(ThetaContext::length_for(ctx.step, target, MAX_LENGTH))
}

/// `x -> F(x)/(F(x) - 1)` with `F` the theta function of the group for the
/// points `0` and `1`, evaluated at every point of the tuple.
pub fn normalized_theta_images(fix: &FixTuple, length: usize) -> Result<(Vec<ProjPoint>, Rational64)> {
    let images = theta_images(fix, length)?;
    images.check_capped()?;
    Ok((images.capped, images.error))
}

/// Renormalized theta values, once with full arithmetic precision and once
/// capped at the certified truncation error.
struct ThetaImages {
    raw: Vec<ProjPoint>,
    capped: Vec<ProjPoint>,
    error: Rational64,
    /// a capped theta value is 1 to all of its certified digits
    unresolved: bool,
}

impl ThetaImages {
    fn check_capped(&self) -> Result<()> {
        if self.unresolved {
            return Err(Error::Precision("theta value indistinguishable from 1 at this truncation length".into()));
        }
        Ok(())
    }
}

fn theta_images(fix: &FixTuple, length: usize) -> Result<ThetaImages> {
    let pts = fix.points()?;
    let field = fix.field();
    let ctx = ThetaContext::new(fix.pairs()?, length)?;
    let zero = ProjPoint::Finite(field.zero());
    let one = ProjPoint::Finite(field.one());
    let generic: Vec<usize> = (0..pts.len()).filter(|&i| !is_anchor(&pts[i])).collect();
    let zs: Vec<ProjPoint> = generic.iter().map(|&i| pts[i]).collect();
    let values = ctx.theta_gamma_multi(&zero, &one, &zs)?;
    let mut raw = pts.clone();
    let mut capped = pts;
    let mut error = ctx.truncation_error(0);
    let mut unresolved = false;
    for (&i, v) in generic.iter().zip(values) {
        let x = match v.value {
            ProjPoint::Finite(x) => x,
            ProjPoint::Infinity => return Err(Error::Domain("fixed point at a pole of the theta function".into())),
        };
        error = error.min(v.error);
        let c = cap_rel_error(&x, v.error);
        unresolved |= c.sub(&field.one()).is_zero();
        raw[i] = renormalize(field, &ProjPoint::Finite(x))?;
        capped[i] = renormalize(field, &ProjPoint::Finite(c))?;
    }
    Ok(ThetaImages { raw, capped, error, unresolved })
}

fn is_anchor(p: &ProjPoint) -> bool {
    match p {
        ProjPoint::Infinity => true,
        ProjPoint::Finite(x) => x.is_zero() || x.sub(&x.field().one()).is_zero(),
    }
}

/// Evaluate the branch tuple of a restricted fixed tuple, truncating theta
/// products at `length`. The image must have the same configuration.
pub fn fb_map(fix: &FixTuple, length: usize) -> Result<FbImage> {
    image(fix, length, true)
}

/// The truncated map itself: coordinates carry the full arithmetic
/// precision of the length-`length` product, and `error` still reports how
/// far the truncation may be from the untruncated map.
pub fn fb_map_truncated(fix: &FixTuple, length: usize) -> Result<FbImage> {
    image(fix, length, false)
}

fn image(fix: &FixTuple, length: usize, capped: bool) -> Result<FbImage> {
    fix.chart.validate(&fix.coords, Role::Fix)?;
    let images = theta_images(fix, length)?;
    if capped {
        images.check_capped()?;
    }
    let checked = if capped { &images.capped } else { &images.raw };
    let tree = ReductionTree::build(checked)?;
    let shape = fix.chart.shape();
    if tree.signature() != shape.signature() || tree.skeleton.canonical_pairing().ok() != Some(standard_pairs(checked.len())) {
        return Err(Error::ConfigurationDrift(format!(
            "branch points of a {} tuple have tree {}",
            shape.name,
            tree.signature()
        )));
    }
    let certified = ChartTuple::from_points(fix.chart, &images.capped);
    let error = match &certified {
        Ok(c) => c.coords.iter().map(|c| c.rel_precision()).min().expect("nonempty chart"),
        Err(_) => Rational64::from_integer(0),
    };
    let branch = if capped { certified? } else { ChartTuple::from_points(fix.chart, &images.raw)? };
    Ok(FbImage { branch, error, length })
}

/// Controls for [`fb_inverse`].
#[derive(Debug, Clone, Copy)]
pub struct InverseOptions {
    /// relative precision to reach on every branch coordinate (p-units)
    pub target: Rational64,
    /// Fixed truncation length: invert the truncated map to `target`.
    /// When absent the length grows until the certified error of the
    /// untruncated map reaches `target`.
    pub length: Option<usize>,
    pub max_iterations: usize,
}

impl InverseOptions {
    pub fn new(target: i64) -> Self {
        InverseOptions { target: Rational64::from_integer(target), length: None, max_iterations: 60 }
    }
}

/// One preimage found by [`fb_inverse`].
#[derive(Debug, Clone)]
pub struct Sheet {
    pub fix: FixTuple,
    /// valuation of `fb_map(fix)/branch - 1`, minimum over coordinates
    pub residual: Rational64,
    pub iterations: usize,
    pub length: usize,
    /// certified relative error of the truncated map at `length`
    pub truncation_error: Rational64,
}

/// Valuation of `a/b - 1`, minimized over coordinates.
pub fn relative_residual(a: &[FieldElement], b: &[FieldElement]) -> Result<Rational64> {
    let mut worst: Option<Rational64> = None;
    for (x, y) in a.iter().zip(b) {
        let r = x.checked_div(y)?.sub(&x.field().one());
        let v = r.val_lower().unwrap_or_else(|| Rational64::from_integer(i64::MAX / 4));
        worst = Some(worst.map_or(v, |w: Rational64| w.min(v)));
    }
    Ok(worst.unwrap_or_else(|| Rational64::from_integer(0)))
}

/// All restricted fixed tuples mapping to `branch`, one per sheet. Each
/// sheet starts at the leading-order inverse and is refined by
/// `x <- leading^-1(branch * leading(x) / fb(x))`, following the square
/// root nearest to the current iterate.
pub fn fb_inverse(branch: &BranchTuple, opts: &InverseOptions) -> Result<Vec<Sheet>> {
    let chart = branch.chart;
    chart.validate(&branch.coords, Role::Branch)?;
    let mut sheets: Vec<Sheet> = Vec::new();
    for sheet in 0..chart.sheets() {
        let s = refine(chart, &branch.coords, sheet, opts)?;
        let duplicate = sheets.iter().any(|o| {
            o.fix.coords.iter().zip(&s.fix.coords).all(|(a, b)| a.eq_rel(b, Rational64::from_integer(1)))
        });
        if !duplicate {
            sheets.push(s);
        }
    }
    Ok(sheets)
}

fn refine(chart: ChartKind, target: &[FieldElement], sheet: usize, opts: &InverseOptions) -> Result<Sheet> {
    let mut roots: Vec<FieldElement> = Vec::new();
    let start = chart.leading_inverse(target, |i, sq| {
        let r = sq.sqrt()?;
        let r = if sheet >> i & 1 == 1 { r.neg() } else { r };
        roots.push(r);
        Ok(r)
    })?;
    // iterates are approximations; the residual certifies the result
    let mut x = ChartTuple::new(chart, start.iter().map(|c| c.padded()).collect())?;
    x.chart.validate(&x.coords, Role::Fix)?;
    let one = Rational64::from_integer(1);
    let mut goal = one.min(opts.target);
    let step = ThetaContext::new(x.pairs()?, 0)?.step;
    let mut length = opts.length.unwrap_or_else(|| ThetaContext::length_for(step, goal, MAX_LENGTH));
    let mut best: Option<Rational64> = None;
    let mut stalled = 0;
    let adaptive = opts.length.is_none();
    for it in 0..opts.max_iterations {
        let image = loop {
            let evaluated = if adaptive { fb_map(&x, length) } else { fb_map_truncated(&x, length) };
            match evaluated {
                Ok(im) if adaptive && im.error < goal && length < MAX_LENGTH => {
                    let missing = ((goal - im.error) / step).ceil().to_integer().max(1) as usize;
                    length = (length + missing).min(MAX_LENGTH);
                }
                Err(Error::Precision(_) | Error::ConfigurationDrift(_)) if adaptive && length < MAX_LENGTH => length += 1,
                other => break other?,
            }
        };
        let residual = relative_residual(&image.branch.coords, target)?;
        if residual >= opts.target && (!adaptive || image.error >= opts.target.min(residual)) {
            return Ok(Sheet { fix: x, residual, iterations: it, length, truncation_error: image.error });
        }
        match best {
            Some(b) if residual <= b && goal >= opts.target => {
                stalled += 1;
                if stalled >= 3 {
                    return Err(Error::Precision(format!(
                        "fb_inverse stalled at residual valuation {} (target {}, length {length})",
                        crate::redtree::fmt_rational(b),
                        crate::redtree::fmt_rational(opts.target)
                    )));
                }
            }
            _ => stalled = 0,
        }
        best = Some(best.map_or(residual, |b| b.max(residual)));
        // ask the next evaluation for a couple of digits beyond the residual
        goal = (residual + Rational64::from_integer(2)).min(opts.target);
        let lead = chart.leading(&x.coords)?;
        let corrected: Vec<FieldElement> = target
            .iter()
            .zip(&lead)
            .zip(&image.branch.coords)
            .map(|((t, l), y)| Ok(t.mul(l).checked_div(y)?))
            .collect::<Result<_>>()?;
        let next = chart.leading_inverse(&corrected, |i, sq| {
            let r = sq.sqrt()?;
            let prev = roots[i];
            let closer = |c: &FieldElement| c.sub(&prev).val_lower().unwrap_or(Rational64::from_integer(i64::MAX / 4));
            let r = if closer(&r.neg()) > closer(&r) { r.neg() } else { r };
            roots[i] = r;
            Ok(r)
        })?;
        x = ChartTuple::new(chart, next.iter().map(|c| c.padded()).collect())?;
    }
    Err(Error::Precision("fb_inverse did not converge".into()))
}

/// [`fb_inverse`], adjoining square roots to the field when the leading
/// inverse needs them. Returns the field that was used and the extension
/// that was diagnosed, if any.
pub fn fb_inverse_extending(branch: &BranchTuple, opts: &InverseOptions) -> Result<(Field, Option<NotSquareKind>, Vec<Sheet>)> {
    match fb_inverse(branch, opts) {
        Err(Error::RequiresExtension(kind)) => {
            let field = branch.field().extended(kind)?;
            let lifted = branch.lift_to(field)?;
            Ok((field, Some(kind), fb_inverse(&lifted, opts)?))
        }
        other => Ok((branch.field(), None, other?)),
    }
}

//! Named worked examples: curves given by equations or branch tuples, and
//! one synthetic restricted sample for each genus-3 configuration shape.
//! Each fixture runs a deterministic pipeline and produces a report.

use crate::catalog::{self, CatalogShape};
use crate::error::{Error, Result};
use crate::freegroup::find_relations;
use crate::padic::{Field, FieldElement, FieldSpec, Residue};
use crate::poly::{factor_mod_p, Polynomial};
use crate::projline::{normalize_triple, Mobius, ProjPoint};
use crate::redtree::{classify, fmt_rational, standard_pairs, DoubledGraph, ReductionTree, TreeReport};
use crate::theta::chart::{ChartKind, ChartTuple};
use crate::theta::fb::{fb_inverse, fb_inverse_extending, fb_map, InverseOptions, Sheet};
use num_rational::Rational64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureKind {
    /// `y^2 = g(x)` with integer coefficients, constant term first
    Curve { coeffs: &'static [i64] },
    /// branch tuple in chart coordinates
    Branch { chart: ChartKind, coords: &'static [&'static str] },
    /// restricted sample of a catalog shape
    Synthetic { shape: &'static str },
}

#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub field: &'static str,
    pub precision: u32,
    pub kind: FixtureKind,
}

const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "x0_37",
        description: "modular curve X0(37) over Q37, branch points over Q37(sqrt 15, sqrt 37)",
        field: "37,15,ram",
        precision: 20,
        kind: FixtureKind::Curve { coeffs: &[1, 14, 35, 48, 35, 14, 1] },
    },
    Fixture {
        name: "x0_39",
        description: "modular curve X0(39) over Q3, branch points over Q3(sqrt -1, sqrt 3)",
        field: "3,-1,ram",
        precision: 20,
        kind: FixtureKind::Curve { coeffs: &[1, -6, 3, 12, -23, 12, 3, -6, 1] },
    },
    Fixture {
        name: "kadziela",
        description: "y^2 = x(x-1)(x-5)(x-195)(x-125) over Q5",
        field: "5",
        precision: 20,
        kind: FixtureKind::Curve { coeffs: &[0, 121875, -147850, 26300, -326, 1] },
    },
    Fixture {
        name: "q3_rosenhain_c",
        description: "Rosenhain chain tuple (3, 3, 3) over Q3",
        field: "3",
        precision: 12,
        kind: FixtureKind::Branch { chart: ChartKind::RosenhainC, coords: &["3", "3", "3"] },
    },
    synthetic("g3c1", "5"),
    synthetic("g3c2", "5"),
    synthetic("g3c3", "5"),
    synthetic("g3c4", "5"),
    synthetic("g3c5", "5"),
    synthetic("g3c6", "5"),
    synthetic("g3c7", "5,2"),
    synthetic("g3c8", "5,2"),
    synthetic("g3c9", "5"),
    synthetic("g3c10", "5"),
];

const fn synthetic(shape: &'static str, field: &'static str) -> Fixture {
    Fixture {
        name: shape,
        description: "restricted sample of a genus-3 configuration",
        field,
        precision: 20,
        kind: FixtureKind::Synthetic { shape },
    }
}

pub fn fixtures() -> &'static [Fixture] {
    FIXTURES
}

pub fn fixture(name: &str) -> Result<&'static Fixture> {
    FIXTURES
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| Error::Domain(format!("unknown example {name:?}")))
}

impl Fixture {
    pub fn field(&self) -> Result<Field> {
        Ok(Field::new(FieldSpec::parse_short(self.field, self.precision)?)?)
    }

    pub fn run(&self) -> Result<FixtureReport> {
        match self.name {
            "x0_37" => x0_37(self),
            "x0_39" => x0_39(self),
            "kadziela" => kadziela(self),
            "q3_rosenhain_c" => rosenhain_c(self),
            _ => match self.kind {
                FixtureKind::Synthetic { shape } => synthetic_report(self, shape),
                _ => Err(Error::Unsupported(format!("no pipeline for {}", self.name))),
            },
        }
    }
}

/// Valuation and leading residue of one coordinate.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Coordinate {
    pub name: String,
    pub value: String,
    pub valuation: String,
    pub leading_residue: String,
}

impl Coordinate {
    pub fn new(name: &str, x: &FieldElement) -> Self {
        Coordinate {
            name: name.to_string(),
            value: x.to_string(),
            valuation: x.valuation().map_or_else(|| "inf".into(), fmt_rational),
            leading_residue: x.residue().to_string(),
        }
    }
}

pub fn coordinates(t: &ChartTuple) -> Vec<Coordinate> {
    t.chart.coord_names().iter().zip(&t.coords).map(|(n, x)| Coordinate::new(n, x)).collect()
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct SheetReport {
    pub fix: Vec<Coordinate>,
    pub residual: String,
    pub truncation_error: String,
    pub length: usize,
    pub iterations: usize,
}

impl From<&Sheet> for SheetReport {
    fn from(s: &Sheet) -> Self {
        SheetReport {
            fix: coordinates(&s.fix),
            residual: fmt_rational(s.residual),
            truncation_error: fmt_rational(s.truncation_error),
            length: s.length,
            iterations: s.iterations,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct FixtureReport {
    pub name: String,
    pub description: String,
    pub field: String,
    pub precision: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduction: Option<Reduction>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub branch_points: Vec<String>,
    pub tree: TreeReport,
    pub configuration: Option<String>,
    pub closed_disk: bool,
    pub restricted: bool,
    /// pairs of branch points grouped by the tree, with their residues
    pub pair_residues: Vec<Vec<String>>,
    pub domain_exponent: u32,
    pub betti: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chart: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub branch: Vec<Coordinate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extension: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sheets: Vec<SheetReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fixed: Vec<Coordinate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relation_candidates: Option<usize>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Reduction {
    pub p: u64,
    pub factorization: String,
    /// the factorization multiplies back to `g mod p`
    pub identity_holds: bool,
}

fn reduction(coeffs: &[i64], p: u64) -> Result<Reduction> {
    let fac = factor_mod_p(coeffs, p)?;
    let reduced: Vec<u64> = coeffs.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect();
    Ok(Reduction { p, factorization: fac.to_string(), identity_holds: fac.expand() == reduced })
}

/// Group points by the tree pairing, in pair order.
fn paired(points: &[ProjPoint]) -> Result<(ReductionTree, Vec<ProjPoint>)> {
    let tree = ReductionTree::build(points)?;
    let pairs = tree.skeleton.canonical_pairing()?;
    let ordered: Vec<ProjPoint> = pairs.iter().flat_map(|&(a, b)| [points[a], points[b]]).collect();
    Ok((ReductionTree::build(&ordered)?, ordered))
}

fn residue_text(field: Field, p: &ProjPoint, lambda: bool) -> String {
    match p.as_finite().and_then(|x| x.reduce()) {
        None => "inf".into(),
        Some(r) if lambda && field.has_unramified() => lambda_basis(r, field.p()),
        Some(r) => r.to_string(),
    }
}

/// `a + b s` written as `c + b lambda` with `lambda = s - 1`.
fn lambda_basis(r: Residue, p: u64) -> String {
    let c = (r.a + r.b) % p;
    match (r.b, c) {
        (0, c) => c.to_string(),
        (1, 0) => "λ".into(),
        (b, 0) => format!("{b}λ"),
        (1, c) => format!("λ+{c}"),
        (b, c) => format!("{b}λ+{c}"),
    }
}

fn base_report(fx: &Fixture, points: &[ProjPoint], lambda: bool) -> Result<(FixtureReport, Vec<ProjPoint>)> {
    let field = fx.field()?;
    let (tree, ordered) = paired(points)?;
    let pairs = standard_pairs(ordered.len());
    let config = classify(&tree.skeleton, &pairs)?;
    let graph = DoubledGraph::new(&tree.skeleton);
    let pair_residues = ordered.chunks(2).map(|c| c.iter().map(|p| residue_text(field, p, lambda)).collect()).collect();
    let report = FixtureReport {
        name: fx.name.into(),
        description: fx.description.into(),
        field: fx.field.into(),
        precision: fx.precision,
        reduction: None,
        branch_points: ordered.iter().map(|p| p.to_text()).collect(),
        tree: tree.report(),
        configuration: config.catalog_name,
        closed_disk: tree.skeleton.closed_disk(&pairs),
        restricted: tree.restricted_check(),
        pair_residues,
        domain_exponent: graph.domain_exponent(&tree.skeleton),
        betti: graph.betti(),
        chart: None,
        branch: vec![],
        extension: None,
        sheets: vec![],
        fixed: vec![],
        relation_candidates: None,
    };
    Ok((report, ordered))
}

fn curve_points(fx: &Fixture) -> Result<Vec<ProjPoint>> {
    let FixtureKind::Curve { coeffs } = fx.kind else {
        return Err(Error::Domain(format!("{} is not given by an equation", fx.name)));
    };
    let nominal = coeffs.len() - 1;
    let nominal = nominal + nominal % 2;
    Polynomial::from_integers(fx.field()?, coeffs).roots_projective(nominal)
}

/// Fixed truncation length and target used for the equation examples.
pub const X0_37_LENGTH: usize = 4;
pub const X0_37_TARGET: i64 = 15;
pub const X0_39_LENGTH: usize = 3;
pub const X0_39_TARGET: i64 = 10;

fn x0_37(fx: &Fixture) -> Result<FixtureReport> {
    let FixtureKind::Curve { coeffs } = fx.kind else { unreachable!() };
    let points = curve_points(fx)?;
    let (mut report, ordered) = base_report(fx, &points, false)?;
    report.reduction = Some(reduction(coeffs, 37)?);
    // first point of each pair to 0, 1, infinity
    let (_, normalized) = normalize_triple(&ordered, 0, 2, 4)?;
    let branch = ChartTuple::from_points(ChartKind::G2a, &normalized)?;
    let opts = InverseOptions { length: Some(X0_37_LENGTH), ..InverseOptions::new(X0_37_TARGET) };
    let sheets = fb_inverse(&branch, &opts)?;
    report.chart = Some(branch.chart.name().into());
    report.branch = coordinates(&branch);
    report.sheets = sheets.iter().map(SheetReport::from).collect();
    Ok(report)
}

fn x0_39(fx: &Fixture) -> Result<FixtureReport> {
    let points = curve_points(fx)?;
    let (mut report, ordered) = base_report(fx, &points, true)?;
    let (_, normalized) = normalize_triple(&ordered, 0, 2, 6)?;
    let branch = ChartTuple::from_points(ChartKind::G3c10, &normalized)?;
    let opts = InverseOptions { length: Some(X0_39_LENGTH), ..InverseOptions::new(X0_39_TARGET) };
    let sheets = fb_inverse(&branch, &opts)?;
    report.chart = Some(branch.chart.name().into());
    report.branch = coordinates(&branch);
    report.sheets = sheets.iter().map(SheetReport::from).collect();
    Ok(report)
}

/// Target precision of the Kadziela inverse.
pub const KADZIELA_TARGET: i64 = 4;

fn kadziela(fx: &Fixture) -> Result<FixtureReport> {
    let points = curve_points(fx)?;
    let (mut report, ordered) = base_report(fx, &points, false)?;
    let field = fx.field()?;
    // x -> x/5 sends the pairs to {0, 25}, {1, 39}, {1/5, oo}
    let scale = Mobius::new(field.one(), field.zero(), field.zero(), field.from_i64(5))?;
    let scaled: Vec<ProjPoint> = ordered.iter().map(|p| scale.apply(p)).collect::<Result<_>>()?;
    let pts = reorder_for_g2b(&scaled);
    let branch = ChartTuple::from_points(ChartKind::G2b, &pts)?;
    let sheets = fb_inverse(&branch, &InverseOptions::new(KADZIELA_TARGET))?;
    report.chart = Some(branch.chart.name().into());
    report.branch = coordinates(&branch);
    report.sheets = sheets.iter().map(SheetReport::from).collect();
    Ok(report)
}

/// Order `{0, b0}, {1, b1}, {oo, b2}` as the chart expects.
fn reorder_for_g2b(pts: &[ProjPoint]) -> Vec<ProjPoint> {
    let is = |p: &ProjPoint, n: i64| p.as_finite().is_some_and(|x| x.sub(&x.field().from_i64(n)).is_zero());
    let pairs: Vec<(ProjPoint, ProjPoint)> = pts.chunks(2).map(|c| (c[0], c[1])).collect();
    let pick = |pred: &dyn Fn(&ProjPoint) -> bool| -> (ProjPoint, ProjPoint) {
        let &(a, b) = pairs.iter().find(|(a, b)| pred(a) || pred(b)).expect("anchor present");
        if pred(&a) {
            (a, b)
        } else {
            (b, a)
        }
    };
    let (a0, b0) = pick(&|p| is(p, 0));
    let (a1, b1) = pick(&|p| is(p, 1));
    let (a2, b2) = pick(&|p| p.is_infinity());
    vec![a0, b0, a1, b1, a2, b2]
}

fn rosenhain_c(fx: &Fixture) -> Result<FixtureReport> {
    let FixtureKind::Branch { chart, coords } = fx.kind else { unreachable!() };
    let field = fx.field()?;
    let coords: Vec<FieldElement> = coords.iter().map(|c| field.parse(c)).collect::<std::result::Result<_, _>>()?;
    let branch = ChartTuple::new(chart, coords)?;
    let (mut report, _) = base_report(fx, &branch.points()?, false)?;
    let (_, kind, sheets) = fb_inverse_extending(&branch, &InverseOptions::new(4))?;
    report.chart = Some(chart.name().into());
    report.branch = coordinates(&branch);
    report.extension = kind.map(|k| k.to_string());
    report.sheets = sheets.iter().map(SheetReport::from).collect();
    Ok(report)
}

/// Seed of the synthetic samples.
pub const SYNTHETIC_SEED: u64 = 2024;

/// Restricted fixed points of a catalog shape: chart coordinates when the
/// shape has a chart, otherwise a random realization.
pub fn synthetic_fixed_points(shape: &CatalogShape, field: Field) -> Result<(Option<ChartTuple>, Vec<ProjPoint>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SYNTHETIC_SEED);
    match crate::theta::chart::ALL_CHARTS.iter().find(|c| c.name() == shape.name) {
        Some(&chart) => {
            let t = ChartTuple::new(chart, chart.sample(field, 2, &mut rng)?)?;
            let pts = t.points()?;
            Ok((Some(t), pts))
        }
        None => Ok((None, shape.realize(field, 1, &mut rng)?)),
    }
}

/// Longest word length searched for relations in synthetic samples.
pub const RELATION_LENGTH: usize = 6;

fn synthetic_report(fx: &Fixture, shape: &str) -> Result<FixtureReport> {
    let shape = catalog::by_name(shape).ok_or_else(|| Error::Domain(format!("unknown shape {shape}")))?;
    let field = fx.field()?;
    let (chart, points) = synthetic_fixed_points(shape, field)?;
    let (mut report, _) = base_report(fx, &points, false)?;
    let gens: Vec<Mobius> =
        points.chunks(2).map(|c| Mobius::involution_from_pair(&c[0], &c[1])).collect::<Result<_>>()?;
    let prec = Rational64::from_integer(fx.precision as i64 / 2);
    report.relation_candidates = Some(find_relations(&gens, RELATION_LENGTH, prec)?.len());
    if let Some(t) = chart {
        report.chart = Some(t.chart.name().into());
        report.fixed = coordinates(&t);
        report.branch = coordinates(&fb_map(&t, 3)?.branch);
    }
    Ok(report)
}

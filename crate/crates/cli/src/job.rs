//! Job descriptions read from JSON and the reports they produce.

use crate::error::CliError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use whittaker::freegroup::{find_relations, ReducedWord};
use whittaker::padic::{Field, FieldSpec};
use whittaker::projline::{normalize_triple, Mobius, ProjPoint};
use whittaker::redtree::{classify, fmt_rational, standard_pairs, van_steen_check, DoubledGraph, ReductionTree};
use whittaker::registry::{self, coordinates, SheetReport};
use whittaker::theta::chart::{ChartKind, ChartTuple};
use whittaker::theta::equation::{EquationChart, Uniformization};
use whittaker::theta::fb::{fb_inverse_extending, fb_map, length_for_target, InverseOptions};
use whittaker::theta::{cap_rel_error, ThetaContext, ThetaValue};
use num_rational::Rational64;

/// Working precision when neither the job nor the command line sets one.
pub const DEFAULT_PRECISION: u32 = 20;
/// Seed for the random choices of a job (generic points, auxiliary points).
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// reduction tree of a point set
    Cluster,
    /// configuration, parities and restricted/closed-disk checks
    ConfigCheck,
    /// disk conditions and relation search for the generated group
    GoodPosition,
    /// theta products at given points
    Theta,
    /// fixed points to branch points
    Fb,
    /// branch points to all fixed-point sheets
    FbInverse,
    /// hyperelliptic equation of the curve
    Equation,
    /// named worked example
    Example,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaKind {
    /// product over the whole group
    #[default]
    Gamma,
    /// product over the even-word subgroup
    W,
    /// automorphy unit of an even word
    U,
}

/// One unit of work. Points and coordinates are written as field
/// expressions (`"1/5"`, `"3 + 2*s"`, `"inf"`).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    /// `p[,u][,ram]`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    /// truncation length of theta products
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    /// points in pair order `a0, b0, a1, b1, ...`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<String>>,
    /// chart of `coords`, or of `points` after normalization
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<String>>,
    /// indices of the points sent to `0, 1, oo` before reading a chart
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchors: Option<[usize; 3]>,
    /// pairing as label indices; defaults to consecutive points
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<[usize; 2]>>,
    /// point moved to infinity for the disk conditions
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infinity: Option<String>,
    /// longest word in the relation search
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_len: Option<usize>,
    /// relative precision target (p-units)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<String>,
    /// normal form of the equation
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<EquationChart>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// example name
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// list the examples instead of running one
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub list: bool,
}

impl JobSpec {
    /// Parse a job, reporting JSON errors with line and column.
    pub fn from_json(text: &str) -> Result<JobSpec, CliError> {
        if text.trim().is_empty() {
            return Ok(JobSpec::default());
        }
        serde_json::from_str(text).map_err(CliError::from)
    }

    pub fn field(&self) -> Result<Field, CliError> {
        let text = self
            .field
            .as_deref()
            .ok_or_else(|| CliError::Usage("the job must name its field (\"field\": \"p[,u][,ram]\" or --field)".into()))?;
        let spec = FieldSpec::parse_short(text, self.precision.unwrap_or(DEFAULT_PRECISION))?;
        Ok(Field::new(spec)?)
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.unwrap_or(DEFAULT_SEED))
    }

    fn points(&self, field: Field) -> Result<Vec<ProjPoint>, CliError> {
        let pts = self.points.as_ref().ok_or_else(|| CliError::Usage("missing \"points\"".into()))?;
        parse_points(field, pts)
    }

    fn point(&self, field: Field, key: &str, value: &Option<String>) -> Result<ProjPoint, CliError> {
        let text = value.as_deref().ok_or_else(|| CliError::Usage(format!("missing \"{key}\"")))?;
        Ok(ProjPoint::parse(field, text)?)
    }

    fn pairing(&self, n: usize) -> Result<Vec<(usize, usize)>, CliError> {
        match &self.pairs {
            Some(p) => {
                if let Some(bad) = p.iter().flatten().find(|&&i| i >= n) {
                    return Err(CliError::Usage(format!("pair index {bad} out of range for {n} points")));
                }
                Ok(p.iter().map(|&[a, b]| (a, b)).collect())
            }
            None => Ok(standard_pairs(n)),
        }
    }

    fn fixed_pairs(&self, field: Field) -> Result<Vec<(ProjPoint, ProjPoint)>, CliError> {
        let pts = self.points(field)?;
        if pts.len() % 2 != 0 {
            return Err(CliError::Usage("an even number of points is needed".into()));
        }
        Ok(self.pairing(pts.len())?.into_iter().map(|(a, b)| (pts[a], pts[b])).collect())
    }

    /// Chart tuple from `coords`, or from `points` normalized by `anchors`.
    fn tuple(&self, field: Field) -> Result<ChartTuple, CliError> {
        let chart = self.chart.ok_or_else(|| CliError::Usage("missing \"chart\"".into()))?;
        if let Some(coords) = &self.coords {
            let coords = coords.iter().map(|c| field.parse(c)).collect::<Result<Vec<_>, _>>()?;
            return Ok(ChartTuple::new(chart, coords)?);
        }
        let pts = self.points(field)?;
        let pts = match self.anchors {
            Some([i, j, k]) => normalize_triple(&pts, i, j, k)?.1,
            None => pts,
        };
        Ok(ChartTuple::from_points(chart, &pts)?)
    }
}

fn parse_points(field: Field, pts: &[String]) -> Result<Vec<ProjPoint>, CliError> {
    pts.iter().map(|t| ProjPoint::parse(field, t).map_err(CliError::from)).collect()
}

fn texts(pts: &[ProjPoint]) -> Vec<String> {
    pts.iter().map(|p| p.to_text()).collect()
}

/// Value with digits beyond the certified error dropped. Outside the
/// fundamental-domain region no error is certified and the raw truncated
/// product is shown.
fn theta_json(z: &ProjPoint, v: &ThetaValue, certified: bool) -> Value {
    if !certified {
        return json!({ "z": z.to_text(), "value": v.value.to_text(), "error": "uncertified" });
    }
    let value = match v.value {
        ProjPoint::Finite(x) => ProjPoint::Finite(cap_rel_error(&x, v.error)),
        ProjPoint::Infinity => ProjPoint::Infinity,
    };
    json!({ "z": z.to_text(), "value": value.to_text(), "error": fmt_rational(v.error) })
}

/// Run `job` as `command`.
pub fn run(command: Command, job: &JobSpec) -> Result<Value, CliError> {
    if let Some(c) = job.command {
        if c != command {
            return Err(CliError::Usage(format!("job is for {c:?} but {command:?} was requested")));
        }
    }
    match command {
        Command::Cluster => cluster(job),
        Command::ConfigCheck => config_check(job),
        Command::GoodPosition => good_position(job),
        Command::Theta => theta(job),
        Command::Fb => fb(job),
        Command::FbInverse => fb_inverse(job),
        Command::Equation => equation(job),
        Command::Example => example(job),
    }
}

fn field_json(field: Field) -> Value {
    serde_json::to_value(field.spec()).expect("field spec serializes")
}

fn cluster(job: &JobSpec) -> Result<Value, CliError> {
    let field = job.field()?;
    let pts = job.points(field)?;
    let tree = ReductionTree::build(&pts)?;
    let pairing = tree.skeleton.canonical_pairing().ok();
    Ok(json!({
        "field": field_json(field),
        "points": texts(&pts),
        "tree": tree.report(),
        "genus": tree.skeleton.genus(),
        "potential_mumford": tree.skeleton.is_potential_mumford(),
        "canonical_pairing": pairing,
    }))
}

fn config_check(job: &JobSpec) -> Result<Value, CliError> {
    let field = job.field()?;
    let pts = job.points(field)?;
    let tree = ReductionTree::build(&pts)?;
    let pairs = job.pairing(pts.len())?;
    let config = classify(&tree.skeleton, &pairs)?;
    let graph = DoubledGraph::new(&tree.skeleton);
    Ok(json!({
        "field": field_json(field),
        "points": texts(&pts),
        "tree": tree.report(),
        "configuration": config,
        "potential_mumford": tree.skeleton.is_potential_mumford(),
        "restricted": tree.restricted_check(),
        "restricted_failures": tree.restricted_failures(),
        "closed_disk": tree.skeleton.closed_disk(&pairs),
        "separates_one_pair": tree.separates_one_pair(&pairs),
        "betti": graph.betti(),
        "domain_exponent": graph.domain_exponent(&tree.skeleton),
        "fundamental_domains": graph.fundamental_domains(&tree.skeleton).len(),
    }))
}

fn good_position(job: &JobSpec) -> Result<Value, CliError> {
    let field = job.field()?;
    let pairs = job.fixed_pairs(field)?;
    let all: Vec<ProjPoint> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    let infinity = match &job.infinity {
        Some(t) => ProjPoint::parse(field, t)?,
        None if all.iter().any(ProjPoint::is_infinity) => {
            ReductionTree::build(&all)?.generic_points(1, &mut job.rng())?[0]
        }
        None => ProjPoint::Infinity,
    };
    let disks = van_steen_check(&pairs, &infinity)?;
    let gens: Vec<Mobius> =
        pairs.iter().map(|(a, b)| Mobius::involution_from_pair(a, b)).collect::<Result<_, _>>()?;
    let max_len = job.max_len.unwrap_or(6);
    let prec = Rational64::from_integer(i64::from(field.spec().precision) / 2);
    let relations: Vec<[String; 2]> = find_relations(&gens, max_len, prec)?
        .into_iter()
        .map(|(u, v)| [u.to_string(), v.to_string()])
        .collect();
    Ok(json!({
        "field": field_json(field),
        "infinity": infinity.to_text(),
        "disk_conditions": disks,
        "disk_conditions_hold": disks.all(),
        "max_len": max_len,
        "relation_precision": fmt_rational(prec),
        "relations": relations,
    }))
}

fn theta(job: &JobSpec) -> Result<Value, CliError> {
    let field = job.field()?;
    let pairs = job.fixed_pairs(field)?;
    let length = job.length.unwrap_or(6);
    let all: Vec<ProjPoint> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    let tree = ReductionTree::build(&all)?;
    let ctx = ThetaContext::new(pairs, length)?;
    let zs = parse_points(field, job.z.as_deref().ok_or_else(|| CliError::Usage("missing \"z\"".into()))?)?;
    let kind = job.theta.unwrap_or_default();
    let values = match kind {
        ThetaKind::Gamma => ctx.theta_gamma_multi(&job.point(field, "a", &job.a)?, &job.point(field, "b", &job.b)?, &zs)?,
        ThetaKind::W => ctx.theta_w_multi(&job.point(field, "a", &job.a)?, &job.point(field, "b", &job.b)?, &zs)?,
        ThetaKind::U => {
            let word = ReducedWord::parse(job.word.as_deref().ok_or_else(|| CliError::Usage("missing \"word\"".into()))?)?;
            ctx.u_alpha_multi(&word, &job.point(field, "omega", &job.omega)?, &zs)?
        }
    };
    Ok(json!({
        "field": field_json(field),
        "theta": kind,
        "length": length,
        "values": zs.iter().zip(&values).map(|(z, v)| theta_json(z, v, tree.is_generic(z))).collect::<Vec<_>>(),
    }))
}

fn fb(job: &JobSpec) -> Result<Value, CliError> {
    let field = job.field()?;
    let fix = job.tuple(field)?;
    let length = match (job.length, job.target) {
        (Some(l), _) => l,
        (None, Some(t)) => length_for_target(&fix, Rational64::from_integer(t))?,
        (None, None) => 6,
    };
    let image = fb_map(&fix, length)?;
    Ok(json!({
        "field": field_json(field),
        "chart": fix.chart,
        "fix": coordinates(&fix),
        "branch": coordinates(&image.branch),
        "length": image.length,
        "error": fmt_rational(image.error),
    }))
}

fn fb_inverse(job: &JobSpec) -> Result<Value, CliError> {
    let field = job.field()?;
    let branch = job.tuple(field)?;
    let opts = InverseOptions { length: job.length, ..InverseOptions::new(job.target.unwrap_or(6)) };
    let (used, ext, sheets) = fb_inverse_extending(&branch, &opts)?;
    Ok(json!({
        "field": field_json(used),
        "chart": branch.chart,
        "branch": coordinates(&branch),
        "extension": ext.map(|k| k.to_string()),
        "sheets": sheets.iter().map(SheetReport::from).collect::<Vec<_>>(),
    }))
}

fn equation(job: &JobSpec) -> Result<Value, CliError> {
    let field = job.field()?;
    let pairs = match job.chart {
        Some(_) => job.tuple(field)?.pairs()?,
        None => job.fixed_pairs(field)?,
    };
    let form = job.form.unwrap_or(EquationChart::InfinityOrdinary);
    let aux = match (&job.a, &job.b) {
        (Some(_), Some(_)) => Some((job.point(field, "a", &job.a)?, job.point(field, "b", &job.b)?)),
        _ => None,
    };
    let length = job.length.unwrap_or(8);
    let u = Uniformization::new(&pairs, form, length, aux, &mut job.rng())?;
    let eq = u.equation()?;
    let zs: Vec<ProjPoint> = match &job.z {
        Some(z) => parse_points(field, z)?,
        None => u.sample_points().iter().take(5).copied().collect(),
    };
    let checks: Vec<Value> = u
        .check_equation(&eq, &zs)?
        .into_iter()
        .zip(&zs)
        .map(|((agree, cert), z)| {
            json!({ "z": z.to_text(), "agreement": fmt_rational(agree), "certified": fmt_rational(cert), "holds": agree >= cert })
        })
        .collect();
    Ok(json!({
        "field": field_json(field),
        "form": form,
        "length": length,
        "roots": eq.roots.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
        "c": eq.c.to_string(),
        "c_is_square": eq.c_is_square,
        "error": fmt_rational(eq.error),
        "checks": checks,
    }))
}

/// Name, field and description of every example.
pub fn example_list() -> Value {
    Value::Array(
        registry::fixtures()
            .iter()
            .map(|f| json!({ "name": f.name, "field": f.field, "precision": f.precision, "description": f.description }))
            .collect(),
    )
}

/// Report of the named example.
pub fn example_report(name: &str) -> Result<Value, CliError> {
    let report = registry::fixture(name)?.run()?;
    Ok(serde_json::to_value(report).expect("reports serialize"))
}

fn example(job: &JobSpec) -> Result<Value, CliError> {
    if job.list {
        return Ok(example_list());
    }
    let name = job.name.as_deref().ok_or_else(|| CliError::Usage("name an example or pass --list".into()))?;
    example_report(name)
}

/// Serialize a report the way the binary prints it.
pub fn render(value: &Value) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("values serialize");
    out.push('\n');
    out
}

//! Command line front end: JSON jobs in, JSON reports out.

pub mod error;
pub mod job;
pub mod pretty;

pub use error::CliError;
pub use job::{run, Command, JobSpec};
pub use whittaker::registry;

use whittaker::projline::ProjPoint;
use whittaker::redtree::{standard_pairs, ReductionTree};

/// Output of one job: the JSON report, or with `pretty` the tree drawing
/// followed by the report.
pub fn run_text(command: Command, job: &JobSpec, pretty: bool) -> Result<String, CliError> {
    let report = run(command, job)?;
    let mut out = String::new();
    if pretty {
        if let Some((tree, pairs)) = tree_for(command, job)? {
            out.push_str(&pretty::render_tree(&tree, &pairs));
            out.push('\n');
        }
    }
    out.push_str(&job::render(&report));
    Ok(out)
}

type Pairs = Vec<(usize, usize)>;

fn tree_for(command: Command, job: &JobSpec) -> Result<Option<(ReductionTree, Pairs)>, CliError> {
    let tree_of = |field, texts: &[String]| -> Result<ReductionTree, CliError> {
        let pts = texts.iter().map(|t| ProjPoint::parse(field, t)).collect::<Result<Vec<_>, _>>()?;
        Ok(ReductionTree::build(&pts)?)
    };
    match command {
        Command::Cluster | Command::ConfigCheck | Command::GoodPosition => {
            let Some(points) = &job.points else { return Ok(None) };
            let tree = tree_of(job.field()?, points)?;
            let pairs = match (&job.pairs, command) {
                (Some(p), _) => p.iter().map(|&[a, b]| (a, b)).collect(),
                (None, Command::Cluster) => tree.skeleton.canonical_pairing().unwrap_or_else(|_| standard_pairs(points.len())),
                (None, _) => standard_pairs(points.len()),
            };
            Ok(Some((tree, pairs)))
        }
        Command::Example if !job.list => {
            let Some(name) = &job.name else { return Ok(None) };
            let fx = registry::fixture(name)?;
            let report = fx.run()?;
            let field = match &report.extension {
                Some(_) => return Ok(None),
                None => fx.field()?,
            };
            let tree = tree_of(field, &report.branch_points)?;
            Ok(Some((tree, standard_pairs(report.branch_points.len()))))
        }
        _ => Ok(None),
    }
}

use clap::{Parser, Subcommand};
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use whittaker_cli::{run_text, CliError, Command, JobSpec};

#[derive(Parser)]
#[command(name = "whittaker", version, about = "p-adic Whittaker groups, reduction trees and theta functions")]
struct Cli {
    /// draw the reduction tree before the report
    #[arg(long, global = true)]
    pretty: bool,
    /// working precision in p-adic digits
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// truncation length of theta products
    #[arg(long, global = true)]
    length: Option<usize>,
    /// field descriptor
    #[arg(long, global = true, value_name = "p[,u][,ram]")]
    field: Option<String>,
    /// read the job from a file instead of standard input
    #[arg(long, global = true, value_name = "FILE")]
    input: Option<PathBuf>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// reduction tree of a point set
    Cluster,
    /// configuration, parities and restricted/closed-disk checks
    ConfigCheck,
    /// disk conditions and relation search
    GoodPosition,
    /// theta products at given points
    Theta,
    /// fixed points to branch points
    Fb,
    /// branch points to fixed points, one tuple per sheet
    FbInverse,
    /// hyperelliptic equation from theta products
    Equation,
    /// run a named worked example
    Example {
        name: Option<String>,
        /// list the available examples
        #[arg(long)]
        list: bool,
    },
    /// run a job whose "command" field names the command
    Run,
}

fn read_job(cli: &Cli) -> Result<JobSpec, CliError> {
    let text = match &cli.input {
        Some(path) => std::fs::read_to_string(path)?,
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    JobSpec::from_json(&text)
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    let (command, mut job) = match &cli.command {
        Sub::Example { name, list } => {
            let job = JobSpec { name: name.clone(), list: *list, ..JobSpec::default() };
            (Command::Example, job)
        }
        other => {
            let job = read_job(cli)?;
            let command = match other {
                Sub::Cluster => Command::Cluster,
                Sub::ConfigCheck => Command::ConfigCheck,
                Sub::GoodPosition => Command::GoodPosition,
                Sub::Theta => Command::Theta,
                Sub::Fb => Command::Fb,
                Sub::FbInverse => Command::FbInverse,
                Sub::Equation => Command::Equation,
                Sub::Run => job.command.ok_or_else(|| CliError::Usage("the job has no \"command\"".into()))?,
                Sub::Example { .. } => unreachable!(),
            };
            (command, job)
        }
    };
    if cli.field.is_some() {
        job.field = cli.field.clone();
    }
    if cli.precision.is_some() {
        job.precision = cli.precision;
    }
    if cli.length.is_some() {
        job.length = cli.length;
    }
    run_text(command, &job, cli.pretty)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("{}", serde_json::to_string_pretty(&e.to_json()).expect("errors serialize"));
            eprintln!("whittaker: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

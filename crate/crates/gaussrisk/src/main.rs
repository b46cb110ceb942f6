//! Thin CLI over the study runner: one subcommand per study, flags override
//! config fields, exit status is nonzero iff any verdict fails or an error
//! occurs. Environment variables are never read.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gaussrisk::cli::{emit, run, ReportFormat, RiskReport, RunConfig, Study};

#[derive(Parser)]
#[command(
    name = "gaussrisk",
    version,
    about = "Risk and Bayes-risk studies for linear-Gaussian inverse problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact MSE and bias of the regularized estimator vs Monte Carlo.
    Risk(StudyArgs),
    /// Posterior trace identity and Bayes risk vs nested Monte Carlo.
    BayesRisk(StudyArgs),
    /// Run every identity check (risk + bayes-risk + pushforward-check).
    Verify(StudyArgs),
    /// A-optimal sensor selection with greedy and exhaustive passes.
    Oed(StudyArgs),
    /// Gaussian-layer checks: pushforward moments, characteristic function,
    /// second moment.
    PushforwardCheck(StudyArgs),
}

#[derive(Args)]
struct StudyArgs {
    /// JSON config describing the problem (see README for the schema).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's Monte Carlo sample count.
    #[arg(long)]
    samples: Option<usize>,
    /// Override the regularization strength.
    #[arg(long)]
    beta: Option<f64>,
    /// Report output path (overrides the config's output_path).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format: json or csv.
    #[arg(long, value_enum)]
    format: Option<ReportFormat>,
}

impl Command {
    fn study(&self) -> Study {
        match self {
            Command::Risk(_) => Study::Risk,
            Command::BayesRisk(_) => Study::BayesRisk,
            Command::Verify(_) => Study::Verify,
            Command::Oed(_) => Study::Oed,
            Command::PushforwardCheck(_) => Study::PushforwardCheck,
        }
    }

    fn args(&self) -> &StudyArgs {
        match self {
            Command::Risk(a)
            | Command::BayesRisk(a)
            | Command::Verify(a)
            | Command::Oed(a)
            | Command::PushforwardCheck(a) => a,
        }
    }
}

fn load_config(command: &Command) -> Result<RunConfig, gaussrisk::Error> {
    let args = command.args();
    let text = std::fs::read_to_string(&args.config).map_err(|source| gaussrisk::Error::Io {
        path: args.config.clone(),
        source,
    })?;
    let mut config = RunConfig::from_json(&text)?;
    config.study = Some(command.study());
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(samples) = args.samples {
        config.samples = samples;
    }
    if let Some(beta) = args.beta {
        config.beta = Some(beta);
    }
    if let Some(out) = &args.out {
        config.output_path = Some(out.display().to_string());
    }
    if let Some(format) = args.format {
        config.format = Some(format);
    }
    Ok(config)
}

fn print_summary(report: &RiskReport) {
    println!("study: {}", report.study.name());
    for check in &report.checks {
        let status = if check.pass { "PASS" } else { "FAIL" };
        match check.analytic {
            Some(analytic) => println!(
                "[{status}] {}: analytic {analytic:.6e}, observed {:.6e}, tolerance {:.3e} ({})",
                check.name, check.observed, check.tolerance, check.tolerance_name
            ),
            None => println!(
                "[{status}] {}: observed {:.6e}, tolerance {:.3e} ({})",
                check.name, check.observed, check.tolerance, check.tolerance_name
            ),
        }
    }
    println!("determinism hash: {}", report.determinism_hash);
}

fn execute(command: &Command) -> Result<bool, gaussrisk::Error> {
    let config = load_config(command)?;
    let report = run(&config)?;
    print_summary(&report);
    if let Some(path) = &config.output_path {
        let format = config.format.unwrap_or(ReportFormat::Json);
        emit(&report, std::path::Path::new(path), format)?;
        println!("report written to {path}");
    }
    Ok(report.all_passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more checks failed");
            ExitCode::FAILURE
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use skewscore::config::{EstimatorKind, RunConfig};
use skewscore::runner;

#[derive(Parser)]
#[command(name = "skewscore", about = "Causal discovery under heteroscedastic symmetric noise")]
struct Cli {
    /// JSON run configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the first seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured score estimator.
    #[arg(long, global = true, value_parser = parse_estimator)]
    estimator: Option<EstimatorKind>,
    /// Overrides the pruning significance level.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Samples a dataset plus ground truth into the output directory.
    Generate,
    /// Runs order search and pruning on an existing dataset.
    Discover {
        /// Dataset CSV (header row, one sample per line).
        #[arg(long)]
        data: PathBuf,
    },
    /// Runs generation and discovery over every configured seed and writes
    /// metric reports.
    Benchmark,
    /// Checks the numeric oracles against their closed forms and writes a
    /// conformance report. Exits nonzero when any check fails.
    OracleCheck,
}

fn parse_estimator(s: &str) -> Result<EstimatorKind, String> {
    match s {
        "stein" => Ok(EstimatorKind::Stein),
        "ssm" => Ok(EstimatorKind::Ssm),
        other => Err(format!("unknown estimator {other:?} (expected stein or ssm)")),
    }
}

fn load_config(cli: &Cli) -> skewscore::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(est) = cli.estimator {
        cfg.estimator = est;
    }
    if let Some(alpha) = cli.alpha {
        cfg.alpha = alpha;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> skewscore::Result<bool> {
    match &cli.command {
        Command::Generate => {
            let cfg = load_config(cli)?;
            runner::cmd_generate(&cfg, &cli.out, cli.seed)?;
            println!("wrote dataset and ground truth to {}", cli.out.display());
            Ok(true)
        }
        Command::Discover { data } => {
            let cfg = load_config(cli)?;
            runner::cmd_discover(data, &cfg, &cli.out, cli.seed)?;
            println!("wrote discovery artifacts to {}", cli.out.display());
            Ok(true)
        }
        Command::Benchmark => {
            let mut cfg = load_config(cli)?;
            if let Some(seed) = cli.seed {
                cfg.seeds = vec![seed];
            }
            let report = runner::cmd_benchmark(&cfg, &cli.out)?;
            println!(
                "benchmark complete: {} runs, {} failures, reports in {}",
                report.runs.len(),
                report.failures.len(),
                cli.out.display()
            );
            Ok(report.failures.is_empty())
        }
        Command::OracleCheck => {
            let report = runner::cmd_oracle_check(&cli.out)?;
            for c in &report.checks {
                println!(
                    "{} {}: value {:.6e}, expected {:.6e} (tol {:.1e})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.expected,
                    c.tolerance
                );
            }
            Ok(report.all_pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

//! Runs a small multi-seed benchmark through the same pipeline as the
//! `skewscore benchmark` subcommand and prints the aggregate table.

use skewscore::config::{RunConfig, Setting};
use skewscore::runner::cmd_benchmark;

fn main() -> skewscore::Result<()> {
    let cfg = RunConfig {
        setting: Setting::Multivariate,
        d: 4,
        n: 500,
        edges: 4,
        ci_subsample: 500,
        seeds: (0..5).collect(),
        ..RunConfig::default()
    };

    let out = std::env::temp_dir().join("skewscore-benchmark-small");
    let report = cmd_benchmark(&cfg, &out)?;
    println!("{} runs, {} failures; artifacts in {}", report.runs.len(), report.failures.len(), out.display());

    println!("\n{:<28} {:<12} {:>10} {:>10} {:>6}", "setting", "metric", "mean", "sd", "count");
    for row in report.aggregate() {
        println!(
            "{:<28} {:<12} {:>10.4} {:>10.4} {:>6}",
            row.setting, row.metric, row.mean, row.sd, row.count
        );
    }
    Ok(())
}

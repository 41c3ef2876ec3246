//! Batch pipeline behind the command-line interface: config to generation
//! to discovery to metrics to report files.
//!
//! Every artifact except `timings.json` is a pure function of the config
//! and seed list, so two runs of the same benchmark are byte-identical;
//! wall-clock times live in the one file documented as non-deterministic.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{EstimatorKind, RunConfig, Setting};
use crate::dag::Dag;
use crate::datagen::{
    sample_er_dag, synthesize, synthesize_bivariate, synthesize_confounded_multivariate,
    synthesize_latent_triangular, DataMatrix, Direction, NoiseSpec, Scm,
};
use crate::error::{Error, Result};
use crate::io::{read_data_csv, write_adjacency_csv, write_data_csv};
use crate::metrics::{order_divergence, shd, BenchReport, RunFailure, RunRecord};
use crate::oracles::{
    assumption1_lhs, confounded_anm_skew_x, mc_skew_pair, mc_skewscore_gamma, mc_skewscore_gumbel,
    skewscore_gamma, skewscore_gumbel, QuadratureConfig,
};
use crate::ordering::{topological_order, OrderDiagnostics, SymmetryCheck, TopOrder};
use crate::pruning::{prune, EdgeTest, PruneConfig};
use crate::score::analytic::BivariateModelSpec;
use crate::score::{ScoreEstimator, SsmEstimator, SteinEstimator};

/// One generated dataset with its ground truth.
pub struct Generated {
    pub data: DataMatrix,
    pub graph: Dag,
    /// Set in the pairwise settings.
    pub direction: Option<Direction>,
    pub confounded_pairs: Vec<(usize, usize)>,
}

/// Ground-truth sidecar written next to datasets.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TruthSidecar {
    pub order: Vec<usize>,
    pub confounded_pairs: Vec<(usize, usize)>,
    pub seed: u64,
    pub config: RunConfig,
}

/// Generates one dataset for the configured setting.
pub fn generate_run(cfg: &RunConfig, seed: u64) -> Result<Generated> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match cfg.setting {
        Setting::Bivariate => {
            let noise = cfg.noise.spec(&mut rng);
            let (data, direction) = synthesize_bivariate(cfg.formulation, noise, cfg.n, &mut rng)?;
            let mut graph = Dag::empty(2);
            graph.add_edge(0, 1);
            Ok(Generated { data, graph, direction: Some(direction), confounded_pairs: vec![] })
        }
        Setting::LatentTriangular => {
            let q0 = NoiseSpec::standard_gaussian();
            let q1 = cfg.noise.spec(&mut rng);
            let (data, direction) =
                synthesize_latent_triangular(cfg.lambda, cfg.formulation, &q0, &q1, cfg.n, &mut rng)?;
            let mut graph = Dag::empty(2);
            graph.add_edge(0, 1);
            Ok(Generated {
                data,
                graph,
                direction: Some(direction),
                confounded_pairs: vec![(0, 1)],
            })
        }
        Setting::Multivariate => {
            let graph = sample_er_dag(cfg.d, cfg.edges, &mut rng)?;
            let scm = Scm::random_hsnm(graph.clone(), cfg.noise, 500, &mut rng)?;
            let data = synthesize(&scm, cfg.n, &mut rng)?;
            Ok(Generated { data, graph, direction: None, confounded_pairs: vec![] })
        }
        Setting::MultivariateConfounded => {
            let (data, graph, pairs) =
                synthesize_confounded_multivariate(cfg.d, cfg.edges, cfg.rho, cfg.n, &mut rng)?;
            Ok(Generated { data, graph, direction: None, confounded_pairs: pairs })
        }
    }
}

fn build_estimator(cfg: &RunConfig, seed: u64) -> Box<dyn ScoreEstimator + Send + Sync> {
    match cfg.estimator {
        EstimatorKind::Stein => Box::new(SteinEstimator(cfg.stein)),
        EstimatorKind::Ssm => Box::new(SsmEstimator { config: cfg.ssm.clone(), seed }),
    }
}

/// Full discovery output for one dataset.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct DiscoveryOutput {
    pub order: TopOrder,
    pub diagnostics: OrderDiagnostics,
    pub adjacency: Dag,
    pub edge_tests: Vec<EdgeTest>,
}

/// Runs ordering then pruning with the configured estimator.
pub fn discover_run(data: &DataMatrix, cfg: &RunConfig, seed: u64) -> Result<DiscoveryOutput> {
    let estimator = build_estimator(cfg, seed);
    let symmetry = SymmetryCheck::BootstrapSe { multiplier: 3.0, resamples: 200, seed };
    let (order, diagnostics) = topological_order(data, estimator.as_ref(), cfg.psi, symmetry)?;
    let prune_cfg = PruneConfig {
        alpha: cfg.alpha,
        subsample_cap: cfg.ci_subsample,
        seed,
        ..PruneConfig::default()
    };
    let (adjacency, edge_tests) = prune(data, &order, &prune_cfg)?;
    Ok(DiscoveryOutput { order, diagnostics, adjacency, edge_tests })
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// `generate` subcommand: dataset CSV, adjacency CSV, truth JSON, config
/// echo.
pub fn cmd_generate(cfg: &RunConfig, out_dir: &Path, seed_override: Option<u64>) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let seed = seed_override.unwrap_or(cfg.seeds[0]);
    let generated = generate_run(cfg, seed)?;
    write_data_csv(&out_dir.join("dataset.csv"), &generated.data)?;
    write_adjacency_csv(&out_dir.join("adjacency.csv"), &generated.graph)?;
    let order = generated
        .graph
        .topological_sort()
        .ok_or_else(|| Error::Data("ground-truth graph is cyclic".into()))?;
    write_json(
        &out_dir.join("truth.json"),
        &TruthSidecar { order, confounded_pairs: generated.confounded_pairs, seed, config: cfg.clone() },
    )?;
    cfg.save(&out_dir.join("config.json"))?;
    Ok(())
}

/// `discover` subcommand: order, diagnostics, pruned adjacency, per-edge
/// p-values.
pub fn cmd_discover(
    data_path: &Path,
    cfg: &RunConfig,
    out_dir: &Path,
    seed_override: Option<u64>,
) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let data = read_data_csv(data_path)?;
    if data.nrows() < 50 {
        return Err(Error::Data(format!(
            "dataset has {} rows; discovery needs at least 50",
            data.nrows()
        )));
    }
    let seed = seed_override.unwrap_or(cfg.seeds[0]);
    let output = discover_run(&data, cfg, seed)?;
    write_json(&out_dir.join("order.json"), &output.order)?;
    write_json(&out_dir.join("diagnostics.json"), &output.diagnostics)?;
    write_adjacency_csv(&out_dir.join("adjacency.csv"), &output.adjacency)?;
    write_json(&out_dir.join("edge_pvalues.json"), &output.edge_tests)?;
    cfg.save(&out_dir.join("config.json"))?;
    Ok(())
}

fn run_metrics(cfg: &RunConfig, generated: &Generated, output: &DiscoveryOutput) -> Result<BTreeMap<String, f64>> {
    let mut metrics = BTreeMap::new();
    if let Some(truth) = generated.direction {
        let predicted = if output.order == vec![0, 1] { Direction::Forward } else { Direction::Backward };
        metrics.insert("direction_correct".into(), f64::from(predicted == truth));
    } else {
        metrics.insert(
            "d_top".into(),
            order_divergence(&output.order, &generated.graph)? as f64,
        );
        metrics.insert("shd".into(), shd(&output.adjacency, &generated.graph)? as f64);
    }
    let _ = cfg;
    Ok(metrics)
}

/// `benchmark` subcommand: loops the seed list, scores every run against
/// its ground truth, and writes per-run and aggregate reports. Wall times
/// go to `timings.json` only.
pub fn cmd_benchmark(cfg: &RunConfig, out_dir: &Path) -> Result<BenchReport> {
    cfg.validate()?;
    fs::create_dir_all(out_dir)?;
    let mut report = BenchReport::default();
    let mut timings: Vec<(u64, f64)> = Vec::new();
    for &seed in &cfg.seeds {
        let started = Instant::now();
        let outcome = generate_run(cfg, seed)
            .and_then(|g| discover_run(&g.data, cfg, seed).map(|o| (g, o)))
            .and_then(|(g, o)| run_metrics(cfg, &g, &o));
        let elapsed = started.elapsed().as_secs_f64();
        timings.push((seed, elapsed));
        match outcome {
            Ok(metrics) => report.runs.push(RunRecord {
                seed,
                setting: cfg.setting_label(),
                estimator: cfg.estimator_label().to_string(),
                metrics,
                wall_time_secs: 0.0,
            }),
            Err(e) => report.failures.push(RunFailure {
                seed,
                setting: cfg.setting_label(),
                message: e.to_string(),
            }),
        }
    }
    write_json(&out_dir.join("report.json"), &report)?;
    fs::write(out_dir.join("runs.csv"), report.runs_csv())?;
    fs::write(out_dir.join("aggregate.csv"), report.aggregate_csv())?;
    cfg.save(&out_dir.join("config.json"))?;
    let timing_map: BTreeMap<String, f64> = timings
        .into_iter()
        .map(|(seed, secs)| (format!("seed-{seed}"), secs))
        .collect();
    write_json(&out_dir.join("timings.json"), &timing_map)?;
    Ok(report)
}

/// One oracle conformance assertion.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ConformanceCheck {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ConformanceReport {
    pub checks: Vec<ConformanceCheck>,
    pub all_pass: bool,
}

fn check(name: &str, value: f64, expected: f64, tolerance: f64) -> ConformanceCheck {
    ConformanceCheck {
        name: name.to_string(),
        value,
        expected,
        tolerance,
        pass: (value - expected).abs() <= tolerance,
    }
}

/// `oracle-check` subcommand: evaluates every closed-form, quadrature, and
/// Monte-Carlo oracle and writes a conformance report.
pub fn cmd_oracle_check(out_dir: &Path) -> Result<ConformanceReport> {
    fs::create_dir_all(out_dir)?;
    let quad = QuadratureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1_000_003);
    let mut checks = Vec::new();

    checks.push(check("gumbel-closed-form-beta1", skewscore_gumbel(1.0)?, 2.0, 0.0));
    checks.push(check("gumbel-closed-form-beta2", skewscore_gumbel(2.0)?, 0.25, 0.0));
    checks.push(check("gamma-closed-form-k5", skewscore_gamma(5.0, 1.0)?, 2.0 / 3.0, 1e-15));
    checks.push(check("gamma-closed-form-k4-theta2", skewscore_gamma(4.0, 2.0)?, 0.25, 1e-15));

    let mc_gumbel = mc_skewscore_gumbel(1.0, 1_000_000, &mut rng)?;
    checks.push(check("gumbel-monte-carlo", mc_gumbel, 2.0, 0.10));
    // k = 8 keeps the cubed score's variance finite so the 5% gate is
    // reliable at this sample size.
    let mc_gamma = mc_skewscore_gamma(8.0, 1.0, 1_000_000, &mut rng)?;
    checks.push(check("gamma-monte-carlo", mc_gamma, skewscore_gamma(8.0, 1.0)?, 0.05 * skewscore_gamma(8.0, 1.0)?));

    let (sq, _) = confounded_anm_skew_x(&|x| 2.0 * x, &quad)?;
    checks.push(check("confounded-quadratic-skew", sq, 8.0, 1e-6));
    let (sl, _) = confounded_anm_skew_x(&|_| 0.7, &quad)?;
    checks.push(check("confounded-linear-skew", sl, 0.0, 1e-6));
    let (sh, _) = confounded_anm_skew_x(&|x| 2.0 * x + 0.5, &quad)?;
    checks.push(check("confounded-half-slope-skew", sh, 0.0, 1e-6));

    let lin = assumption1_lhs(&BivariateModelSpec::gaussian_linear(0.8, 1.0), &quad)?;
    checks.push(check("identifiability-null-linear", lin, 0.0, 1e-4));
    let quad_lhs = assumption1_lhs(&BivariateModelSpec::quadratic_confounded(1.0), &quad)?;
    checks.push(check("identifiability-quadratic-magnitude", quad_lhs.abs(), 8.0, 1e-3));

    let pair = mc_skew_pair(&BivariateModelSpec::quadratic_confounded(1.0), 400_000, &mut rng)?;
    checks.push(check("monte-carlo-cause-skew", pair.skew_x, 8.0, 0.4));
    checks.push(check("monte-carlo-effect-skew", pair.skew_y, 0.0, 3.0 * pair.se_y));

    let all_pass = checks.iter().all(|c| c.pass);
    let report = ConformanceReport { checks, all_pass };
    write_json(&out_dir.join("conformance.json"), &report)?;
    Ok(report)
}

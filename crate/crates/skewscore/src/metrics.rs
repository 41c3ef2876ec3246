//! Discovery quality metrics and the benchmark report container.

use std::collections::BTreeMap;

use crate::dag::Dag;
use crate::datagen::Direction;
use crate::error::{Error, Result};
use crate::ordering::{is_permutation, TopOrder};

/// Topological order divergence: the number of ground-truth edges u -> v
/// whose source appears after its target in the order.
pub fn order_divergence(order: &TopOrder, truth: &Dag) -> Result<usize> {
    let d = truth.node_count();
    if !is_permutation(order, d) {
        return Err(Error::Parameter(format!(
            "order {order:?} is not a permutation of 0..{d}"
        )));
    }
    let mut pos = vec![0usize; d];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    Ok(truth.edges().into_iter().filter(|&(u, v)| pos[u] > pos[v]).count())
}

/// Structural Hamming distance with reversals costing 1: the number of
/// unordered node pairs whose edge state (absent, forward, backward)
/// differs between the two graphs.
pub fn shd(a: &Dag, b: &Dag) -> Result<usize> {
    let d = a.node_count();
    if b.node_count() != d {
        return Err(Error::Parameter(format!(
            "node count mismatch: {d} vs {}",
            b.node_count()
        )));
    }
    let state = |g: &Dag, i: usize, j: usize| -> u8 {
        if g.has_edge(i, j) {
            1
        } else if g.has_edge(j, i) {
            2
        } else {
            0
        }
    };
    let mut dist = 0;
    for i in 0..d {
        for j in (i + 1)..d {
            if state(a, i, j) != state(b, i, j) {
                dist += 1;
            }
        }
    }
    Ok(dist)
}

/// Fraction of runs whose predicted direction matches the truth.
pub fn direction_accuracy(runs: &[(Direction, Direction)]) -> Result<f64> {
    if runs.is_empty() {
        return Err(Error::Parameter("no runs to score".into()));
    }
    let correct = runs.iter().filter(|(p, t)| p == t).count();
    Ok(correct as f64 / runs.len() as f64)
}

/// One benchmark run: setting identity plus its metric values.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub setting: String,
    pub estimator: String,
    pub metrics: BTreeMap<String, f64>,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RunFailure {
    pub seed: u64,
    pub setting: String,
    pub message: String,
}

/// Mean and standard deviation of one metric over the successful runs of
/// one setting.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct AggregateRow {
    pub setting: String,
    pub metric: String,
    pub mean: f64,
    pub sd: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
pub struct BenchReport {
    pub runs: Vec<RunRecord>,
    pub failures: Vec<RunFailure>,
}

impl BenchReport {
    /// Per-setting, per-metric mean and sd, recomputed from the run records.
    pub fn aggregate(&self) -> Vec<AggregateRow> {
        let mut groups: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
        for run in &self.runs {
            for (metric, value) in &run.metrics {
                groups
                    .entry((run.setting.clone(), metric.clone()))
                    .or_default()
                    .push(*value);
            }
        }
        groups
            .into_iter()
            .map(|((setting, metric), vals)| {
                let n = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / n;
                let sd = if vals.len() > 1 {
                    (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
                } else {
                    0.0
                };
                AggregateRow { setting, metric, mean, sd, count: vals.len() }
            })
            .collect()
    }

    /// Per-run rows as CSV, one metric column per distinct metric name.
    pub fn runs_csv(&self) -> String {
        let mut metric_names: Vec<String> = Vec::new();
        for run in &self.runs {
            for name in run.metrics.keys() {
                if !metric_names.contains(name) {
                    metric_names.push(name.clone());
                }
            }
        }
        metric_names.sort();
        let mut out = String::from("seed,setting,estimator,wall_time_secs");
        for name in &metric_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for run in &self.runs {
            out.push_str(&format!(
                "{},{},{},{:.6}",
                run.seed, run.setting, run.estimator, run.wall_time_secs
            ));
            for name in &metric_names {
                match run.metrics.get(name) {
                    Some(v) => out.push_str(&format!(",{v:.6}")),
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn aggregate_csv(&self) -> String {
        let mut out = String::from("setting,metric,mean,sd,count\n");
        for row in self.aggregate() {
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{}\n",
                row.setting, row.metric, row.mean, row.sd, row.count
            ));
        }
        out
    }
}

//! Score estimation: nonparametric estimates of `grad log p` at the sample
//! points.
//!
//! Three routes share one interface: the kernel Stein estimator (default,
//! deterministic), a sliced-score-matching perceptron (slower, but better
//! on hard settings given a longer training budget), and an exact analytic
//! oracle for bivariate models with known densities (test substrate).

pub mod analytic;
pub mod ssm;
pub mod stein;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use analytic::{analytic_score_bivariate, BivariateModelSpec};
pub use ssm::{estimate_score_ssm, JvpMode, SsmConfig};
pub use stein::{estimate_score_stein, SteinConfig};

/// n x d matrix of score estimates; entry (i, j) estimates
/// `d/dx_j log p` at sample i.
pub type ScoreMatrix = DMatrix<f64>;

/// Pluggable score estimator, so the ordering loop is estimator-agnostic.
///
/// `cols` carries the original column indices of `data` (the ordering loop
/// removes one column per iteration); kernel and network estimators ignore
/// it, analytic test hooks use it to select the right marginal.
pub trait ScoreEstimator {
    fn scores(&self, data: &DMatrix<f64>, cols: &[usize]) -> Result<ScoreMatrix>;
}

/// Stein estimator with a fixed config and a per-call fresh solve.
pub struct SteinEstimator(pub SteinConfig);

impl ScoreEstimator for SteinEstimator {
    fn scores(&self, data: &DMatrix<f64>, _cols: &[usize]) -> Result<ScoreMatrix> {
        estimate_score_stein(data, &self.0)
    }
}

/// SSM estimator; training is re-seeded per call from `seed` plus the
/// remaining-column fingerprint so repeated runs are reproducible.
pub struct SsmEstimator {
    pub config: SsmConfig,
    pub seed: u64,
}

impl ScoreEstimator for SsmEstimator {
    fn scores(&self, data: &DMatrix<f64>, cols: &[usize]) -> Result<ScoreMatrix> {
        use rand::SeedableRng;
        let mut sub = self.seed;
        for &c in cols {
            sub = sub.wrapping_mul(0x100000001b3).wrapping_add(c as u64);
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(sub);
        estimate_score_ssm(data, &self.config, &mut rng)
    }
}

/// Closure-backed estimator, used as a test hook to inject analytic scores.
pub struct FnEstimator<F>(pub F)
where
    F: Fn(&DMatrix<f64>, &[usize]) -> Result<ScoreMatrix>;

impl<F> ScoreEstimator for FnEstimator<F>
where
    F: Fn(&DMatrix<f64>, &[usize]) -> Result<ScoreMatrix>,
{
    fn scores(&self, data: &DMatrix<f64>, cols: &[usize]) -> Result<ScoreMatrix> {
        (self.0)(data, cols)
    }
}

/// Median of pairwise Euclidean distances over a subsample of at most 1000
/// rows (evenly strided, so the result is deterministic). Falls back to 1.0
/// when all subsampled rows coincide.
pub fn median_heuristic_bandwidth(data: &DMatrix<f64>) -> Result<f64> {
    let n = data.nrows();
    if n < 2 {
        return Err(Error::Parameter("median heuristic needs n >= 2".into()));
    }
    let cap = 1000usize;
    let idx: Vec<usize> = if n <= cap {
        (0..n).collect()
    } else {
        (0..cap).map(|i| i * n / cap).collect()
    };
    let m = idx.len();
    let mut dists = Vec::with_capacity(m * (m - 1) / 2);
    for a in 0..m {
        for b in (a + 1)..m {
            let (ra, rb) = (data.row(idx[a]), data.row(idx[b]));
            let sq: f64 = ra.iter().zip(rb.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
            dists.push(sq.sqrt());
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if dists.len() % 2 == 1 {
        dists[dists.len() / 2]
    } else {
        0.5 * (dists[dists.len() / 2 - 1] + dists[dists.len() / 2])
    };
    Ok(if median == 0.0 { 1.0 } else { median })
}

//! Edge pruning by kernel conditional-independence tests.
//!
//! Given a topological order, every ordered pair (earlier, later) is a
//! candidate edge; the pair is tested for conditional independence given
//! the remaining predecessors of the later node, and the edge is kept when
//! the test rejects. The test statistic is the normalized trace of the
//! product of centered RBF Gram matrices, residualized against the
//! conditioning block; the null is approximated by a gamma distribution
//! matched to the statistic's first two moments, with a permutation null
//! available for auditing.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Gamma};

use crate::dag::Dag;
use crate::datagen::DataMatrix;
use crate::error::{Error, Result};
use crate::ordering::{is_permutation, TopOrder};
use crate::score::median_heuristic_bandwidth;

/// How the null distribution of the trace statistic is approximated.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NullApproximation {
    /// Two-moment gamma match (default; fast).
    Gamma,
    /// Permutation null over row shuffles of y; slow, for auditing.
    Permutation { n_perms: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KciConfig {
    /// Ridge of the conditional residualizer `eps (K_z + eps I)^{-1}`.
    pub epsilon: f64,
    pub null: NullApproximation,
}

impl Default for KciConfig {
    fn default() -> Self {
        KciConfig { epsilon: 1e-3, null: NullApproximation::Gamma }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KciResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Rows actually used by the test.
    pub n_used: usize,
}

/// Centered RBF Gram matrix of the rows of `block`, bandwidth by the
/// median heuristic over the block.
fn centered_gram(block: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = block.nrows();
    let h = median_heuristic_bandwidth(block)?;
    let two_h2 = 2.0 * h * h;
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let sq: f64 = block
                .row(i)
                .iter()
                .zip(block.row(j).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let v = (-sq / two_h2).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    // Double centering: K - row means - col means + grand mean.
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| k.row(i).sum() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    for i in 0..n {
        for j in 0..n {
            k[(i, j)] += grand - row_means[i] - row_means[j];
        }
    }
    Ok(k)
}

/// `tr(A B)` for symmetric A, B.
fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn gamma_p_value(stat: f64, a: &DMatrix<f64>, b: &DMatrix<f64>, n: usize) -> f64 {
    let nf = n as f64;
    let mean = a.trace() * b.trace() / (nf * nf);
    let var = 2.0 * trace_product(a, a) * trace_product(b, b) / nf.powi(4);
    if mean <= 0.0 || var <= 0.0 {
        return 1.0;
    }
    let shape = mean * mean / var;
    let rate = mean / var;
    match Gamma::new(shape, rate) {
        Ok(g) => (1.0 - g.cdf(stat)).clamp(0.0, 1.0),
        Err(_) => 1.0,
    }
}

/// Kernel (conditional) independence test of x against y given the columns
/// of z (unconditional when z is None or has zero columns).
pub fn kci_test(
    x: &[f64],
    y: &[f64],
    z: Option<&DMatrix<f64>>,
    cfg: &KciConfig,
) -> Result<KciResult> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::Parameter(format!("length mismatch: {} vs {}", n, y.len())));
    }
    if let Some(z) = z {
        if z.ncols() > 0 && z.nrows() != n {
            return Err(Error::Parameter(format!(
                "conditioning rows {} != sample size {n}",
                z.nrows()
            )));
        }
        if z.ncols() >= n {
            return Err(Error::Parameter(format!(
                "conditioning dimension {} must be < n = {n}",
                z.ncols()
            )));
        }
    }
    if n < 3 {
        return Err(Error::Parameter("kci needs n >= 3".into()));
    }
    if cfg.epsilon <= 0.0 {
        return Err(Error::Parameter("epsilon must be > 0".into()));
    }

    let conditioning = z.filter(|z| z.ncols() > 0);
    let xm = DMatrix::from_column_slice(n, 1, x);
    let ym = DMatrix::from_column_slice(n, 1, y);

    let (ka, kb) = match conditioning {
        None => (centered_gram(&xm)?, centered_gram(&ym)?),
        Some(z) => {
            // Kernel on the (x, z) block so x-side dependence through z is
            // retained, then both sides residualized against z.
            let mut xz = DMatrix::zeros(n, 1 + z.ncols());
            xz.column_mut(0).copy_from(&xm.column(0));
            for c in 0..z.ncols() {
                xz.column_mut(1 + c).copy_from(&z.column(c));
            }
            let kxz = centered_gram(&xz)?;
            let ky = centered_gram(&ym)?;
            let mut kz = centered_gram(z)?;
            for i in 0..n {
                kz[(i, i)] += cfg.epsilon;
            }
            let chol = kz.cholesky().ok_or_else(|| {
                Error::Numeric("kci residualizer solve failed: Gram not positive definite".into())
            })?;
            // R = eps (K_z + eps I)^{-1}; A = R K R for each side.
            let r = chol.inverse() * cfg.epsilon;
            (&r * kxz * &r, &r * ky * &r)
        }
    };

    let stat = trace_product(&ka, &kb) / n as f64;
    let p_value = match cfg.null {
        NullApproximation::Gamma => gamma_p_value(stat, &ka, &kb, n),
        NullApproximation::Permutation { n_perms, seed } => {
            if n_perms < 1 {
                return Err(Error::Parameter("n_perms must be >= 1".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx: Vec<usize> = (0..n).collect();
            let mut hits = 0usize;
            for _ in 0..n_perms {
                idx.shuffle(&mut rng);
                // Permuting y's rows permutes kb symmetrically.
                let mut t = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        t += ka[(i, j)] * kb[(idx[i], idx[j])];
                    }
                }
                if t / n as f64 >= stat {
                    hits += 1;
                }
            }
            (hits + 1) as f64 / (n_perms + 1) as f64
        }
    };
    Ok(KciResult { statistic: stat, p_value, n_used: n })
}

/// One candidate edge decision from [`prune`].
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct EdgeTest {
    pub from: usize,
    pub to: usize,
    pub conditioning: Vec<usize>,
    pub statistic: f64,
    pub p_value: f64,
    pub kept: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PruneConfig {
    pub alpha: f64,
    /// Rows are uniformly subsampled to this cap before testing.
    pub subsample_cap: usize,
    pub seed: u64,
    pub kci: KciConfig,
}

impl Default for PruneConfig {
    fn default() -> Self {
        PruneConfig { alpha: 0.05, subsample_cap: 1000, seed: 0, kci: KciConfig::default() }
    }
}

/// Decides every candidate edge consistent with the order: for positions
/// i < j, tests order[i] against order[j] given the other predecessors of
/// order[j], and keeps the edge when p < alpha. Runs exactly d(d-1)/2
/// tests; the output graph's edges all point forward in the order.
pub fn prune(data: &DataMatrix, order: &TopOrder, cfg: &PruneConfig) -> Result<(Dag, Vec<EdgeTest>)> {
    let d = data.ncols();
    if !is_permutation(order, d) {
        return Err(Error::Parameter(format!("order {order:?} is not a permutation of 0..{d}")));
    }
    if !(0.0 < cfg.alpha && cfg.alpha < 1.0) {
        return Err(Error::Parameter(format!("alpha must be in (0, 1), got {}", cfg.alpha)));
    }

    // One shared subsample so every edge sees the same rows.
    let n = data.nrows();
    let rows: Vec<usize> = if n <= cfg.subsample_cap {
        (0..n).collect()
    } else {
        let mut idx: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        idx.shuffle(&mut rng);
        let mut take: Vec<usize> = idx.into_iter().take(cfg.subsample_cap).collect();
        take.sort_unstable();
        take
    };
    let sub = data.select_rows(rows.iter());

    let mut jobs = Vec::new();
    for j in 1..d {
        for i in 0..j {
            let cond: Vec<usize> = (0..j).filter(|&k| k != i).map(|k| order[k]).collect();
            jobs.push((order[i], order[j], cond));
        }
    }

    let results: Vec<Result<EdgeTest>> = jobs
        .par_iter()
        .map(|(from, to, cond)| {
            let x: Vec<f64> = sub.column(*from).iter().copied().collect();
            let y: Vec<f64> = sub.column(*to).iter().copied().collect();
            let z = if cond.is_empty() {
                None
            } else {
                Some(sub.select_columns(cond.iter()))
            };
            let res = kci_test(&x, &y, z.as_ref(), &cfg.kci).map_err(|e| {
                Error::Numeric(format!("kci failed on edge {from} -> {to}: {e}"))
            })?;
            Ok(EdgeTest {
                from: *from,
                to: *to,
                conditioning: cond.clone(),
                statistic: res.statistic,
                p_value: res.p_value,
                kept: res.p_value < cfg.alpha,
            })
        })
        .collect();

    let mut dag = Dag::empty(d);
    let mut tests = Vec::with_capacity(results.len());
    for r in results {
        let t = r?;
        if t.kept {
            dag.add_edge(t.from, t.to);
        }
        tests.push(t);
    }
    Ok((dag, tests))
}

//! Topological ordering by iterative sink elimination.
//!
//! The per-coordinate statistic is the skewness of the score,
//! `|mean(psi(s - mean(s)))|` for an odd nonlinear test function `psi`. In a
//! heteroscedastic symmetric noise model the sink coordinate's statistic is
//! zero at the population level while non-sinks stay bounded away from zero,
//! so the minimum-skew column is declared a sink, prepended to the order,
//! and dropped before re-estimating the score on the remaining columns.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::datagen::DataMatrix;
use crate::error::{Error, Result};
use crate::score::{ScoreEstimator, ScoreMatrix};

/// Odd nonlinear test function applied to centered scores.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OddTestFunction {
    /// psi(s) = s^3 (default).
    Cube,
    /// psi(s) = s |s|.
    SignedSquare,
    /// psi(s) = tanh(s / tau).
    ScaledTanh { tau: f64 },
}

impl Default for OddTestFunction {
    fn default() -> Self {
        OddTestFunction::Cube
    }
}

impl OddTestFunction {
    pub fn apply(&self, s: f64) -> f64 {
        match self {
            OddTestFunction::Cube => s * s * s,
            OddTestFunction::SignedSquare => s * s.abs(),
            OddTestFunction::ScaledTanh { tau } => (s / tau).tanh(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let OddTestFunction::ScaledTanh { tau } = self {
            if *tau <= 0.0 {
                return Err(Error::Parameter(format!("tau must be > 0, got {tau}")));
            }
        }
        Ok(())
    }
}

/// Topological order, earliest cause first.
pub type TopOrder = Vec<usize>;

/// True when `order` is a permutation of 0..d.
pub fn is_permutation(order: &[usize], d: usize) -> bool {
    if order.len() != d {
        return false;
    }
    let mut seen = vec![false; d];
    for &v in order {
        if v >= d || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

/// `|mean(psi(s_i - mean(s)))|`: the skewness-of-score statistic. Centering
/// is applied before psi; exact scores already have zero mean, estimates
/// need not.
pub fn skew_of_score(column: &[f64], psi: OddTestFunction) -> Result<f64> {
    if column.is_empty() {
        return Err(Error::Parameter("skew of an empty column".into()));
    }
    psi.validate()?;
    if column.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("score column contains non-finite values".into()));
    }
    let n = column.len() as f64;
    let mean = column.iter().sum::<f64>() / n;
    let stat = column.iter().map(|&s| psi.apply(s - mean)).sum::<f64>() / n;
    Ok(stat.abs())
}

/// Bootstrap standard error of the skew statistic over `resamples` draws
/// with replacement.
pub fn skew_bootstrap_se<R: Rng>(
    column: &[f64],
    psi: OddTestFunction,
    resamples: usize,
    rng: &mut R,
) -> Result<f64> {
    if resamples < 2 {
        return Err(Error::Parameter("need at least 2 bootstrap resamples".into()));
    }
    let n = column.len();
    let mut stats = Vec::with_capacity(resamples);
    let mut buf = vec![0.0; n];
    for _ in 0..resamples {
        for slot in buf.iter_mut() {
            *slot = column[rng.gen_range(0..n)];
        }
        stats.push(skew_of_score(&buf, psi)?);
    }
    let m = stats.iter().sum::<f64>() / resamples as f64;
    Ok((stats.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (resamples - 1) as f64).sqrt())
}

/// Finds the minimum-skew column; ties break to the lowest column index.
/// Returns the winning column index (into `scores`) and the full skew
/// vector for diagnostics.
pub fn find_sink(scores: &ScoreMatrix, psi: OddTestFunction) -> Result<(usize, Vec<f64>)> {
    if scores.ncols() == 0 {
        return Err(Error::Parameter("find_sink on an empty score matrix".into()));
    }
    let mut skews = Vec::with_capacity(scores.ncols());
    for c in 0..scores.ncols() {
        let col: Vec<f64> = scores.column(c).iter().copied().collect();
        skews.push(skew_of_score(&col, psi)?);
    }
    let mut best = 0;
    for (c, &s) in skews.iter().enumerate() {
        if s < skews[best] {
            best = c;
        }
    }
    Ok((best, skews))
}

/// How the per-iteration symmetry-violation flag is thresholded. A minimum
/// skew far from zero suggests the symmetric-noise assumption is violated.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryCheck {
    /// Threshold = multiplier x bootstrap SE of the chosen column's skew.
    BootstrapSe { multiplier: f64, resamples: usize, seed: u64 },
    Fixed { threshold: f64 },
    Off,
}

impl Default for SymmetryCheck {
    fn default() -> Self {
        SymmetryCheck::BootstrapSe { multiplier: 3.0, resamples: 200, seed: 0 }
    }
}

/// One sink-elimination iteration, in original column indices.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct IterationDiagnostics {
    /// Columns still in play at the start of the iteration.
    pub remaining: Vec<usize>,
    /// Skew statistic per remaining column, aligned with `remaining`.
    pub skews: Vec<f64>,
    /// Column chosen as sink.
    pub chosen: usize,
    pub min_skew: f64,
    /// Symmetry threshold used (0 when the check is off).
    pub threshold: f64,
    pub symmetry_violation: bool,
}

#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
pub struct OrderDiagnostics {
    pub iterations: Vec<IterationDiagnostics>,
}

impl OrderDiagnostics {
    pub fn any_violation(&self) -> bool {
        self.iterations.iter().any(|it| it.symmetry_violation)
    }
}

/// Recovers a topological order by d rounds of score re-estimation and
/// sink removal.
pub fn topological_order(
    data: &DataMatrix,
    estimator: &dyn ScoreEstimator,
    psi: OddTestFunction,
    symmetry: SymmetryCheck,
) -> Result<(TopOrder, OrderDiagnostics)> {
    let d = data.ncols();
    if d == 0 {
        return Err(Error::Parameter("data has no columns".into()));
    }
    psi.validate()?;

    let mut remaining: Vec<usize> = (0..d).collect();
    let mut order: Vec<usize> = Vec::with_capacity(d);
    let mut diagnostics = OrderDiagnostics::default();

    while !remaining.is_empty() {
        let sub = data.select_columns(remaining.iter());
        let scores = estimator.scores(&sub, &remaining).map_err(|e| {
            Error::Training(format!(
                "score estimation failed with {} columns remaining ({:?}): {e}",
                remaining.len(),
                remaining
            ))
        })?;
        if scores.nrows() != data.nrows() || scores.ncols() != remaining.len() {
            return Err(Error::Data(format!(
                "estimator returned {}x{} scores for {}x{} data",
                scores.nrows(),
                scores.ncols(),
                data.nrows(),
                remaining.len()
            )));
        }
        let (local, skews) = find_sink(&scores, psi)?;
        let chosen = remaining[local];
        let min_skew = skews[local];

        let threshold = match symmetry {
            SymmetryCheck::Off => 0.0,
            SymmetryCheck::Fixed { threshold } => threshold,
            SymmetryCheck::BootstrapSe { multiplier, resamples, seed } => {
                let col: Vec<f64> = scores.column(local).iter().copied().collect();
                let mut rng =
                    ChaCha8Rng::seed_from_u64(seed ^ (order.len() as u64).wrapping_mul(0x9e3779b9));
                multiplier * skew_bootstrap_se(&col, psi, resamples, &mut rng)?
            }
        };
        let flagged = !matches!(symmetry, SymmetryCheck::Off) && min_skew > threshold;

        diagnostics.iterations.push(IterationDiagnostics {
            remaining: remaining.clone(),
            skews,
            chosen,
            min_skew,
            threshold,
            symmetry_violation: flagged,
        });
        order.insert(0, chosen);
        remaining.remove(local);
    }
    Ok((order, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::FnEstimator;
    use nalgebra::DMatrix;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn symmetric_two_point_column_has_zero_skew() {
        assert_eq!(skew_of_score(&[-1.0, 1.0], OddTestFunction::Cube).unwrap(), 0.0);
    }

    #[test]
    fn standard_normal_score_skew_is_small() {
        // Scores of the standard normal are -X; odd moments of a symmetric
        // law vanish.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 1_000_000;
        let col: Vec<f64> = (0..n)
            .map(|_| -rng.sample::<f64, _>(StandardNormal))
            .collect();
        let s = skew_of_score(&col, OddTestFunction::Cube).unwrap();
        assert!(s < 0.02, "skew {s}");
    }

    #[test]
    fn gumbel_score_skew_matches_closed_form() {
        // For Gumbel(beta) the statistic is 2 / beta^3; beta = 1 gives 2.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let gumbel = rand_distr::Gumbel::new(0.0, 1.0).unwrap();
        let n = 1_000_000;
        let col: Vec<f64> = (0..n)
            .map(|_| {
                let x: f64 = gumbel.sample(&mut rng);
                -1.0 + (-x).exp()
            })
            .collect();
        let s = skew_of_score(&col, OddTestFunction::Cube).unwrap();
        assert!((s - 2.0).abs() < 0.1, "skew {s}");
    }

    #[test]
    fn oddness_negation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let col: Vec<f64> = (0..500).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let neg: Vec<f64> = col.iter().map(|v| -v).collect();
        for psi in [
            OddTestFunction::Cube,
            OddTestFunction::SignedSquare,
            OddTestFunction::ScaledTanh { tau: 0.7 },
        ] {
            let a = skew_of_score(&col, psi).unwrap();
            let b = skew_of_score(&neg, psi).unwrap();
            assert!((a - b).abs() < 1e-14, "{psi:?}: {a} vs {b}");
        }
    }

    #[test]
    fn shared_rescaling_preserves_argmin() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 400;
        let scores = DMatrix::from_fn(n, 3, |_, c| {
            let z: f64 = StandardNormal.sample(&mut rng);
            (c as f64 + 1.0) * z.exp()
        });
        for psi in [OddTestFunction::Cube, OddTestFunction::SignedSquare] {
            let (a, _) = find_sink(&scores, psi).unwrap();
            let (b, _) = find_sink(&(&scores * 2.5), psi).unwrap();
            assert_eq!(a, b, "{psi:?}");
        }
    }

    #[test]
    fn find_sink_single_column() {
        let scores = DMatrix::from_column_slice(3, 1, &[1.0, -2.0, 0.5]);
        let (idx, skews) = find_sink(&scores, OddTestFunction::Cube).unwrap();
        assert_eq!(idx, 0);
        assert_eq!(skews.len(), 1);
    }

    #[test]
    fn find_sink_breaks_ties_to_lowest_index() {
        let scores = DMatrix::from_row_slice(2, 2, &[-1.0, -1.0, 1.0, 1.0]);
        let (idx, skews) = find_sink(&scores, OddTestFunction::Cube).unwrap();
        assert_eq!(skews, vec![0.0, 0.0]);
        assert_eq!(idx, 0);
    }

    #[test]
    fn single_column_order_is_trivial() {
        let data = DMatrix::from_column_slice(50, 1, &vec![0.5; 50]);
        let est = FnEstimator(|d: &DMatrix<f64>, _: &[usize]| Ok(d.clone()));
        let (order, diag) =
            topological_order(&data, &est, OddTestFunction::Cube, SymmetryCheck::Off).unwrap();
        assert_eq!(order, vec![0]);
        assert_eq!(diag.iterations.len(), 1);
    }

    #[test]
    fn injected_scores_recover_chain_order() {
        // Chain 0 -> 1 -> 2. Injected "scores" give column k a skew
        // proportional to (3 - k)^3, so column 2 is eliminated first and
        // the recovered order is [0, 1, 2].
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 1000;
        let base: Vec<f64> = (0..n)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .map(|z: f64| z.exp())
            .collect();
        let data = DMatrix::zeros(n, 3);
        let weights = [3.0, 2.0, 1.0];
        let est = FnEstimator(move |d: &DMatrix<f64>, cols: &[usize]| {
            Ok(DMatrix::from_fn(d.nrows(), cols.len(), |r, c| {
                weights[cols[c]] * base[r]
            }))
        });
        let (order, diag) =
            topological_order(&data, &est, OddTestFunction::Cube, SymmetryCheck::Off).unwrap();
        assert_eq!(order, vec![0, 1, 2]);
        for (k, it) in diag.iterations.iter().enumerate() {
            assert_eq!(it.chosen, 2 - k);
            assert_eq!(it.skews.len(), 3 - k);
        }
    }

    #[test]
    fn deterministic_given_config() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let data = DMatrix::from_fn(300, 3, |_, _| StandardNormal.sample(&mut rng));
        let est = crate::score::SteinEstimator(crate::score::SteinConfig::default());
        let run = || {
            topological_order(&data, &est, OddTestFunction::Cube, SymmetryCheck::default())
                .unwrap()
                .0
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn is_permutation_checks() {
        assert!(is_permutation(&[2, 0, 1], 3));
        assert!(!is_permutation(&[0, 0, 1], 3));
        assert!(!is_permutation(&[0, 1], 3));
    }
}

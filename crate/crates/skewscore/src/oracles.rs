//! Closed-form and quadrature ground truths for the skew-of-score
//! statistic, used as the test bedrock for the estimators and the ordering
//! loop.
//!
//! Covers: exact skew scores of the Gumbel and Gamma densities, the
//! confounded-pair cause-side skew as a Gaussian-weighted integral, the
//! identifiability discriminator (the expected cube of the cause-coordinate
//! score, written in the A/B/C expansion), and Monte-Carlo skew estimates
//! with bootstrap standard errors.

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::score::analytic::BivariateModelSpec;
use crate::score::analytic_score_bivariate;

/// Numerical integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Gauss-Hermite rule; exact for polynomial x Gaussian integrands of
    /// degree up to 2 nodes - 1.
    GaussHermite { nodes: usize },
    /// Uniform trapezoid on [-bound, bound] with grid doubling; spectrally
    /// accurate for smooth integrands that decay inside the bounds.
    AdaptiveTrapezoid { bound: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureConfig {
    pub scheme: Scheme,
    pub tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { scheme: Scheme::GaussHermite { nodes: 64 }, tolerance: 1e-9 }
    }
}

impl QuadratureConfig {
    fn validate(&self) -> Result<()> {
        if self.tolerance <= 0.0 {
            return Err(Error::Parameter("tolerance must be > 0".into()));
        }
        match self.scheme {
            Scheme::GaussHermite { nodes } if nodes < 16 => {
                Err(Error::Parameter("need at least 16 quadrature nodes".into()))
            }
            Scheme::AdaptiveTrapezoid { bound } if bound <= 0.0 => {
                Err(Error::Parameter("truncation bound must be > 0".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Gauss-Hermite nodes and weights for the weight `exp(-t^2)`, by
/// eigendecomposition of the Jacobi tridiagonal (off-diagonal sqrt(k/2),
/// weights from the first eigenvector components).
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return Err(Error::Parameter("need at least 2 nodes".into()));
    }
    let mut t = DMatrix::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        t[(k - 1, k)] = b;
        t[(k, k - 1)] = b;
    }
    let eig = t.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let w = std::f64::consts::PI.sqrt() * eig.eigenvectors[(0, i)].powi(2);
            (eig.eigenvalues[i], w)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(pairs.into_iter().unzip())
}

/// `int g(x) exp(-x^2 / 2) dx` via the substitution `x = sqrt(2) t`.
fn gaussian_weight_integral(g: &dyn Fn(f64) -> f64, nodes: usize) -> Result<f64> {
    let (t, w) = gauss_hermite(nodes)?;
    let s2 = 2.0f64.sqrt();
    Ok(s2 * t.iter().zip(&w).map(|(&ti, &wi)| wi * g(s2 * ti)).sum::<f64>())
}

/// Trapezoid on [-bound, bound], doubling the grid until successive values
/// agree within `tol`.
fn adaptive_trapezoid(g: &dyn Fn(f64) -> f64, bound: f64, tol: f64) -> Result<f64> {
    let mut m = 256usize;
    let mut prev = f64::NAN;
    for _ in 0..8 {
        let h = 2.0 * bound / m as f64;
        let mut sum = 0.5 * (g(-bound) + g(bound));
        for i in 1..m {
            sum += g(-bound + i as f64 * h);
        }
        let cur = sum * h;
        if prev.is_finite() && (cur - prev).abs() < tol {
            return Ok(cur);
        }
        prev = cur;
        m *= 2;
    }
    Err(Error::Numeric(format!(
        "trapezoid failed to converge on [-{bound}, {bound}]: last residual {:.3e}",
        prev
    )))
}

/// Exact skew score of the Gumbel density with scale `beta`: `2 / beta^3`.
pub fn skewscore_gumbel(beta: f64) -> Result<f64> {
    if beta <= 0.0 {
        return Err(Error::Parameter(format!("beta must be > 0, got {beta}")));
    }
    Ok(2.0 / (beta * beta * beta))
}

/// Exact skew score of the Gamma(k, theta) density for `k > 3`:
/// `theta^-3 * 4 / ((k - 3)(k - 2))`. The third moment of the score
/// diverges at k <= 3.
pub fn skewscore_gamma(k: f64, theta: f64) -> Result<f64> {
    if theta <= 0.0 {
        return Err(Error::Parameter(format!("theta must be > 0, got {theta}")));
    }
    if k <= 3.0 {
        return Err(Error::Parameter(format!(
            "k must be > 3 (score third moment diverges), got {k}"
        )));
    }
    Ok(4.0 / (theta.powi(3) * (k - 3.0) * (k - 2.0)))
}

/// Centered-cube skew statistic of a sample.
fn centered_cube_skew(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n).abs()
}

/// Monte-Carlo counterpart of [`skewscore_gumbel`]: samples the density and
/// averages the cubed log-density derivative.
pub fn mc_skewscore_gumbel<R: Rng>(beta: f64, n: usize, rng: &mut R) -> Result<f64> {
    if beta <= 0.0 {
        return Err(Error::Parameter(format!("beta must be > 0, got {beta}")));
    }
    let dist = rand_distr::Gumbel::new(0.0, beta)
        .map_err(|e| Error::Parameter(format!("gumbel: {e}")))?;
    let scores: Vec<f64> = (0..n)
        .map(|_| {
            let x: f64 = dist.sample(rng);
            (-1.0 + (-x / beta).exp()) / beta
        })
        .collect();
    Ok(centered_cube_skew(&scores))
}

/// Monte-Carlo counterpart of [`skewscore_gamma`].
pub fn mc_skewscore_gamma<R: Rng>(k: f64, theta: f64, n: usize, rng: &mut R) -> Result<f64> {
    skewscore_gamma(k, theta)?;
    let dist = rand_distr::Gamma::new(k, theta)
        .map_err(|e| Error::Parameter(format!("gamma: {e}")))?;
    let scores: Vec<f64> = (0..n)
        .map(|_| {
            let x: f64 = dist.sample(rng);
            (k - 1.0) / x - 1.0 / theta
        })
        .collect();
    Ok(centered_cube_skew(&scores))
}

/// Cause-side skew of the Gaussian confounded pair (the margin built by
/// [`BivariateModelSpec::latent_triangular_marginal`]):
///
/// ```text
/// Skew_x = (2 sqrt(2 pi) / pi) | int x f'(x) (f'(x) - 1) exp(-x^2/2) dx |
/// Skew_y = 0
/// ```
///
/// For a quadratic `f = a x^2 + b x + c` this vanishes exactly when
/// `b = 1/2`; for linear `f` it always vanishes.
pub fn confounded_anm_skew_x(
    f_prime: &dyn Fn(f64) -> f64,
    quad: &QuadratureConfig,
) -> Result<(f64, f64)> {
    quad.validate()?;
    let g = |x: f64| {
        let fp = f_prime(x);
        x * fp * (fp - 1.0)
    };
    let integral = match quad.scheme {
        Scheme::GaussHermite { nodes } => {
            let coarse = gaussian_weight_integral(&g, nodes)?;
            let fine = gaussian_weight_integral(&g, 2 * nodes)?;
            let residual = (fine - coarse).abs();
            if residual > quad.tolerance.max(1e-6 * fine.abs()) {
                return Err(Error::Numeric(format!(
                    "quadrature not converged: residual {residual:.3e} after doubling to {} nodes",
                    2 * nodes
                )));
            }
            fine
        }
        Scheme::AdaptiveTrapezoid { bound } => {
            let h = |x: f64| g(x) * (-0.5 * x * x).exp();
            adaptive_trapezoid(&h, bound, quad.tolerance)?
        }
    };
    let scale = 2.0 * (2.0 * std::f64::consts::PI).sqrt() / std::f64::consts::PI;
    Ok((scale * integral.abs(), 0.0))
}

/// Expected cube of the cause-coordinate score,
/// `E[(A + C u r)^3 + 3 (B r)^2 (A + C u r)]`, integrated against
/// `p_x(x) p_n(u)` on a tensor grid. A value within tolerance of zero
/// flags the model as unidentifiable by the skew criterion.
///
/// The densities are opaque handles, so this always integrates on the
/// adaptive tensor grid; the Gauss-Hermite scheme selection only sets the
/// default truncation bound.
pub fn assumption1_lhs(spec: &BivariateModelSpec, quad: &QuadratureConfig) -> Result<f64> {
    quad.validate()?;
    let bound = match quad.scheme {
        Scheme::AdaptiveTrapezoid { bound } => bound,
        Scheme::GaussHermite { .. } => 10.0,
    };

    let eval = |x: f64, u: f64| -> f64 {
        let px = (spec.px)(x);
        let pn = (spec.pn)(u);
        if px <= 0.0 || pn <= 0.0 {
            return 0.0;
        }
        let s = (spec.sigma)(x);
        let sp = (spec.sigma_prime)(x);
        let a = (spec.px_prime)(x) / px - sp / s;
        let b = -(spec.f_prime)(x) / s;
        let c = -sp / s;
        let r = (spec.pn_prime)(u) / pn;
        let even = a + c * u * r;
        (even.powi(3) + 3.0 * (b * r).powi(2) * even) * px * pn
    };

    let mut m = 256usize;
    let mut prev = f64::NAN;
    for _ in 0..6 {
        let h = 2.0 * bound / m as f64;
        let rows: Vec<f64> = (0..=m)
            .into_par_iter()
            .map(|i| {
                let x = -bound + i as f64 * h;
                let wx = if i == 0 || i == m { 0.5 } else { 1.0 };
                let mut inner = 0.0;
                for j in 0..=m {
                    let u = -bound + j as f64 * h;
                    let wu = if j == 0 || j == m { 0.5 } else { 1.0 };
                    inner += wu * eval(x, u);
                }
                wx * inner
            })
            .collect();
        let cur = rows.iter().sum::<f64>() * h * h;
        if !cur.is_finite() {
            return Err(Error::Numeric("divergent tails in the tensor integral".into()));
        }
        if prev.is_finite() && (cur - prev).abs() < quad.tolerance.max(1e-8) {
            return Ok(cur);
        }
        prev = cur;
        m *= 2;
    }
    Err(Error::Numeric(format!(
        "tensor quadrature failed to converge; last value {prev:.6e}"
    )))
}

/// Monte-Carlo skew of both score coordinates with bootstrap standard
/// errors.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct McSkewPair {
    pub skew_x: f64,
    pub skew_y: f64,
    pub se_x: f64,
    pub se_y: f64,
    pub n: usize,
}

impl McSkewPair {
    /// Margin between the cause-side and effect-side statistics.
    pub fn margin(&self) -> f64 {
        self.skew_x - self.skew_y
    }
}

fn bootstrap_se(values: &[f64], resamples: usize, seed: u64) -> f64 {
    let n = values.len();
    let stats: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (r as u64).wrapping_mul(0x9e3779b97f4a7c15));
            let resample: Vec<f64> = (0..n).map(|_| values[rng.gen_range(0..n)]).collect();
            centered_cube_skew(&resample)
        })
        .collect();
    let m = stats.iter().sum::<f64>() / resamples as f64;
    (stats.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (resamples - 1) as f64).sqrt()
}

/// Samples the model, scores the samples exactly, and returns centered-cube
/// skew estimates per coordinate with 200-resample bootstrap SEs.
pub fn mc_skew_pair(
    spec: &BivariateModelSpec,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<McSkewPair> {
    if n < 10 {
        return Err(Error::Parameter("mc_skew_pair needs n >= 10".into()));
    }
    let data = spec.sample_pair(n, rng)?;
    let scores = analytic_score_bivariate(spec, &data)?;
    let sx: Vec<f64> = scores.column(0).iter().copied().collect();
    let sy: Vec<f64> = scores.column(1).iter().copied().collect();
    let boot_seed: u64 = rand::Rng::gen(rng);
    Ok(McSkewPair {
        skew_x: centered_cube_skew(&sx),
        skew_y: centered_cube_skew(&sy),
        se_x: bootstrap_se(&sx, 200, boot_seed),
        se_y: bootstrap_se(&sy, 200, boot_seed.wrapping_add(1)),
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn gauss_hermite_low_moments() {
        // int exp(-t^2) = sqrt(pi); int t^2 exp(-t^2) = sqrt(pi)/2.
        let (t, w) = gauss_hermite(32).unwrap();
        let m0: f64 = w.iter().sum();
        let m2: f64 = t.iter().zip(&w).map(|(&ti, &wi)| wi * ti * ti).sum();
        let sp = std::f64::consts::PI.sqrt();
        assert!((m0 - sp).abs() < 1e-12, "m0 {m0}");
        assert!((m2 - sp / 2.0).abs() < 1e-12, "m2 {m2}");
    }

    #[test]
    fn closed_forms() {
        assert_eq!(skewscore_gumbel(1.0).unwrap(), 2.0);
        assert_eq!(skewscore_gumbel(2.0).unwrap(), 0.25);
        assert!((skewscore_gamma(5.0, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((skewscore_gamma(4.0, 2.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(skewscore_gumbel(-1.0).is_err());
        assert!(skewscore_gamma(3.0, 1.0).is_err());
    }

    #[test]
    fn monte_carlo_matches_gumbel_and_gamma() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = mc_skewscore_gumbel(1.0, 1_000_000, &mut rng).unwrap();
        assert!((g - 2.0).abs() / 2.0 < 0.05, "gumbel mc {g}");
        // k = 8 so the cubed score has finite variance (needs the sixth
        // inverse moment, which diverges for k <= 6).
        let gm = mc_skewscore_gamma(8.0, 1.0, 1_000_000, &mut rng).unwrap();
        let truth = skewscore_gamma(8.0, 1.0).unwrap();
        assert!((gm - truth).abs() / truth < 0.05, "gamma mc {gm} vs {truth}");
    }

    #[test]
    fn quadratic_mean_gives_eight() {
        let quad = QuadratureConfig::default();
        let (sx, sy) = confounded_anm_skew_x(&|x| 2.0 * x, &quad).unwrap();
        assert!((sx - 8.0).abs() < 1e-9, "skew_x {sx}");
        assert_eq!(sy, 0.0);
    }

    #[test]
    fn linear_and_half_slope_quadratics_vanish() {
        let quad = QuadratureConfig::default();
        let (lin, _) = confounded_anm_skew_x(&|_| 0.7, &quad).unwrap();
        assert!(lin.abs() < 1e-10, "linear {lin}");
        // f = a x^2 + x/2 + c has f' = 2 a x + 1/2.
        let (half, _) = confounded_anm_skew_x(&|x| 2.0 * 1.3 * x + 0.5, &quad).unwrap();
        assert!(half.abs() < 1e-10, "half slope {half}");
    }

    #[test]
    fn trapezoid_scheme_agrees_with_gauss_hermite() {
        let gh = QuadratureConfig::default();
        let tz = QuadratureConfig {
            scheme: Scheme::AdaptiveTrapezoid { bound: 12.0 },
            tolerance: 1e-10,
        };
        for fp in [
            Box::new(|x: f64| 2.0 * x) as Box<dyn Fn(f64) -> f64>,
            Box::new(|x: f64| 3.0 * x * x - 1.0),
            Box::new(|x: f64| 0.2 * x * x * x + x),
        ] {
            let (a, _) = confounded_anm_skew_x(&*fp, &gh).unwrap();
            let (b, _) = confounded_anm_skew_x(&*fp, &tz).unwrap();
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn node_doubling_is_stable() {
        let base = QuadratureConfig { scheme: Scheme::GaussHermite { nodes: 64 }, tolerance: 1e-9 };
        let dbl = QuadratureConfig { scheme: Scheme::GaussHermite { nodes: 128 }, tolerance: 1e-9 };
        let fp = |x: f64| 0.4 * x.powi(4) + 2.0 * x;
        let (a, _) = confounded_anm_skew_x(&fp, &base).unwrap();
        let (b, _) = confounded_anm_skew_x(&fp, &dbl).unwrap();
        assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn discriminator_separates_linear_from_quadratic() {
        let quad = QuadratureConfig::default();
        let null = BivariateModelSpec::gaussian_linear(0.8, 1.0);
        let lhs0 = assumption1_lhs(&null, &quad).unwrap();
        assert!(lhs0.abs() < 1e-4, "linear lhs {lhs0}");

        let ident = BivariateModelSpec::quadratic_confounded(1.0);
        let lhs1 = assumption1_lhs(&ident, &quad).unwrap();
        assert!(lhs1.abs() > 1e-3, "quadratic lhs {lhs1}");
        // The cause-side skew of this margin is 8, so the signed cube is -8.
        assert!((lhs1.abs() - 8.0).abs() < 1e-4, "quadratic lhs {lhs1}");
    }

    #[test]
    fn pure_noise_model_has_zero_lhs() {
        let quad = QuadratureConfig::default();
        let spec = BivariateModelSpec::independent_standard_normal();
        let lhs = assumption1_lhs(&spec, &quad).unwrap();
        assert!(lhs.abs() < 1e-8, "lhs {lhs}");
    }

    #[test]
    fn mc_pair_matches_quadrature_for_quadratic() {
        let spec = BivariateModelSpec::quadratic_confounded(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let r = mc_skew_pair(&spec, 400_000, &mut rng).unwrap();
        assert!((r.skew_x - 8.0).abs() / 8.0 < 0.05, "skew_x {}", r.skew_x);
        assert!(r.skew_y.abs() <= 3.0 * r.se_y, "skew_y {} se {}", r.skew_y, r.se_y);
    }

    #[test]
    fn lambda_scaling_is_linear_in_the_quadratic_case() {
        // f = x^2 scaled by lambda gives skew_x = 8 lambda.
        let quad = QuadratureConfig::default();
        for lambda in [0.5, 1.0, 2.0, 4.0] {
            let (s, _) = confounded_anm_skew_x(&|x| lambda * 2.0 * x, &quad).unwrap();
            assert!((s - 8.0 * lambda).abs() < 1e-8, "lambda {lambda}: {s}");
        }
        let spec = BivariateModelSpec::latent_triangular_marginal(
            2.0,
            Arc::new(|x| x * x),
            Arc::new(|x| 2.0 * x),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        // The cubed score has heavy tails at lambda = 2, so gate on the
        // bootstrap SE rather than a fixed relative tolerance.
        let r = mc_skew_pair(&spec, 1_000_000, &mut rng).unwrap();
        assert!(
            (r.skew_x - 16.0).abs() <= 4.0 * r.se_x.max(0.05),
            "skew_x {} se {}",
            r.skew_x,
            r.se_x
        );
    }
}

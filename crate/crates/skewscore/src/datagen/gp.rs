//! Gaussian-process function draws with an RBF covariance.
//!
//! A draw is realized as a random-Fourier-feature expansion so one handle can
//! be evaluated at arbitrary points in O(features) instead of re-conditioning
//! an n x n kernel matrix:
//!
//! ```text
//! f(u) = sqrt(2/m) * sum_k a_k cos(w_k . u + b_k),
//!        w_k ~ N(0, I / bandwidth^2),  b_k ~ U(0, 2pi),  a_k ~ N(0, 1)
//! ```
//!
//! which has mean zero and covariance converging to
//! `exp(-||u - u'||^2 / (2 bandwidth^2))` as `m` grows. An exact Cholesky
//! sampler over a fixed point set is kept alongside as a cross-check for
//! small n.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// One GP draw, evaluable at arbitrary points of dimension `dim`.
#[derive(Debug, Clone)]
pub struct GpFunction {
    dim: usize,
    scale: f64,
    /// Flattened m x dim frequency matrix.
    omegas: Vec<f64>,
    phases: Vec<f64>,
    amplitudes: Vec<f64>,
}

impl GpFunction {
    /// Samples one GP draw with RBF covariance of the given bandwidth.
    pub fn sample<R: Rng>(dim: usize, bandwidth: f64, n_features: usize, rng: &mut R) -> Result<Self> {
        if bandwidth <= 0.0 {
            return Err(Error::Parameter(format!("bandwidth must be > 0, got {bandwidth}")));
        }
        if n_features < 1 {
            return Err(Error::Parameter("n_features must be >= 1".into()));
        }
        if dim < 1 {
            return Err(Error::Parameter("dim must be >= 1".into()));
        }
        let m = n_features;
        let mut omegas = Vec::with_capacity(m * dim);
        let mut phases = Vec::with_capacity(m);
        let mut amplitudes = Vec::with_capacity(m);
        for _ in 0..m {
            for _ in 0..dim {
                let w: f64 = StandardNormal.sample(rng);
                omegas.push(w / bandwidth);
            }
            phases.push(rng.gen::<f64>() * std::f64::consts::TAU);
            amplitudes.push(StandardNormal.sample(rng));
        }
        Ok(GpFunction {
            dim,
            scale: (2.0 / m as f64).sqrt(),
            omegas,
            phases,
            amplitudes,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluates the draw at one point. Deterministic per handle.
    pub fn eval(&self, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.dim);
        let mut acc = 0.0;
        for k in 0..self.amplitudes.len() {
            let mut dot = self.phases[k];
            let row = &self.omegas[k * self.dim..(k + 1) * self.dim];
            for (w, x) in row.iter().zip(u) {
                dot += w * x;
            }
            acc += self.amplitudes[k] * dot.cos();
        }
        self.scale * acc
    }
}

/// Exact GP draw over a fixed point set via Cholesky of the RBF Gram matrix
/// (1e-6 jitter). Cross-check companion to [`GpFunction`]; O(n^3), use for
/// n <= 2000.
pub fn sample_gp_exact<R: Rng>(points: &[Vec<f64>], bandwidth: f64, rng: &mut R) -> Result<Vec<f64>> {
    let n = points.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if bandwidth <= 0.0 {
        return Err(Error::Parameter("bandwidth must be > 0".into()));
    }
    let two_bw2 = 2.0 * bandwidth * bandwidth;
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let sq: f64 = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            k[(i, j)] = (-sq / two_bw2).exp();
        }
        k[(i, i)] += 1e-6;
    }
    let chol = k
        .cholesky()
        .ok_or_else(|| Error::Numeric("GP Gram matrix not positive definite".into()))?;
    let z = DMatrix::from_fn(n, 1, |_, _| StandardNormal.sample(rng));
    let f = chol.l() * z;
    Ok(f.column(0).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn handle_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = GpFunction::sample(2, 1.0, 200, &mut rng).unwrap();
        let p = [0.3, -1.2];
        assert_eq!(f.eval(&p), f.eval(&p));
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(GpFunction::sample(1, 1.0, 0, &mut rng).is_err());
        assert!(GpFunction::sample(1, -1.0, 10, &mut rng).is_err());
    }

    #[test]
    fn marginal_variance_is_one() {
        // Monte Carlo against the GP marginal k(u0, u0) = 1.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u0 = [0.4];
        let n_draws = 2000;
        let vals: Vec<f64> = (0..n_draws)
            .map(|_| GpFunction::sample(1, 1.0, 500, &mut rng).unwrap().eval(&u0))
            .collect();
        let mean = vals.iter().sum::<f64>() / n_draws as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n_draws as f64;
        assert!((var - 1.0).abs() < 0.1, "variance {var}");
    }

    #[test]
    fn covariance_matches_rbf_kernel() {
        // Monte Carlo: Cov(f(0), f(r)) ~ exp(-r^2/2) at r = 1.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n_draws = 2000;
        let mut pairs = Vec::with_capacity(n_draws);
        for _ in 0..n_draws {
            let f = GpFunction::sample(1, 1.0, 500, &mut rng).unwrap();
            pairs.push((f.eval(&[0.0]), f.eval(&[1.0])));
        }
        let m0 = pairs.iter().map(|p| p.0).sum::<f64>() / n_draws as f64;
        let m1 = pairs.iter().map(|p| p.1).sum::<f64>() / n_draws as f64;
        let cov = pairs
            .iter()
            .map(|p| (p.0 - m0) * (p.1 - m1))
            .sum::<f64>()
            / n_draws as f64;
        let expected = (-0.5f64).exp();
        assert!((cov - expected).abs() < 0.05, "cov {cov} vs {expected}");
    }

    #[test]
    fn exact_sampler_covariance_cross_check() {
        // Empirical covariance of the exact Cholesky draw matches the RFF one.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let points = vec![vec![0.0], vec![1.0]];
        let n_draws = 2000;
        let mut cov = 0.0;
        let mut v0 = 0.0;
        for _ in 0..n_draws {
            let f = sample_gp_exact(&points, 1.0, &mut rng).unwrap();
            cov += f[0] * f[1];
            v0 += f[0] * f[0];
        }
        cov /= n_draws as f64;
        v0 /= n_draws as f64;
        assert!((v0 - 1.0).abs() < 0.1);
        assert!((cov - (-0.5f64).exp()).abs() < 0.06);
    }
}

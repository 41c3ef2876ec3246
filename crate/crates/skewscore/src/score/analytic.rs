//! Exact scores for bivariate models with known densities.
//!
//! For the joint `p(x, y) = p_x(x) * p_n(u) / sigma(x)` with
//! `u = (y - f(x)) / sigma(x)`, the score has the closed form
//!
//! ```text
//! d/dx log p = A(x) + B(x) r(u) + C(x) u r(u)
//! d/dy log p = r(u) / sigma(x)
//! ```
//!
//! with `A = p_x'/p_x - sigma'/sigma`, `B = -f'/sigma`,
//! `C = -sigma'/sigma`, and `r = p_n'/p_n`. This is the ground truth
//! against which the nonparametric estimators and the skew statistics are
//! tested.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

use super::ScoreMatrix;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type SampleFn = Arc<dyn Fn(&mut dyn RngCore) -> f64 + Send + Sync>;

/// Symmetric noise laws with closed-form densities, density derivatives,
/// and samplers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    StandardGaussian,
    /// Unit-scale Laplace.
    Laplace,
    StudentT { df: f64 },
}

impl NoiseKind {
    pub fn density(self) -> ScalarFn {
        match self {
            NoiseKind::StandardGaussian => Arc::new(|u: f64| {
                (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
            }),
            NoiseKind::Laplace => Arc::new(|u: f64| 0.5 * (-u.abs()).exp()),
            NoiseKind::StudentT { df } => {
                let c = gamma((df + 1.0) / 2.0)
                    / ((df * std::f64::consts::PI).sqrt() * gamma(df / 2.0));
                Arc::new(move |u: f64| c * (1.0 + u * u / df).powf(-(df + 1.0) / 2.0))
            }
        }
    }

    pub fn density_derivative(self) -> ScalarFn {
        let p = self.density();
        match self {
            NoiseKind::StandardGaussian => Arc::new(move |u: f64| -u * p(u)),
            NoiseKind::Laplace => Arc::new(move |u: f64| -u.signum() * p(u)),
            NoiseKind::StudentT { df } => {
                Arc::new(move |u: f64| -(df + 1.0) * u / (df + u * u) * p(u))
            }
        }
    }

    pub fn sampler(self) -> SampleFn {
        match self {
            NoiseKind::StandardGaussian => {
                Arc::new(|rng: &mut dyn RngCore| StandardNormal.sample(rng))
            }
            NoiseKind::Laplace => Arc::new(|rng: &mut dyn RngCore| {
                let e = rand_distr::Exp1.sample(rng);
                let sign: bool = rand::Rng::gen(rng);
                if sign {
                    e
                } else {
                    -e
                }
            }),
            NoiseKind::StudentT { df } => {
                let dist = rand_distr::StudentT::new(df).unwrap();
                Arc::new(move |rng: &mut dyn RngCore| dist.sample(rng))
            }
        }
    }
}

/// A fully specified bivariate model `Y = f(X) + sigma(X) N`: cause and
/// noise densities with derivatives, mean and scale with derivatives, and
/// (optionally) samplers so the same spec can both be scored and drawn from.
#[derive(Clone)]
pub struct BivariateModelSpec {
    pub px: ScalarFn,
    pub px_prime: ScalarFn,
    pub pn: ScalarFn,
    pub pn_prime: ScalarFn,
    pub f: ScalarFn,
    pub f_prime: ScalarFn,
    pub sigma: ScalarFn,
    pub sigma_prime: ScalarFn,
    pub sample_px: Option<SampleFn>,
    pub sample_pn: Option<SampleFn>,
}

impl std::fmt::Debug for BivariateModelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BivariateModelSpec")
            .field("samplable", &(self.sample_px.is_some() && self.sample_pn.is_some()))
            .finish_non_exhaustive()
    }
}

const DENSITY_FLOOR: f64 = 1e-300;

impl BivariateModelSpec {
    /// General constructor: standard-normal cause, chosen noise law, and
    /// explicit mean/scale handles with their derivatives.
    pub fn hsnm(
        f: ScalarFn,
        f_prime: ScalarFn,
        sigma: ScalarFn,
        sigma_prime: ScalarFn,
        noise: NoiseKind,
    ) -> Self {
        let gauss = NoiseKind::StandardGaussian;
        BivariateModelSpec {
            px: gauss.density(),
            px_prime: gauss.density_derivative(),
            pn: noise.density(),
            pn_prime: noise.density_derivative(),
            f,
            f_prime,
            sigma,
            sigma_prime,
            sample_px: Some(gauss.sampler()),
            sample_pn: Some(noise.sampler()),
        }
    }

    /// Independent standard normals: f = 0, sigma = 1.
    pub fn independent_standard_normal() -> Self {
        Self::gaussian_linear(0.0, 1.0)
    }

    /// `Y = b X + s N` with standard-normal X and N; the homoscedastic
    /// linear-Gaussian model, unidentifiable by the skew criterion.
    pub fn gaussian_linear(b: f64, s: f64) -> Self {
        assert!(s > 0.0, "scale must be positive");
        Self::hsnm(
            Arc::new(move |x| b * x),
            Arc::new(move |_| b),
            Arc::new(move |_| s),
            Arc::new(|_| 0.0),
            NoiseKind::StandardGaussian,
        )
    }

    /// Observed (X, Y) margin of the hidden-confounder triangle
    /// `X = Z + N0`, `Y = lambda f(X) - Z + N1` with Z, N0, N1 drawn
    /// N(0, 1/2): the confounder enters the two nodes with opposite signs.
    /// Then X is standard normal, `-Z | X ~ N(-x/2, 1/4)`, and the margin
    /// is itself a bivariate model with mean `lambda f(x) - x/2`, constant
    /// scale `sqrt(3)/2`, and Gaussian noise. Its cause-side skew has the
    /// closed form `(2 sqrt(2 pi) / pi) |int x g(x) (g(x) - 1)
    /// exp(-x^2/2) dx|` with `g = lambda f'`, the quadrature oracle's
    /// ground truth.
    pub fn latent_triangular_marginal(lambda: f64, f: ScalarFn, f_prime: ScalarFn) -> Self {
        assert!(lambda >= 0.0, "lambda must be nonnegative");
        let s = 3.0f64.sqrt() / 2.0;
        Self::hsnm(
            Arc::new(move |x| lambda * f(x) - 0.5 * x),
            Arc::new(move |x| lambda * f_prime(x) - 0.5),
            Arc::new(move |_| s),
            Arc::new(|_| 0.0),
            NoiseKind::StandardGaussian,
        )
    }

    /// Confounded triangle margin with the quadratic mean `f(x) = x^2`.
    pub fn quadratic_confounded(lambda: f64) -> Self {
        Self::latent_triangular_marginal(lambda, Arc::new(|x| x * x), Arc::new(|x| 2.0 * x))
    }

    pub fn is_samplable(&self) -> bool {
        self.sample_px.is_some() && self.sample_pn.is_some()
    }

    /// Draws n samples `(X, Y = f(X) + sigma(X) N)` from the model.
    pub fn sample_pair(&self, n: usize, rng: &mut dyn RngCore) -> Result<DMatrix<f64>> {
        let (spx, spn) = match (&self.sample_px, &self.sample_pn) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Parameter("model spec has no samplers".into())),
        };
        let mut data = DMatrix::zeros(n, 2);
        for row in 0..n {
            let x = spx(rng);
            let y = (self.f)(x) + (self.sigma)(x) * spn(rng);
            data[(row, 0)] = x;
            data[(row, 1)] = y;
        }
        Ok(data)
    }

    /// Log joint density, the substrate for finite-difference checks.
    pub fn log_joint(&self, x: f64, y: f64) -> Result<f64> {
        let s = (self.sigma)(x);
        let u = (y - (self.f)(x)) / s;
        let px = (self.px)(x);
        let pn = (self.pn)(u);
        if px <= DENSITY_FLOOR || pn <= DENSITY_FLOOR || s <= 0.0 {
            return Err(Error::Numeric(format!(
                "density underflow at (x, y) = ({x}, {y}): px = {px:e}, pn = {pn:e}"
            )));
        }
        Ok(px.ln() - s.ln() + pn.ln())
    }

    /// `d/dy log p(y | x)`, computed from the conditional density
    /// `p_n(u) / sigma(x)` alone. By the joint factorization this must
    /// coincide with the y column of [`analytic_score_bivariate`].
    pub fn conditional_score_y(&self, x: f64, y: f64) -> Result<f64> {
        let s = (self.sigma)(x);
        let u = (y - (self.f)(x)) / s;
        let pn = (self.pn)(u);
        if pn <= DENSITY_FLOOR {
            return Err(Error::Numeric(format!(
                "noise density underflow at (x, y) = ({x}, {y})"
            )));
        }
        Ok((self.pn_prime)(u) / pn / s)
    }

    /// Score of the joint at one point via the A/B/C expansion.
    pub fn score_at(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let s = (self.sigma)(x);
        let sp = (self.sigma_prime)(x);
        let u = (y - (self.f)(x)) / s;
        let px = (self.px)(x);
        let pn = (self.pn)(u);
        if px <= DENSITY_FLOOR || pn <= DENSITY_FLOOR || s <= 0.0 {
            return Err(Error::Numeric(format!(
                "density underflow at (x, y) = ({x}, {y}): px = {px:e}, pn = {pn:e}"
            )));
        }
        let r = (self.pn_prime)(u) / pn;
        let a = (self.px_prime)(x) / px - sp / s;
        let b = -(self.f_prime)(x) / s;
        let c = -sp / s;
        Ok((a + b * r + c * u * r, r / s))
    }
}

/// Exact score of the joint at every row of `points` (columns [x, y]).
pub fn analytic_score_bivariate(
    spec: &BivariateModelSpec,
    points: &DMatrix<f64>,
) -> Result<ScoreMatrix> {
    if points.ncols() != 2 {
        return Err(Error::Parameter(format!(
            "expected 2 columns, got {}",
            points.ncols()
        )));
    }
    let n = points.nrows();
    let mut out = DMatrix::zeros(n, 2);
    for i in 0..n {
        let (sx, sy) = spec.score_at(points[(i, 0)], points[(i, 1)])?;
        out[(i, 0)] = sx;
        out[(i, 1)] = sy;
    }
    Ok(out)
}

//! Synthetic structural-causal-model data.
//!
//! Every variable follows the heteroscedastic symmetric noise form
//! `X_i = f_i(pa(X_i)) + sigma_i(pa(X_i)) * N_i` with jointly independent
//! symmetric noise. Generators cover random ER graphs, the bivariate
//! GP-sig / Sig-abs formulations, the latent-confounded triangular model,
//! and multivariate graphs with pairwise hidden confounders.
//!
//! All sampling is pure given an explicit seeded generator: the same seed
//! reproduces a bit-identical matrix.

pub mod gp;

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dag::Dag;
use crate::error::{Error, Result};
pub use gp::{sample_gp_exact, GpFunction};

/// Euler–Mascheroni constant, used to mean-center Gumbel noise.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// n x d sample matrix; column j holds variable j.
pub type DataMatrix = DMatrix<f64>;

/// Ground-truth causal direction for a two-column dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Direction {
    /// Column 0 causes column 1.
    Forward,
    /// Column 1 causes column 0.
    Backward,
}

/// Exogenous noise distribution of one node.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum NoiseSpec {
    Gaussian { scale: f64 },
    StudentT { df: f64 },
    /// Gumbel is asymmetric; it exists for robustness stress tests.
    /// `centered` subtracts the mean `scale * EULER_GAMMA` so the asymmetry,
    /// not a mean shift, drives the stress.
    Gumbel { scale: f64, centered: bool },
}

impl NoiseSpec {
    pub fn standard_gaussian() -> Self {
        NoiseSpec::Gaussian { scale: 1.0 }
    }

    /// Student's t with degrees of freedom drawn uniformly from {2,3,4,5}.
    pub fn sampled_student_t<R: Rng>(rng: &mut R) -> Self {
        let df = *[2.0, 3.0, 4.0, 5.0].choose(rng).unwrap();
        NoiseSpec::StudentT { df }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseSpec::Gaussian { scale } | NoiseSpec::Gumbel { scale, .. } if *scale <= 0.0 => {
                Err(Error::Parameter(format!("noise scale must be > 0, got {scale}")))
            }
            NoiseSpec::StudentT { df } if *df <= 1.0 => {
                Err(Error::Parameter(format!("student-t df must be > 1, got {df}")))
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            NoiseSpec::Gaussian { scale } => {
                let z: f64 = StandardNormal.sample(rng);
                scale * z
            }
            NoiseSpec::StudentT { df } => rand_distr::StudentT::new(*df).unwrap().sample(rng),
            NoiseSpec::Gumbel { scale, centered } => {
                let g = rand_distr::Gumbel::new(0.0, *scale).unwrap().sample(rng);
                if *centered {
                    g - scale * EULER_GAMMA
                } else {
                    g
                }
            }
        }
    }
}

/// Noise family used when building a random SCM; per-node specs are drawn
/// from it (Student's t resamples its df for every node).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseFamily {
    Gaussian,
    StudentT,
    Gumbel,
    /// Uncentered Gumbel, for symmetry-violation experiments.
    GumbelRaw,
}

impl NoiseFamily {
    pub fn spec<R: Rng>(&self, rng: &mut R) -> NoiseSpec {
        match self {
            NoiseFamily::Gaussian => NoiseSpec::standard_gaussian(),
            NoiseFamily::StudentT => NoiseSpec::sampled_student_t(rng),
            NoiseFamily::Gumbel => NoiseSpec::Gumbel { scale: 1.0, centered: true },
            NoiseFamily::GumbelRaw => NoiseSpec::Gumbel { scale: 1.0, centered: false },
        }
    }
}

type MechFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Conditional mean, conditional scale, and noise of one node.
#[derive(Clone)]
pub struct Mechanism {
    pub f: MechFn,
    pub sigma: MechFn,
    pub noise: NoiseSpec,
    /// Lower bound r enforced on every sigma evaluation.
    pub sigma_floor: f64,
}

impl Mechanism {
    /// Root-node mechanism: f = 0, sigma = 1.
    pub fn root(noise: NoiseSpec) -> Self {
        Mechanism {
            f: Arc::new(|_| 0.0),
            sigma: Arc::new(|_| 1.0),
            noise,
            sigma_floor: 1.0,
        }
    }
}

impl std::fmt::Debug for Mechanism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Mechanism")
            .field("noise", &self.noise)
            .field("sigma_floor", &self.sigma_floor)
            .finish_non_exhaustive()
    }
}

/// Hidden pairwise confounders: each listed pair shares one standard-normal
/// latent entering both nodes additively with coefficient `coef`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LatentSpec {
    pub pairs: Vec<(usize, usize)>,
    pub coef: f64,
}

/// A structural causal model: graph plus one mechanism per node, with an
/// optional hidden-confounder overlay.
#[derive(Debug, Clone)]
pub struct Scm {
    pub graph: Dag,
    pub mechanisms: Vec<Mechanism>,
    pub latent: Option<LatentSpec>,
}

impl Scm {
    /// Random HSNM on the given graph: GP conditional means (RBF kernel,
    /// unit bandwidth, random Fourier features) and sigmoid conditional
    /// scales `0.5 + 1.5 * sigmoid(w.u + b)`; roots are pure noise.
    pub fn random_hsnm<R: Rng>(
        graph: Dag,
        family: NoiseFamily,
        n_features: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let d = graph.node_count();
        let mut mechanisms = Vec::with_capacity(d);
        for node in 0..d {
            let noise = family.spec(rng);
            let parents = graph.parents(node);
            if parents.is_empty() {
                mechanisms.push(Mechanism::root(noise));
            } else {
                let f = GpFunction::sample(parents.len(), 1.0, n_features, rng)?;
                let sigma = sigmoid_sigma(parents.len(), rng);
                mechanisms.push(Mechanism {
                    f: Arc::new(move |u: &[f64]| f.eval(u)),
                    sigma,
                    noise,
                    sigma_floor: 0.5,
                });
            }
        }
        Ok(Scm { graph, mechanisms, latent: None })
    }

    fn validate(&self) -> Result<()> {
        if self.mechanisms.len() != self.graph.node_count() {
            return Err(Error::Parameter(format!(
                "{} mechanisms for {} nodes",
                self.mechanisms.len(),
                self.graph.node_count()
            )));
        }
        for m in &self.mechanisms {
            m.noise.validate()?;
        }
        if let Some(latent) = &self.latent {
            let d = self.graph.node_count();
            for &(i, j) in &latent.pairs {
                if i >= d || j >= d || i == j {
                    return Err(Error::Parameter(format!("bad confounded pair ({i}, {j})")));
                }
            }
        }
        Ok(())
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Sigmoid conditional scale with coefficients drawn from U(-2, 2):
/// `sigma(u) = 0.5 + 1.5 * sigmoid(w.u + b)`, so sigma is in [0.5, 2.0].
pub fn sigmoid_sigma<R: Rng>(dim: usize, rng: &mut R) -> MechFn {
    let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let b: f64 = rng.gen_range(-2.0..2.0);
    Arc::new(move |u: &[f64]| {
        let dot: f64 = w.iter().zip(u).map(|(a, x)| a * x).sum();
        0.5 + 1.5 * sigmoid(dot + b)
    })
}

/// Invertible sigmoid conditional mean `a * sigmoid(b x + c) + e` with
/// nonzero a, b.
pub fn sig_abs_f<R: Rng>(rng: &mut R) -> MechFn {
    // Coefficients are kept away from zero: |c| >= 0.5 bounds the mechanism
    // away from the even-symmetric sigmoid, whose cause-side skew vanishes
    // and makes the direction unidentifiable.
    let a = rng.gen_range(1.0..2.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
    let b = rng.gen_range(1.0..2.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
    let c = rng.gen_range(0.5..2.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
    let e: f64 = rng.gen_range(-2.0..2.0);
    Arc::new(move |u: &[f64]| a * sigmoid(b * u[0] + c) + e)
}

/// `sigma(x) = max(|x|, 0.1)`; the clip keeps sigma bounded away from zero.
pub fn abs_sigma() -> MechFn {
    Arc::new(|u: &[f64]| u[0].abs().max(0.1))
}

/// Samples an Erdős–Rényi DAG: a uniform node permutation, then each
/// forward-ordered pair included independently with probability
/// `avg_edges / (d(d-1)/2)`.
pub fn sample_er_dag<R: Rng>(d: usize, avg_edges: usize, rng: &mut R) -> Result<Dag> {
    if d < 1 {
        return Err(Error::Parameter("d must be >= 1".into()));
    }
    let max_pairs = d * (d - 1) / 2;
    if avg_edges > max_pairs {
        return Err(Error::Parameter(format!(
            "avg_edges = {avg_edges} exceeds maximum {max_pairs} for d = {d}"
        )));
    }
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(rng);
    let p = if max_pairs == 0 { 0.0 } else { avg_edges as f64 / max_pairs as f64 };
    let mut dag = Dag::empty(d);
    for i in 0..d {
        for j in (i + 1)..d {
            if rng.gen::<f64>() < p {
                dag.add_edge(perm[i], perm[j]);
            }
        }
    }
    Ok(dag)
}

/// One GP draw over `dim` inputs; see [`GpFunction::sample`].
pub fn sample_gp_function<R: Rng>(
    dim: usize,
    bandwidth: f64,
    n_features: usize,
    rng: &mut R,
) -> Result<GpFunction> {
    GpFunction::sample(dim, bandwidth, n_features, rng)
}

/// Generates `n` samples from the SCM, nodes filled in topological order.
pub fn synthesize<R: Rng>(scm: &Scm, n: usize, rng: &mut R) -> Result<DataMatrix> {
    if n < 1 {
        return Err(Error::Parameter("n must be >= 1".into()));
    }
    scm.validate()?;
    let d = scm.graph.node_count();
    let order = scm
        .graph
        .topological_sort()
        .ok_or_else(|| Error::Parameter("scm graph is cyclic".into()))?;

    // Hidden confounders first so the node loop leaves the rng stream
    // untouched when no pairs exist.
    let latent_add = match &scm.latent {
        Some(spec) if !spec.pairs.is_empty() => {
            let mut add = vec![0.0f64; n * d];
            for &(i, j) in &spec.pairs {
                for row in 0..n {
                    let z: f64 = StandardNormal.sample(rng);
                    add[row * d + i] += spec.coef * z;
                    add[row * d + j] += spec.coef * z;
                }
            }
            Some(add)
        }
        _ => None,
    };

    let mut data = DMatrix::zeros(n, d);
    let mut pv = Vec::new();
    for &node in &order {
        let mech = &scm.mechanisms[node];
        let parents = scm.graph.parents(node);
        for row in 0..n {
            pv.clear();
            pv.extend(parents.iter().map(|&p| data[(row, p)]));
            let fv = (mech.f)(&pv);
            let sv = (mech.sigma)(&pv).max(mech.sigma_floor);
            let noise = mech.noise.sample(rng);
            let mut val = fv + sv * noise;
            if let Some(add) = &latent_add {
                val += add[row * d + node];
            }
            data[(row, node)] = val;
        }
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("synthesized matrix contains non-finite values".into()));
    }
    Ok(data)
}

/// Bivariate generation recipe from the experiments: GP mean with sigmoid
/// scale, or invertible sigmoid mean with absolute-value scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formulation {
    GpSig,
    SigAbs,
}

/// Builds the cause-effect pair SCM for one formulation. The cause is
/// standard normal; ground truth is always column 0 -> column 1.
pub fn bivariate_scm<R: Rng>(formulation: Formulation, noise: NoiseSpec, rng: &mut R) -> Result<Scm> {
    noise.validate()?;
    let mut dag = Dag::empty(2);
    dag.add_edge(0, 1);
    let effect = match formulation {
        Formulation::GpSig => {
            let f = GpFunction::sample(1, 1.0, 500, rng)?;
            Mechanism {
                f: Arc::new(move |u: &[f64]| f.eval(u)),
                sigma: sigmoid_sigma(1, rng),
                noise,
                sigma_floor: 0.5,
            }
        }
        Formulation::SigAbs => Mechanism {
            f: sig_abs_f(rng),
            sigma: abs_sigma(),
            noise,
            sigma_floor: 0.1,
        },
    };
    Ok(Scm {
        graph: dag,
        mechanisms: vec![Mechanism::root(NoiseSpec::standard_gaussian()), effect],
        latent: None,
    })
}

/// Samples a cause-effect pair dataset with columns [X, Y], X -> Y.
pub fn synthesize_bivariate<R: Rng>(
    formulation: Formulation,
    noise: NoiseSpec,
    n: usize,
    rng: &mut R,
) -> Result<(DataMatrix, Direction)> {
    let scm = bivariate_scm(formulation, noise, rng)?;
    let data = synthesize(&scm, n, rng)?;
    Ok((data, Direction::Forward))
}

/// Latent-confounded triangular model with explicit function handles:
/// `X = Z + N0`, `Y = lambda * f(X) + Z + sigma(X) * N1` with hidden
/// standard-normal Z (identity confounder maps).
pub fn synthesize_latent_triangular_with<R: Rng>(
    lambda: f64,
    f: &MechFn,
    sigma: &MechFn,
    sigma_floor: f64,
    q0: &NoiseSpec,
    q1: &NoiseSpec,
    n: usize,
    rng: &mut R,
) -> Result<(DataMatrix, Direction)> {
    if lambda < 0.0 {
        return Err(Error::Parameter(format!("lambda must be >= 0, got {lambda}")));
    }
    if n < 1 {
        return Err(Error::Parameter("n must be >= 1".into()));
    }
    q0.validate()?;
    q1.validate()?;
    let mut data = DMatrix::zeros(n, 2);
    for row in 0..n {
        let z: f64 = StandardNormal.sample(rng);
        let x = z + q0.sample(rng);
        let s = sigma(std::slice::from_ref(&x)).max(sigma_floor);
        let y = lambda * f(std::slice::from_ref(&x)) + z + s * q1.sample(rng);
        data[(row, 0)] = x;
        data[(row, 1)] = y;
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("triangular dataset contains non-finite values".into()));
    }
    Ok((data, Direction::Forward))
}

/// Latent-confounded triangular model with the mean/scale pair taken from a
/// bivariate formulation.
pub fn synthesize_latent_triangular<R: Rng>(
    lambda: f64,
    formulation: Formulation,
    q0: &NoiseSpec,
    q1: &NoiseSpec,
    n: usize,
    rng: &mut R,
) -> Result<(DataMatrix, Direction)> {
    let (f, sigma, floor): (MechFn, MechFn, f64) = match formulation {
        Formulation::GpSig => {
            let g = GpFunction::sample(1, 1.0, 500, rng)?;
            (
                Arc::new(move |u: &[f64]| g.eval(u)) as MechFn,
                sigmoid_sigma(1, rng),
                0.5,
            )
        }
        Formulation::SigAbs => (sig_abs_f(rng), abs_sigma(), 0.1),
    };
    synthesize_latent_triangular_with(lambda, &f, &sigma, floor, q0, q1, n, rng)
}

/// Multivariate HSNM with pairwise hidden confounders: each unordered node
/// pair is confounded independently with probability `rho` by one shared
/// additive standard-normal latent.
///
/// The rng is split into three derived streams (graph/mechanisms,
/// confounder mask, data), so `rho = 0` reduces bit-exactly to
/// [`synthesize`] on the same seed-derived SCM.
pub fn synthesize_confounded_multivariate<R: Rng>(
    d: usize,
    avg_edges: usize,
    rho: f64,
    n: usize,
    rng: &mut R,
) -> Result<(DataMatrix, Dag, Vec<(usize, usize)>)> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Parameter(format!("rho must be in [0, 1], got {rho}")));
    }
    let seed_scm = rng.gen::<u64>();
    let seed_mask = rng.gen::<u64>();
    let seed_data = rng.gen::<u64>();

    let mut rng_scm = ChaCha8Rng::seed_from_u64(seed_scm);
    let dag = sample_er_dag(d, avg_edges, &mut rng_scm)?;
    let mut scm = Scm::random_hsnm(dag.clone(), NoiseFamily::Gaussian, 500, &mut rng_scm)?;

    let mut rng_mask = ChaCha8Rng::seed_from_u64(seed_mask);
    let pairs = sample_confounded_pairs(d, rho, &mut rng_mask);
    if !pairs.is_empty() {
        scm.latent = Some(LatentSpec { pairs: pairs.clone(), coef: 1.0 });
    }

    let mut rng_data = ChaCha8Rng::seed_from_u64(seed_data);
    let data = synthesize(&scm, n, &mut rng_data)?;
    Ok((data, dag, pairs))
}

/// Bernoulli(rho) draw per unordered node pair, in (i, j) lexicographic order.
pub fn sample_confounded_pairs<R: Rng>(d: usize, rho: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            if rng.gen::<f64>() < rho {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Equal-count bin diagnostic of the conditional skewness of `y` given `x`.
/// Returns `(count, standardized skewness, standard error)` per bin.
pub fn binned_conditional_skewness(x: &[f64], y: &[f64], n_bins: usize) -> Vec<(usize, f64, f64)> {
    assert_eq!(x.len(), y.len());
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap());
    let per = x.len() / n_bins.max(1);
    let mut out = Vec::new();
    for b in 0..n_bins {
        let lo = b * per;
        let hi = if b + 1 == n_bins { x.len() } else { (b + 1) * per };
        if hi <= lo + 2 {
            continue;
        }
        let vals: Vec<f64> = idx[lo..hi].iter().map(|&i| y[i]).collect();
        let m = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / m;
        let m2 = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
        let m3 = vals.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / m;
        let skew = m3 / m2.powf(1.5);
        out.push((vals.len(), skew, (6.0 / m).sqrt()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn er_dag_single_node_is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let dag = sample_er_dag(1, 0, &mut rng).unwrap();
        assert_eq!(dag.edge_count(), 0);
    }

    #[test]
    fn er_dag_rejects_too_many_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_er_dag(3, 4, &mut rng).is_err());
    }

    #[test]
    fn er_dag_mean_edge_count() {
        // d = 10, avg_edges = 10: mean edge count over 1000 seeds ~ 10 +- 1.
        let mut total = 0usize;
        for seed in 0..1000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dag = sample_er_dag(10, 10, &mut rng).unwrap();
            assert!(dag.is_acyclic());
            total += dag.edge_count();
        }
        let mean = total as f64 / 1000.0;
        assert!((mean - 10.0).abs() < 1.0, "mean edges {mean}");
    }

    #[test]
    fn root_node_is_pure_noise() {
        let scm = Scm {
            graph: Dag::empty(1),
            mechanisms: vec![Mechanism::root(NoiseSpec::standard_gaussian())],
            latent: None,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data = synthesize(&scm, 100_000, &mut rng).unwrap();
        let col: Vec<f64> = data.column(0).iter().copied().collect();
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / col.len() as f64).sqrt();
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((sd - 1.0).abs() < 0.03, "sd {sd}");
    }

    #[test]
    fn zero_mean_chain_has_no_correlation() {
        let mut dag = Dag::empty(2);
        dag.add_edge(0, 1);
        let scm = Scm {
            graph: dag,
            mechanisms: vec![
                Mechanism::root(NoiseSpec::standard_gaussian()),
                Mechanism {
                    f: Arc::new(|_| 0.0),
                    sigma: Arc::new(|_| 1.0),
                    noise: NoiseSpec::standard_gaussian(),
                    sigma_floor: 1.0,
                },
            ],
            latent: None,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data = synthesize(&scm, 50_000, &mut rng).unwrap();
        let x: Vec<f64> = data.column(0).iter().copied().collect();
        let y: Vec<f64> = data.column(1).iter().copied().collect();
        let mx = x.iter().sum::<f64>() / x.len() as f64;
        let my = y.iter().sum::<f64>() / y.len() as f64;
        let cov: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / x.len() as f64;
        let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum::<f64>() / x.len() as f64;
        let vy: f64 = y.iter().map(|a| (a - my).powi(2)).sum::<f64>() / y.len() as f64;
        let corr = cov / (vx * vy).sqrt();
        assert!(corr.abs() < 0.02, "corr {corr}");
    }

    #[test]
    fn gp_sig_pair_is_heteroscedastic() {
        // Binned residual sd of Y over X bins must actually vary.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (data, _) =
            synthesize_bivariate(Formulation::GpSig, NoiseSpec::standard_gaussian(), 5000, &mut rng)
                .unwrap();
        let x: Vec<f64> = data.column(0).iter().copied().collect();
        let y: Vec<f64> = data.column(1).iter().copied().collect();
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap());
        let n_bins = 10;
        let per = x.len() / n_bins;
        let mut sds = Vec::new();
        for b in 0..n_bins {
            let vals: Vec<f64> = idx[b * per..(b + 1) * per].iter().map(|&i| y[i]).collect();
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            sds.push(
                (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / vals.len() as f64).sqrt(),
            );
        }
        let max = sds.iter().cloned().fold(f64::MIN, f64::max);
        let min = sds.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min > 1.2, "sd ratio {}", max / min);
    }

    #[test]
    fn sig_abs_conditional_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (data, _) =
            synthesize_bivariate(Formulation::SigAbs, NoiseSpec::standard_gaussian(), 5000, &mut rng)
                .unwrap();
        let x: Vec<f64> = data.column(0).iter().copied().collect();
        let y: Vec<f64> = data.column(1).iter().copied().collect();
        // In-bin drift of the conditional mean adds a little spurious skew on
        // top of sampling noise, hence the soft threshold.
        for (count, skew, _) in binned_conditional_skewness(&x, &y, 20) {
            if count >= 200 {
                assert!(skew.abs() < 0.35, "bin skew {skew} at count {count}");
            }
        }
    }

    #[test]
    fn sig_abs_sigma_is_clipped() {
        let s = abs_sigma();
        assert_eq!(s(&[0.0]), 0.1);
        assert_eq!(s(&[-3.0]), 3.0);
    }

    #[test]
    fn same_seed_bit_identical() {
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            synthesize_bivariate(Formulation::GpSig, NoiseSpec::standard_gaussian(), 500, &mut rng)
                .unwrap()
                .0
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn student_t2_stays_finite() {
        let mut dag = Dag::empty(3);
        dag.add_edge(0, 1);
        dag.add_edge(1, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut scm = Scm::random_hsnm(dag, NoiseFamily::StudentT, 100, &mut rng).unwrap();
        for m in &mut scm.mechanisms {
            m.noise = NoiseSpec::StudentT { df: 2.0 };
        }
        let data = synthesize(&scm, 20_000, &mut rng).unwrap();
        assert!(data.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn triangular_lambda_zero_correlation() {
        // lambda = 0, sigma = 1, Gaussian everything: corr(X, Y) = 0.5.
        let f: MechFn = Arc::new(|u: &[f64]| u[0] * u[0]);
        let s: MechFn = Arc::new(|_: &[f64]| 1.0);
        let q = NoiseSpec::standard_gaussian();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let (data, _) =
            synthesize_latent_triangular_with(0.0, &f, &s, 1.0, &q, &q, 100_000, &mut rng).unwrap();
        assert_eq!(data.ncols(), 2);
        let x: Vec<f64> = data.column(0).iter().copied().collect();
        let y: Vec<f64> = data.column(1).iter().copied().collect();
        let mx = x.iter().sum::<f64>() / x.len() as f64;
        let my = y.iter().sum::<f64>() / y.len() as f64;
        let cov: f64 =
            x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / x.len() as f64;
        let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum::<f64>() / x.len() as f64;
        let vy: f64 = y.iter().map(|a| (a - my).powi(2)).sum::<f64>() / y.len() as f64;
        let corr = cov / (vx * vy).sqrt();
        assert!((corr - 0.5).abs() < 0.02, "corr {corr}");
    }

    #[test]
    fn confounded_rho_zero_reduces_to_plain_synthesize() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let seed_scm = rng.gen::<u64>();
        let _seed_mask = rng.gen::<u64>();
        let seed_data = rng.gen::<u64>();

        let mut rng2 = ChaCha8Rng::seed_from_u64(77);
        let (data, dag, pairs) =
            synthesize_confounded_multivariate(5, 5, 0.0, 200, &mut rng2).unwrap();
        assert!(pairs.is_empty());

        let mut rng_scm = ChaCha8Rng::seed_from_u64(seed_scm);
        let expected_dag = sample_er_dag(5, 5, &mut rng_scm).unwrap();
        let scm = Scm::random_hsnm(expected_dag.clone(), NoiseFamily::Gaussian, 500, &mut rng_scm)
            .unwrap();
        let mut rng_data = ChaCha8Rng::seed_from_u64(seed_data);
        let expected = synthesize(&scm, 200, &mut rng_data).unwrap();
        assert_eq!(dag, expected_dag);
        assert_eq!(data, expected);
    }

    #[test]
    fn confounded_pair_count_mean() {
        // d = 10, rho = 0.2: mean confounded pairs over 1000 seeds ~ 9 +- 1.
        let mut total = 0usize;
        for seed in 0..1000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let _ = rng.gen::<u64>();
            let seed_mask = rng.gen::<u64>();
            let mut rng_mask = ChaCha8Rng::seed_from_u64(seed_mask);
            total += sample_confounded_pairs(10, 0.2, &mut rng_mask).len();
        }
        let mean = total as f64 / 1000.0;
        assert!((mean - 9.0).abs() < 1.0, "mean pairs {mean}");
    }

    #[test]
    fn gumbel_centering_removes_mean() {
        let spec = NoiseSpec::Gumbel { scale: 1.0, centered: true };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 200_000;
        let mean = (0..n).map(|_| spec.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
    }
}

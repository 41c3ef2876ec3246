//! Sliced score matching with a small tanh perceptron.
//!
//! Trains `s_theta : R^d -> R^d` to minimize the sliced objective
//!
//! ```text
//! E_v E_x [ v . d(v . s_theta(x))/dx + 0.5 (v . s_theta(x))^2 ]
//! ```
//!
//! with Rademacher projection vectors `v`. The directional derivative
//! (a Jacobian-vector product) is obtained either by nested forward-mode
//! differentiation through the network (exact) or by a central finite
//! difference along `v`. Gradients with respect to the weights are
//! hand-derived reverse passes over the primal/tangent computation.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

use super::ScoreMatrix;

/// How the directional derivative of the network is computed.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JvpMode {
    /// Exact forward-mode tangent propagation (default).
    Nested,
    /// Central difference `(s(x + hv) - s(x - hv)) / 2h`; the step is the
    /// factor times the mean column standard deviation.
    FiniteDifference { h_factor: f64 },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SsmConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub n_projections: usize,
    pub jvp: JvpMode,
}

impl Default for SsmConfig {
    fn default() -> Self {
        SsmConfig {
            hidden: vec![128, 128, 128],
            epochs: 50,
            batch_size: 128,
            learning_rate: 1e-3,
            n_projections: 1,
            jvp: JvpMode::Nested,
        }
    }
}

impl SsmConfig {
    fn validate(&self, n: usize) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::Parameter("epochs must be >= 1".into()));
        }
        if self.batch_size < 1 || n < self.batch_size {
            return Err(Error::Parameter(format!(
                "need n >= batch_size ({} < {})",
                n, self.batch_size
            )));
        }
        if self.n_projections < 1 {
            return Err(Error::Parameter("n_projections must be >= 1".into()));
        }
        if let JvpMode::FiniteDifference { h_factor } = self.jvp {
            if h_factor <= 0.0 {
                return Err(Error::Parameter("finite-difference step must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// Multilayer perceptron with tanh hidden units, columns-as-samples layout.
#[derive(Debug, Clone)]
pub struct Mlp {
    weights: Vec<DMatrix<f64>>,
    biases: Vec<DVector<f64>>,
}

struct ForwardState {
    /// Post-activation per hidden layer.
    acts: Vec<DMatrix<f64>>,
    /// Tangent of the post-activation per hidden layer.
    act_dots: Vec<DMatrix<f64>>,
    /// Pre-activation tangent per hidden layer.
    z_dots: Vec<DMatrix<f64>>,
    out: DMatrix<f64>,
    out_dot: DMatrix<f64>,
}

impl Mlp {
    fn init<R: Rng>(sizes: &[usize], rng: &mut R) -> Self {
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let s = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(DMatrix::from_fn(fan_out, fan_in, |_, _| rng.gen_range(-s..s)));
            biases.push(DVector::zeros(fan_out));
        }
        Mlp { weights, biases }
    }

    fn n_hidden(&self) -> usize {
        self.weights.len() - 1
    }

    /// Primal forward over a batch (columns are samples).
    fn forward(&self, x: &DMatrix<f64>) -> (Vec<DMatrix<f64>>, DMatrix<f64>) {
        let mut acts = Vec::with_capacity(self.n_hidden());
        let mut a = x.clone();
        for l in 0..self.n_hidden() {
            let mut z = &self.weights[l] * &a;
            add_bias(&mut z, &self.biases[l]);
            a = z.map(f64::tanh);
            acts.push(a.clone());
        }
        let mut out = &self.weights[self.n_hidden()] * &a;
        add_bias(&mut out, &self.biases[self.n_hidden()]);
        (acts, out)
    }

    /// Forward with tangent `v` pushed through every layer.
    fn forward_with_tangent(&self, x: &DMatrix<f64>, v: &DMatrix<f64>) -> ForwardState {
        let mut acts = Vec::new();
        let mut act_dots = Vec::new();
        let mut z_dots = Vec::new();
        let mut a = x.clone();
        let mut a_dot = v.clone();
        for l in 0..self.n_hidden() {
            let mut z = &self.weights[l] * &a;
            add_bias(&mut z, &self.biases[l]);
            let z_dot = &self.weights[l] * &a_dot;
            a = z.map(f64::tanh);
            a_dot = a.zip_map(&z_dot, |ai, zd| (1.0 - ai * ai) * zd);
            acts.push(a.clone());
            act_dots.push(a_dot.clone());
            z_dots.push(z_dot);
        }
        let last = self.n_hidden();
        let mut out = &self.weights[last] * &a;
        add_bias(&mut out, &self.biases[last]);
        let out_dot = &self.weights[last] * &a_dot;
        ForwardState { acts, act_dots, z_dots, out, out_dot }
    }

    /// Evaluates the network at every row of `data` (rows are samples).
    pub fn eval_rows(&self, data: &DMatrix<f64>) -> ScoreMatrix {
        let x = data.transpose();
        let (_, out) = self.forward(&x);
        out.transpose()
    }
}

fn add_bias(z: &mut DMatrix<f64>, b: &DVector<f64>) {
    for mut col in z.column_iter_mut() {
        col += b;
    }
}

fn rademacher<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| if rng.gen::<bool>() { 1.0 } else { -1.0 })
}

struct Grads {
    dw: Vec<DMatrix<f64>>,
    db: Vec<DVector<f64>>,
}

impl Grads {
    fn zeros_like(net: &Mlp) -> Self {
        Grads {
            dw: net.weights.iter().map(|w| DMatrix::zeros(w.nrows(), w.ncols())).collect(),
            db: net.biases.iter().map(|b| DVector::zeros(b.nrows())).collect(),
        }
    }
}

/// One sliced-score-matching loss + gradient evaluation on a batch, exact
/// JVP via tangent propagation.
fn batch_loss_grads_nested(
    net: &Mlp,
    x: &DMatrix<f64>,
    v: &DMatrix<f64>,
    grads: &mut Grads,
) -> f64 {
    let bsz = x.ncols() as f64;
    let st = net.forward_with_tangent(x, v);
    let nh = net.n_hidden();

    // Loss = mean_b [ v.s_dot + 0.5 (v.s)^2 ].
    let mut loss = 0.0;
    let mut t = DVector::zeros(x.ncols());
    for (bi, (sc, vc)) in st.out.column_iter().zip(v.column_iter()).enumerate() {
        let vs: f64 = sc.iter().zip(vc.iter()).map(|(a, b)| a * b).sum();
        let vsd: f64 = st
            .out_dot
            .column(bi)
            .iter()
            .zip(vc.iter())
            .map(|(a, b)| a * b)
            .sum();
        t[bi] = vs;
        loss += vsd + 0.5 * vs * vs;
    }
    loss /= bsz;

    // d loss / d s = v * (v.s) / B, d loss / d s_dot = v / B.
    let mut gs = v.clone();
    for (bi, mut col) in gs.column_iter_mut().enumerate() {
        col *= t[bi] / bsz;
    }
    let gs_dot = v.map(|e| e / bsz);

    // Output layer.
    let a_last = &st.acts[nh - 1];
    let ad_last = &st.act_dots[nh - 1];
    grads.dw[nh] += &gs * a_last.transpose() + &gs_dot * ad_last.transpose();
    for row in 0..net.biases[nh].nrows() {
        grads.db[nh][row] += gs.row(row).sum();
    }
    let mut ga = net.weights[nh].transpose() * &gs;
    let mut ga_dot = net.weights[nh].transpose() * &gs_dot;

    // Hidden layers, last to first.
    for l in (0..nh).rev() {
        let a = &st.acts[l];
        let zd = &st.z_dots[l];
        // gz = (1 - a^2) ga + ga_dot zd (-2a)(1 - a^2); gzd = (1 - a^2) ga_dot.
        let one_m_a2 = a.map(|ai| 1.0 - ai * ai);
        let gz = one_m_a2.component_mul(&ga)
            + ga_dot
                .component_mul(zd)
                .component_mul(&a.map(|ai| -2.0 * ai))
                .component_mul(&one_m_a2);
        let gzd = one_m_a2.component_mul(&ga_dot);

        let (a_prev, ad_prev): (&DMatrix<f64>, &DMatrix<f64>) = if l == 0 {
            (x, v)
        } else {
            (&st.acts[l - 1], &st.act_dots[l - 1])
        };
        grads.dw[l] += &gz * a_prev.transpose() + &gzd * ad_prev.transpose();
        for row in 0..net.biases[l].nrows() {
            grads.db[l][row] += gz.row(row).sum();
        }
        if l > 0 {
            ga = net.weights[l].transpose() * &gz;
            ga_dot = net.weights[l].transpose() * &gzd;
        }
    }
    loss
}

/// Plain reverse pass for a primal-only forward, used by the
/// finite-difference JVP mode.
fn backward_primal(
    net: &Mlp,
    x: &DMatrix<f64>,
    acts: &[DMatrix<f64>],
    g_out: &DMatrix<f64>,
    grads: &mut Grads,
) {
    let nh = net.n_hidden();
    grads.dw[nh] += g_out * acts[nh - 1].transpose();
    for row in 0..net.biases[nh].nrows() {
        grads.db[nh][row] += g_out.row(row).sum();
    }
    let mut ga = net.weights[nh].transpose() * g_out;
    for l in (0..nh).rev() {
        let gz = acts[l].map(|ai| 1.0 - ai * ai).component_mul(&ga);
        let a_prev: &DMatrix<f64> = if l == 0 { x } else { &acts[l - 1] };
        grads.dw[l] += &gz * a_prev.transpose();
        for row in 0..net.biases[l].nrows() {
            grads.db[l][row] += gz.row(row).sum();
        }
        if l > 0 {
            ga = net.weights[l].transpose() * &gz;
        }
    }
}

fn batch_loss_grads_fd(
    net: &Mlp,
    x: &DMatrix<f64>,
    v: &DMatrix<f64>,
    h: f64,
    grads: &mut Grads,
) -> f64 {
    let bsz = x.ncols() as f64;
    let xp = x + v * h;
    let xm = x - v * h;
    let (acts, s) = net.forward(x);
    let (acts_p, sp) = net.forward(&xp);
    let (acts_m, sm) = net.forward(&xm);

    let mut loss = 0.0;
    let mut t = DVector::zeros(x.ncols());
    for bi in 0..x.ncols() {
        let vc = v.column(bi);
        let vs: f64 = s.column(bi).iter().zip(vc.iter()).map(|(a, b)| a * b).sum();
        let vsd: f64 = sp
            .column(bi)
            .iter()
            .zip(sm.column(bi).iter())
            .zip(vc.iter())
            .map(|((p, m), b)| (p - m) / (2.0 * h) * b)
            .sum();
        t[bi] = vs;
        loss += vsd + 0.5 * vs * vs;
    }
    loss /= bsz;

    let mut gs = v.clone();
    for (bi, mut col) in gs.column_iter_mut().enumerate() {
        col *= t[bi] / bsz;
    }
    let g_p = v.map(|e| e / (2.0 * h * bsz));
    let g_m = v.map(|e| -e / (2.0 * h * bsz));
    backward_primal(net, x, &acts, &gs, grads);
    backward_primal(net, &xp, &acts_p, &g_p, grads);
    backward_primal(net, &xm, &acts_m, &g_m, grads);
    loss
}

struct Adam {
    m: Grads,
    v: Grads,
    t: usize,
}

impl Adam {
    fn new(net: &Mlp) -> Self {
        Adam { m: Grads::zeros_like(net), v: Grads::zeros_like(net), t: 0 }
    }

    fn step(&mut self, net: &mut Mlp, grads: &Grads, lr: f64) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.t += 1;
        let bc1 = 1.0 - B1.powi(self.t as i32);
        let bc2 = 1.0 - B2.powi(self.t as i32);
        for l in 0..net.weights.len() {
            for (w, (g, (m, v))) in net.weights[l].iter_mut().zip(
                grads.dw[l]
                    .iter()
                    .zip(self.m.dw[l].iter_mut().zip(self.v.dw[l].iter_mut())),
            ) {
                *m = B1 * *m + (1.0 - B1) * g;
                *v = B2 * *v + (1.0 - B2) * g * g;
                *w -= lr * (*m / bc1) / ((*v / bc2).sqrt() + EPS);
            }
            for (w, (g, (m, v))) in net.biases[l].iter_mut().zip(
                grads.db[l]
                    .iter()
                    .zip(self.m.db[l].iter_mut().zip(self.v.db[l].iter_mut())),
            ) {
                *m = B1 * *m + (1.0 - B1) * g;
                *v = B2 * *v + (1.0 - B2) * g * g;
                *w -= lr * (*m / bc1) / ((*v / bc2).sqrt() + EPS);
            }
        }
    }
}

/// Trains the network; returns the model and the per-epoch mean loss trace.
pub fn train_ssm<R: Rng>(
    data: &DMatrix<f64>,
    cfg: &SsmConfig,
    rng: &mut R,
) -> Result<(Mlp, Vec<f64>)> {
    let (n, d) = (data.nrows(), data.ncols());
    cfg.validate(n)?;
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Data("data contains non-finite values".into()));
    }

    let mut sizes = vec![d];
    sizes.extend_from_slice(&cfg.hidden);
    sizes.push(d);
    let mut net = Mlp::init(&sizes, rng);
    let mut adam = Adam::new(&net);

    let fd_step = match cfg.jvp {
        JvpMode::Nested => None,
        JvpMode::FiniteDifference { h_factor } => {
            let mut scale = 0.0;
            for c in 0..d {
                let col = data.column(c);
                let mean = col.sum() / n as f64;
                scale +=
                    (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
            }
            Some((scale / d as f64).max(1e-12) * h_factor)
        }
    };

    let mut order: Vec<usize> = (0..n).collect();
    let mut losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let bsz = chunk.len();
            let x = DMatrix::from_fn(d, bsz, |r, c| data[(chunk[c], r)]);
            let mut grads = Grads::zeros_like(&net);
            let mut loss = 0.0;
            for _ in 0..cfg.n_projections {
                let v = rademacher(d, bsz, rng);
                loss += match fd_step {
                    None => batch_loss_grads_nested(&net, &x, &v, &mut grads),
                    Some(h) => batch_loss_grads_fd(&net, &x, &v, h, &mut grads),
                };
            }
            loss /= cfg.n_projections as f64;
            if !loss.is_finite() {
                return Err(Error::Training(format!(
                    "non-finite loss at epoch {epoch}; last good epoch {} with loss {:.6}",
                    epoch.saturating_sub(1),
                    losses.last().copied().unwrap_or(f64::NAN)
                )));
            }
            if cfg.n_projections > 1 {
                let inv = 1.0 / cfg.n_projections as f64;
                for g in &mut grads.dw {
                    *g *= inv;
                }
                for g in &mut grads.db {
                    *g *= inv;
                }
            }
            adam.step(&mut net, &grads, cfg.learning_rate);
            epoch_loss += loss;
            batches += 1;
        }
        losses.push(epoch_loss / batches as f64);
    }
    Ok((net, losses))
}

/// Trains a sliced-score-matching network and evaluates it at the samples.
///
/// Columns are standardized before training and the returned scores are
/// rescaled by `1 / sd` per column, which is the exact change of variables
/// for the score of the original density. Unstandardized inputs with large
/// offsets saturate the tanh units at initialization and train poorly.
pub fn estimate_score_ssm<R: Rng>(
    data: &DMatrix<f64>,
    cfg: &SsmConfig,
    rng: &mut R,
) -> Result<ScoreMatrix> {
    let (n, d) = (data.nrows(), data.ncols());
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Data("data contains non-finite values".into()));
    }
    let mut work = data.clone();
    let mut sds = vec![1.0; d];
    for c in 0..d {
        let col = work.column(c);
        let mean = col.sum() / n as f64;
        let sd =
            (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt().max(1e-12);
        sds[c] = sd;
        for r in 0..n {
            work[(r, c)] = (work[(r, c)] - mean) / sd;
        }
    }
    let (net, _) = train_ssm(&work, cfg, rng)?;
    let mut g = net.eval_rows(&work);
    for c in 0..d {
        for r in 0..n {
            g[(r, c)] /= sds[c];
        }
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Training("trained network produced non-finite scores".into()));
    }
    Ok(g)
}

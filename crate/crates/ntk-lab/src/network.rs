//! Finite-width fully-connected ReLU networks: initialization (standard and
//! mirrored), forward evaluation, exact reverse-mode parameter gradients, the
//! empirical tangent kernel, and full-batch gradient-descent training.
//!
//! Architecture, for input `x` in `R^d` and hidden widths `m_1..m_L`:
//!
//! ```text
//! a^(1) = sqrt(2/m_1) (W^(0) x + b^(0))          W^(0): m_1 x d
//! a^(l) = sqrt(2/m_l) W^(l-1) relu(a^(l-1))      W^(l-1): m_l x m_{l-1}
//! f(x)  = s_out * W^(L) relu(a^(L))              W^(L): 1 x m_L
//! ```
//!
//! All parameter entries are i.i.d. standard normal at initialization. With
//! the `sqrt(2/m_l)` factors inside the pre-activations, the initial output
//! already has width-stable second moments equal to the closed-form
//! random-feature covariance kernel, so the default output scale `s_out` is 1
//! (see [`OutputScaleMode`]).
//!
//! Mirrored mode holds two copies with identical initial parameters and
//! outputs `(sqrt(2)/2) (f1 - f2)`, which is exactly zero at initialization
//! while keeping the tangent kernel of a single copy.
//!
//! Parameter flattening order (used by gradients and checkpoints): copy 1
//! then copy 2; within a copy, `W^(0)` row-major, then `b^(0)` if present,
//! then `W^(1)..W^(L-1)` row-major, then the output row `W^(L)`.

use crate::error::{Error, Result};
use crate::kernels::Point;
use crate::kgf::KgfPredictor;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

/// Loss blow-up factor (relative to the initial loss) that aborts training.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    /// Single copy; the initial function is random.
    Standard,
    /// Paired copies, equal at initialization; the initial function is zero.
    Mirrored,
}

impl std::fmt::Display for InitMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitMode::Standard => write!(f, "standard"),
            InitMode::Mirrored => write!(f, "mirrored"),
        }
    }
}

/// Output-layer scaling.
///
/// `Unit` is the default: the `sqrt(2/m_l)` pre-activation normalization
/// already makes `Var f(x)` equal to the random-feature covariance kernel at
/// any width (exactly for one hidden layer), so no extra factor is needed —
/// this is verified by the covariance tests. `InvSqrtWidth` multiplies the
/// output by an additional `1/sqrt(m_L)` for comparison runs; its outputs
/// shrink with width and do not match the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputScaleMode {
    Unit,
    InvSqrtWidth,
}

impl std::fmt::Display for OutputScaleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OutputScaleMode::Unit => write!(f, "unit"),
            OutputScaleMode::InvSqrtWidth => write!(f, "inv-sqrt-width"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub input_dim: usize,
    /// Number of hidden layers (at least 1).
    pub depth: usize,
    /// Hidden widths `m_1..m_L`; length must equal `depth`.
    pub widths: Vec<usize>,
    pub init_mode: InitMode,
    pub with_first_layer_bias: bool,
    pub output_scale_mode: OutputScaleMode,
    pub seed: u64,
}

impl NetworkConfig {
    /// All hidden layers at the same width `m` — the layout used everywhere
    /// in practice.
    pub fn uniform(
        input_dim: usize,
        depth: usize,
        m: usize,
        init_mode: InitMode,
        with_first_layer_bias: bool,
        seed: u64,
    ) -> Self {
        NetworkConfig {
            input_dim,
            depth,
            widths: vec![m; depth],
            init_mode,
            with_first_layer_bias,
            output_scale_mode: OutputScaleMode::Unit,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::Config("input_dim must be at least 1".into()));
        }
        if self.depth == 0 {
            return Err(Error::Config("depth must be at least 1".into()));
        }
        if self.widths.len() != self.depth {
            return Err(Error::Config(format!(
                "widths has {} entries but depth is {}",
                self.widths.len(),
                self.depth
            )));
        }
        if self.widths.iter().any(|&m| m == 0) {
            return Err(Error::Config("all widths must be at least 1".into()));
        }
        Ok(())
    }

    fn out_scale(&self) -> f64 {
        match self.output_scale_mode {
            OutputScaleMode::Unit => 1.0,
            OutputScaleMode::InvSqrtWidth => {
                1.0 / (self.widths[self.depth - 1] as f64).sqrt()
            }
        }
    }

    /// Parameter count of a single copy.
    pub fn params_per_copy(&self) -> usize {
        let mut count = self.widths[0] * self.input_dim;
        if self.with_first_layer_bias {
            count += self.widths[0];
        }
        for l in 1..self.depth {
            count += self.widths[l] * self.widths[l - 1];
        }
        count + self.widths[self.depth - 1]
    }

    /// Total parameter count (doubled in mirrored mode).
    pub fn total_params(&self) -> usize {
        match self.init_mode {
            InitMode::Standard => self.params_per_copy(),
            InitMode::Mirrored => 2 * self.params_per_copy(),
        }
    }
}

/// Weights of one network copy.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfParams {
    /// First layer, `widths[0] x input_dim`.
    pub w0: DMatrix<f64>,
    /// First-layer bias, present iff configured.
    pub b0: Option<DVector<f64>>,
    /// Hidden-to-hidden layers `W^(1)..W^(L-1)`, `widths[l] x widths[l-1]`.
    pub hidden: Vec<DMatrix<f64>>,
    /// Output row `W^(L)`, length `widths[L-1]`.
    pub w_out: DVector<f64>,
}

impl HalfParams {
    fn draw(cfg: &NetworkConfig, rng: &mut ChaCha8Rng) -> HalfParams {
        let mut normal = || -> f64 { StandardNormal.sample(rng) };
        let m1 = cfg.widths[0];
        // Row-major draw order, matching the flattening order.
        let w0 = DMatrix::from_row_iterator(m1, cfg.input_dim, (0..m1 * cfg.input_dim).map(|_| normal()));
        let b0 = cfg
            .with_first_layer_bias
            .then(|| DVector::from_iterator(m1, (0..m1).map(|_| normal())));
        let hidden = (1..cfg.depth)
            .map(|l| {
                let (rows, cols) = (cfg.widths[l], cfg.widths[l - 1]);
                DMatrix::from_row_iterator(rows, cols, (0..rows * cols).map(|_| normal()))
            })
            .collect();
        let m_last = cfg.widths[cfg.depth - 1];
        let w_out = DVector::from_iterator(m_last, (0..m_last).map(|_| normal()));
        HalfParams { w0, b0, hidden, w_out }
    }

    fn append_flat(&self, out: &mut Vec<f64>) {
        for r in 0..self.w0.nrows() {
            out.extend(self.w0.row(r).iter());
        }
        if let Some(b) = &self.b0 {
            out.extend(b.iter());
        }
        for w in &self.hidden {
            for r in 0..w.nrows() {
                out.extend(w.row(r).iter());
            }
        }
        out.extend(self.w_out.iter());
    }

    fn from_flat(cfg: &NetworkConfig, flat: &[f64]) -> HalfParams {
        let mut pos = 0;
        let mut take = |len: usize| {
            let s = &flat[pos..pos + len];
            pos += len;
            s.to_vec()
        };
        let m1 = cfg.widths[0];
        let w0 = DMatrix::from_row_slice(m1, cfg.input_dim, &take(m1 * cfg.input_dim));
        let b0 = cfg
            .with_first_layer_bias
            .then(|| DVector::from_vec(take(m1)));
        let hidden = (1..cfg.depth)
            .map(|l| {
                let (rows, cols) = (cfg.widths[l], cfg.widths[l - 1]);
                DMatrix::from_row_slice(rows, cols, &take(rows * cols))
            })
            .collect();
        let w_out = DVector::from_vec(take(cfg.widths[cfg.depth - 1]));
        debug_assert_eq!(pos, flat.len());
        HalfParams { w0, b0, hidden, w_out }
    }
}

/// Network parameters: one copy in standard mode, a pair in mirrored mode.
#[derive(Debug, Clone)]
pub struct NetworkParams {
    pub config: NetworkConfig,
    pub half1: HalfParams,
    /// Present iff `config.init_mode` is `Mirrored`; equals `half1` at init.
    pub half2: Option<HalfParams>,
}

/// Draws all parameter entries i.i.d. standard normal from the config seed;
/// mirrored mode duplicates the first copy exactly.
pub fn init_params(cfg: &NetworkConfig) -> Result<NetworkParams> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let half1 = HalfParams::draw(cfg, &mut rng);
    let half2 = match cfg.init_mode {
        InitMode::Standard => None,
        InitMode::Mirrored => Some(half1.clone()),
    };
    Ok(NetworkParams {
        config: cfg.clone(),
        half1,
        half2,
    })
}

#[inline]
fn relu_in_place(m: &mut [f64]) {
    for v in m {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

/// Per-copy activation workspace for batched evaluation; `h[l]` is
/// `widths[l] x n` and holds post-activation values after a forward pass.
struct HalfActivations {
    h: Vec<DMatrix<f64>>,
}

impl HalfActivations {
    fn new(cfg: &NetworkConfig, n: usize) -> Self {
        HalfActivations {
            h: cfg.widths.iter().map(|&m| DMatrix::zeros(m, n)).collect(),
        }
    }

    /// Forward pass over the columns of `x` (`input_dim x n`); writes the
    /// outputs into `f`.
    fn forward(&mut self, cfg: &NetworkConfig, p: &HalfParams, x: &DMatrix<f64>, f: &mut DVector<f64>) {
        let s1 = (2.0 / cfg.widths[0] as f64).sqrt();
        self.h[0].gemm(s1, &p.w0, x, 0.0);
        if let Some(b) = &p.b0 {
            for mut col in self.h[0].column_iter_mut() {
                col.axpy(s1, b, 1.0);
            }
        }
        relu_in_place(self.h[0].as_mut_slice());
        for l in 1..cfg.depth {
            let s = (2.0 / cfg.widths[l] as f64).sqrt();
            let (head, tail) = self.h.split_at_mut(l);
            tail[0].gemm(s, &p.hidden[l - 1], &head[l - 1], 0.0);
            relu_in_place(tail[0].as_mut_slice());
        }
        f.gemv_tr(cfg.out_scale(), &self.h[cfg.depth - 1], &p.w_out, 0.0);
    }
}

/// Gradient accumulators for one copy, same shapes as the parameters.
struct HalfGrads {
    w0: DMatrix<f64>,
    b0: Option<DVector<f64>>,
    hidden: Vec<DMatrix<f64>>,
    w_out: DVector<f64>,
    /// Delta (pre-activation adjoint) buffers, `widths[l] x n`.
    d: Vec<DMatrix<f64>>,
}

impl HalfGrads {
    fn new(cfg: &NetworkConfig, n: usize) -> Self {
        HalfGrads {
            w0: DMatrix::zeros(cfg.widths[0], cfg.input_dim),
            b0: cfg
                .with_first_layer_bias
                .then(|| DVector::zeros(cfg.widths[0])),
            hidden: (1..cfg.depth)
                .map(|l| DMatrix::zeros(cfg.widths[l], cfg.widths[l - 1]))
                .collect(),
            w_out: DVector::zeros(cfg.widths[cfg.depth - 1]),
            d: cfg.widths.iter().map(|&m| DMatrix::zeros(m, n)).collect(),
        }
    }

    /// Reverse pass: `g[i]` is the adjoint of output `i` (already including
    /// any copy-combination weight). `acts` must hold a fresh forward pass;
    /// `x_t` is the transposed input (`n x input_dim`), `ones` a length-`n`
    /// vector of ones.
    fn backward(
        &mut self,
        cfg: &NetworkConfig,
        p: &HalfParams,
        acts: &HalfActivations,
        x_t: &DMatrix<f64>,
        ones: &DVector<f64>,
        g: &DVector<f64>,
    ) {
        let last = cfg.depth - 1;
        let so = cfg.out_scale();
        // Output-layer delta: D_L = s_out * (w_out g^T) masked by active units.
        {
            let (m, n) = self.d[last].shape();
            let ds = self.d[last].as_mut_slice();
            let hs = acts.h[last].as_slice();
            let ws = p.w_out.as_slice();
            for col in 0..n {
                let gc = so * g[col];
                let base = col * m;
                for row in 0..m {
                    let idx = base + row;
                    ds[idx] = if hs[idx] > 0.0 { gc * ws[row] } else { 0.0 };
                }
            }
        }
        self.w_out.gemv(so, &acts.h[last], g, 0.0);
        // Hidden-to-hidden layers, walking backwards.
        for l in (1..cfg.depth).rev() {
            let s = (2.0 / cfg.widths[l] as f64).sqrt();
            let h_prev_t = acts.h[l - 1].transpose();
            self.hidden[l - 1].gemm(s, &self.d[l], &h_prev_t, 0.0);
            let (head, tail) = self.d.split_at_mut(l);
            head[l - 1].gemm_tr(s, &p.hidden[l - 1], &tail[0], 0.0);
            let ds = head[l - 1].as_mut_slice();
            let hs = acts.h[l - 1].as_slice();
            for (dv, hv) in ds.iter_mut().zip(hs) {
                if *hv <= 0.0 {
                    *dv = 0.0;
                }
            }
        }
        let s1 = (2.0 / cfg.widths[0] as f64).sqrt();
        self.w0.gemm(s1, &self.d[0], x_t, 0.0);
        if let Some(b) = &mut self.b0 {
            b.gemv(s1, &self.d[0], ones, 0.0);
        }
    }

    fn append_flat(&self, out: &mut Vec<f64>) {
        for r in 0..self.w0.nrows() {
            out.extend(self.w0.row(r).iter());
        }
        if let Some(b) = &self.b0 {
            out.extend(b.iter());
        }
        for w in &self.hidden {
            for r in 0..w.nrows() {
                out.extend(w.row(r).iter());
            }
        }
        out.extend(self.w_out.iter());
    }
}

#[inline]
fn axpy_mat(dst: &mut DMatrix<f64>, alpha: f64, src: &DMatrix<f64>) {
    for (d, s) in dst.as_mut_slice().iter_mut().zip(src.as_slice()) {
        *d += alpha * s;
    }
}

fn apply_update(p: &mut HalfParams, g: &HalfGrads, lr: f64) {
    axpy_mat(&mut p.w0, -lr, &g.w0);
    if let (Some(b), Some(gb)) = (&mut p.b0, &g.b0) {
        b.axpy(-lr, gb, 1.0);
    }
    for (w, gw) in p.hidden.iter_mut().zip(&g.hidden) {
        axpy_mat(w, -lr, gw);
    }
    p.w_out.axpy(-lr, &g.w_out, 1.0);
}

pub(crate) fn points_to_cols(input_dim: usize, xs: &[Point]) -> Result<DMatrix<f64>> {
    for p in xs {
        if p.dim() != input_dim {
            return Err(Error::Dimension {
                expected: input_dim,
                actual: p.dim(),
            });
        }
    }
    Ok(DMatrix::from_fn(input_dim, xs.len(), |i, j| {
        xs[j].coords[i]
    }))
}

/// Reusable buffers for repeated batched evaluation at a fixed batch size
/// (e.g. a held-out risk monitor called every training step).
pub struct EvalWorkspace {
    acts: HalfActivations,
    f1: DVector<f64>,
    f2: DVector<f64>,
    n: usize,
}

impl EvalWorkspace {
    pub fn new(cfg: &NetworkConfig, n: usize) -> Self {
        EvalWorkspace {
            acts: HalfActivations::new(cfg, n),
            f1: DVector::zeros(n),
            f2: DVector::zeros(n),
            n,
        }
    }
}

impl NetworkParams {
    /// Model output at `x`: the single copy in standard mode, the
    /// `(sqrt(2)/2)(f1 - f2)` combination in mirrored mode.
    pub fn forward(&self, x: &Point) -> Result<f64> {
        Ok(self.forward_points(std::slice::from_ref(x))?[0])
    }

    /// Model outputs over a batch of points.
    pub fn forward_points(&self, xs: &[Point]) -> Result<Vec<f64>> {
        let cols = points_to_cols(self.config.input_dim, xs)?;
        let mut ws = EvalWorkspace::new(&self.config, xs.len());
        Ok(self.forward_cols(&cols, &mut ws).iter().copied().collect())
    }

    /// Model outputs over the columns of `x_cols`, reusing `ws` buffers.
    /// Returns a reference into the workspace.
    pub fn forward_cols<'w>(&self, x_cols: &DMatrix<f64>, ws: &'w mut EvalWorkspace) -> &'w DVector<f64> {
        assert_eq!(x_cols.nrows(), self.config.input_dim, "input dimension mismatch");
        assert_eq!(x_cols.ncols(), ws.n, "workspace batch size mismatch");
        ws.acts.forward(&self.config, &self.half1, x_cols, &mut ws.f1);
        match &self.half2 {
            None => &ws.f1,
            Some(h2) => {
                ws.acts.forward(&self.config, h2, x_cols, &mut ws.f2);
                ws.f1.axpy(-FRAC_1_SQRT_2, &ws.f2, FRAC_1_SQRT_2);
                &ws.f1
            }
        }
    }

    /// Output of one copy alone (0 or 1), bypassing the mirrored
    /// combination.
    pub fn forward_copy(&self, which: usize, x: &Point) -> Result<f64> {
        let half = match which {
            0 => &self.half1,
            1 => self.half2.as_ref().ok_or_else(|| {
                Error::Mode("copy 1 requested on standard-mode parameters".into())
            })?,
            _ => return Err(Error::Mode(format!("no copy {which}; valid: 0, 1"))),
        };
        let cols = points_to_cols(self.config.input_dim, std::slice::from_ref(x))?;
        let mut acts = HalfActivations::new(&self.config, 1);
        let mut f = DVector::zeros(1);
        acts.forward(&self.config, half, &cols, &mut f);
        Ok(f[0])
    }

    /// Mirrored combination `(sqrt(2)/2)(f1 - f2)`; errors on standard-mode
    /// parameters.
    pub fn forward_mirrored(&self, x: &Point) -> Result<f64> {
        if self.half2.is_none() {
            return Err(Error::Mode(
                "mirrored evaluation requested on standard-mode parameters".into(),
            ));
        }
        self.forward(x)
    }

    /// Exact reverse-mode gradient of the model output with respect to the
    /// flattened parameter vector. ReLU subgradient at 0 is 0. In mirrored
    /// mode the gradient is `[(sqrt(2)/2) grad f1; -(sqrt(2)/2) grad f2]`.
    pub fn grad_theta(&self, x: &Point) -> Result<Vec<f64>> {
        let cols = points_to_cols(self.config.input_dim, std::slice::from_ref(x))?;
        let x_t = cols.transpose();
        let ones = DVector::from_element(1, 1.0);
        let mut out = Vec::with_capacity(self.config.total_params());
        let mut acts = HalfActivations::new(&self.config, 1);
        let mut grads = HalfGrads::new(&self.config, 1);
        let mut f = DVector::zeros(1);
        let weight = if self.half2.is_some() { FRAC_1_SQRT_2 } else { 1.0 };
        acts.forward(&self.config, &self.half1, &cols, &mut f);
        grads.backward(
            &self.config,
            &self.half1,
            &acts,
            &x_t,
            &ones,
            &DVector::from_element(1, weight),
        );
        grads.append_flat(&mut out);
        if let Some(h2) = &self.half2 {
            acts.forward(&self.config, h2, &cols, &mut f);
            grads.backward(
                &self.config,
                h2,
                &acts,
                &x_t,
                &ones,
                &DVector::from_element(1, -weight),
            );
            grads.append_flat(&mut out);
        }
        Ok(out)
    }

    /// Empirical tangent kernel: inner product of the parameter gradients at
    /// two points. Symmetric; nonnegative on the diagonal.
    pub fn empirical_ntk(&self, x: &Point, y: &Point) -> Result<f64> {
        let gx = self.grad_theta(x)?;
        let gy = self.grad_theta(y)?;
        Ok(gx.iter().zip(&gy).map(|(a, b)| a * b).sum())
    }

    /// Flattened parameter vector in the documented order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.config.total_params());
        self.half1.append_flat(&mut out);
        if let Some(h2) = &self.half2 {
            h2.append_flat(&mut out);
        }
        out
    }

    /// Rebuilds parameters from a flattened vector for the given config.
    pub fn unflatten(cfg: &NetworkConfig, flat: &[f64]) -> Result<NetworkParams> {
        cfg.validate()?;
        if flat.len() != cfg.total_params() {
            return Err(Error::Dimension {
                expected: cfg.total_params(),
                actual: flat.len(),
            });
        }
        let per = cfg.params_per_copy();
        let half1 = HalfParams::from_flat(cfg, &flat[..per]);
        let half2 = match cfg.init_mode {
            InitMode::Standard => None,
            InitMode::Mirrored => Some(HalfParams::from_flat(cfg, &flat[per..])),
        };
        Ok(NetworkParams {
            config: cfg.clone(),
            half1,
            half2,
        })
    }
}

/// Record of a gradient-descent run.
#[derive(Debug, Clone)]
pub struct TrainTrajectory {
    /// Parameter snapshots at selected steps (always step 0 and the final
    /// step; every `record_every`-th step in between when `record_every > 0`).
    pub checkpoints: Vec<(usize, NetworkParams)>,
    /// Training loss before each update plus the final loss; length
    /// `steps + 1`.
    pub losses: Vec<f64>,
    pub lr: f64,
    pub steps: usize,
}

/// Full-batch gradient descent on the mean-square loss
/// `L = (1/2n) sum_i (f(x_i) - y_i)^2`.
///
/// Aborts with a divergence error when the loss becomes non-finite or
/// exceeds [`DIVERGENCE_FACTOR`] times the initial loss.
pub fn train_gd(
    params: &NetworkParams,
    x: &[Point],
    y: &[f64],
    lr: f64,
    steps: usize,
    record_every: usize,
) -> Result<TrainTrajectory> {
    train_gd_monitored(params, x, y, lr, steps, record_every, |_, _| {})
}

/// [`train_gd`] with a per-step observer: `monitor(k, params)` is called at
/// step 0 (initial parameters) and after each update, before the divergence
/// check. Used for held-out risk tracking without storing snapshots.
pub fn train_gd_monitored(
    params: &NetworkParams,
    x: &[Point],
    y: &[f64],
    lr: f64,
    steps: usize,
    record_every: usize,
    mut monitor: impl FnMut(usize, &NetworkParams),
) -> Result<TrainTrajectory> {
    assert!(lr > 0.0, "learning rate must be positive");
    if x.is_empty() {
        return Err(Error::EmptyDataset("training set".into()));
    }
    if y.len() != x.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            actual: y.len(),
        });
    }
    let cfg = &params.config;
    let n = x.len();
    let cols = points_to_cols(cfg.input_dim, x)?;
    let cols_t = cols.transpose();
    let ones = DVector::from_element(n, 1.0);
    let y = DVector::from_column_slice(y);

    let mut current = params.clone();
    let mut acts1 = HalfActivations::new(cfg, n);
    let mut grads1 = HalfGrads::new(cfg, n);
    let mut acts2 = current.half2.as_ref().map(|_| HalfActivations::new(cfg, n));
    let mut grads2 = current.half2.as_ref().map(|_| HalfGrads::new(cfg, n));
    let mut f1 = DVector::zeros(n);
    let mut f2 = DVector::zeros(n);
    let mut g = DVector::zeros(n);

    let mut losses = Vec::with_capacity(steps + 1);
    let mut checkpoints = Vec::new();
    let record = |k: usize| k == 0 || k == steps || (record_every > 0 && k % record_every == 0);

    monitor(0, &current);
    for k in 0..=steps {
        // Forward with the current parameters; combined output into f1.
        acts1.forward(cfg, &current.half1, &cols, &mut f1);
        if let (Some(h2), Some(a2)) = (&current.half2, &mut acts2) {
            a2.forward(cfg, h2, &cols, &mut f2);
            f1.axpy(-FRAC_1_SQRT_2, &f2, FRAC_1_SQRT_2);
        }
        let mut loss = 0.0;
        for i in 0..n {
            let r = f1[i] - y[i];
            loss += r * r;
            g[i] = r / n as f64;
        }
        loss /= 2.0 * n as f64;
        losses.push(loss);
        if !loss.is_finite() || loss > DIVERGENCE_FACTOR * losses[0] {
            return Err(Error::Divergence { step: k, loss });
        }
        if record(k) {
            checkpoints.push((k, current.clone()));
        }
        if k == steps {
            break;
        }
        // Backward and update. Mirrored copies receive the combination
        // weights +/- sqrt(2)/2 through the output adjoint.
        match (&mut current.half2, &mut acts2, &mut grads2) {
            (Some(h2), Some(a2), Some(g2)) => {
                let g_scaled = &g * FRAC_1_SQRT_2;
                grads1.backward(cfg, &current.half1, &acts1, &cols_t, &ones, &g_scaled);
                let g_neg = &g * -FRAC_1_SQRT_2;
                g2.backward(cfg, h2, a2, &cols_t, &ones, &g_neg);
                apply_update(&mut current.half1, &grads1, lr);
                apply_update(h2, g2, lr);
            }
            _ => {
                grads1.backward(cfg, &current.half1, &acts1, &cols_t, &ones, &g);
                apply_update(&mut current.half1, &grads1, lr);
            }
        }
        monitor(k + 1, &current);
    }
    Ok(TrainTrajectory {
        checkpoints,
        losses,
        lr,
        steps,
    })
}

/// Largest deviation between the recorded network snapshots and the kernel
/// flow prediction over a point grid: `max_{k, x} |f_net(x; step k) -
/// f_flow(time_map(k), x)|`.
pub fn sup_deviation(
    traj: &TrainTrajectory,
    pred: &KgfPredictor,
    grid: &[Point],
    time_map: impl Fn(usize) -> f64,
) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid("deviation grid"));
    }
    if traj.checkpoints.is_empty() {
        return Err(Error::EmptyGrid("trajectory checkpoints"));
    }
    let mut sup: f64 = 0.0;
    for (step, params) in &traj.checkpoints {
        let net = params.forward_points(grid)?;
        let flow = pred.predict_many(time_map(*step), grid)?;
        for (a, b) in net.iter().zip(&flow) {
            sup = sup.max((a - b).abs());
        }
    }
    Ok(sup)
}

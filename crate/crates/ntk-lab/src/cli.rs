//! Command-line interface: experiment runners plus direct access to the
//! kernel, spectral, Gaussian-process, flow, and training primitives.
//!
//! Every subcommand accepts `--config <path>` pointing at a JSON
//! [`ExperimentConfig`] (or a previous run's `manifest.json`) and a small set
//! of override flags. Output goes to `--out` (a directory for experiment
//! runners, a file for primitives) or stdout. `--format` selects CSV or
//! JSON; CSV schemas are fixed and documented in each subcommand's `--help`.
//!
//! Exit codes: 0 on success, 2 for configuration/usage/data errors, 3 for
//! numerical failures. The environment variable `NTKLAB_THREADS` caps the
//! worker-thread count (default: all cores).

use crate::checkpoint::{load_checkpoint, save_checkpoint};
use crate::data::{load_csv, sample_sphere_gaussian, synth_target, Normalize};
use crate::error::{Error, Result};
use crate::experiment::{
    build_version, load_config, run_curve, run_smoothness, run_thm_smoothness, write_curve_outputs,
    write_manifest, write_smoothness_outputs, write_verdict_outputs, curve_csv, smoothness_csv,
    verdict_csv, ExperimentConfig, ExperimentKind, InitSelection,
};
use crate::gp::sample_gp;
use crate::kernels::{
    gram, ntk_sphere, rfk_sphere, KernelDomain, KernelFamily, KernelSpec, Point,
};
use crate::kgf::{build_predictor, InitFn};
use crate::network::{init_params, train_gd, InitMode, NetworkConfig};
use crate::seeds::derive_seed;
use crate::spectral::{decay_slope, default_fit_range, eig_sym};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

/// Seed-stream tags for CLI-local derived seeds (synthetic data, labels,
/// network init, GP draws, held-out test points).
const CLI_DATA_TAG: u64 = 101;
const CLI_NOISE_TAG: u64 = 102;
const CLI_INIT_TAG: u64 = 103;
const CLI_GP_TAG: u64 = 104;
const CLI_TEST_TAG: u64 = 105;

/// Entry point used by the binary: parses arguments, honors
/// `NTKLAB_THREADS`, dispatches, and maps errors to exit codes.
pub fn run() -> i32 {
    let cli = Cli::parse();
    if let Err(e) = setup_threads() {
        eprintln!("ntk-lab: {e}");
        return i32::from(e.exit_code());
    }
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ntk-lab: {e}");
            i32::from(e.exit_code())
        }
    }
}

fn setup_threads() -> Result<()> {
    if let Ok(v) = std::env::var("NTKLAB_THREADS") {
        let threads: usize = v.trim().parse().map_err(|_| {
            Error::Config(format!("NTKLAB_THREADS must be a positive integer, got {v:?}"))
        })?;
        if threads == 0 {
            return Err(Error::Config("NTKLAB_THREADS must be at least 1".into()));
        }
        // Only fails if a global pool already exists (in-process tests);
        // that pool then stays in effect.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    Ok(())
}

#[derive(Parser, Debug)]
#[command(
    name = "ntk-lab",
    version = build_version(),
    about = "Wide-network kernels: closed forms, spectra, gradient flow, and experiments",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    KernelEval(KernelEvalCmd),
    Gram(GramCmd),
    Spectrum(SpectrumCmd),
    GpSample(GpSampleCmd),
    Kgf(KgfCmd),
    Train(TrainCmd),
    Curve(CurveCmd),
    Smoothness(SmoothnessCmd),
    ThmSmoothness(ThmSmoothnessCmd),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum FamilyArg {
    /// Tangent kernel of the infinitely wide network.
    Ntk,
    /// Covariance kernel of the random-feature limit.
    Rfk,
}

impl From<FamilyArg> for KernelFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Ntk => KernelFamily::Ntk,
            FamilyArg::Rfk => KernelFamily::Rfk,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum DomainArg {
    /// Unit-sphere inputs, kernel of the normalized inner product.
    Sphere,
    /// Arbitrary inputs lifted by an appended constant coordinate.
    Lifted,
}

impl From<DomainArg> for KernelDomain {
    fn from(d: DomainArg) -> Self {
        match d {
            DomainArg::Sphere => KernelDomain::Sphere,
            DomainArg::Lifted => KernelDomain::Lifted,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum NormalizeArg {
    None,
    UnitSphere,
}

impl From<NormalizeArg> for Normalize {
    fn from(n: NormalizeArg) -> Self {
        match n {
            NormalizeArg::None => Normalize::None,
            NormalizeArg::UnitSphere => Normalize::UnitSphere,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum InitModeArg {
    Standard,
    Mirrored,
}

impl From<InitModeArg> for InitMode {
    fn from(m: InitModeArg) -> Self {
        match m {
            InitModeArg::Standard => InitMode::Standard,
            InitModeArg::Mirrored => InitMode::Mirrored,
        }
    }
}

/// Options shared by every subcommand: the config file and its overrides.
#[derive(Args, Debug, Clone)]
struct CommonOpts {
    /// JSON configuration file; a previous run's manifest.json also works.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Sphere dimension: inputs live on S^d in R^{d+1}.
    #[arg(long)]
    d: Option<usize>,
    /// Hidden-layer count / kernel depth.
    #[arg(long, visible_alias = "L")]
    depth: Option<usize>,
    /// Training-set sizes for the learning curve, strictly increasing.
    #[arg(long, value_delimiter = ',', value_name = "N1,N2,...")]
    n_grid: Option<Vec<usize>>,
    /// Gradient-descent learning rate.
    #[arg(long)]
    lr: Option<f64>,
    /// Single master seed (replaces the config's seed list).
    #[arg(long)]
    seed: Option<u64>,
    /// Output path: directory for experiment runners, file for primitives
    /// (stdout if omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output serialization.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

impl CommonOpts {
    fn build(&self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => ExperimentConfig::default(),
        };
        cfg.experiment = kind;
        if let Some(d) = self.d {
            cfg.d = d;
        }
        if let Some(depth) = self.depth {
            cfg.depth = depth;
        }
        if let Some(n_grid) = &self.n_grid {
            cfg.n_grid = n_grid.clone();
        }
        if let Some(lr) = self.lr {
            cfg.lr = lr;
        }
        if let Some(seed) = self.seed {
            cfg.seeds = vec![seed];
        }
        if let Some(out) = &self.out {
            cfg.output_path = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn master_seed(&self, cfg: &ExperimentConfig) -> u64 {
        self.seed.unwrap_or(cfg.seeds[0])
    }

    /// Writes to `--out` when given, else stdout.
    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => {
                std::fs::write(path, text)?;
            }
            None => print!("{text}"),
        }
        Ok(())
    }
}

/// Point source shared by the point-based primitives: a CSV file, or
/// synthetic uniform points on the sphere when `--data` is absent.
#[derive(Args, Debug, Clone)]
struct DataOpts {
    /// CSV file with one feature row per line (optional header). Labels are
    /// taken from --label-column (default: last column).
    #[arg(long, value_name = "PATH")]
    data: Option<PathBuf>,
    /// Number of synthetic points when --data is absent.
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// 0-based label column index; default: last column.
    #[arg(long)]
    label_column: Option<usize>,
    /// Row cap; larger files are subsampled with the derived seed.
    #[arg(long)]
    max_rows: Option<usize>,
    /// Feature normalization applied to CSV rows.
    #[arg(long, value_enum, default_value_t = NormalizeArg::UnitSphere)]
    normalize: NormalizeArg,
}

impl DataOpts {
    /// Loads (points, labels). Synthetic labels are the squared coordinate
    /// sum plus `N(0, sigma^2)` noise with `sigma` from the config.
    fn load(&self, cfg: &ExperimentConfig, master: u64) -> Result<(Vec<Point>, Vec<f64>)> {
        match &self.data {
            Some(path) => {
                let ds = load_csv(
                    path,
                    self.label_column,
                    self.max_rows.or(cfg.max_rows),
                    self.normalize.into(),
                    derive_seed(master, &[CLI_DATA_TAG]),
                )?;
                Ok((ds.x, ds.y))
            }
            None => {
                if self.n == 0 {
                    return Err(Error::Config("--n must be at least 1".into()));
                }
                let x = sample_sphere_gaussian(cfg.d, self.n, derive_seed(master, &[CLI_DATA_TAG]));
                let y = synth_target(&x, cfg.sigma, derive_seed(master, &[CLI_NOISE_TAG]));
                Ok((x, y))
            }
        }
    }

    fn is_synthetic(&self) -> bool {
        self.data.is_none()
    }
}

fn kernel_spec(family: FamilyArg, domain: DomainArg, depth: usize) -> Result<KernelSpec> {
    KernelSpec::new(family.into(), depth, domain.into())
}

fn json_line<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// kernel-eval
// ---------------------------------------------------------------------------

/// Evaluate the closed-form sphere kernels at given inner products.
///
/// CSV columns: u,value. JSON: array of {u, value}.
#[derive(Args, Debug)]
struct KernelEvalCmd {
    #[command(flatten)]
    common: CommonOpts,
    /// Kernel family to evaluate.
    #[arg(long, value_enum, default_value_t = FamilyArg::Ntk)]
    family: FamilyArg,
    /// Inner products in [-1, 1], comma separated; default: a uniform grid.
    #[arg(long, value_delimiter = ',', value_name = "U1,U2,...", allow_hyphen_values = true)]
    u: Option<Vec<f64>>,
    /// Grid size used when --u is absent.
    #[arg(long, default_value_t = 41)]
    grid: usize,
}

#[derive(serde::Serialize)]
struct KernelValueRow {
    u: f64,
    value: f64,
}

fn cmd_kernel_eval(cmd: KernelEvalCmd) -> Result<()> {
    let cfg = cmd.common.build(ExperimentKind::KernelEval)?;
    let us: Vec<f64> = match &cmd.u {
        Some(us) => us.clone(),
        None => {
            if cmd.grid < 2 {
                return Err(Error::Config("--grid must be at least 2".into()));
            }
            (0..cmd.grid)
                .map(|i| -1.0 + 2.0 * i as f64 / (cmd.grid - 1) as f64)
                .collect()
        }
    };
    let mut rows = Vec::with_capacity(us.len());
    for &u in &us {
        let value = match cmd.family {
            FamilyArg::Ntk => ntk_sphere(u, cfg.depth)?,
            FamilyArg::Rfk => rfk_sphere(u, cfg.depth)?,
        };
        rows.push(KernelValueRow { u, value });
    }
    let text = match cmd.common.format {
        Format::Csv => {
            let mut out = String::from("u,value\n");
            for r in &rows {
                writeln!(out, "{},{}", r.u, r.value).expect("write to string");
            }
            out
        }
        Format::Json => json_line(&rows),
    };
    cmd.common.emit(&text)
}

// ---------------------------------------------------------------------------
// gram
// ---------------------------------------------------------------------------

/// Gram matrix of a point set under the chosen kernel.
///
/// CSV columns: i,j,value (0-based indices, full symmetric matrix, row
/// major). JSON: {n, matrix} with the matrix as an array of rows.
#[derive(Args, Debug)]
struct GramCmd {
    #[command(flatten)]
    common: CommonOpts,
    #[command(flatten)]
    data: DataOpts,
    #[arg(long, value_enum, default_value_t = FamilyArg::Ntk)]
    family: FamilyArg,
    #[arg(long, value_enum, default_value_t = DomainArg::Sphere)]
    domain: DomainArg,
}

fn cmd_gram(cmd: GramCmd) -> Result<()> {
    let cfg = cmd.common.build(ExperimentKind::Gram)?;
    let master = cmd.common.master_seed(&cfg);
    let (points, _) = cmd.data.load(&cfg, master)?;
    let spec = kernel_spec(cmd.family, cmd.domain, cfg.depth)?;
    let g = gram(&spec, &points)?;
    let n = g.nrows();
    let text = match cmd.common.format {
        Format::Csv => {
            let mut out = String::from("i,j,value\n");
            for i in 0..n {
                for j in 0..n {
                    writeln!(out, "{i},{j},{}", g[(i, j)]).expect("write to string");
                }
            }
            out
        }
        Format::Json => {
            let rows: Vec<Vec<f64>> =
                (0..n).map(|i| (0..n).map(|j| g[(i, j)]).collect()).collect();
            json_line(&serde_json::json!({ "n": n, "matrix": rows }))
        }
    };
    cmd.common.emit(&text)
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

/// Eigenvalue spectrum of the Gram matrix with a log-log decay fit.
///
/// CSV columns: index,eigenvalue (1-based, descending); the fit is reported
/// on stderr. JSON: {eigenvalues, fit}. The decay fit needs a usable index
/// window (by default [max(5, n/50), n/2]); spectra too small for it fail
/// with a numerical-range error.
#[derive(Args, Debug)]
struct SpectrumCmd {
    #[command(flatten)]
    common: CommonOpts,
    #[command(flatten)]
    data: DataOpts,
    #[arg(long, value_enum, default_value_t = FamilyArg::Ntk)]
    family: FamilyArg,
    #[arg(long, value_enum, default_value_t = DomainArg::Sphere)]
    domain: DomainArg,
    /// Lower 1-based index of the fit window.
    #[arg(long)]
    fit_lo: Option<usize>,
    /// Upper 1-based index of the fit window.
    #[arg(long)]
    fit_hi: Option<usize>,
}

fn cmd_spectrum(cmd: SpectrumCmd) -> Result<()> {
    let cfg = cmd.common.build(ExperimentKind::Spectrum)?;
    let master = cmd.common.master_seed(&cfg);
    let (points, _) = cmd.data.load(&cfg, master)?;
    let spec = kernel_spec(cmd.family, cmd.domain, cfg.depth)?;
    let g = gram(&spec, &points)?;
    let eig = eig_sym(&g)?;
    let (default_lo, default_hi) = default_fit_range(eig.len());
    let lo = cmd.fit_lo.unwrap_or(default_lo);
    let hi = cmd.fit_hi.unwrap_or(default_hi);
    let fit = decay_slope(&eig.eigenvalues, lo, hi)?;
    let text = match cmd.common.format {
        Format::Csv => {
            let mut out = String::from("index,eigenvalue\n");
            for (i, lam) in eig.eigenvalues.iter().enumerate() {
                writeln!(out, "{},{}", i + 1, lam).expect("write to string");
            }
            eprintln!(
                "decay fit over [{}, {}]: slope {:.6}, r^2 {:.4}",
                fit.index_range.0, fit.index_range.1, fit.slope, fit.r_squared
            );
            out
        }
        Format::Json => json_line(&serde_json::json!({
            "eigenvalues": eig.eigenvalues,
            "fit": fit,
        })),
    };
    cmd.common.emit(&text)
}

// ---------------------------------------------------------------------------
// gp-sample
// ---------------------------------------------------------------------------

/// Draw from the Gaussian process whose covariance is the chosen kernel.
///
/// CSV columns: sample,index,x_0,...,x_{D-1},value (one row per point and
/// draw). JSON: array of draws with points, values, and the seed used.
#[derive(Args, Debug)]
struct GpSampleCmd {
    #[command(flatten)]
    common: CommonOpts,
    #[command(flatten)]
    data: DataOpts,
    #[arg(long, value_enum, default_value_t = FamilyArg::Rfk)]
    family: FamilyArg,
    #[arg(long, value_enum, default_value_t = DomainArg::Sphere)]
    domain: DomainArg,
    /// Number of independent draws.
    #[arg(long, default_value_t = 1)]
    samples: usize,
}

fn cmd_gp_sample(cmd: GpSampleCmd) -> Result<()> {
    let cfg = cmd.common.build(ExperimentKind::GpSample)?;
    let master = cmd.common.master_seed(&cfg);
    let (points, _) = cmd.data.load(&cfg, master)?;
    let spec = kernel_spec(cmd.family, cmd.domain, cfg.depth)?;
    if cmd.samples == 0 {
        return Err(Error::Config("--samples must be at least 1".into()));
    }
    let mut draws = Vec::with_capacity(cmd.samples);
    for j in 0..cmd.samples {
        let seed = derive_seed(master, &[CLI_GP_TAG, j as u64]);
        draws.push(sample_gp(&spec, &points, seed)?);
    }
    let text = match cmd.common.format {
        Format::Csv => {
            let dim = points.first().map_or(0, |p| p.dim());
            let mut out = String::from("sample,index");
            for k in 0..dim {
                write!(out, ",x_{k}").expect("write to string");
            }
            out.push_str(",value\n");
            for (j, draw) in draws.iter().enumerate() {
                for (i, (p, v)) in draw.points.iter().zip(&draw.values).enumerate() {
                    write!(out, "{j},{i}").expect("write to string");
                    for c in &p.coords {
                        write!(out, ",{c}").expect("write to string");
                    }
                    writeln!(out, ",{v}").expect("write to string");
                }
            }
            out
        }
        Format::Json => json_line(&draws),
    };
    cmd.common.emit(&text)
}

// ---------------------------------------------------------------------------
// kgf
// ---------------------------------------------------------------------------

/// Kernel gradient-flow prediction along a time grid.
///
/// Fits the flow on the training labels and reports the training error and,
/// for synthetic data (where noiseless targets are known), the held-out
/// excess risk at every time. CSV columns: t,train_mse,test_risk (test_risk
/// empty for CSV datasets). JSON: array of {t, train_mse, test_risk}.
#[derive(Args, Debug)]
struct KgfCmd {
    #[command(flatten)]
    common: CommonOpts,
    #[command(flatten)]
    data: DataOpts,
    #[arg(long, value_enum, default_value_t = FamilyArg::Ntk)]
    family: FamilyArg,
    #[arg(long, value_enum, default_value_t = DomainArg::Sphere)]
    domain: DomainArg,
    /// Flow times, comma separated; default: a logarithmic grid from 0.01
    /// to 1000.
    #[arg(long, value_delimiter = ',', value_name = "T1,T2,...")]
    t: Option<Vec<f64>>,
    /// Constant initial function value.
    #[arg(long, default_value_t = 0.0)]
    f0_const: f64,
}

#[derive(serde::Serialize)]
struct KgfRow {
    t: f64,
    train_mse: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    test_risk: Option<f64>,
}

fn cmd_kgf(cmd: KgfCmd) -> Result<()> {
    let cfg = cmd.common.build(ExperimentKind::Kgf)?;
    let master = cmd.common.master_seed(&cfg);
    let (points, labels) = cmd.data.load(&cfg, master)?;
    let spec = kernel_spec(cmd.family, cmd.domain, cfg.depth)?;

    let times: Vec<f64> = match &cmd.t {
        Some(ts) => {
            if ts.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
                return Err(Error::Config("flow times must be nonnegative and finite".into()));
            }
            ts.clone()
        }
        None => (0..=25).map(|k| 10f64.powf(-2.0 + 0.2 * k as f64)).collect(),
    };
    if times.is_empty() {
        return Err(Error::Config("need at least one flow time".into()));
    }

    let f0 = cmd.f0_const;
    let n = points.len();
    let f0_at_train = vec![f0; n];
    let f0_query: InitFn = Arc::new(move |_| f0);
    let predictor = build_predictor(spec, points, &labels, &f0_at_train, f0_query)?;

    let test = if cmd.data.is_synthetic() {
        let x = sample_sphere_gaussian(
            cfg.d,
            cfg.test_points,
            derive_seed(master, &[CLI_TEST_TAG]),
        );
        let fstar = synth_target(&x, 0.0, 0);
        Some((x, fstar))
    } else {
        None
    };

    let mut rows = Vec::with_capacity(times.len());
    for &t in &times {
        let at_train = predictor.predict_at_train(t);
        let train_mse = at_train
            .iter()
            .zip(&labels)
            .map(|(p, y)| (p - y) * (p - y))
            .sum::<f64>()
            / n as f64;
        let test_risk = match &test {
            Some((x, fstar)) => {
                let preds = predictor.predict_many(t, x)?;
                Some(
                    preds
                        .iter()
                        .zip(fstar)
                        .map(|(p, y)| (p - y) * (p - y))
                        .sum::<f64>()
                        / x.len() as f64,
                )
            }
            None => None,
        };
        rows.push(KgfRow { t, train_mse, test_risk });
    }

    let text = match cmd.common.format {
        Format::Csv => {
            let mut out = String::from("t,train_mse,test_risk\n");
            for r in &rows {
                match r.test_risk {
                    Some(tr) => writeln!(out, "{},{},{tr}", r.t, r.train_mse),
                    None => writeln!(out, "{},{},", r.t, r.train_mse),
                }
                .expect("write to string");
            }
            out
        }
        Format::Json => json_line(&rows),
    };
    cmd.common.emit(&text)
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

/// Train a finite-width network with full-batch gradient descent.
///
/// Width defaults to m_rule * n and the step count to epochs_rule * n, both
/// from the config. CSV columns: step,loss (every step). JSON:
/// {final_loss, losses}. `--checkpoint-out` saves the final parameters;
/// `--init-from` resumes from a saved checkpoint instead of fresh
/// initialization.
#[derive(Args, Debug)]
struct TrainCmd {
    #[command(flatten)]
    common: CommonOpts,
    #[command(flatten)]
    data: DataOpts,
    /// Hidden width; default: m_rule * n from the config.
    #[arg(long)]
    m: Option<usize>,
    /// Gradient steps; default: epochs_rule * n from the config.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_enum, default_value_t = InitModeArg::Standard)]
    init_mode: InitModeArg,
    /// Include a bias on the first layer (synthetic sphere inputs carry an
    /// implicit constant coordinate, so the default is off).
    #[arg(long, default_value_t = false)]
    first_layer_bias: bool,
    /// Save the final parameters to this checkpoint file.
    #[arg(long, value_name = "PATH")]
    checkpoint_out: Option<PathBuf>,
    /// Initialize from a checkpoint instead of drawing fresh parameters.
    #[arg(long, value_name = "PATH")]
    init_from: Option<PathBuf>,
}

fn cmd_train(cmd: TrainCmd) -> Result<()> {
    let cfg = cmd.common.build(ExperimentKind::Train)?;
    let master = cmd.common.master_seed(&cfg);
    let (points, labels) = cmd.data.load(&cfg, master)?;
    let n = points.len();
    let input_dim = points.first().map_or(0, |p| p.dim());
    let m = cmd.m.unwrap_or(cfg.m_rule * n);
    let steps = cmd.steps.unwrap_or(cfg.epochs_rule * n);

    let params = match &cmd.init_from {
        Some(path) => load_checkpoint(path)?.0,
        None => {
            let net_cfg = NetworkConfig::uniform(
                input_dim,
                cfg.depth,
                m,
                cmd.init_mode.into(),
                cmd.first_layer_bias,
                derive_seed(master, &[CLI_INIT_TAG]),
            );
            init_params(&net_cfg)?
        }
    };

    let traj = train_gd(&params, &points, &labels, cfg.lr, steps, 0)?;
    if let Some(path) = &cmd.checkpoint_out {
        let (final_step, final_params) = traj.checkpoints.last().expect("final checkpoint");
        save_checkpoint(path, final_params, *final_step)?;
        eprintln!("checkpoint written to {}", path.display());
    }

    let text = match cmd.common.format {
        Format::Csv => {
            let mut out = String::from("step,loss\n");
            for (k, loss) in traj.losses.iter().enumerate() {
                writeln!(out, "{k},{loss}").expect("write to string");
            }
            out
        }
        Format::Json => json_line(&serde_json::json!({
            "final_loss": traj.losses.last(),
            "losses": traj.losses,
        })),
    };
    cmd.common.emit(&text)
}

// ---------------------------------------------------------------------------
// experiment runners
// ---------------------------------------------------------------------------

/// Learning-curve experiment: early-stopped test risk against training-set
/// size, per initialization mode.
///
/// Writes curve.csv (columns: mode,n,seed,m,steps,best_step,best_risk,
/// best_risk_se,final_train_loss), curve_summary.json (slope fits), and
/// manifest.json into the output directory, and prints the selected format
/// to stdout.
#[derive(Args, Debug)]
struct CurveCmd {
    #[command(flatten)]
    common: CommonOpts,
    /// Run only one initialization mode instead of both.
    #[arg(long, value_enum)]
    init_mode: Option<InitModeArg>,
}

fn cmd_curve(cmd: CurveCmd) -> Result<()> {
    let mut cfg = cmd.common.build(ExperimentKind::Curve)?;
    if let Some(mode) = cmd.init_mode {
        cfg.init_mode = match mode {
            InitModeArg::Standard => InitSelection::Standard,
            InitModeArg::Mirrored => InitSelection::Mirrored,
        };
    }
    let dir = output_dir(&cfg)?;
    let started = Instant::now();
    let result = run_curve(&cfg)?;
    let paths = write_curve_outputs(&dir, &result)?;
    let manifest = write_manifest(&dir, &cfg, started.elapsed().as_secs_f64())?;
    report_written(&paths, &manifest);
    match cmd.common.format {
        Format::Csv => print!("{}", curve_csv(&result)),
        Format::Json => print!("{}", json_line(&result)),
    }
    Ok(())
}

/// Label-smoothness table over CSV datasets.
///
/// Writes smoothness.csv (columns: dataset,n,d_lambda_mode,alpha_hat,
/// d_lambda,slope,intercept,r_squared,fit_lo,fit_hi,error), smoothness.json
/// (full reports with tail-sum curves), and manifest.json into the output
/// directory.
#[derive(Args, Debug)]
struct SmoothnessCmd {
    #[command(flatten)]
    common: CommonOpts,
    /// Dataset CSV path; repeatable. Overrides the config's dataset list.
    #[arg(long = "data", value_name = "PATH")]
    data: Vec<PathBuf>,
    /// Kernel family for the Gram projection.
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// 0-based label column index; default: last column.
    #[arg(long)]
    label_column: Option<usize>,
    /// Row cap per dataset (seeded subsample beyond this).
    #[arg(long)]
    max_rows: Option<usize>,
    #[arg(long, value_enum)]
    normalize: Option<NormalizeArg>,
    /// Upper 1-based index of the tail-sum fit window.
    #[arg(long)]
    fit_max_index: Option<usize>,
}

fn cmd_smoothness(cmd: SmoothnessCmd) -> Result<()> {
    let mut cfg = cmd.common.build(ExperimentKind::Smoothness)?;
    if !cmd.data.is_empty() {
        cfg.datasets = cmd.data.clone();
    }
    if let Some(family) = cmd.family {
        cfg.family = family.into();
    }
    if cmd.label_column.is_some() {
        cfg.label_column = cmd.label_column;
    }
    if cmd.max_rows.is_some() {
        cfg.max_rows = cmd.max_rows;
    }
    if let Some(normalize) = cmd.normalize {
        cfg.normalize = normalize.into();
    }
    if cmd.fit_max_index.is_some() {
        cfg.fit_max_index = cmd.fit_max_index;
    }
    let dir = output_dir(&cfg)?;
    let started = Instant::now();
    let outcomes = run_smoothness(&cfg)?;
    let paths = write_smoothness_outputs(&dir, &outcomes)?;
    let manifest = write_manifest(&dir, &cfg, started.elapsed().as_secs_f64())?;
    report_written(&paths, &manifest);
    match cmd.common.format {
        Format::Csv => print!("{}", smoothness_csv(&outcomes)),
        Format::Json => print!("{}", json_line(&outcomes)),
    }
    Ok(())
}

/// Convergence-verdict table for the interpolation-norm series.
///
/// Simulates the partial sums for every configured (d, s) pair and marks
/// agreement with the predicted side of the critical exponent 3/(d+1).
/// Writes verdicts.csv (columns: d,s,s_star,s_fraction,verdict,predicted,
/// agrees,median_ratio,trials,series_len,rerun), verdicts.json, and
/// manifest.json into the output directory.
#[derive(Args, Debug)]
struct ThmSmoothnessCmd {
    #[command(flatten)]
    common: CommonOpts,
    /// Sphere dimensions, comma separated. Overrides the config.
    #[arg(long, value_delimiter = ',', value_name = "D1,D2,...")]
    thm_d: Option<Vec<usize>>,
    /// Exponents as fractions of the critical 3/(d+1), comma separated.
    #[arg(long, value_delimiter = ',', value_name = "F1,F2,...")]
    fractions: Option<Vec<f64>>,
    /// Independent series replicas per cell.
    #[arg(long)]
    trials: Option<usize>,
    /// Series length per replica.
    #[arg(long)]
    series_len: Option<usize>,
}

fn cmd_thm_smoothness(cmd: ThmSmoothnessCmd) -> Result<()> {
    let mut cfg = cmd.common.build(ExperimentKind::ThmSmoothness)?;
    if let Some(ds) = &cmd.thm_d {
        cfg.thm_d_list = ds.clone();
    }
    if let Some(fractions) = &cmd.fractions {
        cfg.thm_s_fractions = fractions.clone();
    }
    if let Some(trials) = cmd.trials {
        cfg.trials = trials;
    }
    if let Some(series_len) = cmd.series_len {
        cfg.series_len = series_len;
    }
    cfg.validate()?;
    let dir = output_dir(&cfg)?;
    let started = Instant::now();
    let rows = run_thm_smoothness(&cfg)?;
    let paths = write_verdict_outputs(&dir, &rows)?;
    let manifest = write_manifest(&dir, &cfg, started.elapsed().as_secs_f64())?;
    report_written(&paths, &manifest);
    match cmd.common.format {
        Format::Csv => print!("{}", verdict_csv(&rows)),
        Format::Json => print!("{}", json_line(&rows)),
    }
    Ok(())
}

fn output_dir(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let dir = cfg
        .output_path
        .clone()
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn report_written(paths: &[PathBuf], manifest: &PathBuf) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
    eprintln!("wrote {}", manifest.display());
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::KernelEval(cmd) => cmd_kernel_eval(cmd),
        Command::Gram(cmd) => cmd_gram(cmd),
        Command::Spectrum(cmd) => cmd_spectrum(cmd),
        Command::GpSample(cmd) => cmd_gp_sample(cmd),
        Command::Kgf(cmd) => cmd_kgf(cmd),
        Command::Train(cmd) => cmd_train(cmd),
        Command::Curve(cmd) => cmd_curve(cmd),
        Command::Smoothness(cmd) => cmd_smoothness(cmd),
        Command::ThmSmoothness(cmd) => cmd_thm_smoothness(cmd),
    }
}

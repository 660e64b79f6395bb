//! Acceptance suite: one test per release criterion, named in order so the
//! harness output reads as a pass/fail line per criterion. Run with
//! `--nocapture` for the measured numbers behind each verdict.
//!
//! These are end-to-end checks at the largest scale the test budget allows;
//! the fine-grained correctness arguments (oracles, property tests) live in
//! the unit suites of each module.

use nalgebra::DVector;
use ntk_lab::data::{
    planted_targets, sample_sphere_gaussian, smoothness_estimate, synth_target, DLambdaMode,
    Dataset, DatasetMeta,
};
use ntk_lab::experiment::{run_curve, run_thm_smoothness, ExperimentConfig, InitSelection};
use ntk_lab::gp::Verdict;
use ntk_lab::kernels::{
    gram, kappa0, kappa1, kernel_eval, ntk_sphere, rfk_sphere, KernelDomain, KernelFamily,
    KernelSpec, Point,
};
use ntk_lab::kgf::{build_predictor, InitFn, KgfPredictor};
use ntk_lab::network::{
    init_params, sup_deviation, train_gd, EvalWorkspace, InitMode, NetworkConfig,
};
use ntk_lab::spectral::{decay_slope, default_fit_range, eig_sym};
use std::sync::Arc;

fn pass(n: u32, what: &str, detail: &str) {
    println!("criterion {n:02}: PASS - {what} ({detail})");
}

// ---------------------------------------------------------------------------
// 1. Closed-form kernel sanity
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_closed_form_kernels() {
    for depth in [1usize, 2, 3, 5] {
        let ntk = ntk_sphere(1.0, depth).unwrap();
        let rfk = rfk_sphere(1.0, depth).unwrap();
        assert_eq!(ntk, (depth + 1) as f64, "NTK(1, {depth})");
        assert_eq!(rfk, 1.0, "RFK(1, {depth})");
    }
    // Arc-cosine building blocks at the analytic anchor points.
    let pi = std::f64::consts::PI;
    let table = [
        (-1.0, 0.0, 0.0),
        (0.0, 0.5, 1.0 / pi),
        (1.0, 1.0, 1.0),
    ];
    for (u, k0, k1) in table {
        assert!((kappa0(u).unwrap() - k0).abs() < 1e-12, "kappa0({u})");
        assert!((kappa1(u).unwrap() - k1).abs() < 1e-12, "kappa1({u})");
    }
    pass(1, "closed-form kernel identities", "NTK(1,L)=L+1, RFK(1,L)=1, kappa anchors to 1e-12");
}

// ---------------------------------------------------------------------------
// 2. Initial output distribution matches the covariance kernel
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_init_distribution_matches_covariance_kernel() {
    let d = 3;
    let m = 4096;
    let n_seeds = 20_000u64;
    let probes = sample_sphere_gaussian(d, 10, 4242);
    let spec = KernelSpec::new(KernelFamily::Rfk, 1, KernelDomain::Sphere).unwrap();

    let cfg = NetworkConfig::uniform(d + 1, 1, m, InitMode::Standard, false, 0);
    let probe_cols = nalgebra::DMatrix::from_fn(d + 1, probes.len(), |i, j| probes[j].coords[i]);
    let mut ws = EvalWorkspace::new(&cfg, probes.len());

    let mut sum_sq = vec![0.0f64; probes.len()];
    let mut sum_cross = vec![0.0f64; 5];
    for seed in 0..n_seeds {
        let cfg = NetworkConfig { seed, ..cfg.clone() };
        let params = init_params(&cfg).unwrap();
        let f = params.forward_cols(&probe_cols, &mut ws);
        for (i, &fi) in f.iter().enumerate() {
            sum_sq[i] += fi * fi;
        }
        for (k, pair) in [(0, 1), (2, 3), (4, 5), (6, 7), (8, 9)].iter().enumerate() {
            sum_cross[k] += f[pair.0] * f[pair.1];
        }
    }

    let mut worst_var_rel = 0.0f64;
    for (i, p) in probes.iter().enumerate() {
        let var = sum_sq[i] / n_seeds as f64;
        let target = kernel_eval(&spec, p, p).unwrap();
        let rel = (var - target).abs() / target;
        worst_var_rel = worst_var_rel.max(rel);
        assert!(rel < 0.05, "variance at probe {i}: {var} vs kernel {target}");
    }
    let mut worst_cov_abs = 0.0f64;
    for (k, pair) in [(0, 1), (2, 3), (4, 5), (6, 7), (8, 9)].iter().enumerate() {
        let cov = sum_cross[k] / n_seeds as f64;
        let target = kernel_eval(&spec, &probes[pair.0], &probes[pair.1]).unwrap();
        let abs = (cov - target).abs();
        worst_cov_abs = worst_cov_abs.max(abs);
        assert!(abs < 0.05, "covariance for pair {k}: {cov} vs kernel {target}");
    }
    pass(
        2,
        "standard-init output law matches the covariance kernel",
        &format!(
            "m={m}, {n_seeds} seeds: worst variance error {:.2}% (tol 5%), worst covariance error {:.3} (tol 0.05)",
            100.0 * worst_var_rel, worst_cov_abs
        ),
    );
}

// ---------------------------------------------------------------------------
// 3. Empirical tangent kernel converges with width
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_empirical_kernel_converges_with_width() {
    let d = 3;
    let grid = sample_sphere_gaussian(d, 10, 777);
    let spec = KernelSpec::new(KernelFamily::Ntk, 1, KernelDomain::Sphere).unwrap();
    let target = gram(&spec, &grid).unwrap();

    let widths = [64usize, 256, 1024, 4096];
    let mut avg_max = Vec::new();
    for &m in &widths {
        let mut sum = 0.0;
        let n_seeds = 10;
        for seed in 0..n_seeds {
            let cfg = NetworkConfig::uniform(d + 1, 1, m, InitMode::Standard, false, 9000 + seed);
            let params = init_params(&cfg).unwrap();
            let mut max_err = 0.0f64;
            for i in 0..grid.len() {
                for j in i..grid.len() {
                    let nnk = params.empirical_ntk(&grid[i], &grid[j]).unwrap();
                    max_err = max_err.max((nnk - target[(i, j)]).abs());
                }
            }
            sum += max_err;
        }
        avg_max.push(sum / n_seeds as f64);
    }
    for w in avg_max.windows(2) {
        assert!(w[1] <= w[0], "average max error increased along widths: {avg_max:?}");
    }
    pass(
        3,
        "empirical tangent kernel approaches the closed form",
        &format!("widths {widths:?} -> 10-seed average max errors {avg_max:.4?}"),
    );
}

// ---------------------------------------------------------------------------
// 4. Flow prediction matches a 4th-order ODE oracle
// ---------------------------------------------------------------------------

/// RK4 on the joint system: train values f(X) and query values f(Q), both
/// driven by the train residual through the kernel.
fn rk4_oracle(
    g_train: &nalgebra::DMatrix<f64>,
    k_query: &nalgebra::DMatrix<f64>,
    y: &DVector<f64>,
    f0_train: &DVector<f64>,
    f0_query: &DVector<f64>,
    t_end: f64,
    h: f64,
) -> (DVector<f64>, DVector<f64>) {
    let n = y.len() as f64;
    let deriv = |ft: &DVector<f64>| -> (DVector<f64>, DVector<f64>) {
        let resid = ft - y;
        (-(g_train * &resid) / n, -(k_query * &resid) / n)
    };
    let mut ft = f0_train.clone();
    let mut fq = f0_query.clone();
    let steps = (t_end / h).round() as usize;
    let h = t_end / steps.max(1) as f64;
    for _ in 0..steps {
        let (k1t, k1q) = deriv(&ft);
        let (k2t, k2q) = deriv(&(&ft + &k1t * (h / 2.0)));
        let (k3t, k3q) = deriv(&(&ft + &k2t * (h / 2.0)));
        let (k4t, k4q) = deriv(&(&ft + &k3t * h));
        ft += (k1t + k2t * 2.0 + k3t * 2.0 + k4t) * (h / 6.0);
        fq += (k1q + k2q * 2.0 + k3q * 2.0 + k4q) * (h / 6.0);
    }
    (ft, fq)
}

#[test]
fn criterion_04_flow_matches_ode_oracle() {
    let spec = KernelSpec::new(KernelFamily::Ntk, 1, KernelDomain::Sphere).unwrap();
    let times = [0.3, 1.0, 2.5, 6.0, 15.0];
    let mut worst = 0.0f64;
    for (pi, &n) in [5usize, 8, 12, 16, 20].iter().enumerate() {
        let seed = 300 + pi as u64;
        let x = sample_sphere_gaussian(3, n, seed);
        let y = synth_target(&x, 0.3, seed + 50);
        let queries = sample_sphere_gaussian(3, 2, seed + 100);

        // Non-zero initial function to exercise the full identity.
        let f0 = |p: &Point| 0.4 * p.coords[0] - 0.2 * p.coords[1];
        let f0_train: Vec<f64> = x.iter().map(f0).collect();
        let f0_query: InitFn = Arc::new(f0);
        let pred = build_predictor(spec.clone(), x.clone(), &y, &f0_train, f0_query).unwrap();

        let g_train = gram(&spec, &x).unwrap();
        let k_query = nalgebra::DMatrix::from_fn(queries.len(), n, |qi, j| {
            kernel_eval(&spec, &queries[qi], &x[j]).unwrap()
        });
        let y_v = DVector::from_column_slice(&y);
        let f0_t = DVector::from_column_slice(&f0_train);
        let f0_q = DVector::from_iterator(queries.len(), queries.iter().map(f0));

        for &t in &times {
            let (oracle_train, oracle_query) =
                rk4_oracle(&g_train, &k_query, &y_v, &f0_t, &f0_q, t, 1e-3);
            let at_train = pred.predict_at_train(t);
            for i in 0..n {
                worst = worst.max((at_train[i] - oracle_train[i]).abs());
            }
            for (qi, q) in queries.iter().enumerate() {
                worst = worst.max((pred.predict(t, q).unwrap() - oracle_query[qi]).abs());
            }
        }
    }
    assert!(worst < 1e-6, "flow vs RK4 oracle deviation {worst}");
    pass(
        4,
        "spectral flow solution matches RK4 integration",
        &format!("5 problems x 5 times, train+query values: max |diff| = {worst:.2e} (tol 1e-6)"),
    );
}

// ---------------------------------------------------------------------------
// 5. Initialization-shift identity
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_shift_identity() {
    let spec = KernelSpec::new(KernelFamily::Ntk, 2, KernelDomain::Sphere).unwrap();
    let mut worst = 0.0f64;
    for problem in 0..10u64 {
        let n = 10 + (problem as usize % 5) * 4;
        let x = sample_sphere_gaussian(3, n, 600 + problem);
        let y = synth_target(&x, 0.25, 650 + problem);
        let a = 0.1 + 0.05 * problem as f64;
        let f0 = move |p: &Point| a * (3.0 * p.coords[0]).sin() + 0.2 * p.coords[2];
        let f0_train: Vec<f64> = x.iter().map(f0).collect();
        let pred =
            build_predictor(spec.clone(), x.clone(), &y, &f0_train, Arc::new(f0)).unwrap();
        let shifted = pred.shift_equivalent();

        let probes = sample_sphere_gaussian(3, 10, 700 + problem);
        for (k, p) in probes.iter().enumerate() {
            let t = 0.05 * 10f64.powf(k as f64 * 0.45); // spread over decades
            let direct = pred.predict(t, p).unwrap();
            let via_shift = f0(p) + shifted.predict(t, p).unwrap();
            worst = worst.max((direct - via_shift).abs());
        }
    }
    assert!(worst < 1e-10, "shift identity deviation {worst}");
    pass(
        5,
        "flow from f0 equals f0 plus flow from zero on shifted labels",
        &format!("10 problems x 10 (t, x) probes: max |diff| = {worst:.2e} (tol 1e-10)"),
    );
}

// ---------------------------------------------------------------------------
// 6. Wide-network training tracks the flow uniformly
// ---------------------------------------------------------------------------

fn flow_deviation_for(mode: InitMode, m: usize, seed: u64) -> f64 {
    let d = 3;
    let n = 40;
    let lr = 0.5;
    let steps = 200;
    let x = sample_sphere_gaussian(d, n, 8100 + seed);
    let y = synth_target(&x, 0.2, 8200 + seed);
    let grid = sample_sphere_gaussian(d, 50, 8300 + seed);

    let cfg = NetworkConfig::uniform(d + 1, 1, m, mode, false, 8400 + seed);
    let params = init_params(&cfg).unwrap();

    // The flow starts from the network's own initial function, which for the
    // standard mode is the (finite-width) sample of the limiting Gaussian
    // process; for the mirrored mode it is exactly zero.
    let f0_train = params.forward_points(&x).unwrap();
    let params0 = params.clone();
    let f0_query: InitFn = Arc::new(move |p| params0.forward(p).unwrap());

    let spec = KernelSpec::new(KernelFamily::Ntk, 1, KernelDomain::Sphere).unwrap();
    let pred = build_predictor(spec, x.clone(), &y, &f0_train, f0_query).unwrap();

    let traj = train_gd(&params, &x, &y, lr, steps, steps / 20).unwrap();
    assert!(traj.checkpoints.len() >= 20, "need at least 20 checkpoints");
    sup_deviation(&traj, &pred, &grid, |k| k as f64 * lr).unwrap()
}

#[test]
fn criterion_06_training_tracks_flow_as_width_grows() {
    let n_seeds = 5;
    let mut detail = Vec::new();
    for mode in [InitMode::Standard, InitMode::Mirrored] {
        let mut avg = [0.0f64; 2];
        for (wi, &m) in [256usize, 4096].iter().enumerate() {
            for seed in 0..n_seeds {
                avg[wi] += flow_deviation_for(mode, m, seed);
            }
            avg[wi] /= n_seeds as f64;
        }
        assert!(
            avg[1] < avg[0],
            "{mode}: sup deviation did not decrease: m=256 -> {}, m=4096 -> {}",
            avg[0],
            avg[1]
        );
        detail.push(format!("{mode} {:.4} -> {:.4}", avg[0], avg[1]));
    }
    pass(
        6,
        "training follows kernel gradient flow ever closer with width",
        &format!(
            "50-point grid, 21 checkpoints, {n_seeds} seeds, m=256 -> m=4096: sup dev {}",
            detail.join("; ")
        ),
    );
}

// ---------------------------------------------------------------------------
// 7. Gram eigenvalue decay exponents
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_gram_eigenvalue_decay_exponents() {
    let d = 3;
    let n = 500;
    let depth = 4;
    let n_seeds = 5;
    let mut detail = Vec::new();
    for (family, theory) in [
        (KernelFamily::Ntk, -((d + 1) as f64) / d as f64),
        (KernelFamily::Rfk, -((d + 3) as f64) / d as f64),
    ] {
        let spec = KernelSpec::new(family, depth, KernelDomain::Sphere).unwrap();
        let mut slope_sum = 0.0;
        for seed in 0..n_seeds {
            let x = sample_sphere_gaussian(d, n, 2025 + seed);
            let eig = eig_sym(&gram(&spec, &x).unwrap()).unwrap();
            let (lo, hi) = default_fit_range(n);
            slope_sum += decay_slope(&eig.eigenvalues, lo, hi).unwrap().slope;
        }
        let slope = slope_sum / n_seeds as f64;
        assert!(
            (slope - theory).abs() < 0.15,
            "{family:?}: mean slope {slope} vs theory {theory}"
        );
        detail.push(format!("{family:?} {slope:.3} vs {theory:.3}"));
    }
    pass(
        7,
        "Gram spectra decay with the predicted exponents",
        &format!("n={n}, d={d}, depth {depth}, {n_seeds} seeds, tol 0.15: {}", detail.join("; ")),
    );
}

// ---------------------------------------------------------------------------
// 8. Interpolation-norm verdicts across the critical exponent
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_norm_verdicts_agree_with_threshold() {
    let cfg = ExperimentConfig {
        thm_d_list: vec![3, 9],
        thm_s_fractions: vec![0.1, 0.5, 0.9, 1.0, 1.5, 3.0],
        trials: 48,
        series_len: 100_000,
        ..ExperimentConfig::default()
    };
    let rows = run_thm_smoothness(&cfg).unwrap();
    assert_eq!(rows.len(), 12);
    for row in &rows {
        let expected = if row.s_fraction < 1.0 {
            Verdict::Converges
        } else {
            Verdict::Diverges
        };
        assert_eq!(row.predicted, expected);
        assert!(
            row.agrees,
            "(d={}, s/s*={}) verdict {:?} disagrees (ratio {:.4}, rerun={})",
            row.d, row.s_fraction, row.verdict, row.median_ratio, row.rerun
        );
    }
    let reruns = rows.iter().filter(|r| r.rerun).count();
    pass(
        8,
        "series verdicts land on the predicted side of s* = 3/(d+1)",
        &format!("12 cells (d in {{3,9}} x 6 exponents), 48 trials each, {reruns} boundary rerun(s)"),
    );
}

// ---------------------------------------------------------------------------
// 9. Learning-curve ordering between initialization modes
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_mirrored_learning_curve_is_steeper() {
    let cfg = ExperimentConfig {
        d: 5,
        n_grid: vec![64, 128, 256],
        seeds: (0..10).collect(),
        init_mode: InitSelection::Both,
        ..ExperimentConfig::default()
    };
    let result = run_curve(&cfg).unwrap();
    let find = |mode: InitMode| {
        result
            .summaries
            .iter()
            .find(|s| s.mode == mode)
            .expect("summary present")
    };
    let std_s = find(InitMode::Standard);
    let mir_s = find(InitMode::Mirrored);
    let std_slope = std_s.mean_slope.unwrap();
    let mir_slope = mir_s.mean_slope.unwrap();
    let pooled_se = (std_s.slope_se.unwrap().powi(2) + mir_s.slope_se.unwrap().powi(2)).sqrt();
    let gap = std_slope - mir_slope;
    assert!(
        mir_slope < std_slope,
        "mirrored slope {mir_slope} not steeper than standard {std_slope}"
    );
    assert!(
        gap > 2.0 * pooled_se,
        "slope gap {gap:.4} does not exceed twice the pooled SE {pooled_se:.4}"
    );
    pass(
        9,
        "mirrored initialization learns faster",
        &format!(
            "n in {{64,128,256}}, 10 seeds: slopes standard {std_slope:.3}, mirrored {mir_slope:.3}, gap {gap:.3} > 2 x SE {pooled_se:.3}"
        ),
    );
}

// ---------------------------------------------------------------------------
// 10. Label-smoothness estimation
// ---------------------------------------------------------------------------

/// With dataset CSVs supplied via `NTKLAB_DATASETS_DIR` (files mnist.csv,
/// fashion_mnist.csv, cifar10.csv), checks the published smoothness values;
/// otherwise validates the estimator on labels with planted tail-sum decay.
#[test]
fn criterion_10_smoothness_estimation() {
    if let Ok(dir) = std::env::var("NTKLAB_DATASETS_DIR") {
        let dir = std::path::PathBuf::from(dir);
        let expected = [
            ("mnist.csv", 0.40),
            ("fashion_mnist.csv", 0.22),
            ("cifar10.csv", 0.09),
        ];
        if expected.iter().all(|(f, _)| dir.join(f).exists()) {
            let cfg = ExperimentConfig {
                datasets: expected.iter().map(|(f, _)| dir.join(f)).collect(),
                max_rows: Some(3000),
                fit_max_index: Some(2699),
                ..ExperimentConfig::default()
            };
            let outcomes = ntk_lab::experiment::run_smoothness(&cfg).unwrap();
            for (outcome, (name, alpha)) in outcomes.iter().zip(&expected) {
                assert!(outcome.error.is_none(), "{name}: {:?}", outcome.error);
                let got = outcome.reports[0].alpha_hat;
                assert!(
                    (got - alpha).abs() < 0.1,
                    "{name}: alpha_hat {got} vs published {alpha}"
                );
            }
            pass(10, "dataset smoothness matches published values", "3 datasets, tol 0.1");
            return;
        }
    }

    // Planted substitute: labels whose eigenbasis tail sums are exactly
    // k^{-p}; the fitted slope must recover -p.
    let d = 3;
    let n = 300;
    let x = sample_sphere_gaussian(d, n, 11_000);
    let spec = KernelSpec::new(KernelFamily::Ntk, 1, KernelDomain::Sphere).unwrap();
    let eig = eig_sym(&gram(&spec, &x).unwrap()).unwrap();
    let mut errors = Vec::new();
    for &p in &[0.75f64, 1.0, 1.5] {
        let coeffs: Vec<f64> = (1..=n)
            .map(|k| {
                let c2 = if k == n {
                    (k as f64).powf(-p)
                } else {
                    (k as f64).powf(-p) - ((k + 1) as f64).powf(-p)
                };
                c2.sqrt()
            })
            .collect();
        let y = planted_targets(&eig.eigenvectors, &coeffs);
        let ds = Dataset::new(
            x.clone(),
            y,
            DatasetMeta {
                name: format!("planted-{p}"),
                source: None,
                transform: "planted eigenbasis coefficients".into(),
            },
        )
        .unwrap();
        let report = smoothness_estimate(&ds, &spec, DLambdaMode::Theoretical, n / 2).unwrap();
        let err = (report.fit.slope + p).abs();
        assert!(err < 0.05, "planted p={p}: fitted slope {}", report.fit.slope);
        errors.push(err);
    }
    pass(
        10,
        "smoothness estimator recovers planted decay exponents",
        &format!("p in {{0.75, 1.0, 1.5}}: slope errors {errors:.4?} (tol 0.05; dataset CSVs absent)"),
    );
}

// ---------------------------------------------------------------------------
// 11. Convergence-rate machinery, delegated
// ---------------------------------------------------------------------------

/// The convergence-rate exponents themselves need sample sizes far beyond a
/// test budget; their machinery is accepted through criteria 8 and 9 plus
/// the two invariants they rest on, re-checked here: the training residual
/// contracts monotonically along the flow, and early stopping with a
/// non-zero start reduces to the zero-start problem (shift identity at the
/// level of risks).
#[test]
fn criterion_11_rate_machinery_invariants() {
    let spec = KernelSpec::new(KernelFamily::Ntk, 1, KernelDomain::Sphere).unwrap();
    let x = sample_sphere_gaussian(3, 60, 12_000);
    let y = synth_target(&x, 0.2, 12_001);
    let f0 = |p: &Point| 0.5 * p.coords[1];
    let f0_train: Vec<f64> = x.iter().map(f0).collect();
    let pred = build_predictor(spec, x.clone(), &y, &f0_train, Arc::new(f0)).unwrap();

    // Residual contraction: |f_t(X) - Y| is nonincreasing in t.
    let y_v = DVector::from_column_slice(&y);
    let residual = |pred: &KgfPredictor, t: f64| (pred.predict_at_train(t) - &y_v).norm();
    let ts = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 200.0, 1000.0];
    let norms: Vec<f64> = ts.iter().map(|&t| residual(&pred, t)).collect();
    for w in norms.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "residual grew along the flow: {norms:?}");
    }

    // Risk-level shift identity: the optimal early-stopped risks of the
    // original and shifted problems coincide when the target is shifted
    // accordingly.
    let test = sample_sphere_gaussian(3, 400, 12_002);
    let test_fstar = synth_target(&test, 0.0, 0);
    let t_grid: Vec<f64> = (0..40).map(|k| 10f64.powf(-1.0 + 0.1 * k as f64)).collect();
    let (t_direct, risks_direct) = pred.early_stop(&t_grid, &test, &test_fstar).unwrap();
    let shifted = pred.shift_equivalent();
    let shifted_targets: Vec<f64> =
        test.iter().zip(&test_fstar).map(|(p, f)| f - f0(p)).collect();
    let (t_shifted, risks_shifted) = shifted.early_stop(&t_grid, &test, &shifted_targets).unwrap();
    assert_eq!(t_direct, t_shifted, "early-stop times differ");
    for (a, b) in risks_direct.iter().zip(&risks_shifted) {
        assert!((a - b).abs() < 1e-10, "risk curves differ: {a} vs {b}");
    }

    pass(
        11,
        "convergence-rate machinery accepted via invariants",
        "residual contraction + risk-level shift identity; exponents delegated to criteria 8 and 9",
    );
}

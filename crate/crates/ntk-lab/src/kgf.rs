//! Kernel gradient-flow prediction with an arbitrary initial function.
//!
//! Gradient flow on the mean-square loss in the RKHS of a kernel `k` has the
//! closed-form solution
//!
//! ```text
//! f_t(x) = f_0(x) - k(x, X) phi_t(K) (f_0(X) - Y),      K = k(X, X)
//! ```
//!
//! where `phi_t(lambda) = (1 - exp(-t lambda / n))/lambda` acts spectrally on
//! the training Gram matrix (see [`crate::spectral::flow_factor`]). The
//! residual `f_t(X) - Y` contracts as `exp(-t K / n)`, so training values
//! interpolate `Y` as `t -> infinity` when the Gram is positive definite.
//!
//! The initial function enters only through its values: subtracting it from
//! the targets and starting from zero yields an exactly equivalent problem
//! ([`KgfPredictor::shift_equivalent`]), the identity behind comparing
//! standard (random `f_0`) and mirrored (`f_0 = 0`) initializations.

use crate::error::{Error, Result};
use crate::kernels::{gram, kernel_eval, KernelSpec, Point};
use crate::spectral::{eig_sym, flow_phi, EigenSystem};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Shared callable giving the initial function off-sample.
pub type InitFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// Frozen training data plus the spectral factors needed to predict at any
/// flow time.
#[derive(Clone)]
pub struct KgfPredictor {
    pub spec: KernelSpec,
    pub x_train: Vec<Point>,
    pub y: DVector<f64>,
    pub f0_at_train: DVector<f64>,
    /// Initial function off-sample; must be coherent with `f0_at_train`.
    pub f0_query: InitFn,
    /// Eigendecomposition of the training Gram matrix, computed once.
    pub eig: EigenSystem,
}

impl std::fmt::Debug for KgfPredictor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KgfPredictor")
            .field("spec", &self.spec)
            .field("n_train", &self.x_train.len())
            .field("f0_query", &"<fn>")
            .finish()
    }
}

/// Monte Carlo estimate of a squared-error risk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiskEstimate {
    /// Mean squared deviation; nonnegative.
    pub value: f64,
    /// Standard error of the Monte Carlo mean.
    pub std_error: f64,
    /// Number of Monte Carlo points.
    pub n_mc: usize,
    /// Flow time the estimate refers to, when applicable (callers producing
    /// time-indexed curves set it; plain estimates leave it 0).
    pub t: f64,
}

/// Builds a predictor: validates shapes, assembles the training Gram and
/// eigendecomposes it once; predictions at any `t` then reuse the factors.
pub fn build_predictor(
    spec: KernelSpec,
    x_train: Vec<Point>,
    y: &[f64],
    f0_at_train: &[f64],
    f0_query: InitFn,
) -> Result<KgfPredictor> {
    let n = x_train.len();
    if y.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: y.len(),
        });
    }
    if f0_at_train.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: f0_at_train.len(),
        });
    }
    let g = gram(&spec, &x_train)?;
    let eig = eig_sym(&g)?;
    Ok(KgfPredictor {
        spec,
        x_train,
        y: DVector::from_column_slice(y),
        f0_at_train: DVector::from_column_slice(f0_at_train),
        f0_query,
        eig,
    })
}

impl KgfPredictor {
    pub fn n_train(&self) -> usize {
        self.x_train.len()
    }

    /// Spectral weight vector `phi_t(K) (f_0(X) - Y)`; predictions are
    /// `f_0(x) - k(x, X) w_t`.
    fn flow_weights(&self, t: f64) -> DVector<f64> {
        let residual = &self.f0_at_train - &self.y;
        let phi = flow_phi(&self.eig, t, self.n_train());
        self.eig.apply_spectral_diag(&phi, &residual)
    }

    /// Kernel row `k(x, X)` against the training points.
    fn kernel_row(&self, x: &Point) -> Result<DVector<f64>> {
        let mut row = DVector::zeros(self.n_train());
        for (j, xj) in self.x_train.iter().enumerate() {
            row[j] = kernel_eval(&self.spec, x, xj)?;
        }
        Ok(row)
    }

    /// Flow prediction at time `t >= 0` and point `x`; `t = 0` returns the
    /// initial function.
    pub fn predict(&self, t: f64, x: &Point) -> Result<f64> {
        Ok(self.predict_many(t, std::slice::from_ref(x))?[0])
    }

    /// Flow predictions at one time over many points; the spectral weights
    /// are computed once, so the cost is one kernel row per point.
    pub fn predict_many(&self, t: f64, xs: &[Point]) -> Result<Vec<f64>> {
        assert!(t >= 0.0, "flow time must be nonnegative");
        let w = self.flow_weights(t);
        xs.iter()
            .map(|x| Ok((self.f0_query)(x) - self.kernel_row(x)?.dot(&w)))
            .collect()
    }

    /// Flow predictions at the training points:
    /// `f_t(X) = f_0(X) - (I - exp(-t K / n)) (f_0(X) - Y)`, evaluated
    /// spectrally (smooth in every eigenvalue including zero).
    pub fn predict_at_train(&self, t: f64) -> DVector<f64> {
        assert!(t >= 0.0, "flow time must be nonnegative");
        let n = self.n_train() as f64;
        let residual = &self.f0_at_train - &self.y;
        let diag: Vec<f64> = self
            .eig
            .eigenvalues
            .iter()
            .map(|&l| -(-t * l / n).exp_m1())
            .collect();
        &self.f0_at_train - self.eig.apply_spectral_diag(&diag, &residual)
    }

    /// Equivalent shifted problem: zero initial function, targets
    /// `Y - f_0(X)`. For all `t, x`:
    /// `predict(self, t, x) = f_0(x) + predict(shifted, t, x)` exactly (the
    /// residual, Gram, and spectral factors are all unchanged).
    pub fn shift_equivalent(&self) -> KgfPredictor {
        KgfPredictor {
            spec: self.spec,
            x_train: self.x_train.clone(),
            y: &self.y - &self.f0_at_train,
            f0_at_train: DVector::zeros(self.n_train()),
            f0_query: Arc::new(|_| 0.0),
            eig: self.eig.clone(),
        }
    }

    /// Mean squared test error over a time grid plus the minimizing time;
    /// ties break toward the smallest time.
    pub fn early_stop(
        &self,
        t_grid: &[f64],
        test_x: &[Point],
        test_y: &[f64],
    ) -> Result<(f64, Vec<f64>)> {
        if t_grid.is_empty() {
            return Err(Error::EmptyGrid("time grid"));
        }
        if test_x.is_empty() {
            return Err(Error::EmptyGrid("test set"));
        }
        if test_y.len() != test_x.len() {
            return Err(Error::Dimension {
                expected: test_x.len(),
                actual: test_y.len(),
            });
        }
        // Kernel rows against the training set, computed once for all times.
        let n_test = test_x.len();
        let mut k_test = DMatrix::zeros(n_test, self.n_train());
        for (i, x) in test_x.iter().enumerate() {
            k_test.set_row(i, &self.kernel_row(x)?.transpose());
        }
        let f0_test: Vec<f64> = test_x.iter().map(|x| (self.f0_query)(x)).collect();
        let curve: Vec<f64> = t_grid
            .iter()
            .map(|&t| {
                assert!(t >= 0.0, "flow time must be nonnegative");
                let w = self.flow_weights(t);
                let preds = &k_test * &w;
                let mse: f64 = (0..n_test)
                    .map(|i| {
                        let p = f0_test[i] - preds[i];
                        (p - test_y[i]).powi(2)
                    })
                    .sum::<f64>()
                    / n_test as f64;
                mse
            })
            .collect();
        let mut best = 0;
        for (i, &r) in curve.iter().enumerate() {
            if r < curve[best] {
                best = i;
            }
        }
        Ok((t_grid[best], curve))
    }
}

/// Pairwise (cascade) summation: deterministic, order-stable, and accurate to
/// a few ulps regardless of length.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Monte Carlo excess risk `E[(predict(x) - f*(x))^2]` under the sampler's
/// distribution, with the standard error of the mean.
///
/// Summation is pairwise, so the estimate is reproducible to rounding for a
/// fixed sampler regardless of accumulation chunking. Panics if
/// `n_mc < 100` (contract violation).
pub fn excess_risk(
    predict_fn: impl Fn(&Point) -> f64,
    f_star: impl Fn(&Point) -> f64,
    mut sampler: impl FnMut() -> Point,
    n_mc: usize,
) -> RiskEstimate {
    assert!(n_mc >= 100, "excess risk needs at least 100 Monte Carlo points");
    let sq: Vec<f64> = (0..n_mc)
        .map(|_| {
            let x = sampler();
            let d = predict_fn(&x) - f_star(&x);
            d * d
        })
        .collect();
    let value = pairwise_sum(&sq) / n_mc as f64;
    let centered: Vec<f64> = sq.iter().map(|&s| (s - value) * (s - value)).collect();
    let var = pairwise_sum(&centered) / (n_mc as f64 - 1.0);
    RiskEstimate {
        value,
        std_error: (var / n_mc as f64).sqrt(),
        n_mc,
        t: 0.0,
    }
}

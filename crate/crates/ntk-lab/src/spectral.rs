//! Symmetric eigendecomposition, spectral gradient-flow factors, and log-log
//! decay-rate fitting.
//!
//! Everything downstream of a Gram matrix goes through [`EigenSystem`]: the
//! gradient-flow solution applies the spectral function
//! `phi_t(lambda) = (1 - exp(-t lambda / n)) / lambda` to it, Gaussian-process
//! sampling factorizes it, and decay exponents are least-squares slopes of
//! `log10 lambda_i` against `log10 i`.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Entrywise symmetry tolerance accepted by [`eig_sym`].
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Eigenvalues below `NEAR_ZERO_REL * lambda_max` are treated as zero by the
/// flow factor (their analytic limit is substituted, never a division).
pub const NEAR_ZERO_REL: f64 = 1e-12;

/// Eigendecomposition of a symmetric matrix: descending eigenvalues and the
/// matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Eigenvalues sorted descending (raw values; small negatives from
    /// rounding are preserved, not floored).
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, ordered to match `eigenvalues`.
    /// Sign convention: the largest-magnitude component of each column is
    /// positive, so projections are reproducible.
    pub eigenvectors: DMatrix<f64>,
}

impl EigenSystem {
    /// Matrix order.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvalues floored at zero, for reporting on nominally-PSD input.
    pub fn floored_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|&l| l.max(0.0)).collect()
    }

    /// Smallest raw eigenvalue; a value below `-1e-8 * n` on a Gram matrix
    /// signals the input was not numerically PSD.
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Threshold below which an eigenvalue is treated as zero by spectral
    /// functions with removable singularities.
    pub fn near_zero_threshold(&self) -> f64 {
        NEAR_ZERO_REL * self.eigenvalues.first().copied().unwrap_or(0.0).max(0.0)
    }

    /// Applies `V diag(d) V^T` to a vector.
    pub fn apply_spectral_diag(&self, diag: &[f64], v: &DVector<f64>) -> DVector<f64> {
        let mut proj = self.eigenvectors.transpose() * v;
        for (p, d) in proj.iter_mut().zip(diag) {
            *p *= d;
        }
        &self.eigenvectors * proj
    }

    /// Builds the full matrix `V diag(d) V^T`.
    pub fn spectral_matrix(&self, diag: &[f64]) -> DMatrix<f64> {
        let n = self.len();
        let mut scaled = self.eigenvectors.clone();
        for (mut col, d) in scaled.column_iter_mut().zip(diag) {
            col *= *d;
        }
        let mut out = DMatrix::zeros(n, n);
        scaled.mul_to(&self.eigenvectors.transpose(), &mut out);
        out
    }
}

/// Result of a log-log least-squares fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlopeFit {
    /// Slope of `log10 y` against `log10 x`.
    pub slope: f64,
    /// Intercept in `log10` units.
    pub intercept: f64,
    /// Coefficient of determination in `[0, 1]`.
    pub r_squared: f64,
    /// 1-based index range `(i_min, i_max)` actually used, after dropping any
    /// non-positive tail.
    pub index_range: (usize, usize),
}

/// Symmetric eigendecomposition with descending eigenvalues.
///
/// The input must be symmetric within [`SYMMETRY_TOL`] entrywise; it is then
/// symmetrized exactly (`(G + G^T)/2`) before decomposition so the solver sees
/// a bitwise-symmetric matrix. Fails with a convergence error if the
/// iterative tridiagonal QR solver exhausts its iteration budget.
pub fn eig_sym(g: &DMatrix<f64>) -> Result<EigenSystem> {
    let n = g.nrows();
    if n == 0 || g.ncols() != n {
        return Err(Error::Dimension {
            expected: n.max(1),
            actual: g.ncols(),
        });
    }
    let mut max_abs: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            max_abs = max_abs.max((g[(i, j)] - g[(j, i)]).abs());
        }
    }
    if max_abs > SYMMETRY_TOL {
        return Err(Error::Asymmetry {
            max_abs,
            tol: SYMMETRY_TOL,
        });
    }
    let mut sym = g.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (g[(i, j)] + g[(j, i)]);
            sym[(i, j)] = v;
            sym[(j, i)] = v;
        }
    }
    let budget = 100 * n + 1024;
    let decomp = nalgebra::linalg::SymmetricEigen::try_new(sym, f64::EPSILON, budget)
        .ok_or(Error::Convergence { order: n })?;

    // Sort descending, carrying eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        decomp.eigenvalues[b]
            .partial_cmp(&decomp.eigenvalues[a])
            .expect("eigenvalues are finite")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| decomp.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = decomp.eigenvectors.column(src);
        // Fix the sign: largest-magnitude component positive (first such
        // index on ties).
        let mut pivot = 0;
        let mut best = -1.0;
        for (i, &v) in col.iter().enumerate() {
            if v.abs() > best {
                best = v.abs();
                pivot = i;
            }
        }
        let flip = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            eigenvectors[(i, dst)] = flip * col[i];
        }
    }
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

/// Diagonal of the gradient-flow spectral function at time `t`:
/// `phi_t(lambda) = (1 - exp(-t lambda / n)) / lambda`, with the removable
/// singularity at `lambda -> 0` replaced by its analytic limit `t / n`.
pub fn flow_phi(eigs: &EigenSystem, t: f64, n: usize) -> Vec<f64> {
    let thresh = eigs.near_zero_threshold();
    let n = n as f64;
    eigs.eigenvalues
        .iter()
        .map(|&l| {
            if l <= thresh {
                t / n
            } else {
                // 1 - exp(-x) computed as -expm1(-x) for accuracy at small x.
                -(-t * l / n).exp_m1() / l
            }
        })
        .collect()
}

/// Gradient-flow factor matrix `V diag(phi_t(lambda)) V^T`.
///
/// `n` is the training-sample count entering the flow normalization; for a
/// Gram matrix it equals the matrix order, which is asserted.
pub fn flow_factor(eigs: &EigenSystem, t: f64, n: usize) -> DMatrix<f64> {
    assert_eq!(n, eigs.len(), "flow normalizer must equal the matrix order");
    assert!(t >= 0.0, "flow time must be nonnegative");
    let phi = flow_phi(eigs, t, n);
    eigs.spectral_matrix(&phi)
}

/// Least-squares fit of `log10 ys` against `log10 xs`.
///
/// Pairs with a non-positive entry are dropped; at least `min_points` usable
/// pairs are required. `index_range` reports 1-based positions of the first
/// and last pair used.
pub fn fit_log_log(xs: &[f64], ys: &[f64], min_points: usize) -> Result<SlopeFit> {
    assert_eq!(xs.len(), ys.len(), "x/y length mismatch");
    let usable: Vec<(usize, f64, f64)> = xs
        .iter()
        .zip(ys)
        .enumerate()
        .filter(|(_, (&x, &y))| x > 0.0 && y > 0.0)
        .map(|(i, (&x, &y))| (i + 1, x.log10(), y.log10()))
        .collect();
    if usable.len() < min_points {
        return Err(Error::Range {
            needed: min_points,
            usable: usable.len(),
        });
    }
    let n = usable.len() as f64;
    let mean_x = usable.iter().map(|(_, x, _)| x).sum::<f64>() / n;
    let mean_y = usable.iter().map(|(_, _, y)| y).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|(_, x, _)| (x - mean_x).powi(2)).sum();
    let sxy: f64 = usable
        .iter()
        .map(|(_, x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    if sxx <= 0.0 {
        return Err(Error::Range {
            needed: min_points,
            usable: 1,
        });
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = usable.iter().map(|(_, _, y)| (y - mean_y).powi(2)).sum();
    let ss_res: f64 = usable
        .iter()
        .map(|(_, x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(SlopeFit {
        slope,
        intercept,
        r_squared,
        index_range: (usable[0].0, usable[usable.len() - 1].0),
    })
}

/// Log-log decay slope of `values[i]` against the 1-based index `i` over
/// `[i_min, i_max]`.
///
/// Values must be strictly positive on the fit range; a non-positive tail is
/// dropped and the range shrunk accordingly (recorded in the returned
/// `index_range`). Fails if fewer than 5 usable points remain.
pub fn decay_slope(values: &[f64], i_min: usize, i_max: usize) -> Result<SlopeFit> {
    const MIN_POINTS: usize = 5;
    if i_min < 1 || i_min >= i_max || i_max > values.len() {
        return Err(Error::Range {
            needed: MIN_POINTS,
            usable: 0,
        });
    }
    // Shrink the range at the first non-positive value.
    let mut end = i_min - 1;
    while end < i_max && values[end] > 0.0 {
        end += 1;
    }
    let xs: Vec<f64> = (i_min..=end).map(|i| i as f64).collect();
    let ys: Vec<f64> = values[i_min - 1..end].to_vec();
    let mut fit = fit_log_log(&xs, &ys, MIN_POINTS)?;
    fit.index_range = (i_min, end);
    Ok(fit)
}

/// Default mid-range fit window `[max(5, 0.02 n), 0.5 n]` for an `n`-point
/// spectrum: drops the non-asymptotic head and the noise-dominated tail.
pub fn default_fit_range(n: usize) -> (usize, usize) {
    let lo = 5usize.max((0.02 * n as f64).ceil() as usize);
    let hi = n / 2;
    (lo, hi)
}

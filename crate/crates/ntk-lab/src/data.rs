//! Data handling: synthetic sphere datasets, CSV ingestion, and the
//! spectral smoothness estimator.
//!
//! The synthetic protocol draws inputs uniformly on the unit sphere `S^d`
//! (as normalized `(d+1)`-dimensional Gaussians) and labels them with
//! `y = (x_1 + ... + x_d)^2` plus Gaussian noise — a smooth target whose
//! coordinate sum omits the last ambient coordinate.
//!
//! The smoothness estimator expands the labels in the eigenbasis of the
//! kernel Gram matrix: with eigenvectors `V` and `phi = sqrt(n) V` (so that
//! `(1/n) phi phi^T = I`), the coefficients are `c = (1/n) phi^T Y`. If the
//! squared coefficients decay like `c_i^2 ~ i^(-(alpha d_lambda + 1))` then
//! the tail sums `sum_{k >= i} c_k^2` decay like `i^(-alpha d_lambda)`, so
//! a log-log slope fit of the tail sums divided by the eigenvalue decay
//! exponent `d_lambda` estimates the smoothness `alpha` of the target
//! relative to the kernel.

use crate::error::{Error, Result};
use crate::kernels::{gram, KernelDomain, KernelFamily, KernelSpec, Point};
use crate::spectral::{decay_slope, default_fit_range, eig_sym, SlopeFit};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Feature-row normalization applied at ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalize {
    None,
    /// Divide each feature row by its Euclidean norm (zero rows rejected).
    UnitSphere,
}

/// How the eigenvalue decay exponent entering the smoothness estimate is
/// obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DLambdaMode {
    /// Closed-form exponent for the kernel family on the sphere:
    /// `(d+1)/d` for the tangent kernel, `(d+3)/d` for the covariance
    /// kernel.
    Theoretical,
    /// Slope fitted to the Gram eigenvalue decay itself.
    Fitted,
}

impl std::fmt::Display for DLambdaMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DLambdaMode::Theoretical => write!(f, "theoretical"),
            DLambdaMode::Fitted => write!(f, "fitted"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub name: String,
    pub source: Option<PathBuf>,
    /// Human-readable description of how labels/features were transformed.
    pub transform: String,
}

/// A labelled point set.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Vec<Point>,
    pub y: Vec<f64>,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn new(x: Vec<Point>, y: Vec<f64>, meta: DatasetMeta) -> Result<Dataset> {
        if x.is_empty() {
            return Err(Error::EmptyDataset(meta.name));
        }
        if y.len() != x.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                actual: y.len(),
            });
        }
        for p in &x {
            p.validate_finite()?;
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("labels contain non-finite values".into()));
        }
        Ok(Dataset { x, y, meta })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// `n` points uniform on `S^d`: `(d+1)`-dimensional standard Gaussians
/// normalized to unit length. Deterministic per seed.
pub fn sample_sphere_gaussian(d: usize, n: usize, seed: u64) -> Vec<Point> {
    assert!(d >= 1, "sphere dimension must be at least 1");
    assert!(n >= 1, "need at least one point");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| loop {
            let v: Vec<f64> = (0..=d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > 1e-12 {
                return Point::new(v.into_iter().map(|c| c / norm).collect());
            }
        })
        .collect()
}

/// Noiseless target `(x_1 + ... + x_d)^2`: the squared sum of all but the
/// last coordinate.
pub fn target_value(p: &Point) -> f64 {
    let s: f64 = p.coords[..p.dim() - 1].iter().sum();
    s * s
}

/// Labels `y_i = target_value(x_i) + eps_i` with `eps_i ~ N(0, sigma^2)`.
pub fn synth_target(x: &[Point], sigma: f64, seed: u64) -> Vec<f64> {
    assert!(sigma >= 0.0, "noise level must be nonnegative");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    x.iter()
        .map(|p| {
            let z: f64 = StandardNormal.sample(&mut rng);
            target_value(p) + sigma * z
        })
        .collect()
}

/// Loads a numeric CSV (no quoted fields; an optional single header line is
/// skipped when non-numeric).
///
/// `label_column` selects the label cell per row (0-based; `None` means the
/// last column). When `max_rows` is set, rows are shuffled with the seed and
/// the excess dropped, giving a deterministic subset. `UnitSphere`
/// normalization divides each feature row by its norm.
pub fn load_csv(
    path: &Path,
    label_column: Option<usize>,
    max_rows: Option<usize>,
    normalize: Normalize,
    seed: u64,
) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let parse_cell = |cell: &str, row: usize, col: usize| -> Result<f64> {
        let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
            path: path.display().to_string(),
            row,
            col,
            msg: format!("not a number: {:?}", cell.trim()),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                path: path.display().to_string(),
                row,
                col,
                msg: "non-finite value".into(),
            });
        }
        Ok(v)
    };

    // (original 1-based row number, numeric cells)
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut ncols = None;
    for (idx, line) in text.lines().enumerate() {
        let row_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        // A non-numeric first line is a header.
        if rows.is_empty() && idx == 0 && cells.iter().any(|c| c.trim().parse::<f64>().is_err()) {
            continue;
        }
        if let Some(k) = ncols {
            if cells.len() != k {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    row: row_no,
                    col: cells.len(),
                    msg: format!("expected {k} columns, found {}", cells.len()),
                });
            }
        } else {
            ncols = Some(cells.len());
        }
        let parsed: Vec<f64> = cells
            .iter()
            .enumerate()
            .map(|(c, cell)| parse_cell(cell, row_no, c + 1))
            .collect::<Result<_>>()?;
        rows.push((row_no, parsed));
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset(path.display().to_string()));
    }
    let ncols = ncols.unwrap();
    if ncols < 2 {
        return Err(Error::Config(
            "need at least two columns (features + label)".into(),
        ));
    }
    let label_idx = label_column.unwrap_or(ncols - 1);
    if label_idx >= ncols {
        return Err(Error::Config(format!(
            "label column {label_idx} out of range for {ncols} columns"
        )));
    }

    if let Some(cap) = max_rows {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rows.shuffle(&mut rng);
        rows.truncate(cap);
        if rows.is_empty() {
            return Err(Error::EmptyDataset(format!(
                "{} (max_rows = 0)",
                path.display()
            )));
        }
    }

    let mut x = Vec::with_capacity(rows.len());
    let mut y = Vec::with_capacity(rows.len());
    for (row_no, cells) in &rows {
        let mut feats: Vec<f64> = cells
            .iter()
            .enumerate()
            .filter(|(c, _)| *c != label_idx)
            .map(|(_, v)| *v)
            .collect();
        if normalize == Normalize::UnitSphere {
            let norm = feats.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm <= 1e-12 {
                return Err(Error::ZeroNormRow { row: *row_no });
            }
            for v in &mut feats {
                *v /= norm;
            }
        }
        x.push(Point::new(feats));
        y.push(cells[label_idx]);
    }
    Dataset::new(
        x,
        y,
        DatasetMeta {
            name: path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            source: Some(path.to_path_buf()),
            transform: format!(
                "label column {label_idx}; normalize {normalize:?}; max_rows {max_rows:?}"
            ),
        },
    )
}

/// Smoothness of the labels relative to a kernel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub dataset: String,
    /// Estimated relative smoothness `|slope| / d_lambda`.
    pub alpha_hat: f64,
    /// Eigenvalue decay exponent used in the denominator.
    pub d_lambda: f64,
    pub d_lambda_mode: DLambdaMode,
    /// `tail_sums[i] = sum_{k >= i} c_k^2` (0-based), nonincreasing.
    pub tail_sums: Vec<f64>,
    /// Log-log fit of the tail sums against the 1-based index.
    pub fit: SlopeFit,
}

/// Builds labels whose Gram-eigenbasis coefficients are exactly `coeffs`:
/// `Y = sqrt(n) V c`, the inverse of the projection used by
/// [`smoothness_estimate`].
pub fn planted_targets(eigenvectors: &DMatrix<f64>, coeffs: &[f64]) -> Vec<f64> {
    let n = eigenvectors.nrows();
    assert_eq!(coeffs.len(), n, "need one coefficient per eigenvector");
    let c = DVector::from_column_slice(coeffs);
    ((n as f64).sqrt() * eigenvectors * c).iter().copied().collect()
}

/// Closed-form sphere eigenvalue decay exponent for a kernel family. The
/// sphere dimension is inferred from the ambient point dimension for the
/// sphere domain, or equals the input dimension for the lifted domain.
pub fn theoretical_d_lambda(spec: &KernelSpec, ambient_dim: usize) -> Result<f64> {
    let d = match spec.domain {
        KernelDomain::Sphere => {
            if ambient_dim < 2 {
                return Err(Error::Config(
                    "sphere points need ambient dimension at least 2".into(),
                ));
            }
            ambient_dim - 1
        }
        KernelDomain::Lifted => ambient_dim,
    };
    Ok(match spec.family {
        KernelFamily::Ntk => (d + 1) as f64 / d as f64,
        KernelFamily::Rfk => (d + 3) as f64 / d as f64,
    })
}

/// Estimates the relative smoothness of `ds.y` with respect to the kernel.
///
/// Projects the labels onto the Gram eigenbasis, fits the tail-sum decay on
/// a log-log scale over `[max(5, 0.02 n), fit_max_index]`, and divides the
/// absolute slope by the eigenvalue decay exponent.
pub fn smoothness_estimate(
    ds: &Dataset,
    spec: &KernelSpec,
    d_lambda_mode: DLambdaMode,
    fit_max_index: usize,
) -> Result<SmoothnessReport> {
    let n = ds.len();
    if fit_max_index > n {
        return Err(Error::Config(format!(
            "fit_max_index {fit_max_index} exceeds dataset size {n}"
        )));
    }
    let g = gram(spec, &ds.x)?;
    let eig = eig_sym(&g)?;
    let y = DVector::from_column_slice(&ds.y);
    // c = V^T Y / sqrt(n); with phi = sqrt(n) V this is (1/n) phi^T Y.
    let c = eig.eigenvectors.tr_mul(&y) / (n as f64).sqrt();
    let mut tail_sums = vec![0.0; n];
    let mut acc = 0.0;
    for i in (0..n).rev() {
        acc += c[i] * c[i];
        tail_sums[i] = acc;
    }
    // Tails at the double-precision reconstruction floor carry no signal
    // (labels confined to a few eigendirections); zeroing them lets the fit
    // reject the degenerate window instead of fitting roundoff noise.
    let floor = tail_sums[0] * 1e-18;
    let fit_values: Vec<f64> = tail_sums
        .iter()
        .map(|&t| if t > floor { t } else { 0.0 })
        .collect();
    let (lo, _) = default_fit_range(n);
    let fit = decay_slope(&fit_values, lo, fit_max_index)?;
    let d_lambda = match d_lambda_mode {
        DLambdaMode::Theoretical => theoretical_d_lambda(spec, ds.x[0].dim())?,
        DLambdaMode::Fitted => {
            let (elo, ehi) = default_fit_range(n);
            let efit = decay_slope(&eig.eigenvalues, elo, ehi)?;
            efit.slope.abs()
        }
    };
    Ok(SmoothnessReport {
        dataset: ds.meta.name.clone(),
        alpha_hat: fit.slope.abs() / d_lambda,
        d_lambda,
        d_lambda_mode,
        tail_sums,
        fit,
    })
}

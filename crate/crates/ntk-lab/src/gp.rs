//! Gaussian-process sampling with the random-feature covariance, and the
//! Monte Carlo interpolation-norm statistic.
//!
//! A wide network at standard initialization converges to a centered Gaussian
//! process whose covariance is the random-feature kernel; [`sample_gp`] draws
//! its finite-dimensional marginals. Whether such a draw lands in the
//! interpolation space `[H]^s` of the tangent kernel reduces to convergence
//! of the weighted chi-square series `sum_i lambda_i^{1-t} Z_i^2` with
//! idealized eigenvalues `lambda_i = i^{-(d+3)/d}` and `t = s (d+1)/(d+3)`;
//! [`interp_norm_partial_sums`] simulates its partial-sum trajectory and
//! [`threshold_verdict`] classifies convergence against divergence. The
//! critical exponent is `s* = 3/(d+1)`: below it the series converges almost
//! surely, at and above it it diverges (logarithmically at the boundary).

use crate::error::{Error, Result};
use crate::kernels::{gram, KernelFamily, KernelSpec, Point};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Initial Cholesky jitter, relative to `trace/n` of the covariance.
pub const JITTER_REL_START: f64 = 1e-10;
/// Maximum jitter (same scale) before factorization is declared failed.
pub const JITTER_REL_MAX: f64 = 1e-6;
/// Minimum pairwise distance for GP sampling points.
pub const MIN_PAIR_DIST: f64 = 1e-9;

/// A draw of the limiting Gaussian process on a finite point set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GpSample {
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    pub seed: u64,
}

/// Partial-sum trajectory of the interpolation-norm series at one `(d, s)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormTrajectory {
    /// `partial_sums[k-1] = sum_{i<=k} lambda_i^{1-t} Z_i^2`; nondecreasing.
    pub partial_sums: Vec<f64>,
    /// Sphere dimension entering the idealized eigenvalue decay.
    pub d: usize,
    /// Interpolation-space exponent.
    pub s: f64,
    /// Eigenvalue power `t = s (d+1)/(d+3)`.
    pub t_exponent: f64,
}

/// Verdict on whether the interpolation-norm series converges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Converges,
    Diverges,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Converges => write!(f, "converges"),
            Verdict::Diverges => write!(f, "diverges"),
        }
    }
}

/// Critical smoothness exponent `s* = 3/(d+1)` separating almost-sure
/// membership from almost-sure non-membership.
pub fn critical_exponent(d: usize) -> f64 {
    3.0 / (d as f64 + 1.0)
}

/// Effective series exponent: the summand scales like `i^{-p}` with
/// `p = (d+3)(1-t)/d`; the series converges iff `p > 1`.
pub fn series_exponent(d: usize, s: f64) -> f64 {
    let d = d as f64;
    let t = s * (d + 1.0) / (d + 3.0);
    (d + 3.0) * (1.0 - t) / d
}

/// Draws a centered Gaussian vector with covariance `gram(spec, points)`.
///
/// The covariance must use the random-feature family (it is the
/// initialization covariance, not the tangent kernel). The Gram matrix is
/// factorized as `A A^T` by Cholesky with a relative jitter ladder
/// `1e-10 .. 1e-6` (times `trace/n`); the sample is `A z` with `z` standard
/// normal from an explicitly seeded stream.
pub fn sample_gp(spec: &KernelSpec, points: &[Point], seed: u64) -> Result<GpSample> {
    if spec.family != KernelFamily::Rfk {
        return Err(Error::Config(
            "GP sampling requires the random-feature kernel family".into(),
        ));
    }
    for (i, a) in points.iter().enumerate() {
        for b in points.iter().skip(i + 1) {
            let dist2: f64 = a
                .coords
                .iter()
                .zip(&b.coords)
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            if dist2.sqrt() <= MIN_PAIR_DIST {
                return Err(Error::Domain(format!(
                    "duplicate sampling points (pair distance {:.3e} <= {MIN_PAIR_DIST:.1e})",
                    dist2.sqrt()
                )));
            }
        }
    }
    let g = gram(spec, points)?;
    let chol = cholesky_with_jitter(&g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = DVector::from_fn(points.len(), |_, _| StandardNormal.sample(&mut rng));
    let values = chol * z;
    Ok(GpSample {
        points: points.to_vec(),
        values: values.iter().copied().collect(),
        seed,
    })
}

/// Cholesky factor of `g + jitter I`, escalating the jitter tenfold from
/// `1e-10 * trace/n` up to `1e-6 * trace/n` before giving up.
pub(crate) fn cholesky_with_jitter(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = g.nrows();
    let scale = g.trace() / n as f64;
    let mut rel = JITTER_REL_START;
    loop {
        let jitter = rel * scale;
        let mut jittered = g.clone();
        for i in 0..n {
            jittered[(i, i)] += jitter;
        }
        if let Some(chol) = nalgebra::linalg::Cholesky::new(jittered) {
            return Ok(chol.unpack());
        }
        if rel >= JITTER_REL_MAX {
            return Err(Error::Factorization { max_jitter: jitter });
        }
        rel *= 10.0;
    }
}

/// Simulates the partial sums `S_k = sum_{i<=k} lambda_i^{1-t} Z_i^2` of the
/// interpolation-norm series with idealized eigenvalues
/// `lambda_i = i^{-(d+3)/d}` and `t = s (d+1)/(d+3)`.
///
/// Panics if `d < 1`, `s <= 0`, or `len < 100` (contract violations; the
/// simulation itself cannot fail).
pub fn interp_norm_partial_sums(d: usize, s: f64, len: usize, seed: u64) -> NormTrajectory {
    assert!(d >= 1, "sphere dimension must be at least 1");
    assert!(s > 0.0, "interpolation exponent must be positive");
    assert!(len >= 100, "need at least 100 series terms");
    let t_exponent = s * (d as f64 + 1.0) / (d as f64 + 3.0);
    let p = series_exponent(d, s);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut partial_sums = Vec::with_capacity(len);
    let mut acc = 0.0;
    for i in 1..=len {
        let z: f64 = StandardNormal.sample(&mut rng);
        acc += (i as f64).powf(-p) * z * z;
        partial_sums.push(acc);
    }
    NormTrajectory {
        partial_sums,
        d,
        s,
        t_exponent,
    }
}

/// Minimum number of trajectories for a verdict.
pub const MIN_TRIALS: usize = 32;
/// Minimum trajectory length for a verdict.
pub const MIN_VERDICT_LEN: usize = 100_000;
/// Dyadic block-ratio threshold separating convergent from divergent growth.
pub const VERDICT_RATIO_THRESHOLD: f64 = 0.99;

/// Classifies the series as convergent or divergent from independent
/// partial-sum trajectories at a shared `(d, s)`.
///
/// Statistic per trajectory: the dyadic block ratio
/// `R = (S_N - S_{N/2}) / (S_{N/2} - S_{N/4})`. For summands scaling like
/// `i^{-p}` the expected ratio is about `2^{1-p}`: below 1 when the series
/// converges (`p > 1`), about 1 at the logarithmic boundary (`p = 1`), above
/// 1 when it diverges. The verdict is `Converges` iff the median ratio over
/// trials is below 0.99, so boundary growth classifies as divergent.
pub fn threshold_verdict(trajectories: &[NormTrajectory]) -> Result<Verdict> {
    let median = verdict_statistic(trajectories)?;
    Ok(if median < VERDICT_RATIO_THRESHOLD {
        Verdict::Converges
    } else {
        Verdict::Diverges
    })
}

/// The statistic behind [`threshold_verdict`]: the median over trials of the
/// block-growth ratio `(S_N - S_{N/2}) / (S_{N/2} - S_{N/4})`. Validates the
/// trial count, trajectory length, and that all trajectories share `(d, s)`.
pub fn verdict_statistic(trajectories: &[NormTrajectory]) -> Result<f64> {
    if trajectories.len() < MIN_TRIALS {
        return Err(Error::InsufficientTrials {
            needed: MIN_TRIALS,
            got: trajectories.len(),
        });
    }
    let first = &trajectories[0];
    let n = first.partial_sums.len();
    if n < MIN_VERDICT_LEN {
        return Err(Error::Config(format!(
            "trajectory length {n} below verdict minimum {MIN_VERDICT_LEN}"
        )));
    }
    for traj in trajectories {
        if traj.d != first.d || traj.s != first.s || traj.partial_sums.len() != n {
            return Err(Error::Config(
                "verdict trajectories must share (d, s) and length".into(),
            ));
        }
    }
    let mut ratios: Vec<f64> = trajectories
        .iter()
        .map(|traj| {
            let s_full = traj.partial_sums[n - 1];
            let s_half = traj.partial_sums[n / 2 - 1];
            let s_quarter = traj.partial_sums[n / 4 - 1];
            (s_full - s_half) / (s_half - s_quarter)
        })
        .collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).expect("ratios are finite"));
    let median = if ratios.len() % 2 == 1 {
        ratios[ratios.len() / 2]
    } else {
        0.5 * (ratios[ratios.len() / 2 - 1] + ratios[ratios.len() / 2])
    };
    Ok(median)
}

//! Numerical laboratory for wide ReLU networks and their limiting kernels.
//!
//! The crate implements, end to end, the machinery needed to study how
//! initialization affects kernel-regime learning:
//!
//! - [`kernels`] — closed-form deep ReLU tangent (NTK) and random-feature
//!   (RFK) kernels on the sphere, plus the unit-augmentation lift for bounded
//!   Euclidean inputs.
//! - [`spectral`] — dense symmetric eigendecomposition, the spectral
//!   gradient-flow factor, and log-log decay-slope fitting.
//! - [`gp`] — Gaussian-process sampling with the RFK covariance and the
//!   Monte Carlo interpolation-norm statistic that decides whether GP draws
//!   land in a given interpolation space.
//! - [`kgf`] — kernel gradient-flow prediction from an arbitrary initial
//!   function, the initialization-shift identity, excess-risk estimation,
//!   and early stopping.
//! - [`network`] — finite-width ReLU networks with standard and mirrored
//!   initialization, full-batch gradient descent, parameter gradients, and
//!   the empirical tangent kernel; [`checkpoint`] serializes trained
//!   parameters.
//! - [`data`] — synthetic sphere datasets, CSV ingestion, and the spectral
//!   smoothness estimator for regression targets.
//! - [`experiment`] — reproducible experiment runners (learning-curve,
//!   smoothness, interpolation-verdict) with manifest output; [`cli`] exposes
//!   everything as subcommands.
//!
//! Every random quantity is driven by explicit 64-bit seeds through
//! [`seeds::derive_seed`], so all outputs are bit-reproducible.

pub mod checkpoint;
pub mod cli;
pub mod data;
pub mod error;
pub mod experiment;
pub mod gp;
pub mod kernels;
pub mod kgf;
pub mod network;
pub mod seeds;
pub mod spectral;

pub use error::{Error, Result};

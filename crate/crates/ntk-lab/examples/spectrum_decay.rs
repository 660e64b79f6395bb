//! Gram-matrix spectra and their power-law decay.
//!
//! Builds the kernel Gram matrix of points sampled uniformly on the sphere,
//! eigendecomposes it, and fits the eigenvalue decay on a log-log scale.
//! The fitted slope approaches the closed-form exponent: -(d+1)/d for the
//! tangent kernel and -(d+3)/d for the covariance kernel on S^d.
//!
//! Run with: `cargo run --example spectrum_decay`

use ntk_lab::data::sample_sphere_gaussian;
use ntk_lab::kernels::{gram, KernelDomain, KernelFamily, KernelSpec};
use ntk_lab::spectral::{decay_slope, default_fit_range, eig_sym};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = 3; // sphere dimension: points live on S^3 in R^4
    let n = 400;
    let points = sample_sphere_gaussian(d, n, 42);

    for family in [KernelFamily::Ntk, KernelFamily::Rfk] {
        let spec = KernelSpec::new(family, 4, KernelDomain::Sphere)?;
        let g = gram(&spec, &points)?;
        let eig = eig_sym(&g)?;

        println!("{family:?} (depth 4), n = {n}, d = {d}");
        println!("  top eigenvalues: {:.3?}", &eig.eigenvalues[..5]);

        let (lo, hi) = default_fit_range(n);
        let fit = decay_slope(&eig.eigenvalues, lo, hi)?;
        let theory = match family {
            KernelFamily::Ntk => -((d + 1) as f64) / d as f64,
            KernelFamily::Rfk => -((d + 3) as f64) / d as f64,
        };
        println!(
            "  decay over [{}, {}]: slope {:.4} (theory {theory:.4}), r^2 = {:.4}\n",
            fit.index_range.0, fit.index_range.1, fit.slope, fit.r_squared
        );
    }
    Ok(())
}

//! Sampling the Gaussian process that wide networks converge to.
//!
//! A randomly initialized infinitely wide network is a Gaussian process
//! whose covariance is the network's covariance kernel. This example draws
//! from that process on a sphere point set and checks the draws against the
//! kernel: the empirical variance at each point should match the kernel
//! diagonal, and the empirical covariance between two fixed points should
//! match the kernel value.
//!
//! Run with: `cargo run --example gp_sample`

use ntk_lab::data::sample_sphere_gaussian;
use ntk_lab::gp::sample_gp;
use ntk_lab::kernels::{kernel_eval, KernelDomain, KernelFamily, KernelSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = KernelSpec::new(KernelFamily::Rfk, 2, KernelDomain::Sphere)?;
    let points = sample_sphere_gaussian(3, 50, 7);

    // Many independent draws on the same point set.
    let n_draws = 4000;
    let draws: Vec<_> = (0..n_draws)
        .map(|j| sample_gp(&spec, &points, 1000 + j as u64))
        .collect::<Result<_, _>>()?;

    // Empirical variance at point 0 vs the kernel diagonal (always 1 for the
    // covariance kernel on the sphere).
    let var0 = draws.iter().map(|s| s.values[0] * s.values[0]).sum::<f64>() / n_draws as f64;
    println!("Var f(x_0): empirical {var0:.4}, kernel {:.4}", kernel_eval(&spec, &points[0], &points[0])?);

    // Empirical covariance between points 0 and 1 vs the kernel entry.
    let cov01 = draws.iter().map(|s| s.values[0] * s.values[1]).sum::<f64>() / n_draws as f64;
    println!(
        "Cov(f(x_0), f(x_1)): empirical {cov01:.4}, kernel {:.4}",
        kernel_eval(&spec, &points[0], &points[1])?
    );

    // One draw, printed as a function sample.
    let one = sample_gp(&spec, &points, 99)?;
    println!("\nfirst 8 values of one draw (seed {}):", one.seed);
    for (p, v) in one.points.iter().zip(&one.values).take(8) {
        println!("  f({:+.3}, {:+.3}, ...) = {v:+.4}", p.coords[0], p.coords[1]);
    }
    Ok(())
}

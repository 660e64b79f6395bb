//! Does a Gaussian-process draw live in the kernel's interpolation space?
//!
//! Whether a GP sample path has finite interpolation norm of order s
//! reduces to the convergence of a weighted chi-square series. With
//! power-law eigenvalues the series converges almost surely below a
//! critical exponent s* = 3/(d+1) and diverges above it. The example
//! simulates the partial sums on both sides and applies the growth-ratio
//! verdict used by the experiment runners.
//!
//! Run with: `cargo run --example norm_trajectories`

use ntk_lab::gp::{
    critical_exponent, interp_norm_partial_sums, threshold_verdict, verdict_statistic,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = 3;
    let s_star = critical_exponent(d);
    println!("d = {d}: critical exponent s* = 3/(d+1) = {s_star}\n");

    for &fraction in &[0.5, 0.9, 1.1, 2.0] {
        let s = fraction * s_star;
        let trials = 32;
        let len = 100_000;
        let trajectories: Vec<_> = (0..trials)
            .map(|t| interp_norm_partial_sums(d, s, len, 500 + t))
            .collect();

        // One trajectory's growth, sampled at powers of 10.
        let example = &trajectories[0].partial_sums;
        let values: Vec<f64> = [100, 1000, 10_000, 100_000]
            .iter()
            .map(|&k| example[k - 1])
            .collect();
        println!("s = {fraction} s*: partial sums at k = 1e2..1e5: {values:.3?}");

        // Verdict: the median ratio of consecutive late-block increments
        // falls below 1 exactly when the tail stops accumulating mass, i.e.
        // when the series converges.
        let ratio = verdict_statistic(&trajectories)?;
        let verdict = threshold_verdict(&trajectories)?;
        println!("  median growth ratio {ratio:.4} -> {verdict}\n");
    }
    Ok(())
}

//! A small end-to-end learning-curve experiment.
//!
//! Trains finite networks across training-set sizes and seeds with both
//! initialization modes, early-stops each run on held-out risk, and fits
//! the risk-versus-n decay per mode. Mirrored initialization (which starts
//! the network at the zero function) learns faster than standard
//! initialization, whose random initial function acts as frozen noise.
//!
//! This is a scaled-down configuration so it finishes in seconds; the CLI
//! `curve` subcommand runs the full protocol.
//!
//! Run with: `cargo run --example learning_curve`

use ntk_lab::experiment::{run_curve, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig {
        d: 3,
        n_grid: vec![16, 32, 64],
        m_rule: 8,       // width = 8n instead of the full 20n
        epochs_rule: 4,  // steps = 4n instead of 10n
        seeds: (0..4).collect(),
        test_points: 800,
        ..ExperimentConfig::default()
    };
    let result = run_curve(&cfg)?;

    println!("mode      n   seed  best_step  best_risk");
    for row in &result.rows {
        println!(
            "{:<9} {:>3}  {:>3}   {:>6}    {:.5}",
            row.mode.to_string(),
            row.n,
            row.seed,
            row.best_step,
            row.best_risk
        );
    }

    println!("\nrisk-decay slopes (log risk vs log n):");
    for summary in &result.summaries {
        println!(
            "  {:<9} pooled {:+.3}, per-seed mean {:+.3} +- {:.3}",
            summary.mode.to_string(),
            summary.pooled_fit.as_ref().unwrap().slope,
            summary.mean_slope.unwrap(),
            summary.slope_se.unwrap()
        );
    }
    println!("(more negative = faster learning; mirrored should be steeper)");
    Ok(())
}

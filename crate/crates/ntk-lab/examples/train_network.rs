//! Finite-width ReLU networks: initialization modes and gradient descent.
//!
//! Standard initialization gives a random non-zero initial function; the
//! mirrored mode pairs two identical copies with opposite output signs, so
//! the network starts exactly at zero while keeping the same tangent
//! features. The example trains both on the same data and saves/restores a
//! checkpoint.
//!
//! Run with: `cargo run --example train_network`

use ntk_lab::checkpoint::{load_checkpoint, save_checkpoint};
use ntk_lab::data::{sample_sphere_gaussian, synth_target};
use ntk_lab::network::{init_params, train_gd, InitMode, NetworkConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = 3;
    let n = 64;
    let x = sample_sphere_gaussian(d, n, 21);
    let y = synth_target(&x, 0.1, 22);

    for mode in [InitMode::Standard, InitMode::Mirrored] {
        // Width 20 per training point, one hidden layer, inputs in R^{d+1}.
        let cfg = NetworkConfig::uniform(d + 1, 1, 20 * n, mode, false, 77);
        let params = init_params(&cfg)?;

        // Initial function scale: zero for mirrored, O(1) for standard.
        let f_init = params.forward(&x[0])?;
        let traj = train_gd(&params, &x, &y, 0.6, 400, 100)?;
        println!(
            "{mode}: f_init(x_0) = {f_init:+.4}, loss {:.4} -> {:.6} over {} steps",
            traj.losses[0],
            traj.losses.last().unwrap(),
            traj.steps
        );
        for (step, _) in &traj.checkpoints {
            print!("  checkpoint at step {step}");
        }
        println!();
    }

    // Checkpoints round-trip bit-for-bit.
    let cfg = NetworkConfig::uniform(d + 1, 2, 128, InitMode::Mirrored, false, 5);
    let params = init_params(&cfg)?;
    let traj = train_gd(&params, &x, &y, 0.5, 50, 0)?;
    let (final_step, final_params) = traj.checkpoints.last().unwrap();

    let dir = std::env::temp_dir().join("ntk_lab_example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("net.ckpt");
    save_checkpoint(&path, final_params, *final_step)?;
    let (restored, step) = load_checkpoint(&path)?;
    let probe = &x[3];
    println!(
        "\ncheckpoint at step {step}: f(x_3) = {:+.6} saved, {:+.6} restored",
        final_params.forward(probe)?,
        restored.forward(probe)?
    );
    std::fs::remove_file(&path).ok();
    Ok(())
}

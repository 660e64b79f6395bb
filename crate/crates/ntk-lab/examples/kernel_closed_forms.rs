//! Closed-form kernels of wide ReLU networks, evaluated directly.
//!
//! Shows the two kernel families on the sphere — the tangent kernel (NTK)
//! and the covariance kernel of the random-feature limit (RFK) — across
//! depths, plus the lifted-domain variant for points that are not on the
//! sphere.
//!
//! Run with: `cargo run --example kernel_closed_forms`

use ntk_lab::kernels::{
    kernel_eval, ntk_sphere, rfk_sphere, KernelDomain, KernelFamily, KernelSpec, Point,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // The sphere kernels are functions of the inner product u = <x, y> alone.
    println!("u        NTK(L=1)   NTK(L=3)   RFK(L=1)   RFK(L=3)");
    for &u in &[-1.0, -0.5, 0.0, 0.5, 0.9, 1.0] {
        println!(
            "{u:>5.2}  {:>9.5}  {:>9.5}  {:>9.5}  {:>9.5}",
            ntk_sphere(u, 1)?,
            ntk_sphere(u, 3)?,
            rfk_sphere(u, 1)?,
            rfk_sphere(u, 3)?,
        );
    }

    // On the diagonal the tangent kernel counts its layers: NTK(1, L) = L+1,
    // one unit of alignment per weight matrix. The covariance kernel stays
    // normalized: RFK(1, L) = 1.
    println!("\ndepth  NTK(1,L)  RFK(1,L)");
    for depth in 1..=6 {
        println!(
            "{depth:>5}  {:>8.3}  {:>8.3}",
            ntk_sphere(1.0, depth)?,
            rfk_sphere(1.0, depth)?
        );
    }

    // Off-sphere points go through the lifted domain: append a constant
    // coordinate, normalize, apply the sphere kernel, and scale by the
    // lifted norms. The kernel is then defined for arbitrary inputs.
    let spec = KernelSpec::new(KernelFamily::Ntk, 2, KernelDomain::Lifted)?;
    let x = Point::new(vec![3.0, -1.0]);
    let y = Point::new(vec![0.5, 2.0]);
    println!("\nlifted NTK, depth 2:");
    println!("  K(x, y) = {:.6}", kernel_eval(&spec, &x, &y)?);
    println!("  K(x, x) = {:.6}  (equals (|x|^2 + 1) * depth+1)", kernel_eval(&spec, &x, &x)?);

    Ok(())
}

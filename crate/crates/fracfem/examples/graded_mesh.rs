//! Build graded, uniform, and two-part time meshes and inspect their
//! clustering near t = 0.
//!
//!   cargo run --release -p fracfem --example graded_mesh

use fracfem::time_mesh::{MeshKind, TimeMesh};

fn main() {
    let n = 25;
    let r = 5.0;

    let graded = TimeMesh::graded(1.0, n, r).unwrap();
    let two_part = TimeMesh::two_part(1.0, n, r).unwrap();
    let uniform = TimeMesh::uniform(1.0, n).unwrap();

    println!("N = {n}, grading exponent r = {r}");
    println!("first node:  graded {:.3e}, two-part {:.3e}, uniform {:.3e}",
        graded.node(1), two_part.node(1), uniform.node(1));
    if let MeshKind::TwoPart { t0, n0 } = *two_part.kind() {
        println!("two-part split: T0 = {t0} reached after N0 = {n0} intervals, uniform step {:.6} after",
            two_part.step(n0 + 1));
    }
    println!("max step ratio tau_n/tau_(n-1): graded {:.2}, two-part {:.2}",
        graded.max_step_ratio(), two_part.max_step_ratio());

    println!("\n{:>3} {:>13} {:>13} {:>13}", "n", "graded", "two-part", "uniform");
    for k in 0..=n {
        println!(
            "{k:>3} {:>13.6e} {:>13.6e} {:>13.6e}",
            graded.node(k),
            two_part.node(k),
            uniform.node(k)
        );
    }

    // the sigma-shifted evaluation points the scheme actually uses
    let sigma = 0.25;
    println!("\nsigma-points t_(n-sigma) for sigma = {sigma} (graded mesh, first five):");
    for k in 1..=5 {
        println!("  n={k}: {:.6e}", graded.sigma_point(k, sigma).unwrap().t);
    }
}

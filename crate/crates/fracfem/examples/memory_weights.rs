//! The compound rectangle/trapezoid weights for the memory integral, their
//! exactness on constants, and the probe's convergence order.
//!
//!   cargo run --release -p fracfem --example memory_weights

use fracfem::memory::{memory_weights, quadrature_error_probe};
use fracfem::time_mesh::TimeMesh;

fn main() {
    let sigma = 0.25;
    let mesh = TimeMesh::uniform(1.0, 8).unwrap();

    println!("history weights tau~_j on the uniform mesh (sigma = {sigma}):");
    for n in [1usize, 2, 4, 8] {
        let w = memory_weights(&mesh, n, sigma).unwrap();
        let joined: Vec<String> = w.tau_tilde.iter().map(|v| format!("{v:.4}")).collect();
        println!(
            "  n={n}: [{}]  first-level coefficient {:.4}",
            joined.join(", "),
            w.first_level_coeff
        );
    }

    // the weights integrate constants over [t_1, t_(n-sigma)] exactly
    let n = 6;
    let w = memory_weights(&mesh, n, sigma).unwrap();
    let theta = mesh.sigma_point(n, sigma).unwrap().t;
    println!(
        "\nconstant exactness at n={n}: sum tau~_j = {:.12} vs t_(n-sigma) - t_1 = {:.12}",
        w.total(),
        theta - mesh.node(1)
    );

    // quadrature order on the singular profile f = t^alpha
    let alpha = 0.5;
    let r = 2.0 / alpha;
    println!("\nprobe error for f = t^alpha, graded r = 2/alpha:");
    let mut prev: Option<f64> = None;
    for n_total in [16usize, 32, 64, 128] {
        let mesh = TimeMesh::graded(1.0, n_total, r).unwrap();
        let mut worst: f64 = 0.0;
        for n in 2..=n_total {
            worst = worst
                .max(quadrature_error_probe(&mesh, n, alpha / 2.0, |t| t.powf(alpha)).unwrap());
        }
        match prev.map(|p: f64| (p / worst).log2()) {
            Some(rt) => println!("  N={n_total:4}: {worst:.3e}  (order {rt:.2})"),
            None => println!("  N={n_total:4}: {worst:.3e}"),
        }
        prev = Some(worst);
    }
}

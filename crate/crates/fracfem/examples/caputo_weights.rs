//! Inspect the L2-1_sigma weights: positivity, monotonicity, exactness on
//! u(t) = t, and the truncation decay on the singular profile u = t^alpha.
//!
//!   cargo run --release -p fracfem --example caputo_weights

use fracfem::caputo::caputo_row;
use fracfem::gamma::gamma;
use fracfem::time_mesh::TimeMesh;

fn main() {
    let alpha = 0.4;
    let sigma = alpha / 2.0;
    let r = 2.0 / alpha;

    let mesh = TimeMesh::graded(1.0, 8, r).unwrap();
    println!("weight rows c_(n,1..n) on a graded mesh (alpha = {alpha}, sigma = {sigma}):");
    for n in 1..=8 {
        let row = caputo_row(&mesh, n, sigma, alpha).unwrap();
        let joined: Vec<String> = row.c.iter().map(|c| format!("{c:10.4}")).collect();
        println!("  n={n}: [{}]", joined.join(", "));
    }

    // the operator reproduces the Caputo derivative of u(t) = t exactly
    println!("\nexactness on u(t) = t (discrete vs t_(n-sigma)^(1-a)/Gamma(2-a)):");
    for n in [1usize, 4, 8] {
        let row = caputo_row(&mesh, n, sigma, alpha).unwrap();
        let hist: Vec<f64> = (0..=n).map(|j| mesh.node(j)).collect();
        let got = row.apply_scalar(&hist).unwrap();
        let theta = mesh.sigma_point(n, sigma).unwrap().t;
        let exact = theta.powf(1.0 - alpha) / gamma(2.0 - alpha).unwrap();
        println!("  n={n}: {got:.12e} vs {exact:.12e}");
    }

    // weighted truncation error for the singular solution profile u = t^alpha
    println!("\ntruncation decay for u = t^alpha on r = 2/alpha meshes:");
    let target = gamma(1.0 + alpha).unwrap();
    let mut prev: Option<f64> = None;
    for n_total in [16usize, 32, 64, 128] {
        let mesh = TimeMesh::graded(1.0, n_total, r).unwrap();
        let mut worst: f64 = 0.0;
        for n in 1..=n_total {
            let row = caputo_row(&mesh, n, sigma, alpha).unwrap();
            let hist: Vec<f64> = (0..=n).map(|j| mesh.node(j).powf(alpha)).collect();
            let got = row.apply_scalar(&hist).unwrap();
            let theta = mesh.sigma_point(n, sigma).unwrap().t;
            worst = worst.max(theta.powf(alpha) * (got - target).abs());
        }
        let rate = prev.map(|p: f64| (p / worst).log2());
        match rate {
            Some(rt) => println!("  N={n_total:4}: {worst:.3e}  (order {rt:.2})"),
            None => println!("  N={n_total:4}: {worst:.3e}"),
        }
        prev = Some(worst);
    }
}

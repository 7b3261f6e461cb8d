//! The P1 space on the unit square: assembly sanity, L2 and Ritz projections,
//! and interpolation-error decay under refinement.
//!
//!   cargo run --release -p fracfem --example fem_projections

use fracfem::fem2d::FemSpace;

fn main() {
    let exact = |x: f64, y: f64| (x - x * x) * (y - y * y);
    let grad = |x: f64, y: f64| ((1.0 - 2.0 * x) * (y - y * y), (x - x * x) * (1.0 - 2.0 * y));

    println!("{:>4} {:>6} {:>7} {:>12} {:>12}", "M", "dofs", "tris", "L2 err", "H1 err");
    let mut prev: Option<(f64, f64)> = None;
    for m in [3usize, 5, 9, 17, 33] {
        let space = FemSpace::new(m).unwrap();
        let u = space.interpolate(exact);
        let (e_l2, e_h1) = space.error_norms(&u, exact, grad);
        let rates = prev
            .map(|(p2, p1)| format!("  rates {:.2} / {:.2}", (p2 / e_l2).log2(), (p1 / e_h1).log2()))
            .unwrap_or_default();
        println!(
            "{m:>4} {:>6} {:>7} {e_l2:>12.3e} {e_h1:>12.3e}{rates}",
            space.dofs(),
            space.tri.triangles().len()
        );
        prev = Some((e_l2, e_h1));
    }

    // projections agree with the interpolant to the expected order
    let space = FemSpace::new(9).unwrap();
    let l2_proj = space.l2_project(exact).unwrap();
    let ritz = space.ritz_project(grad).unwrap();
    let (pe_l2, _) = space.error_norms(&l2_proj, exact, grad);
    let (_, re_h1) = space.error_norms(&ritz, exact, grad);
    println!("\nM=9: L2-projection L2 error {pe_l2:.3e}, Ritz-projection H1 error {re_h1:.3e}");

    // discrete norms of a unit coefficient vector
    let mut e0 = fracfem::fem2d::DofVector::zeros(space.dofs());
    e0.0[0] = 1.0;
    let (nm, na) = space.norms(&e0);
    println!("first basis function: ||.||_M = {nm:.4e}, ||.||_A = {na:.4e}");
}

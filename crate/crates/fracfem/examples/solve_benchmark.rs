//! One full solve of the benchmark problem with per-level diagnostics and
//! errors against the exact solution.
//!
//!   cargo run --release -p fracfem --example solve_benchmark

use fracfem::benchmark::ManufacturedProblem;
use fracfem::fem2d::FemSpace;
use fracfem::stepper::{run, InitialData, ProblemSpec, StepperOptions};
use fracfem::time_mesh::TimeMesh;

fn main() {
    let alpha = 0.4;
    let (m, n) = (17usize, 17usize);
    let mesh = TimeMesh::two_part(1.0, n, 2.0 / alpha).unwrap();
    let space = FemSpace::new(m).unwrap();
    let problem = ManufacturedProblem::new(alpha).unwrap();
    let src = move |x: f64, y: f64, t: f64| problem.source(x, y, t);
    let spec = ProblemSpec {
        alpha,
        sigma: alpha / 2.0,
        mesh: &mesh,
        space: &space,
        source: &src,
        initial: InitialData::Zero,
        options: StepperOptions::default(),
    };

    let (history, report) = run(&spec).unwrap();
    println!(
        "alpha = {alpha}, two-part mesh, M = {m}, N = {n}; newton: {} iterations, residual {:.2e}",
        report.newton.iterations, report.newton.final_residual
    );
    println!(
        "{:>3} {:>12} {:>12} {:>12} {:>12} {:>10} {:>12}",
        "n", "t_n", "||u||", "||grad u||", "|||u|||", "D_n", "L2 error"
    );
    let mut max_err: f64 = 0.0;
    for rec in &report.levels {
        let err = if rec.level == 0 {
            0.0
        } else {
            let (e, _) = space.error_norms(
                &history.u[rec.level],
                |x, y| problem.exact(x, y, rec.t),
                |x, y| problem.exact_grad(x, y, rec.t),
            );
            e
        };
        max_err = max_err.max(err);
        println!(
            "{:>3} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>10.6} {:>12.5e}",
            rec.level, rec.t, rec.l2_norm, rec.h1_norm, rec.weighted_norm, rec.kirchhoff, err
        );
    }
    println!("\nmax L2 error over levels: {max_err:.5e} ({:.2}s total)", report.total_seconds);
}

//! The nonlinear first time level: Newton in the sigma-averaged unknown with
//! a Sherman-Morrison rank-one Jacobian solve.
//!
//!   cargo run --release -p fracfem --example first_step_newton

use fracfem::benchmark::ManufacturedProblem;
use fracfem::fem2d::{DofVector, FemSpace};
use fracfem::stepper::{step_first, InitialData, ProblemSpec, StepperOptions};
use fracfem::time_mesh::TimeMesh;

fn main() {
    let alpha = 0.5;
    let space = FemSpace::new(9).unwrap();
    let problem = ManufacturedProblem::new(alpha).unwrap();
    let src = move |x: f64, y: f64, t: f64| problem.source(x, y, t);

    println!("first-level Newton on the benchmark problem (alpha = {alpha}, M = 9):");
    println!("{:>6} {:>12} {:>11} {:>10} {:>9}", "N", "tau_1", "iterations", "residual", "fallback");
    for n in [4usize, 16, 64, 256] {
        let mesh = TimeMesh::graded(1.0, n, 2.0 / alpha).unwrap();
        let spec = ProblemSpec {
            alpha,
            sigma: alpha / 2.0,
            mesh: &mesh,
            space: &space,
            source: &src,
            initial: InitialData::Zero,
            options: StepperOptions::default(),
        };
        let (u1, report) = step_first(&spec, &DofVector::zeros(space.dofs())).unwrap();
        let (l2, _) = space.norms(&u1);
        println!(
            "{n:>6} {:>12.3e} {:>11} {:>10.2e} {:>9}   ||u^1|| = {l2:.3e}",
            mesh.step(1),
            report.iterations,
            report.final_residual,
            report.picard_fallback,
        );
    }

    // an oversized first step loses coercivity and is reported, not solved
    let bad_mesh = TimeMesh::uniform(4.0, 1).unwrap();
    let src_const = |_: f64, _: f64, _: f64| 1.0;
    let spec = ProblemSpec {
        alpha,
        sigma: alpha / 2.0,
        mesh: &bad_mesh,
        space: &space,
        source: &src_const,
        initial: InitialData::Zero,
        options: StepperOptions::default(),
    };
    match step_first(&spec, &DofVector::zeros(space.dofs())) {
        Err(e) => println!("\ntau_1 = 4 (too large): {e}"),
        Ok(_) => println!("\nunexpected convergence"),
    }
}

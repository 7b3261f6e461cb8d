//! Zero-source runs dissipate: max_n ||u^n|| never exceeds ||u^0||, and the
//! weighted norm |||u^n||| stays bounded as the time mesh refines.
//!
//!   cargo run --release -p fracfem --example stability_zero_source

use fracfem::fem2d::FemSpace;
use fracfem::stepper::{run, InitialData, ProblemSpec, StepperOptions};
use fracfem::time_mesh::TimeMesh;

fn main() {
    let alpha = 0.6;
    let space = FemSpace::new(9).unwrap();
    let src = |_: f64, _: f64, _: f64| 0.0;

    println!("f = 0, u0 = 16 (x-x^2)(y-y^2), alpha = {alpha}:");
    println!("{:>5} {:>12} {:>16} {:>16}", "N", "||u^0||", "max ||u^n||", "max |||u^n|||");
    for n in [8usize, 16, 32, 64] {
        let mesh = TimeMesh::graded(1.0, n, 2.0 / alpha).unwrap();
        let u0 = space.interpolate(|x, y| 16.0 * (x - x * x) * (y - y * y));
        let spec = ProblemSpec {
            alpha,
            sigma: alpha / 2.0,
            mesh: &mesh,
            space: &space,
            source: &src,
            initial: InitialData::Coefficients(u0),
            options: StepperOptions::default(),
        };
        let (_, report) = run(&spec).unwrap();
        let max_l2 = report.levels.iter().map(|l| l.l2_norm).fold(0.0f64, f64::max);
        let max_w = report.levels.iter().map(|l| l.weighted_norm).fold(0.0f64, f64::max);
        println!(
            "{n:>5} {:>12.6e} {:>16.6e} {:>16.6e}",
            report.levels[0].l2_norm, max_l2, max_w
        );
    }
}

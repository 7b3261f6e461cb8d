//! Export the final approximate and exact solution surfaces as plain-text
//! "x y value" tables, ready for gnuplot / matplotlib.
//!
//!   cargo run --release -p fracfem --example export_field

use fracfem::benchmark::ManufacturedProblem;
use fracfem::fem2d::{export_field, FemSpace};
use fracfem::stepper::{run, InitialData, ProblemSpec, StepperOptions};
use fracfem::time_mesh::TimeMesh;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let alpha = 0.5;
    let mesh = TimeMesh::two_part(1.0, 17, 2.0 / alpha)?;
    let space = FemSpace::new(17)?;
    let problem = ManufacturedProblem::new(alpha)?;
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
    let (history, _) = run(&spec)?;

    let out_dir = std::env::temp_dir().join("fracfem_fields");
    std::fs::create_dir_all(&out_dir)?;

    let mut buf = Vec::new();
    export_field(&space.tri, history.u.last().unwrap(), &mut buf)?;
    let approx_path = out_dir.join("approx_t1.txt");
    std::fs::write(&approx_path, buf)?;

    let exact = space.interpolate(|x, y| problem.exact(x, y, 1.0));
    let mut buf = Vec::new();
    export_field(&space.tri, &exact, &mut buf)?;
    let exact_path = out_dir.join("exact_t1.txt");
    std::fs::write(&exact_path, buf)?;

    println!("wrote {}", approx_path.display());
    println!("wrote {}", exact_path.display());
    println!("plot with e.g. gnuplot: splot '{}' using 1:2:3 with points", approx_path.display());
    Ok(())
}

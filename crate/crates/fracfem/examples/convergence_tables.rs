//! A desk-size slice of the convergence study: the graded and two-part
//! temporal tables side by side.
//!
//!   cargo run --release -p fracfem --example convergence_tables

use fracfem::benchmark::{compute_table, TableId};
use fracfem::stepper::StepperOptions;

fn main() {
    let alpha = 0.5;
    let r = 2.0 / alpha;
    let sizes = [3usize, 5, 9, 17];

    let graded =
        compute_table(TableId::TimeGraded, alpha, r, &sizes, StepperOptions::default(), 1)
            .unwrap();
    println!("pure graded mesh (rates climb toward 2 as the late-time steps stay coarse):");
    print!("{}", graded.to_text());

    let two_part =
        compute_table(TableId::TimeTwoPart, alpha, r, &sizes, StepperOptions::default(), 2)
            .unwrap();
    println!("\ntwo-part mesh (uniform tail restores second order):");
    print!("{}", two_part.to_text());

    println!("\nCSV of the two-part table:\n{}", two_part.to_csv());
}

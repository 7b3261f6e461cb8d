//! Command-line front end: `solve` runs one benchmark solve, `table`
//! reproduces a convergence table, `verify` runs the property suites.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracfem::benchmark::TableId;
use fracfem::cli::{self, EXIT_NUMERICAL, EXIT_OK};
use fracfem::config::RunConfig;

#[derive(Parser)]
#[command(name = "fracfem", version, about = "Linearized fractional Crank-Nicolson-Galerkin FEM solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solve of the benchmark problem and write per-level diagnostics
    Solve {
        /// flat key = value configuration file
        #[arg(long)]
        config: Option<PathBuf>,
        /// key=value overrides, e.g. -s alpha=0.4 -s n=64
        #[arg(long = "set", short = 's', value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// output directory (default: FRACFEM_OUT_DIR or the cwd)
        #[arg(long)]
        out: Option<PathBuf>,
        /// also write final approximate/exact field tables for plotting
        #[arg(long)]
        export_field: bool,
    },
    /// Reproduce one of the four convergence tables
    Table {
        /// 1 = space, 2 = uniform time, 3 = graded time, 4 = two-part time
        #[arg(long)]
        id: u8,
        /// fractional orders to run (repeatable)
        #[arg(long = "alpha", default_values_t = vec![0.4, 0.6])]
        alphas: Vec<f64>,
        /// grading exponent override (default 2/alpha for tables 3 and 4)
        #[arg(long)]
        r: Option<f64>,
        /// spatial sizes per row
        #[arg(long = "m", default_values_t = vec![3usize, 5, 9, 17])]
        m_list: Vec<usize>,
        /// verify the table against its pinned tolerances; nonzero exit on failure
        #[arg(long)]
        check: bool,
        /// run independent rows on this many threads
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the weight / quadrature / manufactured-solution property suites
    Verify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve { config, set, out, export_field } => {
            let result = (|| {
                let mut cfg = match &config {
                    Some(path) => RunConfig::from_file(path)?,
                    None => RunConfig::default(),
                };
                for pair in &set {
                    let Some((k, v)) = pair.split_once('=') else {
                        return Err(fracfem::Error::Config(format!(
                            "override must be KEY=VALUE, got '{pair}'"
                        )));
                    };
                    cfg.set(k.trim(), v.trim())?;
                }
                cfg.validate()?;
                let out_dir = cli::resolve_out_dir(out.as_deref());
                cli::cmd_solve(&cfg, &out_dir, export_field)
            })();
            match result {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    eprintln!("error: {e}");
                    cli::exit_code_for(&e)
                }
            }
        }
        Command::Table { id, alphas, r, m_list, check, jobs, out } => {
            let result = (|| {
                let id = TableId::from_number(id)
                    .map_err(|e| fracfem::Error::Config(e.to_string()))?;
                let out_dir = cli::resolve_out_dir(out.as_deref());
                cli::cmd_table(id, &alphas, r, &m_list, check, jobs, &out_dir)
            })();
            match result {
                Ok(true) => EXIT_OK,
                Ok(false) => EXIT_NUMERICAL,
                Err(e) => {
                    eprintln!("error: {e}");
                    cli::exit_code_for(&e)
                }
            }
        }
        Command::Verify => match cli::cmd_verify() {
            Ok(true) => EXIT_OK,
            Ok(false) => EXIT_NUMERICAL,
            Err(e) => {
                eprintln!("error: {e}");
                cli::exit_code_for(&e)
            }
        },
    };
    ExitCode::from(code as u8)
}

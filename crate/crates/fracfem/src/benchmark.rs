//! The manufactured benchmark problem (exact solution t^alpha (x-x^2)(y-y^2)
//! on the unit square, T = 1), error measurement against it, and the
//! convergence-rate tables.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fem2d::FemSpace;
use crate::gamma::gamma;
use crate::quad;
use crate::stepper::{self, InitialData, ProblemSpec, RunReport, StepperOptions};
use crate::time_mesh::TimeMesh;

pub const T_FINAL: f64 = 1.0;

/// Exact solution u = t^alpha (x - x^2)(y - y^2) with the source that makes it
/// solve the Kirchhoff-type time-fractional equation.
#[derive(Debug, Clone, Copy)]
pub struct ManufacturedProblem {
    pub alpha: f64,
    gamma_1p_alpha: f64,
}

impl ManufacturedProblem {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(ManufacturedProblem { alpha, gamma_1p_alpha: gamma(1.0 + alpha)? })
    }

    pub fn exact(&self, x: f64, y: f64, t: f64) -> f64 {
        t.powf(self.alpha) * (x - x * x) * (y - y * y)
    }

    pub fn exact_grad(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let ta = t.powf(self.alpha);
        (
            ta * (1.0 - 2.0 * x) * (y - y * y),
            ta * (x - x * x) * (1.0 - 2.0 * y),
        )
    }

    /// f = Gamma(1+a)(x-x^2)(y-y^2) - (t^a + t^{3a}/45 - t^{1+a}/(1+a)) 2(x^2+y^2-x-y).
    pub fn source(&self, x: f64, y: f64, t: f64) -> f64 {
        let a = self.alpha;
        let time_factor = if t == 0.0 {
            0.0
        } else {
            t.powf(a) + t.powf(3.0 * a) / 45.0 - t.powf(1.0 + a) / (1.0 + a)
        };
        self.gamma_1p_alpha * (x - x * x) * (y - y * y)
            - time_factor * 2.0 * (x * x + y * y - x - y)
    }
}

/// Free-function form of the source formula.
pub fn source_eval(alpha: f64, x: f64, y: f64, t: f64) -> Result<f64> {
    Ok(ManufacturedProblem::new(alpha)?.source(x, y, t))
}

/// Report of substituting the exact solution into the PDE term by term.
#[derive(Debug, Clone, Copy)]
pub struct ResidualReport {
    /// max |Caputo - (1 + ||grad u||^2) Lap u + memory - f| over the sample grid
    pub max_residual: f64,
    /// |quadrature of int |grad (x-x^2)(y-y^2)|^2 - 1/45|, the source formula's
    /// Kirchhoff cross-check
    pub grad_energy_error: f64,
    pub samples: usize,
}

/// Substitute the exact solution into the equation on a sample grid: the
/// Caputo derivative and memory integral analytically, the Kirchhoff
/// coefficient from an adaptive-quadrature gradient energy. A residual above
/// tolerance flags a transcription bug in the source formula.
pub fn verify_manufactured(alpha: f64) -> Result<ResidualReport> {
    let problem = ManufacturedProblem::new(alpha)?;
    let energy = quad::integrate2d_unit_square(
        |x, y| {
            let gx = (1.0 - 2.0 * x) * (y - y * y);
            let gy = (x - x * x) * (1.0 - 2.0 * y);
            gx * gx + gy * gy
        },
        1e-12,
    );
    let grad_energy_error = (energy - 1.0 / 45.0).abs();
    let pts: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
    let times: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 1.0];
    let mut max_residual: f64 = 0.0;
    let mut samples = 0usize;
    for &x in &pts {
        for &y in &pts {
            for &t in &times {
                let q = 2.0 * (x * x + y * y - x - y);
                // Caputo derivative of t^a is Gamma(1+a) (constant in t)
                let caputo = problem.gamma_1p_alpha * (x - x * x) * (y - y * y);
                let laplacian = t.powf(alpha) * q;
                let kirchhoff = 1.0 + t.powf(2.0 * alpha) * energy;
                let memory = q * t.powf(1.0 + alpha) / (1.0 + alpha);
                let residual = caputo - kirchhoff * laplacian + memory
                    - problem.source(x, y, t);
                max_residual = max_residual.max(residual.abs());
                samples += 1;
            }
        }
    }
    Ok(ResidualReport { max_residual, grad_energy_error, samples })
}

/// log(e1/e2) / log(d1/d2), the log-vs-log convergence-rate formula.
pub fn rate(e1: f64, e2: f64, d1: f64, d2: f64) -> Result<f64> {
    if !(e1 > 0.0 && e2 > 0.0 && d1 > 0.0 && d2 > 0.0) {
        return Err(Error::InvalidParameter(
            "rate needs positive errors and discretization parameters".into(),
        ));
    }
    if d1 == d2 {
        return Err(Error::InvalidParameter("rate needs d1 != d2".into()));
    }
    Ok((e1 / e2).ln() / (d1 / d2).ln())
}

/// Max-over-levels errors of one benchmark solve.
pub struct BenchmarkErrors {
    pub error_l2: f64,
    pub error_h1: f64,
    pub report: RunReport,
}

/// Run the scheme on the manufactured problem and measure
/// max_{1<=n<=N} of the L2 and H1 errors at the mesh nodes.
pub fn run_benchmark(
    alpha: f64,
    space: &FemSpace,
    mesh: &TimeMesh,
    options: StepperOptions,
) -> Result<BenchmarkErrors> {
    let problem = ManufacturedProblem::new(alpha)?;
    let src = move |x: f64, y: f64, t: f64| problem.source(x, y, t);
    let spec = ProblemSpec {
        alpha,
        sigma: alpha / 2.0,
        mesh,
        space,
        source: &src,
        initial: InitialData::Zero,
        options,
    };
    let (history, report) = stepper::run(&spec)?;
    let mut error_l2: f64 = 0.0;
    let mut error_h1: f64 = 0.0;
    for n in 1..=mesh.intervals() {
        let t = mesh.node(n);
        let (l2, h1) = space.error_norms(
            &history.u[n],
            |x, y| problem.exact(x, y, t),
            |x, y| problem.exact_grad(x, y, t),
        );
        error_l2 = error_l2.max(l2);
        error_h1 = error_h1.max(h1);
    }
    Ok(BenchmarkErrors { error_l2, error_h1, report })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMeshKind {
    Uniform,
    Graded,
    TwoPart,
}

impl TableMeshKind {
    pub fn label(self) -> &'static str {
        match self {
            TableMeshKind::Uniform => "uniform",
            TableMeshKind::Graded => "graded",
            TableMeshKind::TwoPart => "twopart",
        }
    }

    pub fn build(self, n: usize, r: f64) -> Result<TimeMesh> {
        match self {
            TableMeshKind::Uniform => TimeMesh::uniform(T_FINAL, n),
            TableMeshKind::Graded => TimeMesh::graded(T_FINAL, n, r),
            TableMeshKind::TwoPart => TimeMesh::two_part(T_FINAL, n, r),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RateRow {
    pub m: usize,
    pub n: usize,
    pub error_l2: f64,
    pub error_h1: f64,
    pub rate_l2: Option<f64>,
    pub rate_h1: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RateTable {
    pub alpha: f64,
    pub r: f64,
    pub mesh_kind: TableMeshKind,
    /// discretization parameter per row the rates were measured against
    pub rate_against: &'static str,
    pub rows: Vec<RateRow>,
}

impl RateTable {
    /// CSV with the fixed schema M,N,alpha,r,mesh_kind,error_l2,rate_l2,error_h1,rate_h1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("M,N,alpha,r,mesh_kind,error_l2,rate_l2,error_h1,rate_h1\n");
        for row in &self.rows {
            let fmt_rate =
                |r: Option<f64>| r.map(|v| format!("{v:.6}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.6e},{},{:.6e},{}",
                row.m,
                row.n,
                self.alpha,
                self.r,
                self.mesh_kind.label(),
                row.error_l2,
                fmt_rate(row.rate_l2),
                row.error_h1,
                fmt_rate(row.rate_h1),
            );
        }
        out
    }

    /// Human-readable aligned table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "alpha = {}, r = {}, mesh = {}, rates vs {}",
            self.alpha,
            self.r,
            self.mesh_kind.label(),
            self.rate_against
        );
        let _ = writeln!(
            out,
            "{:>5} {:>6} {:>12} {:>8} {:>12} {:>8}",
            "M", "N", "Error-1", "R-1", "Error-2", "R-2"
        );
        for row in &self.rows {
            let fmt_rate = |r: Option<f64>| match r {
                Some(v) => format!("{v:8.3}"),
                None => format!("{:>8}", "-----"),
            };
            let _ = writeln!(
                out,
                "{:>5} {:>6} {:>12.3e} {} {:>12.3e} {}",
                row.m,
                row.n,
                row.error_l2,
                fmt_rate(row.rate_l2),
                row.error_h1,
                fmt_rate(row.rate_h1),
            );
        }
        out
    }

    fn push_with_rates(&mut self, m: usize, n: usize, e1: f64, e2: f64, d: f64, prev_d: Option<f64>) {
        let (rate_l2, rate_h1) = match (self.rows.last(), prev_d) {
            (Some(prev), Some(pd)) => (
                rate(prev.error_l2, e1, pd, d).ok(),
                rate(prev.error_h1, e2, pd, d).ok(),
            ),
            _ => (None, None),
        };
        self.rows.push(RateRow { m, n, error_l2: e1, error_h1: e2, rate_l2, rate_h1 });
    }
}

/// N = floor(M^{1/alpha}), with an epsilon guarding exact integer powers
/// against round-off (9^{1/0.4} = 243 must not floor to 242).
pub fn coupled_time_steps(m: usize, alpha: f64) -> usize {
    ((m as f64).powf(1.0 / alpha) + 1e-9).floor() as usize
}

/// The four experiment families of the convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableId {
    /// spatial rates, N = 150 fixed, uniform time mesh
    Space,
    /// temporal rates on the uniform mesh, N = floor(M^{1/alpha})
    TimeUniform,
    /// temporal rates, M = N, pure graded mesh
    TimeGraded,
    /// temporal rates, M = N, two-part graded/uniform mesh
    TimeTwoPart,
}

impl TableId {
    pub fn from_number(id: u8) -> Result<Self> {
        match id {
            1 => Ok(TableId::Space),
            2 => Ok(TableId::TimeUniform),
            3 => Ok(TableId::TimeGraded),
            4 => Ok(TableId::TimeTwoPart),
            other => Err(Error::InvalidParameter(format!(
                "table id must be 1..=4, got {other}"
            ))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            TableId::Space => 1,
            TableId::TimeUniform => 2,
            TableId::TimeGraded => 3,
            TableId::TimeTwoPart => 4,
        }
    }

    fn mesh_kind(self) -> TableMeshKind {
        match self {
            TableId::Space | TableId::TimeUniform => TableMeshKind::Uniform,
            TableId::TimeGraded => TableMeshKind::Graded,
            TableId::TimeTwoPart => TableMeshKind::TwoPart,
        }
    }

    fn rate_against(self) -> &'static str {
        match self {
            TableId::TimeUniform => "tau = T/N",
            _ => "h = 1/(M-1)",
        }
    }
}

/// One (M, N, mesh) experiment of a table, with the discretization parameter
/// its rate is measured against.
#[derive(Debug, Clone, Copy)]
pub struct RowSpec {
    pub m: usize,
    pub n: usize,
    pub d: f64,
}

pub fn row_specs(id: TableId, alpha: f64, m_list: &[usize]) -> Vec<RowSpec> {
    m_list
        .iter()
        .map(|&m| match id {
            TableId::Space => RowSpec { m, n: 150, d: 1.0 / (m - 1) as f64 },
            TableId::TimeUniform => {
                let n = coupled_time_steps(m, alpha);
                RowSpec { m, n, d: T_FINAL / n as f64 }
            }
            TableId::TimeGraded | TableId::TimeTwoPart => {
                RowSpec { m, n: m, d: 1.0 / (m - 1) as f64 }
            }
        })
        .collect()
}

fn run_row(
    id: TableId,
    alpha: f64,
    r: f64,
    row: &RowSpec,
    options: StepperOptions,
) -> Result<(f64, f64)> {
    let grading = match id {
        TableId::Space | TableId::TimeUniform => 1.0,
        _ => r,
    };
    let mesh = id.mesh_kind().build(row.n, grading)?;
    let space = FemSpace::new(row.m)?;
    let errs = run_benchmark(alpha, &space, &mesh, options)?;
    Ok((errs.error_l2, errs.error_h1))
}

/// Compute one table, optionally running the independent rows on `jobs`
/// threads. r is only used by the graded/two-part tables.
pub fn compute_table(
    id: TableId,
    alpha: f64,
    r: f64,
    m_list: &[usize],
    options: StepperOptions,
    jobs: usize,
) -> Result<RateTable> {
    let specs = row_specs(id, alpha, m_list);
    let errors: Vec<Result<(f64, f64)>> = if jobs > 1 {
        let mut results: Vec<Option<Result<(f64, f64)>>> =
            (0..specs.len()).map(|_| None).collect();
        let chunk = specs.len().div_ceil(jobs);
        std::thread::scope(|scope| {
            for (spec_chunk, result_chunk) in
                specs.chunks(chunk).zip(results.chunks_mut(chunk))
            {
                scope.spawn(move || {
                    for (row, slot) in spec_chunk.iter().zip(result_chunk.iter_mut()) {
                        *slot = Some(run_row(id, alpha, r, row, options));
                    }
                });
            }
        });
        results.into_iter().map(|r| r.expect("row computed")).collect()
    } else {
        specs.iter().map(|row| run_row(id, alpha, r, row, options)).collect()
    };

    let mut table = RateTable {
        alpha,
        r: if id.mesh_kind() == TableMeshKind::Uniform { 1.0 } else { r },
        mesh_kind: id.mesh_kind(),
        rate_against: id.rate_against(),
        rows: Vec::new(),
    };
    let mut prev_d = None;
    for (row, err) in specs.iter().zip(errors) {
        let (e1, e2) = err?;
        table.push_with_rates(row.m, row.n, e1, e2, row.d, prev_d);
        prev_d = Some(row.d);
    }
    Ok(table)
}

/// Table 1: spatial rates at fixed N = 150 on the uniform time mesh.
/// Rates are measured against h = 1/(M-1).
pub fn table_space(alpha: f64, m_list: &[usize], options: StepperOptions) -> Result<RateTable> {
    compute_table(TableId::Space, alpha, 1.0, m_list, options, 1)
}

/// Table 2: temporal rates on the uniform mesh with N = floor(M^{1/alpha}).
/// Rates are measured against tau = T/N.
pub fn table_time_uniform(
    alpha: f64,
    m_list: &[usize],
    options: StepperOptions,
) -> Result<RateTable> {
    compute_table(TableId::TimeUniform, alpha, 1.0, m_list, options, 1)
}

/// Tables 3 and 4: temporal rates with M = N on the graded (table 3) or
/// two-part (table 4) mesh, grading exponent r (r = 2/alpha is the optimal
/// choice). Rates are measured against h = 1/(M-1).
pub fn table_time_graded(
    alpha: f64,
    r: f64,
    kind: TableMeshKind,
    mn_list: &[usize],
    options: StepperOptions,
) -> Result<RateTable> {
    let id = match kind {
        TableMeshKind::TwoPart => TableId::TimeTwoPart,
        _ => TableId::TimeGraded,
    };
    compute_table(id, alpha, r, mn_list, options, 1)
}

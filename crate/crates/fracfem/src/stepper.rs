//! Advance the fully discrete scheme: the first level is nonlinear in the
//! sigma-averaged unknown and solved by Newton with a rank-one-corrected
//! Jacobian; every later level is linear because the Kirchhoff coefficient is
//! extrapolated from known history.

use std::time::Instant;

use crate::caputo::caputo_row;
use crate::error::{Error, Result};
use crate::fem2d::{assemble_mass_full, DofVector, FemSpace};
use crate::linalg::{self, SolverMode, SpdSolver};
use crate::memory::memory_weights;
use crate::time_mesh::TimeMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceMode {
    /// (f_h, phi_i) with f_h the L2 projection: the load vector of f itself.
    L2Projection,
    /// f replaced by its nodal interpolant (cheaper, for comparison runs).
    NodalInterpolation,
}

#[derive(Debug, Clone, Copy)]
pub struct StepperOptions {
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub solver_mode: SolverMode,
    pub source_mode: SourceMode,
}

impl Default for StepperOptions {
    fn default() -> Self {
        StepperOptions {
            newton_tol: 1e-7,
            newton_max_iter: 50,
            solver_mode: SolverMode::Direct,
            source_mode: SourceMode::L2Projection,
        }
    }
}

/// Discrete initial datum u_h^0.
pub enum InitialData<'a> {
    /// u0 = 0 (the benchmark case; its Ritz projection is zero).
    Zero,
    /// Ritz-project an H^1_0 function given by its gradient field.
    Gradient(&'a dyn Fn(f64, f64) -> (f64, f64)),
    /// Coefficients supplied directly.
    Coefficients(DofVector),
}

pub struct ProblemSpec<'a> {
    pub alpha: f64,
    pub sigma: f64,
    pub mesh: &'a TimeMesh,
    pub space: &'a FemSpace,
    /// Source f(x, y, t). The Kirchhoff coefficient is fixed to 1 + ||grad u||^2.
    pub source: &'a dyn Fn(f64, f64, f64) -> f64,
    pub initial: InitialData<'a>,
    pub options: StepperOptions,
}

impl ProblemSpec<'_> {
    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(0.0..1.0).contains(&self.sigma) {
            return Err(Error::InvalidParameter(format!(
                "sigma must lie in [0, 1), got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    /// RHS load (f_h^{t}, phi_i) at a fixed time.
    pub fn source_load(&self, t: f64) -> DofVector {
        match self.options.source_mode {
            SourceMode::L2Projection => self.space.load_vector(|x, y| (self.source)(x, y, t)),
            SourceMode::NodalInterpolation => {
                // (I_h f, phi_i) needs the full-mesh mass row, boundary nodes included
                let tri = &self.space.tri;
                let full_mass = assemble_mass_full(tri);
                let nodal: Vec<f64> = tri
                    .coords()
                    .iter()
                    .map(|&(x, y)| (self.source)(x, y, t))
                    .collect();
                let prod = full_mass.matvec_owned(&nodal);
                DofVector(
                    tri.interior_nodes().iter().map(|&node| prod[node]).collect(),
                )
            }
        }
    }
}

/// Solution history u_h^0..u_h^n with cached ||grad u_h^j||^2.
pub struct StateHistory {
    pub u: Vec<DofVector>,
    pub gradsq: Vec<f64>,
}

impl StateHistory {
    fn with_initial(space: &FemSpace, u0: DofVector) -> Self {
        let gradsq = space.stiffness.quadratic_form(u0.as_slice());
        StateHistory { u: vec![u0], gradsq: vec![gradsq] }
    }

    fn push(&mut self, space: &FemSpace, u: DofVector) {
        self.gradsq.push(space.stiffness.quadratic_form(u.as_slice()));
        self.u.push(u);
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonReport {
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
    /// Newton stalled and the frozen-coefficient Picard iteration finished the job.
    pub picard_fallback: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct LevelRecord {
    pub level: usize,
    pub t: f64,
    pub l2_norm: f64,
    pub h1_norm: f64,
    /// ||u^n|| + c_{n,n}^{-1/2} ||grad u^n||, the weighted-norm diagnostic.
    pub weighted_norm: f64,
    /// Kirchhoff coefficient used in this level's system (1 at level 0).
    pub kirchhoff: f64,
    pub seconds: f64,
}

pub struct RunReport {
    pub newton: NewtonReport,
    pub levels: Vec<LevelRecord>,
    pub total_seconds: f64,
}

/// Two-level extrapolation u^{n-1} + (1-sigma)(tau_n/tau_{n-1})(u^{n-1} - u^{n-2})
/// approximating u at t_{n-sigma}; exact for histories linear in t.
pub fn extrapolate_tilde(
    history: &StateHistory,
    mesh: &TimeMesh,
    n: usize,
    sigma: f64,
) -> Result<DofVector> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "extrapolation needs n >= 2, got {n}"
        )));
    }
    if history.len() < n {
        return Err(Error::InvalidParameter(format!(
            "extrapolation at level {n} needs u^{} and u^{}, history holds {}",
            n - 1,
            n - 2,
            history.len()
        )));
    }
    let factor = (1.0 - sigma) * mesh.step(n) / mesh.step(n - 1);
    let prev = history.u[n - 1].as_slice();
    let prev2 = history.u[n - 2].as_slice();
    Ok(DofVector(
        prev.iter()
            .zip(prev2)
            .map(|(a, b)| a + factor * (a - b))
            .collect(),
    ))
}

/// (1-sigma) u^n + sigma u^{n-1}.
pub fn sigma_average(u_n: &DofVector, u_nm1: &DofVector, sigma: f64) -> Result<DofVector> {
    if u_n.len() != u_nm1.len() {
        return Err(Error::DimensionMismatch { expected: u_n.len(), got: u_nm1.len() });
    }
    Ok(DofVector(
        u_n.as_slice()
            .iter()
            .zip(u_nm1.as_slice())
            .map(|(a, b)| (1.0 - sigma) * a + sigma * b)
            .collect(),
    ))
}

fn map_spd_error(e: Error, level: usize) -> Error {
    match e {
        Error::NotSpd => Error::IndefiniteSystem { level },
        other => Error::AtLevel { level, source: Box::new(other) },
    }
}

/// First level, given the assembled source load (f_h^{1-sigma}, phi_i).
///
/// Newton runs in the variable v = u^{1,sigma}; the residual is
///   F(v) = (c11/(1-s)) M (v - u^0) + (1 + v'Av - (1-s) tau_1) A v - b_f
/// and the Jacobian B + 2 (Av)(Av)' is inverted by Sherman-Morrison.
pub fn step_first_from_load(
    space: &FemSpace,
    mesh: &TimeMesh,
    alpha: f64,
    sigma: f64,
    u0: &DofVector,
    f_load: &DofVector,
    options: &StepperOptions,
) -> Result<(DofVector, NewtonReport)> {
    let c11 = caputo_row(mesh, 1, sigma, alpha)?.c[0];
    let cfac = c11 / (1.0 - sigma);
    let mem_coeff = memory_weights(mesh, 1, sigma)?.first_level_coeff;
    let mass = &space.mass;
    let stiff = &space.stiffness;

    let residual = |v: &[f64]| -> (Vec<f64>, f64, Vec<f64>) {
        // returns (F(v), v'Av, Av)
        let av = stiff.matvec_owned(v);
        let vav = linalg::dot(v, &av);
        let mut dv: Vec<f64> = v.iter().zip(u0.as_slice()).map(|(a, b)| a - b).collect();
        let mdv = mass.matvec_owned(&dv);
        for ((fi, mi), ai) in dv.iter_mut().zip(&mdv).zip(&av) {
            *fi = cfac * mi + (1.0 + vav - mem_coeff) * ai;
        }
        linalg::axpy(-1.0, f_load.as_slice(), &mut dv);
        (dv, vav, av)
    };

    let mut v = u0.as_slice().to_vec();
    let mut iterations = 0usize;
    let mut picard_fallback = false;
    let (mut f_res, mut vav, mut av) = residual(&v);
    let mut res_norm = linalg::norm2(&f_res);

    while res_norm > options.newton_tol && iterations < options.newton_max_iter {
        let diffusion = 1.0 + vav - mem_coeff;
        let system = mass.linear_combination(cfac, stiff, diffusion);
        let solver =
            SpdSolver::new(&system, options.solver_mode).map_err(|e| map_spd_error(e, 1))?;
        let neg_f: Vec<f64> = f_res.iter().map(|x| -x).collect();
        let delta = solver
            .solve_rank_one(&av, 2.0, &neg_f)
            .map_err(|e| map_spd_error(e, 1))?;
        linalg::axpy(1.0, &delta, &mut v);
        iterations += 1;
        let (f2, vav2, av2) = residual(&v);
        let new_norm = linalg::norm2(&f2);
        if !new_norm.is_finite() {
            picard_fallback = true;
            break;
        }
        f_res = f2;
        vav = vav2;
        av = av2;
        res_norm = new_norm;
    }

    if res_norm > options.newton_tol {
        // Picard: freeze the scalar ||grad v||^2 and re-solve until the full
        // residual meets the tolerance
        picard_fallback = true;
        v = u0.as_slice().to_vec();
        let mut rhs_base = mass.matvec_owned(u0.as_slice());
        for (r, f) in rhs_base.iter_mut().zip(f_load.as_slice()) {
            *r = cfac * *r + f;
        }
        let mut picard_iters = 0usize;
        loop {
            let (f2, vav2, _) = residual(&v);
            res_norm = linalg::norm2(&f2);
            if res_norm <= options.newton_tol {
                break;
            }
            if picard_iters >= options.newton_max_iter {
                return Err(Error::AtLevel {
                    level: 1,
                    source: Box::new(Error::NewtonFailed {
                        iterations: iterations + picard_iters,
                        residual: res_norm,
                    }),
                });
            }
            let system =
                mass.linear_combination(cfac, stiff, 1.0 + vav2 - mem_coeff);
            let solver = SpdSolver::new(&system, options.solver_mode)
                .map_err(|e| map_spd_error(e, 1))?;
            v = solver.solve(&rhs_base).map_err(|e| map_spd_error(e, 1))?;
            picard_iters += 1;
        }
        iterations += picard_iters;
    }

    // recover u^1 from the converged sigma-average
    let u1 = DofVector(
        v.iter()
            .zip(u0.as_slice())
            .map(|(vi, u0i)| (vi - sigma * u0i) / (1.0 - sigma))
            .collect(),
    );
    let report = NewtonReport {
        iterations,
        final_residual: res_norm,
        converged: res_norm <= options.newton_tol,
        picard_fallback,
    };
    Ok((u1, report))
}

pub fn step_first(spec: &ProblemSpec, u0: &DofVector) -> Result<(DofVector, NewtonReport)> {
    spec.validate()?;
    let theta = spec.mesh.sigma_point(1, spec.sigma)?.t;
    let f_load = spec.source_load(theta);
    step_first_from_load(
        spec.space,
        spec.mesh,
        spec.alpha,
        spec.sigma,
        u0,
        &f_load,
        &spec.options,
    )
}

/// Level n >= 2, given the assembled source load (f_h^{n-sigma}, phi_i).
/// Returns (u^n, Kirchhoff coefficient D_n).
pub fn step_linear_from_load(
    space: &FemSpace,
    mesh: &TimeMesh,
    alpha: f64,
    sigma: f64,
    history: &StateHistory,
    n: usize,
    f_load: &DofVector,
    options: &StepperOptions,
) -> Result<(DofVector, f64)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("linear step needs n >= 2, got {n}")));
    }
    if history.len() != n {
        return Err(Error::InvalidParameter(format!(
            "linear step at level {n} needs history through level {}, got {}",
            n - 1,
            history.len()
        )));
    }
    let row = caputo_row(mesh, n, sigma, alpha)?;
    let mem = memory_weights(mesh, n, sigma)?;
    let tilde = extrapolate_tilde(history, mesh, n, sigma)?;
    let d_n = 1.0 + space.stiffness.quadratic_form(tilde.as_slice());

    let dofs = space.dofs();
    // mass-side history: sum_{j=1}^{n-1} (c_j - c_{j+1}) u^j - c_1 u^0
    let mut acc_mass = vec![0.0; dofs];
    for j in 1..n {
        linalg::axpy(row.c[j - 1] - row.c[j], history.u[j].as_slice(), &mut acc_mass);
    }
    linalg::axpy(-row.c[0], history.u[0].as_slice(), &mut acc_mass);
    // stiffness-side history: sum tau_tilde_j u^j - sigma D_n u^{n-1}
    let mut acc_stiff = vec![0.0; dofs];
    for j in 1..n {
        linalg::axpy(mem.tau_tilde[j - 1], history.u[j].as_slice(), &mut acc_stiff);
    }
    linalg::axpy(-sigma * d_n, history.u[n - 1].as_slice(), &mut acc_stiff);

    let mut rhs = f_load.as_slice().to_vec();
    let m_acc = space.mass.matvec_owned(&acc_mass);
    linalg::axpy(-1.0, &m_acc, &mut rhs);
    let a_acc = space.stiffness.matvec_owned(&acc_stiff);
    linalg::axpy(1.0, &a_acc, &mut rhs);

    let system = space
        .mass
        .linear_combination(row.c[n - 1], &space.stiffness, (1.0 - sigma) * d_n);
    let solver =
        SpdSolver::new(&system, options.solver_mode).map_err(|e| map_spd_error(e, n))?;
    let u = solver.solve(&rhs).map_err(|e| map_spd_error(e, n))?;
    Ok((DofVector(u), d_n))
}

pub fn step_linear(spec: &ProblemSpec, history: &StateHistory, n: usize) -> Result<DofVector> {
    spec.validate()?;
    let theta = spec.mesh.sigma_point(n, spec.sigma)?.t;
    let f_load = spec.source_load(theta);
    step_linear_from_load(
        spec.space,
        spec.mesh,
        spec.alpha,
        spec.sigma,
        history,
        n,
        &f_load,
        &spec.options,
    )
    .map(|(u, _)| u)
}

/// Full solve over the time mesh. The history keeps every level because the
/// Caputo operator and the memory term are nonlocal in time.
pub fn run(spec: &ProblemSpec) -> Result<(StateHistory, RunReport)> {
    spec.validate()?;
    let start = Instant::now();
    let space = spec.space;
    let u0 = match &spec.initial {
        InitialData::Zero => DofVector::zeros(space.dofs()),
        InitialData::Gradient(g) => space.ritz_project(g)?,
        InitialData::Coefficients(c) => {
            if c.len() != space.dofs() {
                return Err(Error::DimensionMismatch { expected: space.dofs(), got: c.len() });
            }
            c.clone()
        }
    };

    let mut levels = Vec::with_capacity(spec.mesh.intervals() + 1);
    let (l2, h1) = space.norms(&u0);
    levels.push(LevelRecord {
        level: 0,
        t: 0.0,
        l2_norm: l2,
        h1_norm: h1,
        weighted_norm: l2,
        kirchhoff: 1.0,
        seconds: 0.0,
    });

    let mut history = StateHistory::with_initial(space, u0);

    let level_start = Instant::now();
    let (u1, newton) = step_first(spec, &history.u[0])?;
    let c11 = caputo_row(spec.mesh, 1, spec.sigma, spec.alpha)?.c[0];
    let u1sig = sigma_average(&u1, &history.u[0], spec.sigma)?;
    let kirchhoff1 = 1.0 + space.stiffness.quadratic_form(u1sig.as_slice());
    history.push(space, u1);
    let (l2, h1) = space.norms(&history.u[1]);
    levels.push(LevelRecord {
        level: 1,
        t: spec.mesh.node(1),
        l2_norm: l2,
        h1_norm: h1,
        weighted_norm: l2 + h1 / c11.sqrt(),
        kirchhoff: kirchhoff1,
        seconds: level_start.elapsed().as_secs_f64(),
    });

    for n in 2..=spec.mesh.intervals() {
        let level_start = Instant::now();
        let theta = spec.mesh.sigma_point(n, spec.sigma)?.t;
        let f_load = spec.source_load(theta);
        let (u_n, d_n) = step_linear_from_load(
            space,
            spec.mesh,
            spec.alpha,
            spec.sigma,
            &history,
            n,
            &f_load,
            &spec.options,
        )?;
        let diag = caputo_row(spec.mesh, n, spec.sigma, spec.alpha)?.c[n - 1];
        history.push(space, u_n);
        let (l2, h1) = space.norms(&history.u[n]);
        levels.push(LevelRecord {
            level: n,
            t: spec.mesh.node(n),
            l2_norm: l2,
            h1_norm: h1,
            weighted_norm: l2 + h1 / diag.sqrt(),
            kirchhoff: d_n,
            seconds: level_start.elapsed().as_secs_f64(),
        });
    }

    let report = RunReport { newton, levels, total_seconds: start.elapsed().as_secs_f64() };
    Ok((history, report))
}

//! Quadrature weights for the Volterra memory term int_0^{t_{n-sigma}} grad u ds.
//!
//! The compound rule: right rectangle on [0, t_{1-sigma}] (level 1, applied to
//! the unknown's sigma-average), composite trapezoid on [t_1, t_{n-1}] and left
//! rectangle on [t_{n-1}, t_{n-sigma}] for levels n >= 2. The interval [0, t_1]
//! is covered only through the level-1 equation.

use crate::error::{Error, Result};
use crate::quad;
use crate::time_mesh::TimeMesh;

#[derive(Debug, Clone)]
pub struct MemoryWeights {
    pub n: usize,
    /// tau_tilde[j-1] multiplies grad u^j, j = 1..n-1 (empty for n = 1).
    pub tau_tilde: Vec<f64>,
    /// (1-sigma) tau_1: the level-1 rectangle coefficient that multiplies the
    /// sigma-averaged unknown, owned by the stepper's first-level system.
    pub first_level_coeff: f64,
}

pub fn memory_weights(mesh: &TimeMesh, n: usize, sigma: f64) -> Result<MemoryWeights> {
    if n == 0 || n > mesh.intervals() {
        return Err(Error::IndexOutOfRange { what: "time level", got: n, max: mesh.intervals() });
    }
    if !(0.0..1.0).contains(&sigma) {
        return Err(Error::InvalidParameter(format!("sigma must lie in [0, 1), got {sigma}")));
    }
    let first_level_coeff = (1.0 - sigma) * mesh.step(1);
    let tau_tilde = match n {
        1 => Vec::new(),
        2 => vec![(1.0 - sigma) * mesh.step(2)],
        _ => {
            let mut w = Vec::with_capacity(n - 1);
            w.push(mesh.step(2) / 2.0);
            for j in 2..=n - 2 {
                w.push((mesh.step(j) + mesh.step(j + 1)) / 2.0);
            }
            w.push(mesh.step(n - 1) / 2.0 + (1.0 - sigma) * mesh.step(n));
            w
        }
    };
    Ok(MemoryWeights { n, tau_tilde, first_level_coeff })
}

impl MemoryWeights {
    /// Sum of the history weights; equals t_{n-sigma} - t_1 for n >= 2.
    pub fn total(&self) -> f64 {
        self.tau_tilde.iter().sum()
    }
}

/// |sum_j tau_tilde_j f(t_j) - int_{t_1}^{t_{n-sigma}} f| for n >= 2, or the
/// level-1 right-rectangle error |t_{1-sigma} f(t_{1-sigma}) - int_0^{t_{1-sigma}} f|.
/// The reference integral comes from the adaptive quadrature oracle.
pub fn quadrature_error_probe(
    mesh: &TimeMesh,
    n: usize,
    sigma: f64,
    f: impl Fn(f64) -> f64,
) -> Result<f64> {
    let w = memory_weights(mesh, n, sigma)?;
    let theta = mesh.sigma_point(n, sigma)?.t;
    if n == 1 {
        let exact = quad::integrate(&f, 0.0, theta, 1e-13);
        return Ok((theta * f(theta) - exact).abs());
    }
    let approx: f64 = w
        .tau_tilde
        .iter()
        .enumerate()
        .map(|(i, wj)| wj * f(mesh.node(i + 1)))
        .sum();
    let exact = quad::integrate(&f, mesh.node(1), theta, 1e-13);
    Ok((approx - exact).abs())
}

//! P1 finite elements on a structured triangulation of the unit square.
//!
//! Every grid cell is split along the same diagonal, homogeneous Dirichlet
//! conditions are enforced by eliminating boundary nodes, and all matrices
//! live on the interior degrees of freedom.

use crate::error::{Error, Result};
use crate::linalg::{solve_spd, SolverMode, SparseSymmetric};

#[derive(Debug, Clone)]
pub struct Triangulation {
    nodes_per_side: usize,
    h: f64,
    coords: Vec<(f64, f64)>,
    triangles: Vec<[usize; 3]>,
    /// grid node -> interior dof index, None on the boundary
    interior_index: Vec<Option<usize>>,
    /// interior dof index -> grid node
    interior_nodes: Vec<usize>,
}

/// Coefficients on the interior degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct DofVector(pub Vec<f64>);

impl DofVector {
    pub fn zeros(n: usize) -> Self {
        DofVector(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

// degree-2 rule, points strictly interior (barycentric l1, l2, weight)
const QUAD_3: [(f64, f64, f64); 3] = [
    (1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0),
    (2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0),
    (1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0),
];

// degree-4 rule (6 points), used for error norms
const QA: f64 = 0.445948490915965;
const QB: f64 = 0.091576213509771;
const WA: f64 = 0.223381589678011;
const WB: f64 = 0.109951743655322;
const QUAD_6: [(f64, f64, f64); 6] = [
    (QA, QA, WA),
    (1.0 - 2.0 * QA, QA, WA),
    (QA, 1.0 - 2.0 * QA, WA),
    (QB, QB, WB),
    (1.0 - 2.0 * QB, QB, WB),
    (QB, 1.0 - 2.0 * QB, WB),
];

struct TriangleGeometry {
    verts: [(f64, f64); 3],
    area: f64,
    /// b_l, c_l with grad phi_l = (b_l, c_l) / (2 area)
    b: [f64; 3],
    c: [f64; 3],
}

impl Triangulation {
    /// Structured mesh with `m` nodes per side (m >= 3), h = 1/(m-1).
    pub fn unit_square(m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidParameter(format!(
                "need at least 3 nodes per side, got {m}"
            )));
        }
        let h = 1.0 / (m - 1) as f64;
        let mut coords = Vec::with_capacity(m * m);
        for iy in 0..m {
            for ix in 0..m {
                coords.push((ix as f64 * h, iy as f64 * h));
            }
        }
        let mut triangles = Vec::with_capacity(2 * (m - 1) * (m - 1));
        for iy in 0..m - 1 {
            for ix in 0..m - 1 {
                let a = iy * m + ix;
                let b = iy * m + ix + 1;
                let c = (iy + 1) * m + ix + 1;
                let d = (iy + 1) * m + ix;
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        let mut interior_index = vec![None; m * m];
        let mut interior_nodes = Vec::with_capacity((m - 2) * (m - 2));
        for iy in 1..m - 1 {
            for ix in 1..m - 1 {
                let node = iy * m + ix;
                interior_index[node] = Some(interior_nodes.len());
                interior_nodes.push(node);
            }
        }
        Ok(Triangulation { nodes_per_side: m, h, coords, triangles, interior_index, interior_nodes })
    }

    pub fn nodes_per_side(&self) -> usize {
        self.nodes_per_side
    }

    pub fn mesh_size(&self) -> f64 {
        self.h
    }

    pub fn node_count(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[(f64, f64)] {
        &self.coords
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn interior_count(&self) -> usize {
        self.interior_nodes.len()
    }

    pub fn interior_index(&self, node: usize) -> Option<usize> {
        self.interior_index[node]
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior_nodes
    }

    fn geometry(&self, tri: &[usize; 3]) -> TriangleGeometry {
        let verts = [self.coords[tri[0]], self.coords[tri[1]], self.coords[tri[2]]];
        let (x, y) = (
            [verts[0].0, verts[1].0, verts[2].0],
            [verts[0].1, verts[1].1, verts[2].1],
        );
        let area = 0.5
            * ((x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0]));
        debug_assert!(area > 0.0, "triangle not positively oriented");
        TriangleGeometry {
            verts,
            area,
            b: [y[1] - y[2], y[2] - y[0], y[0] - y[1]],
            c: [x[2] - x[1], x[0] - x[2], x[1] - x[0]],
        }
    }

    /// Evaluate a P1 field given by values on all grid nodes.
    pub fn eval_nodal(&self, nodal: &[f64], x: f64, y: f64) -> f64 {
        let m = self.nodes_per_side;
        let cx = ((x / self.h) as usize).min(m - 2);
        let cy = ((y / self.h) as usize).min(m - 2);
        let (x0, y0) = (cx as f64 * self.h, cy as f64 * self.h);
        let a = cy * m + cx;
        let tri = if x - x0 >= y - y0 {
            [a, a + 1, a + m + 1]
        } else {
            [a, a + m + 1, a + m]
        };
        let g = self.geometry(&tri);
        let mut val = 0.0;
        for l in 0..3 {
            // barycentric coordinate of (x, y) w.r.t. vertex l
            let lam = (g.b[l] * (x - g.verts[0].0) + g.c[l] * (y - g.verts[0].1))
                / (2.0 * g.area)
                + if l == 0 { 1.0 } else { 0.0 };
            val += nodal[tri[l]] * lam;
        }
        val
    }

    /// Spread interior coefficients onto the full node set (zero on the boundary).
    pub fn scatter(&self, v: &DofVector) -> Vec<f64> {
        let mut full = vec![0.0; self.node_count()];
        for (k, &node) in self.interior_nodes.iter().enumerate() {
            full[node] = v.0[k];
        }
        full
    }
}

fn assemble(
    tri: &Triangulation,
    interior_only: bool,
    element: impl Fn(&TriangleGeometry, usize, usize) -> f64,
) -> SparseSymmetric {
    let dim = if interior_only { tri.interior_count() } else { tri.node_count() };
    let mut triplets = Vec::with_capacity(9 * tri.triangles().len());
    for t in tri.triangles() {
        let g = tri.geometry(t);
        for li in 0..3 {
            for lj in 0..3 {
                let (gi, gj) = if interior_only {
                    match (tri.interior_index(t[li]), tri.interior_index(t[lj])) {
                        (Some(a), Some(b)) => (a, b),
                        _ => continue,
                    }
                } else {
                    (t[li], t[lj])
                };
                triplets.push((gi, gj, element(&g, li, lj)));
            }
        }
    }
    SparseSymmetric::from_triplets(dim, &triplets)
}

fn mass_entry(g: &TriangleGeometry, li: usize, lj: usize) -> f64 {
    g.area / 12.0 * if li == lj { 2.0 } else { 1.0 }
}

fn stiffness_entry(g: &TriangleGeometry, li: usize, lj: usize) -> f64 {
    (g.b[li] * g.b[lj] + g.c[li] * g.c[lj]) / (4.0 * g.area)
}

/// Exact P1 mass matrix on the interior dofs.
pub fn assemble_mass(tri: &Triangulation) -> SparseSymmetric {
    assemble(tri, true, mass_entry)
}

/// Stiffness matrix on the interior dofs.
pub fn assemble_stiffness(tri: &Triangulation) -> SparseSymmetric {
    assemble(tri, true, stiffness_entry)
}

/// Mass matrix over all grid nodes (boundary included); used by the
/// partition-of-unity checks and the nodal-interpolation source mode.
pub fn assemble_mass_full(tri: &Triangulation) -> SparseSymmetric {
    assemble(tri, false, mass_entry)
}

pub fn assemble_stiffness_full(tri: &Triangulation) -> SparseSymmetric {
    assemble(tri, false, stiffness_entry)
}

/// The P1 space with its assembled matrices.
#[derive(Debug, Clone)]
pub struct FemSpace {
    pub tri: Triangulation,
    pub mass: SparseSymmetric,
    pub stiffness: SparseSymmetric,
}

impl FemSpace {
    pub fn new(nodes_per_side: usize) -> Result<Self> {
        let tri = Triangulation::unit_square(nodes_per_side)?;
        let mass = assemble_mass(&tri);
        let stiffness = assemble_stiffness(&tri);
        Ok(FemSpace { tri, mass, stiffness })
    }

    pub fn dofs(&self) -> usize {
        self.tri.interior_count()
    }

    /// Load vector (f, phi_i) with the degree-2 interior rule.
    pub fn load_vector(&self, f: impl Fn(f64, f64) -> f64) -> DofVector {
        let mut b = vec![0.0; self.dofs()];
        for t in self.tri.triangles() {
            let g = self.tri.geometry(t);
            for &(l1, l2, w) in &QUAD_3 {
                let l0 = 1.0 - l1 - l2;
                let x = l0 * g.verts[0].0 + l1 * g.verts[1].0 + l2 * g.verts[2].0;
                let y = l0 * g.verts[0].1 + l1 * g.verts[1].1 + l2 * g.verts[2].1;
                let fv = f(x, y) * w * g.area;
                let lam = [l0, l1, l2];
                for l in 0..3 {
                    if let Some(k) = self.tri.interior_index(t[l]) {
                        b[k] += fv * lam[l];
                    }
                }
            }
        }
        DofVector(b)
    }

    /// L2 projection: solve M f_h = (f, phi_i).
    pub fn l2_project(&self, f: impl Fn(f64, f64) -> f64) -> Result<DofVector> {
        let b = self.load_vector(f);
        Ok(DofVector(solve_spd(&self.mass, &b.0, SolverMode::Direct)?))
    }

    /// Ritz projection of an H^1_0 function given by its gradient:
    /// solve A w = (grad u0, grad phi_i).
    pub fn ritz_project(&self, grad: impl Fn(f64, f64) -> (f64, f64)) -> Result<DofVector> {
        let mut b = vec![0.0; self.dofs()];
        for t in self.tri.triangles() {
            let g = self.tri.geometry(t);
            for &(l1, l2, w) in &QUAD_3 {
                let l0 = 1.0 - l1 - l2;
                let x = l0 * g.verts[0].0 + l1 * g.verts[1].0 + l2 * g.verts[2].0;
                let y = l0 * g.verts[0].1 + l1 * g.verts[1].1 + l2 * g.verts[2].1;
                let (gx, gy) = grad(x, y);
                for l in 0..3 {
                    if let Some(k) = self.tri.interior_index(t[l]) {
                        // grad phi_l is constant on the triangle
                        b[k] += w * g.area * (gx * g.b[l] + gy * g.c[l]) / (2.0 * g.area);
                    }
                }
            }
        }
        Ok(DofVector(solve_spd(&self.stiffness, &b, SolverMode::Direct)?))
    }

    /// Discrete norms (|v|_M, |v|_A) = (L2 norm, H1 seminorm) of a dof vector.
    pub fn norms(&self, v: &DofVector) -> (f64, f64) {
        (
            self.mass.quadratic_form(&v.0).max(0.0).sqrt(),
            self.stiffness.quadratic_form(&v.0).max(0.0).sqrt(),
        )
    }

    /// L2 and H1-seminorm errors of u_h against an exact field, integrated per
    /// triangle with the degree-4 rule.
    pub fn error_norms(
        &self,
        u_h: &DofVector,
        exact: impl Fn(f64, f64) -> f64,
        grad_exact: impl Fn(f64, f64) -> (f64, f64),
    ) -> (f64, f64) {
        let mut e2 = 0.0;
        let mut g2 = 0.0;
        for t in self.tri.triangles() {
            let g = self.tri.geometry(t);
            let uv: Vec<f64> = t
                .iter()
                .map(|&node| self.tri.interior_index(node).map_or(0.0, |k| u_h.0[k]))
                .collect();
            let ghx = (0..3).map(|l| uv[l] * g.b[l]).sum::<f64>() / (2.0 * g.area);
            let ghy = (0..3).map(|l| uv[l] * g.c[l]).sum::<f64>() / (2.0 * g.area);
            for &(l1, l2, w) in &QUAD_6 {
                let l0 = 1.0 - l1 - l2;
                let x = l0 * g.verts[0].0 + l1 * g.verts[1].0 + l2 * g.verts[2].0;
                let y = l0 * g.verts[0].1 + l1 * g.verts[1].1 + l2 * g.verts[2].1;
                let uh = l0 * uv[0] + l1 * uv[1] + l2 * uv[2];
                let d = exact(x, y) - uh;
                e2 += w * g.area * d * d;
                let (ex, ey) = grad_exact(x, y);
                g2 += w * g.area * ((ex - ghx) * (ex - ghx) + (ey - ghy) * (ey - ghy));
            }
        }
        (e2.sqrt(), g2.sqrt())
    }

    /// Nodal interpolant of a function, restricted to the interior dofs.
    pub fn interpolate(&self, f: impl Fn(f64, f64) -> f64) -> DofVector {
        DofVector(
            self.tri
                .interior_nodes()
                .iter()
                .map(|&node| {
                    let (x, y) = self.tri.coords()[node];
                    f(x, y)
                })
                .collect(),
        )
    }
}

/// Write "x y value" rows for every grid node (plot-ready surface data).
pub fn export_field(tri: &Triangulation, v: &DofVector, out: &mut impl std::io::Write) -> Result<()> {
    let full = tri.scatter(v);
    writeln!(out, "# x y u  (nodes per side: {})", tri.nodes_per_side())?;
    for (node, &(x, y)) in tri.coords().iter().enumerate() {
        writeln!(out, "{x:.12e} {y:.12e} {:.12e}", full[node])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::quad;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn counting_invariants() {
        for (m, tris, dofs) in [(3usize, 8usize, 1usize), (5, 32, 9), (17, 512, 225)] {
            let tri = Triangulation::unit_square(m).unwrap();
            assert_eq!(tri.triangles().len(), tris);
            assert_eq!(tri.interior_count(), dofs);
        }
        assert!(Triangulation::unit_square(2).is_err());
    }

    #[test]
    fn triangles_tile_the_square() {
        let tri = Triangulation::unit_square(7).unwrap();
        let total: f64 = tri.triangles().iter().map(|t| tri.geometry(t).area).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn partition_of_unity_mass() {
        // 1' M_full 1 = |Omega| = 1
        let tri = Triangulation::unit_square(6).unwrap();
        let mass = assemble_mass_full(&tri);
        let ones = vec![1.0; tri.node_count()];
        assert!((mass.quadratic_form(&ones) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn stiffness_annihilates_constants() {
        let tri = Triangulation::unit_square(6).unwrap();
        let stiff = assemble_stiffness_full(&tri);
        let ones = vec![1.0; tri.node_count()];
        let y = stiff.matvec_owned(&ones);
        assert!(linalg::norm2(&y) < 1e-12);
    }

    #[test]
    fn interior_matrices_are_spd() {
        let space = FemSpace::new(9).unwrap();
        // Cholesky succeeding is the SPD certificate
        assert!(crate::linalg::SpdSolver::new(&space.mass, SolverMode::Direct).is_ok());
        assert!(crate::linalg::SpdSolver::new(&space.stiffness, SolverMode::Direct).is_ok());
        // and u' A u > 0 for u != 0
        let mut v = vec![0.0; space.dofs()];
        v[3] = 1.0;
        assert!(space.stiffness.quadratic_form(&v) > 0.0);
    }

    #[test]
    fn single_interior_basis_norm_against_quadrature() {
        // M = 3: one interior hat function; ||phi||^2 = mass diagonal entry
        let space = FemSpace::new(3).unwrap();
        let diag = space.mass.diagonal();
        assert_eq!(diag.len(), 1);
        let tri = &space.tri;
        let mut nodal = vec![0.0; tri.node_count()];
        nodal[tri.interior_nodes()[0]] = 1.0;
        let oracle =
            quad::integrate2d_unit_square(|x, y| tri.eval_nodal(&nodal, x, y).powi(2), 1e-10);
        assert!((diag[0] - oracle).abs() < 5e-8, "{} vs {oracle}", diag[0]);
    }

    #[test]
    fn stiffness_energy_against_quadrature() {
        // u_h = interpolant of x(1-x) y(1-y)
        let space = FemSpace::new(9).unwrap();
        let u = space.interpolate(|x, y| x * (1.0 - x) * y * (1.0 - y));
        let energy = space.stiffness.quadratic_form(&u.0);
        let tri = space.tri.clone();
        let nodal = tri.scatter(&u);
        let h = tri.mesh_size();
        let grad_sq = move |x: f64, y: f64| {
            // piecewise-constant gradient via one-sided differences inside the cell
            let m = tri.nodes_per_side();
            let cx = ((x / h) as usize).min(m - 2);
            let cy = ((y / h) as usize).min(m - 2);
            let (x0, y0) = (cx as f64 * h, cy as f64 * h);
            let a = cy * m + cx;
            let (gx, gy) = if x - x0 >= y - y0 {
                ((nodal[a + 1] - nodal[a]) / h, (nodal[a + m + 1] - nodal[a + 1]) / h)
            } else {
                ((nodal[a + m + 1] - nodal[a + m]) / h, (nodal[a + m] - nodal[a]) / h)
            };
            gx * gx + gy * gy
        };
        let oracle = quad::integrate2d_unit_square(grad_sq, 1e-9);
        assert!((energy - oracle).abs() < 1e-6, "{energy} vs {oracle}");
    }

    #[test]
    fn l2_projection_residual_orthogonality() {
        // for constant f the degree-2 load is exact, so (f - f_h, phi_i) = 0
        let space = FemSpace::new(6).unwrap();
        let fh = space.l2_project(|_, _| 2.5).unwrap();
        let mf = space.mass.matvec_owned(&fh.0);
        let load = space.load_vector(|_, _| 2.5);
        for (a, b) in mf.iter().zip(load.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn l2_projection_reproduces_basis_function() {
        let space = FemSpace::new(5).unwrap();
        let tri = space.tri.clone();
        let k = 4usize; // center dof of the 3x3 interior grid
        let mut nodal = vec![0.0; tri.node_count()];
        nodal[tri.interior_nodes()[k]] = 1.0;
        let fh = space.l2_project(|x, y| tri.eval_nodal(&nodal, x, y)).unwrap();
        for (i, v) in fh.as_slice().iter().enumerate() {
            let want = if i == k { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-11, "dof {i}: {v}");
        }
    }

    #[test]
    fn l2_projection_against_dense_oracle() {
        // independent path: mass and load from the degree-4 rule, dense LU
        let space = FemSpace::new(9).unwrap();
        let f = |x: f64, _y: f64| x - x * x;
        let got = space.l2_project(f).unwrap();
        let n = space.dofs();
        let mut mass = DMatrix::zeros(n, n);
        let mut load = DVector::zeros(n);
        for t in space.tri.triangles() {
            let g = space.tri.geometry(t);
            for &(l1, l2, w) in &QUAD_6 {
                let l0 = 1.0 - l1 - l2;
                let x = l0 * g.verts[0].0 + l1 * g.verts[1].0 + l2 * g.verts[2].0;
                let y = l0 * g.verts[0].1 + l1 * g.verts[1].1 + l2 * g.verts[2].1;
                let lam = [l0, l1, l2];
                for li in 0..3 {
                    let Some(gi) = space.tri.interior_index(t[li]) else { continue };
                    load[gi] += w * g.area * f(x, y) * lam[li];
                    for lj in 0..3 {
                        if let Some(gj) = space.tri.interior_index(t[lj]) {
                            mass[(gi, gj)] += w * g.area * lam[li] * lam[lj];
                        }
                    }
                }
            }
        }
        let oracle: DVector<f64> = mass.lu().solve(&load).unwrap();
        for (i, a) in got.as_slice().iter().enumerate() {
            let b = oracle[i];
            assert!((a - b).abs() < 1e-11, "{a} vs {b}");
        }
    }

    #[test]
    fn ritz_projection_identity_and_zero() {
        let space = FemSpace::new(5).unwrap();
        // u0 already in the space: projection returns it unchanged
        let tri = space.tri.clone();
        let mut coeffs = DofVector::zeros(space.dofs());
        for (k, &node) in space.tri.interior_nodes().iter().enumerate() {
            let (x, y) = space.tri.coords()[node];
            coeffs.0[k] = (x + 2.0 * y) * (1.0 - x) * y; // arbitrary interior values
        }
        let nodal = space.tri.scatter(&coeffs);
        let h = space.tri.mesh_size();
        let grad = move |x: f64, y: f64| {
            let m = tri.nodes_per_side();
            let cx = ((x / h) as usize).min(m - 2);
            let cy = ((y / h) as usize).min(m - 2);
            let (x0, y0) = (cx as f64 * h, cy as f64 * h);
            let a = cy * m + cx;
            if x - x0 >= y - y0 {
                ((nodal[a + 1] - nodal[a]) / h, (nodal[a + m + 1] - nodal[a + 1]) / h)
            } else {
                ((nodal[a + m + 1] - nodal[a + m]) / h, (nodal[a + m] - nodal[a]) / h)
            }
        };
        let w = space.ritz_project(grad).unwrap();
        for (a, b) in w.as_slice().iter().zip(coeffs.as_slice()) {
            assert!((*a - *b).abs() < 1e-11, "{a} vs {b}");
        }

        let z = space.ritz_project(|_, _| (0.0, 0.0)).unwrap();
        assert!(linalg::norm2(z.as_slice()) < 1e-13);
    }

    #[test]
    fn ritz_projection_against_dense_oracle() {
        let space = FemSpace::new(5).unwrap();
        let grad = |x: f64, y: f64| {
            ((1.0 - 2.0 * x) * (y - y * y), (x - x * x) * (1.0 - 2.0 * y))
        };
        let got = space.ritz_project(grad).unwrap();
        let n = space.dofs();
        let mut stiff = DMatrix::zeros(n, n);
        let mut load = DVector::zeros(n);
        for t in space.tri.triangles() {
            let g = space.tri.geometry(t);
            for &(l1, l2, w) in &QUAD_6 {
                let l0 = 1.0 - l1 - l2;
                let x = l0 * g.verts[0].0 + l1 * g.verts[1].0 + l2 * g.verts[2].0;
                let y = l0 * g.verts[0].1 + l1 * g.verts[1].1 + l2 * g.verts[2].1;
                let (gx, gy) = grad(x, y);
                for li in 0..3 {
                    let Some(gi) = space.tri.interior_index(t[li]) else { continue };
                    load[gi] += w * g.area * (gx * g.b[li] + gy * g.c[li]) / (2.0 * g.area);
                    for lj in 0..3 {
                        if let Some(gj) = space.tri.interior_index(t[lj]) {
                            stiff[(gi, gj)] += w
                                * (g.b[li] * g.b[lj] + g.c[li] * g.c[lj])
                                / (4.0 * g.area);
                        }
                    }
                }
            }
        }
        let oracle: DVector<f64> = stiff.lu().solve(&load).unwrap();
        for (i, a) in got.as_slice().iter().enumerate() {
            let b = oracle[i];
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn l2_projection_is_contractive() {
        // ||f_h||_{L2} <= ||f||_{L2}
        let space = FemSpace::new(9).unwrap();
        for f in [
            (|x: f64, y: f64| (x - x * x) * (y - y * y)) as fn(f64, f64) -> f64,
            |x, _| (3.0 * std::f64::consts::PI * x).sin(),
            |x, y| x * y,
        ] {
            let fh = space.l2_project(f).unwrap();
            let (norm_fh, _) = space.norms(&fh);
            let norm_f = quad::integrate2d_unit_square(|x, y| f(x, y).powi(2), 1e-11).sqrt();
            assert!(norm_fh <= norm_f * (1.0 + 1e-10), "{norm_fh} vs {norm_f}");
        }
    }

    #[test]
    fn mass_plus_stiffness_solve_against_dense_oracle() {
        let space = FemSpace::new(5).unwrap();
        let system = space.mass.linear_combination(1.0, &space.stiffness, 1.0);
        // b = B 1 recovers the constant vector
        let ones = vec![1.0; space.dofs()];
        let b = system.matvec_owned(&ones);
        let x = solve_spd(&system, &b, SolverMode::Direct).unwrap();
        for v in &x {
            assert!((v - 1.0).abs() < 1e-12);
        }
        // b = M 1 against a dense solve of the 9x9 system
        let b = space.mass.matvec_owned(&ones);
        let x = solve_spd(&system, &b, SolverMode::Direct).unwrap();
        let dense = DMatrix::from_fn(space.dofs(), space.dofs(), |i, j| system.to_dense()[i][j]);
        let want: DVector<f64> =
            dense.lu().solve(&DVector::from_column_slice(&b)).unwrap();
        for (a, w) in x.iter().zip(want.iter()) {
            assert!((a - w).abs() < 1e-12);
        }
    }

    #[test]
    fn norms_of_unit_vectors() {
        let space = FemSpace::new(5).unwrap();
        let (l2, h1) = space.norms(&DofVector::zeros(space.dofs()));
        assert_eq!((l2, h1), (0.0, 0.0));
        let mut e3 = DofVector::zeros(space.dofs());
        e3.0[3] = 1.0;
        let (l2, h1) = space.norms(&e3);
        assert!((l2 - space.mass.diagonal()[3].sqrt()).abs() < 1e-14);
        assert!((h1 - space.stiffness.diagonal()[3].sqrt()).abs() < 1e-14);
    }

    #[test]
    fn interpolation_error_rates() {
        // L2 order 2, H1 order 1 for the benchmark profile
        let exact = |x: f64, y: f64| (x - x * x) * (y - y * y);
        let grad = |x: f64, y: f64| {
            ((1.0 - 2.0 * x) * (y - y * y), (x - x * x) * (1.0 - 2.0 * y))
        };
        let mut errs = Vec::new();
        for m in [3usize, 5, 9, 17] {
            let space = FemSpace::new(m).unwrap();
            let u = space.interpolate(exact);
            errs.push(space.error_norms(&u, exact, grad));
        }
        for k in 1..errs.len() {
            let rate_l2 = (errs[k - 1].0 / errs[k].0).log2();
            let rate_h1 = (errs[k - 1].1 / errs[k].1).log2();
            if k == errs.len() - 1 {
                assert!((rate_l2 - 2.0).abs() < 0.15, "L2 rate {rate_l2}");
                assert!((rate_h1 - 1.0).abs() < 0.15, "H1 rate {rate_h1}");
            }
            assert!(errs[k].0 < errs[k - 1].0 && errs[k].1 < errs[k - 1].1);
        }
    }

    #[test]
    fn export_writes_all_nodes() {
        let tri = Triangulation::unit_square(3).unwrap();
        let mut buf = Vec::new();
        export_field(&tri, &DofVector(vec![1.5]), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 9);
        assert!(text.contains("1.500000000000e0"));
    }
}

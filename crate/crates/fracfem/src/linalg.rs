//! Sparse symmetric matrices (CSR), an envelope Cholesky factorization, a
//! Jacobi-preconditioned conjugate gradient fallback, and the Sherman-Morrison
//! rank-one solve used by the first-level Newton iteration.

use crate::error::{Error, Result};

/// Symmetric sparse matrix in CSR layout; both triangles are stored so that
/// matrix-vector products need no transpose pass.
#[derive(Debug, Clone)]
pub struct SparseSymmetric {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymmetric {
    /// Build from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut entries: Vec<(usize, usize, f64)> = triplets.to_vec();
        entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut counts = vec![0usize; dim];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut prev: Option<(usize, usize)> = None;
        for &(i, j, v) in &entries {
            debug_assert!(i < dim && j < dim);
            if prev == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                counts[i] += 1;
                prev = Some((i, j));
            }
        }
        let mut row_ptr = vec![0usize; dim + 1];
        for i in 0..dim {
            row_ptr[i + 1] = row_ptr[i] + counts[i];
        }
        SparseSymmetric { dim, row_ptr, col_idx, values }
    }

    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        let dim = a.len();
        let mut triplets = Vec::new();
        for (i, row) in a.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(dim, &triplets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for i in 0..self.dim {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    pub fn matvec_owned(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.matvec(x, &mut y);
        y
    }

    /// x' A x
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            let mut row = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row += self.values[k] * x[self.col_idx[k]];
            }
            acc += x[i] * row;
        }
        acc
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[k] == i {
                    d[i] = self.values[k];
                }
            }
        }
        d
    }

    /// c*self + d*other, merging the two sparsity patterns.
    pub fn linear_combination(&self, c: f64, other: &SparseSymmetric, d: f64) -> SparseSymmetric {
        assert_eq!(self.dim, other.dim);
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                triplets.push((i, self.col_idx[k], c * self.values[k]));
            }
            for k in other.row_ptr[i]..other.row_ptr[i + 1] {
                triplets.push((i, other.col_idx[k], d * other.values[k]));
            }
        }
        SparseSymmetric::from_triplets(self.dim, &triplets)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.dim]; self.dim];
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                a[i][self.col_idx[k]] += self.values[k];
            }
        }
        a
    }
}

/// Envelope (profile) Cholesky. Rows keep everything between their first
/// nonzero column and the diagonal; for the structured grid matrices this is
/// a narrow band and natural ordering is already close to optimal.
#[derive(Debug, Clone)]
struct EnvelopeCholesky {
    first: Vec<usize>,
    row_start: Vec<usize>,
    offdiag: Vec<f64>,
    diag: Vec<f64>,
}

impl EnvelopeCholesky {
    fn factor(m: &SparseSymmetric) -> Result<Self> {
        let n = m.dim;
        let mut first = vec![0usize; n];
        for i in 0..n {
            let lo = m.row_ptr[i];
            let hi = m.row_ptr[i + 1];
            first[i] = if lo == hi {
                i
            } else {
                m.col_idx[lo..hi].iter().copied().filter(|&j| j <= i).min().unwrap_or(i)
            };
        }
        let mut row_start = vec![0usize; n + 1];
        for i in 0..n {
            row_start[i + 1] = row_start[i] + (i - first[i]);
        }
        let mut offdiag = vec![0.0; row_start[n]];
        let mut diag = vec![0.0; n];
        for i in 0..n {
            for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                let j = m.col_idx[k];
                if j < i {
                    offdiag[row_start[i] + (j - first[i])] += m.values[k];
                } else if j == i {
                    diag[i] += m.values[k];
                }
            }
        }
        for i in 0..n {
            for j in first[i]..i {
                let lo = first[i].max(first[j]);
                let mut sum = offdiag[row_start[i] + (j - first[i])];
                for k in lo..j {
                    sum -= offdiag[row_start[i] + (k - first[i])]
                        * offdiag[row_start[j] + (k - first[j])];
                }
                offdiag[row_start[i] + (j - first[i])] = sum / diag[j];
            }
            let mut d = diag[i];
            for k in first[i]..i {
                let l = offdiag[row_start[i] + (k - first[i])];
                d -= l * l;
            }
            if !(d > 0.0) {
                return Err(Error::NotSpd);
            }
            diag[i] = d.sqrt();
        }
        Ok(EnvelopeCholesky { first, row_start, offdiag, diag })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut x = b.to_vec();
        // forward: L y = b
        for i in 0..n {
            let mut acc = x[i];
            for k in self.first[i]..i {
                acc -= self.offdiag[self.row_start[i] + (k - self.first[i])] * x[k];
            }
            x[i] = acc / self.diag[i];
        }
        // backward: L' x = y, column sweep
        for i in (0..n).rev() {
            x[i] /= self.diag[i];
            let xi = x[i];
            for k in self.first[i]..i {
                x[k] -= self.offdiag[self.row_start[i] + (k - self.first[i])] * xi;
            }
        }
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    Direct,
    Iterative,
}

/// Factorization / preconditioner state for one SPD matrix; solves against it
/// may run concurrently since nothing is mutated.
pub struct SpdSolver<'a> {
    matrix: &'a SparseSymmetric,
    direct: Option<EnvelopeCholesky>,
    inv_diag: Option<Vec<f64>>,
}

const CG_RTOL: f64 = 1e-12;

impl<'a> SpdSolver<'a> {
    pub fn new(matrix: &'a SparseSymmetric, mode: SolverMode) -> Result<Self> {
        match mode {
            SolverMode::Direct => Ok(SpdSolver {
                matrix,
                direct: Some(EnvelopeCholesky::factor(matrix)?),
                inv_diag: None,
            }),
            SolverMode::Iterative => {
                let diag = matrix.diagonal();
                if diag.iter().any(|&d| !(d > 0.0)) {
                    return Err(Error::NotSpd);
                }
                Ok(SpdSolver {
                    matrix,
                    direct: None,
                    inv_diag: Some(diag.iter().map(|d| 1.0 / d).collect()),
                })
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.matrix.dim() {
            return Err(Error::DimensionMismatch { expected: self.matrix.dim(), got: b.len() });
        }
        if let Some(chol) = &self.direct {
            return Ok(chol.solve(b));
        }
        self.cg(b, self.inv_diag.as_ref().unwrap())
    }

    fn cg(&self, b: &[f64], inv_diag: &[f64]) -> Result<Vec<f64>> {
        let n = b.len();
        let bnorm = norm2(b);
        if bnorm == 0.0 {
            return Ok(vec![0.0; n]);
        }
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(ri, di)| ri * di).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        let max_iter = 10 * n;
        for it in 0..max_iter {
            self.matrix.matvec(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::NotSpd);
            }
            let alpha = rz / pap;
            axpy(alpha, &p, &mut x);
            axpy(-alpha, &ap, &mut r);
            if norm2(&r) <= CG_RTOL * bnorm {
                return Ok(x);
            }
            for ((zi, ri), di) in z.iter_mut().zip(&r).zip(inv_diag) {
                *zi = ri * di;
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for (pi, zi) in p.iter_mut().zip(&z) {
                *pi = zi + beta * *pi;
            }
            let _ = it;
        }
        Err(Error::NoConvergence { iterations: max_iter, residual: norm2(&r) / bnorm })
    }

    /// Solve (B + beta g g') x = b via Sherman-Morrison: two solves with B.
    pub fn solve_rank_one(&self, g: &[f64], beta: f64, b: &[f64]) -> Result<Vec<f64>> {
        let x_b = self.solve(b)?;
        if beta == 0.0 || g.iter().all(|&v| v == 0.0) {
            return Ok(x_b);
        }
        let x_g = self.solve(g)?;
        let denom = 1.0 + beta * dot(g, &x_g);
        if denom.abs() < 1e-14 {
            return Err(Error::SingularUpdate);
        }
        let scale = beta * dot(g, &x_b) / denom;
        let mut x = x_b;
        axpy(-scale, &x_g, &mut x);
        Ok(x)
    }
}

pub fn solve_spd(matrix: &SparseSymmetric, b: &[f64], mode: SolverMode) -> Result<Vec<f64>> {
    SpdSolver::new(matrix, mode)?.solve(b)
}

pub fn solve_rank_one(
    matrix: &SparseSymmetric,
    g: &[f64],
    beta: f64,
    b: &[f64],
    mode: SolverMode,
) -> Result<Vec<f64>> {
    SpdSolver::new(matrix, mode)?.solve_rank_one(g, beta, b)
}

// small slice kernels shared across the crate

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// y += alpha * x
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

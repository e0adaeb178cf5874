//! Compressed sparse row matrices and a Jacobi-preconditioned conjugate
//! gradient solver.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative residual target for [`solve_spd`].
pub const DEFAULT_TOL: f64 = 1e-10;

/// Rows per parallel chunk in [`SparseMatrix::spmv_into`].
const PAR_ROWS: usize = 4096;

/// Default iteration cap: `50 n`.
pub fn default_max_iter(n: usize) -> usize {
    50 * n.max(1)
}

/// Holds a matrix in compressed sparse row format.
///
/// Within each row the column indices are strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, validating the layout.
    pub fn from_csr(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let m = SparseMatrix {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
            symmetric: false,
        };
        m.validate()?;
        Ok(m)
    }

    /// Builds a matrix from `(row, col, value)` triplets; duplicates are
    /// summed in input order.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_rows];
        for &(i, j, v) in triplets {
            if i >= n_rows || j >= n_cols {
                return Err(Error::MalformedMatrix(format!(
                    "entry ({i}, {j}) outside {n_rows}x{n_cols}"
                )));
            }
            rows[i].push((j, v));
        }
        Ok(Self::from_unsorted_rows(n_cols, rows))
    }

    /// Sorts each row by column (stably) and merges duplicate columns.
    pub(crate) fn from_unsorted_rows(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n_rows = rows.len();
        let mut row_offsets = Vec::with_capacity(n_rows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            let start = col_indices.len();
            for (j, v) in row {
                if col_indices.len() > start && *col_indices.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        SparseMatrix {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
            symmetric: false,
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
            symmetric: true,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Whether the matrix was flagged symmetric at construction.
    pub fn is_flagged_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Flags the matrix as symmetric after checking every entry exactly.
    pub fn flag_symmetric(mut self) -> Result<Self> {
        if !self.is_exactly_symmetric() {
            return Err(Error::MalformedMatrix("matrix is not symmetric".into()));
        }
        self.symmetric = true;
        Ok(self)
    }

    pub(crate) fn assume_symmetric(mut self) -> Self {
        self.symmetric = true;
        self
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        match self.col_indices[range.clone()].binary_search(&j) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    /// Checks the CSR layout invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedMatrix(m));
        if self.row_offsets.len() != self.n_rows + 1 {
            return bad(format!(
                "row_offsets has length {}, expected {}",
                self.row_offsets.len(),
                self.n_rows + 1
            ));
        }
        if self.row_offsets[0] != 0 || *self.row_offsets.last().unwrap() != self.values.len() {
            return bad("row_offsets must start at 0 and end at nnz".into());
        }
        if self.col_indices.len() != self.values.len() {
            return bad("col_indices and values differ in length".into());
        }
        for i in 0..self.n_rows {
            let (a, b) = (self.row_offsets[i], self.row_offsets[i + 1]);
            if a > b {
                return bad(format!("row_offsets decreases at row {i}"));
            }
            let cols = &self.col_indices[a..b];
            if cols.iter().any(|&j| j >= self.n_cols) {
                return bad(format!("column index out of range in row {i}"));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("columns not strictly increasing in row {i}"));
            }
        }
        Ok(())
    }

    /// Entry-by-entry symmetry check (bitwise equality of `a_ij` and `a_ji`).
    pub fn is_exactly_symmetric(&self) -> bool {
        if self.n_rows != self.n_cols {
            return false;
        }
        (0..self.n_rows).all(|i| self.row(i).all(|(j, v)| self.get(j, i) == v))
    }

    /// Computes `y = A x`.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n_rows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    /// Computes `y = A x` into a caller buffer. Each row is summed
    /// sequentially, so the result does not depend on the thread count.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                got: x.len(),
            });
        }
        if y.len() != self.n_rows {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows,
                got: y.len(),
            });
        }
        let row_dot = |i: usize| -> f64 {
            let mut s = 0.0;
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                s += self.values[k] * x[self.col_indices[k]];
            }
            s
        };
        if self.n_rows >= 2 * PAR_ROWS {
            y.par_chunks_mut(PAR_ROWS).enumerate().for_each(|(chunk, ys)| {
                let base = chunk * PAR_ROWS;
                for (off, yi) in ys.iter_mut().enumerate() {
                    *yi = row_dot(base + off);
                }
            });
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = row_dot(i);
            }
        }
        Ok(())
    }

    /// Returns `self + alpha * other` on the union sparsity pattern.
    pub fn add_scaled(&self, alpha: f64, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows,
                got: other.n_rows,
            });
        }
        let mut row_offsets = Vec::with_capacity(self.n_rows + 1);
        let mut col_indices = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(self.nnz().max(other.nnz()));
        row_offsets.push(0);
        for i in 0..self.n_rows {
            let mut a = self.row(i).peekable();
            let mut b = other.row(i).peekable();
            loop {
                match (a.peek().copied(), b.peek().copied()) {
                    (Some((ja, va)), Some((jb, vb))) if ja == jb => {
                        col_indices.push(ja);
                        values.push(va + alpha * vb);
                        a.next();
                        b.next();
                    }
                    (Some((ja, va)), Some((jb, _))) if ja < jb => {
                        col_indices.push(ja);
                        values.push(va);
                        a.next();
                    }
                    (Some((ja, va)), None) => {
                        col_indices.push(ja);
                        values.push(va);
                        a.next();
                    }
                    (_, Some((jb, vb))) => {
                        col_indices.push(jb);
                        values.push(alpha * vb);
                        b.next();
                    }
                    (None, None) => break,
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(SparseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_offsets,
            col_indices,
            values,
            symmetric: self.symmetric && other.symmetric,
        })
    }

    /// Dense copy, row-major. Intended for tests on small matrices.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }
}

/// Outcome of an iterative solve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// `||b - A x|| / ||b||`, recomputed from the returned iterate.
    pub final_residual: f64,
    pub converged: bool,
    /// Relative gap between the recurrence residual and the recomputed one at exit.
    pub residual_gap: f64,
    /// `eps ||(|A| |x|)|| / ||b||`: the residual that rounding `x` to double
    /// precision alone can produce.
    pub residual_floor: f64,
}

impl SolveStats {
    /// Whether the iterate is converged or within a small factor of the
    /// precision floor.
    pub fn at_precision_limit(&self) -> bool {
        self.converged || self.final_residual <= FLOOR_FACTOR * self.residual_floor
    }
}

/// Residuals within this multiple of the floor count as attained.
pub const FLOOR_FACTOR: f64 = 4.0;

const MAX_RESTARTS: usize = 8;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `b − A x` together with the rounding floor `eps ||(|A| |x|)||`.
fn true_residual(a: &SparseMatrix, b: &[f64], x: &[f64]) -> (Vec<f64>, f64) {
    let mut floor = 0.0;
    let r = (0..a.n_rows())
        .map(|i| {
            let (mut s, mut m) = (0.0, 0.0);
            for (j, v) in a.row(i) {
                s += v * x[j];
                m += (v * x[j]).abs();
            }
            floor += m * m;
            b[i] - s
        })
        .collect();
    (r, f64::EPSILON * floor.sqrt())
}

/// Solves `A x = b` for symmetric positive definite `A` by conjugate
/// gradients with a Jacobi preconditioner.
///
/// Non-convergence is not an error: the best iterate comes back with
/// `converged = false`. When the recurrence residual reaches `tol` but the
/// true residual does not, the residual is recomputed and the iteration
/// restarted from the current iterate.
pub fn solve_spd(a: &SparseMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, SolveStats)> {
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.n_cols(),
        });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveStats {
                iterations: 0,
                final_residual: 0.0,
                converged: true,
                residual_gap: 0.0,
                residual_floor: 0.0,
            },
        ));
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut iterations = 0;
    let mut restarts = 0;
    let mut best: Option<(Vec<f64>, SolveStats)> = None;

    loop {
        let rec = norm(&r) / bnorm;
        let breakdown = iterations > 0 && !(rz > 0.0);
        if rec <= tol || iterations >= max_iter || breakdown {
            let (true_r, floor) = true_residual(a, b, &x);
            let true_res = norm(&true_r) / bnorm;
            let stats = SolveStats {
                iterations,
                final_residual: true_res,
                converged: true_res <= tol,
                residual_gap: (true_res - rec).abs(),
                residual_floor: floor / bnorm,
            };
            let prev = best.as_ref().map_or(f64::INFINITY, |(_, s)| s.final_residual);
            if true_res < prev {
                best = Some((x.clone(), stats));
            }
            let done = stats.converged
                || true_res > 0.5 * prev
                || breakdown
                || iterations >= max_iter
                || restarts >= MAX_RESTARTS;
            if done {
                let (bx, mut bs) = best.unwrap();
                bs.iterations = iterations;
                return Ok((bx, bs));
            }
            restarts += 1;
            r = true_r;
            z = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
        }

        a.spmv_into(&p, &mut ap)?;
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            // A is not positive definite along p; report what we have
            rz = 0.0;
            iterations = iterations.max(1);
            continue;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        iterations += 1;
    }
}

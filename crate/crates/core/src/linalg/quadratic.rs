//! Quadratic operators `H : C^n x C^n -> C^q`, stored as `n` slices.
//!
//! `H (x (x) y) = sum_k x_k S_k y`, which matches the column layout of the
//! `q x n^2` matrix form: column `k*n + l` of that matrix is column `l` of `S_k`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{MorError, Result};
use crate::linalg::CMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadEntry {
    pub slice: usize,
    pub row: usize,
    pub col: usize,
    pub value: C64,
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Sparse(Vec<QuadEntry>),
    /// `q x n^2` matrix form
    Dense(CMatrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticOperator {
    rows: usize,
    dim: usize,
    repr: Repr,
}

impl QuadraticOperator {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        QuadraticOperator {
            rows,
            dim,
            repr: Repr::Sparse(Vec::new()),
        }
    }

    /// Build from `(slice, row, col, value)` entries; duplicates are summed.
    pub fn from_entries(
        rows: usize,
        dim: usize,
        entries: impl IntoIterator<Item = QuadEntry>,
    ) -> Result<Self> {
        let mut e: Vec<QuadEntry> = entries.into_iter().collect();
        for q in &e {
            if q.slice >= dim || q.col >= dim || q.row >= rows {
                return Err(MorError::dims(
                    "quadratic operator entry",
                    format!("slice,col < {dim}, row < {rows}"),
                    format!("({},{},{})", q.slice, q.row, q.col),
                ));
            }
        }
        e.sort_by_key(|q| (q.slice, q.row, q.col));
        let mut merged: Vec<QuadEntry> = Vec::with_capacity(e.len());
        for q in e {
            match merged.last_mut() {
                Some(last) if (last.slice, last.row, last.col) == (q.slice, q.row, q.col) => {
                    last.value += q.value
                }
                _ => merged.push(q),
            }
        }
        merged.retain(|q| q.value != C64::new(0.0, 0.0));
        Ok(QuadraticOperator {
            rows,
            dim,
            repr: Repr::Sparse(merged),
        })
    }

    /// From the `q x n^2` matrix form.
    pub fn from_matrix(h: CMatrix) -> Result<Self> {
        let rows = h.nrows();
        let dim = (h.ncols() as f64).sqrt().round() as usize;
        if dim * dim != h.ncols() {
            return Err(MorError::dims(
                "quadratic operator",
                "n^2 columns",
                h.ncols(),
            ));
        }
        Ok(QuadraticOperator {
            rows,
            dim,
            repr: Repr::Dense(h),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.repr, Repr::Dense(_))
    }

    /// True when the operator has no stored entries.
    pub fn is_empty(&self) -> bool {
        match &self.repr {
            Repr::Sparse(e) => e.is_empty(),
            Repr::Dense(h) => h.ncols() == 0 || h.nrows() == 0,
        }
    }

    pub fn nnz(&self) -> usize {
        match &self.repr {
            Repr::Sparse(e) => e.len(),
            Repr::Dense(h) => h.iter().filter(|v| v.norm_sqr() > 0.0).count(),
        }
    }

    pub fn entries(&self) -> Vec<QuadEntry> {
        match &self.repr {
            Repr::Sparse(e) => e.clone(),
            Repr::Dense(h) => {
                let n = self.dim;
                let mut out = Vec::new();
                for c in 0..h.ncols() {
                    for r in 0..h.nrows() {
                        let v = h[(r, c)];
                        if v.norm_sqr() > 0.0 {
                            out.push(QuadEntry {
                                slice: c / n,
                                row: r,
                                col: c % n,
                                value: v,
                            });
                        }
                    }
                }
                out
            }
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        match &self.repr {
            Repr::Dense(h) => h.clone(),
            Repr::Sparse(e) => {
                let mut h = CMatrix::zeros(self.rows, self.dim * self.dim);
                for q in e {
                    h[(q.row, q.slice * self.dim + q.col)] += q.value;
                }
                h
            }
        }
    }

    pub fn scale(&self, a: C64) -> Self {
        let repr = match &self.repr {
            Repr::Dense(h) => Repr::Dense(h * a),
            Repr::Sparse(e) => Repr::Sparse(
                e.iter()
                    .map(|q| QuadEntry {
                        value: q.value * a,
                        ..*q
                    })
                    .collect(),
            ),
        };
        QuadraticOperator { repr, ..*self }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.dim != other.dim {
            return Err(MorError::dims(
                "quadratic operator sum",
                format!("{}x{}", self.rows, self.dim),
                format!("{}x{}", other.rows, other.dim),
            ));
        }
        match (&self.repr, &other.repr) {
            (Repr::Sparse(a), Repr::Sparse(b)) => {
                QuadraticOperator::from_entries(self.rows, self.dim, a.iter().chain(b).copied())
            }
            _ => QuadraticOperator::from_matrix(self.to_matrix() + other.to_matrix()),
        }
    }

    fn check_in(&self, x: usize, what: &str) -> Result<()> {
        if x != self.dim {
            return Err(MorError::dims(what, self.dim, x));
        }
        Ok(())
    }

    /// `H (x (x) y)` for vectors.
    pub fn apply(&self, x: &[C64], y: &[C64]) -> Result<Vec<C64>> {
        self.check_in(x.len(), "quadratic apply (x)")?;
        self.check_in(y.len(), "quadratic apply (y)")?;
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        match &self.repr {
            Repr::Sparse(e) => {
                for q in e {
                    out[q.row] += q.value * x[q.slice] * y[q.col];
                }
            }
            Repr::Dense(h) => {
                let n = self.dim;
                for k in 0..n {
                    if x[k] == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for l in 0..n {
                        let a = x[k] * y[l];
                        if a == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let col = h.column(k * n + l);
                        for (o, v) in out.iter_mut().zip(col.iter()) {
                            *o += v * a;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// `H (X (x) Y)`; column `a*cols(Y) + b` pairs column `a` of X with column `b` of Y.
    pub fn apply_kron(&self, x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
        self.check_in(x.nrows(), "quadratic apply_kron (X)")?;
        self.check_in(y.nrows(), "quadratic apply_kron (Y)")?;
        let (ca, cb) = (x.ncols(), y.ncols());
        let mut out = CMatrix::zeros(self.rows, ca * cb);
        match &self.repr {
            Repr::Sparse(e) => {
                for q in e {
                    for a in 0..ca {
                        let xa = q.value * x[(q.slice, a)];
                        if xa == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for b in 0..cb {
                            out[(q.row, a * cb + b)] += xa * y[(q.col, b)];
                        }
                    }
                }
            }
            Repr::Dense(_) => {
                for b in 0..cb {
                    let m = self.right_apply_vec(y.column(b).as_slice());
                    let part = &m * x;
                    for a in 0..ca {
                        out.set_column(a * cb + b, &part.column(a));
                    }
                }
            }
        }
        Ok(out)
    }

    /// The `q x n` matrix `x -> H (x (x) y)` for fixed `y`.
    pub fn right_apply_vec(&self, y: &[C64]) -> CMatrix {
        let n = self.dim;
        let mut m = CMatrix::zeros(self.rows, n);
        match &self.repr {
            Repr::Sparse(e) => {
                for q in e {
                    m[(q.row, q.slice)] += q.value * y[q.col];
                }
            }
            Repr::Dense(h) => {
                let yv = nalgebra::DVector::from_column_slice(y);
                for k in 0..n {
                    let s = h.columns(k * n, n);
                    m.set_column(k, &(s * &yv));
                }
            }
        }
        m
    }

    /// The `q x n` matrix `y -> H (x (x) y)` for fixed `x`.
    pub fn left_apply_vec(&self, x: &[C64]) -> CMatrix {
        let n = self.dim;
        let mut m = CMatrix::zeros(self.rows, n);
        match &self.repr {
            Repr::Sparse(e) => {
                for q in e {
                    m[(q.row, q.col)] += q.value * x[q.slice];
                }
            }
            Repr::Dense(h) => {
                for k in 0..n {
                    if x[k] != C64::new(0.0, 0.0) {
                        m += h.columns(k * n, n) * x[k];
                    }
                }
            }
        }
        m
    }

    /// Jacobian of `x -> H (x (x) x)`.
    pub fn jacobian(&self, x: &[C64]) -> CMatrix {
        self.right_apply_vec(x) + self.left_apply_vec(x)
    }

    /// `W^H H (V (x) V)`, always returned in dense form.
    pub fn compress(&self, w: &CMatrix, v: &CMatrix) -> Result<Self> {
        if w.nrows() != self.rows {
            return Err(MorError::dims("compress (W rows)", self.rows, w.nrows()));
        }
        self.check_in(v.nrows(), "compress (V rows)")?;
        let rv = v.ncols();
        let rw = w.ncols();
        if let Repr::Dense(h) = &self.repr {
            let n = self.dim;
            let hw = w.adjoint() * h;
            let mut out = CMatrix::zeros(rw, rv * rv);
            for k in 0..n {
                let t = hw.columns(k * n, n) * v;
                for kk in 0..rv {
                    let s = v[(k, kk)];
                    if s != C64::new(0.0, 0.0) {
                        let mut block = out.columns_mut(kk * rv, rv);
                        block += &t * s;
                    }
                }
            }
            return QuadraticOperator::from_matrix(out);
        }
        // rows of H that carry entries
        let entries = self.entries();
        let mut row_ids: Vec<usize> = entries.iter().map(|q| q.row).collect();
        row_ids.sort_unstable();
        row_ids.dedup();
        let mut pos = vec![usize::MAX; self.rows];
        for (p, &r) in row_ids.iter().enumerate() {
            pos[r] = p;
        }
        // A[row, k'*rv + l'] = sum v V[k,k'] V[l,l']
        let mut a = CMatrix::zeros(row_ids.len(), rv * rv);
        for q in &entries {
            let p = pos[q.row];
            for kk in 0..rv {
                let s = q.value * v[(q.slice, kk)];
                if s == C64::new(0.0, 0.0) {
                    continue;
                }
                for ll in 0..rv {
                    a[(p, kk * rv + ll)] += s * v[(q.col, ll)];
                }
            }
        }
        let wsub = CMatrix::from_fn(row_ids.len(), rw, |p, j| w[(row_ids[p], j)]);
        let h = wsub.adjoint() * a;
        QuadraticOperator::from_matrix(h)
    }
}

/// Kronecker product of two matrices.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    DMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

//! Banded LU factorization with partial pivoting.
//!
//! Storage follows the LAPACK general band layout: an `n`-column array with
//! `2*kl + ku + 1` rows, where the top `kl` rows hold fill-in created by row
//! interchanges. Dense matrices are handled as the special case
//! `kl = ku = n - 1`.

use nalgebra::{ComplexField, DMatrix};

use crate::error::{MorError, Result};

/// Scalars the factorization works over (`f64` and `Complex64`).
pub trait Scalar: ComplexField<RealField = f64> + Copy {}
impl<T: ComplexField<RealField = f64> + Copy> Scalar for T {}

/// Pivots below this multiple of the largest matrix entry count as zero.
pub const SINGULAR_RTOL: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct BandMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<T>,
}

impl<T: Scalar> BandMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            ldab,
            ab: vec![T::zero(); ldab * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ldab + self.kl + self.ku + i - j
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i + self.ku >= j && j + self.kl >= i
    }

    /// Add `v` to entry `(i, j)`; the entry must lie inside the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(self.in_band(i, j), "({i},{j}) outside band");
        let k = self.idx(i, j);
        self.ab[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if self.in_band(i, j) {
            self.ab[self.idx(i, j)]
        } else {
            T::zero()
        }
    }

    pub fn clear(&mut self) {
        self.ab.iter_mut().for_each(|x| *x = T::zero());
    }

    pub fn from_dense(a: &DMatrix<T>) -> Self {
        let n = a.nrows();
        let (mut kl, mut ku) = (0, 0);
        for j in 0..n {
            for i in 0..n {
                if a[(i, j)] != T::zero() {
                    if i > j {
                        kl = kl.max(i - j);
                    } else {
                        ku = ku.max(j - i);
                    }
                }
            }
        }
        let mut b = Self::zeros(n, kl, ku);
        for j in 0..n {
            for i in j.saturating_sub(ku)..(j + kl + 1).min(n) {
                b.add(i, j, a[(i, j)]);
            }
        }
        b
    }

    fn max_abs(&self) -> f64 {
        self.ab.iter().fold(0.0, |m, x| m.max(x.modulus()))
    }

    /// Factor in place. Fails if a pivot falls below `SINGULAR_RTOL * max|a_ij|`.
    pub fn factor(mut self) -> Result<BandLu<T>> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let kv = kl + ku;
        let thresh = SINGULAR_RTOL * self.max_abs();
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let base = j * self.ldab + kv;
            let mut p = 0;
            let mut best = -1.0;
            for i in 0..=km {
                let v = self.ab[base + i].modulus();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > thresh) {
                return Err(MorError::SingularMatrix {
                    column: j,
                    pivot: best.max(0.0),
                    argument: None,
                });
            }
            ipiv[j] = j + p;
            ju = ju.max((j + ku + p).min(n - 1));
            if p != 0 {
                for c in j..=ju {
                    let a = self.idx(j, c);
                    let b = self.idx(j + p, c);
                    self.ab.swap(a, b);
                }
            }
            let inv = T::one() / self.ab[base];
            for i in 1..=km {
                self.ab[base + i] *= inv;
            }
            for c in (j + 1)..=ju {
                let ujc = self.ab[self.idx(j, c)];
                if ujc == T::zero() {
                    continue;
                }
                let cb = self.idx(j, c);
                for i in 1..=km {
                    let l = self.ab[base + i];
                    self.ab[cb + i] -= l * ujc;
                }
            }
        }
        Ok(BandLu { m: self, ipiv })
    }
}

/// Result of [`BandMatrix::factor`].
#[derive(Clone, Debug)]
pub struct BandLu<T> {
    m: BandMatrix<T>,
    ipiv: Vec<usize>,
}

impl<T: Scalar> BandLu<T> {
    pub fn n(&self) -> usize {
        self.m.n
    }

    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let a = &self.m;
        let n = a.n;
        let kv = a.kl + a.ku;
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            if bj == T::zero() {
                continue;
            }
            let km = a.kl.min(n - 1 - j);
            let base = j * a.ldab + kv;
            for i in 1..=km {
                b[j + i] -= a.ab[base + i] * bj;
            }
        }
        for j in (0..n).rev() {
            let base = j * a.ldab + kv;
            b[j] /= a.ab[base];
            let bj = b[j];
            if bj == T::zero() {
                continue;
            }
            let lm = j.min(kv);
            for i in 1..=lm {
                b[j - i] -= a.ab[base - i] * bj;
            }
        }
    }

    /// Solve `A^H x = b` in place.
    pub fn solve_adjoint_in_place(&self, b: &mut [T]) {
        let a = &self.m;
        let n = a.n;
        let kv = a.kl + a.ku;
        for j in 0..n {
            let base = j * a.ldab + kv;
            let lm = j.min(kv);
            let mut acc = b[j];
            for i in 1..=lm {
                acc -= a.ab[base - i].conjugate() * b[j - i];
            }
            b[j] = acc / a.ab[base].conjugate();
        }
        for j in (0..n).rev() {
            let km = a.kl.min(n - 1 - j);
            let base = j * a.ldab + kv;
            let mut acc = b[j];
            for i in 1..=km {
                acc -= a.ab[base + i].conjugate() * b[j + i];
            }
            b[j] = acc;
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
        }
    }

    pub fn solve(&self, b: &DMatrix<T>) -> DMatrix<T> {
        let mut x = b.clone();
        for mut col in x.column_iter_mut() {
            self.solve_in_place(col.as_mut_slice());
        }
        x
    }

    pub fn solve_adjoint(&self, b: &DMatrix<T>) -> DMatrix<T> {
        let mut x = b.clone();
        for mut col in x.column_iter_mut() {
            self.solve_adjoint_in_place(col.as_mut_slice());
        }
        x
    }
}

/// LU factorization of a square matrix, optionally under a symmetric
/// reordering `P A P^T` chosen to shrink the bandwidth.
#[derive(Clone, Debug)]
pub struct LuFactors<T> {
    lu: BandLu<T>,
    /// `perm[new] = old`
    perm: Option<Vec<usize>>,
}

impl<T: Scalar> LuFactors<T> {
    pub fn new(lu: BandLu<T>, perm: Option<Vec<usize>>) -> Self {
        LuFactors { lu, perm }
    }

    pub fn n(&self) -> usize {
        self.lu.n()
    }

    fn apply(&self, b: &DMatrix<T>, adjoint: bool) -> Result<DMatrix<T>> {
        let n = self.n();
        if b.nrows() != n {
            return Err(MorError::dims("lu solve", n, b.nrows()));
        }
        let mut x = b.clone();
        let mut work = vec![T::zero(); n];
        for mut col in x.column_iter_mut() {
            let c = col.as_mut_slice();
            match &self.perm {
                Some(p) => {
                    for (w, &old) in work.iter_mut().zip(p) {
                        *w = c[old];
                    }
                    if adjoint {
                        self.lu.solve_adjoint_in_place(&mut work);
                    } else {
                        self.lu.solve_in_place(&mut work);
                    }
                    for (w, &old) in work.iter().zip(p) {
                        c[old] = *w;
                    }
                }
                None => {
                    if adjoint {
                        self.lu.solve_adjoint_in_place(c);
                    } else {
                        self.lu.solve_in_place(c);
                    }
                }
            }
        }
        Ok(x)
    }

    pub fn solve(&self, b: &DMatrix<T>) -> Result<DMatrix<T>> {
        self.apply(b, false)
    }

    pub fn solve_adjoint(&self, b: &DMatrix<T>) -> Result<DMatrix<T>> {
        self.apply(b, true)
    }
}

/// Factor a dense square matrix. Bandwidth is detected from the nonzero pattern.
pub fn lu_factor<T: Scalar>(a: &DMatrix<T>) -> Result<LuFactors<T>> {
    if a.nrows() != a.ncols() {
        return Err(MorError::dims(
            "lu_factor",
            "square matrix",
            format!("{}x{}", a.nrows(), a.ncols()),
        ));
    }
    if a.nrows() == 0 {
        return Err(MorError::InvalidInput("empty matrix".into()));
    }
    Ok(LuFactors::new(BandMatrix::from_dense(a).factor()?, None))
}

pub fn lu_solve<T: Scalar>(f: &LuFactors<T>, b: &DMatrix<T>) -> Result<DMatrix<T>> {
    f.solve(b)
}

pub fn lu_solve_adjoint<T: Scalar>(f: &LuFactors<T>, b: &DMatrix<T>) -> Result<DMatrix<T>> {
    f.solve_adjoint(b)
}

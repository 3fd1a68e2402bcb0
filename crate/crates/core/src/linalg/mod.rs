pub mod lu;
pub mod ordering;
pub mod quadratic;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{MorError, Result};

pub use lu::{lu_factor, lu_solve, lu_solve_adjoint, BandLu, BandMatrix, LuFactors, Scalar};
pub use quadratic::{kron, QuadEntry, QuadraticOperator};

pub type CMatrix = DMatrix<C64>;
pub type RMatrix = DMatrix<f64>;

pub const DEFAULT_RANK_TOL: f64 = 1e-10;

pub fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Horizontal concatenation; all blocks must share a row count.
pub fn hcat(blocks: &[CMatrix]) -> Result<CMatrix> {
    let Some(first) = blocks.first() else {
        return Ok(CMatrix::zeros(0, 0));
    };
    let rows = first.nrows();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        if b.nrows() != rows {
            return Err(MorError::dims("hcat", rows, b.nrows()));
        }
        out.columns_mut(c, b.ncols()).copy_from(b);
        c += b.ncols();
    }
    Ok(out)
}

/// `[Re X, Im X]`: a real basis spanning the same space as `X` and `conj(X)`.
pub fn realify(x: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(x.nrows(), 2 * x.ncols());
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            out[(i, j)] = C64::new(x[(i, j)].re, 0.0);
            out[(i, x.ncols() + j)] = C64::new(x[(i, j)].im, 0.0);
        }
    }
    out
}

fn col_norm(x: &CMatrix, j: usize) -> f64 {
    x.column(j).norm()
}

/// Gram-Schmidt with reorthogonalization. A column is dropped when what
/// remains after projection is below `rank_tol` times its original norm.
pub fn orthonormalize(x: &CMatrix, rank_tol: f64) -> CMatrix {
    orthonormalize_against(&CMatrix::zeros(x.nrows(), 0), x, rank_tol)
}

/// Like [`orthonormalize`] but keeps the orthonormal columns of `q0` first.
pub fn orthonormalize_against(q0: &CMatrix, x: &CMatrix, rank_tol: f64) -> CMatrix {
    let n = x.nrows();
    let mut q: Vec<nalgebra::DVector<C64>> = q0.column_iter().map(|c| c.into_owned()).collect();
    for j in 0..x.ncols() {
        let nrm = col_norm(x, j);
        if !(nrm > 0.0) || !nrm.is_finite() {
            continue;
        }
        let mut v = x.column(j) / C64::new(nrm, 0.0);
        for _ in 0..2 {
            for qi in &q {
                let h = qi.dotc(&v);
                v.axpy(-h, qi, C64::new(1.0, 0.0));
            }
        }
        let r = v.norm();
        if r > rank_tol {
            q.push(v / C64::new(r, 0.0));
        }
    }
    let mut out = CMatrix::zeros(n, q.len());
    for (j, c) in q.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Column-pivoted QR on the raw columns: the column with the largest
/// residual is taken next, so large-magnitude samples are preferred. Stops
/// after `r` columns or once every residual is below `rank_tol` times the
/// largest input column norm.
pub fn pivoted_compress(x: &CMatrix, r: usize, rank_tol: f64) -> CMatrix {
    let n = x.nrows();
    let mut res: Vec<nalgebra::DVector<C64>> = (0..x.ncols())
        .filter(|&j| col_norm(x, j).is_finite())
        .map(|j| x.column(j).into_owned())
        .collect();
    let scale = res.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let cutoff = rank_tol * scale;
    let mut q: Vec<nalgebra::DVector<C64>> = Vec::new();
    while q.len() < r && !res.is_empty() {
        let (best, bn) = res
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.norm()))
            .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        if bn <= cutoff || bn == 0.0 {
            break;
        }
        let mut v = res.swap_remove(best);
        for _ in 0..2 {
            for qi in &q {
                let h = qi.dotc(&v);
                v.axpy(-h, qi, C64::new(1.0, 0.0));
            }
        }
        let vn = v.norm();
        if vn <= cutoff || vn == 0.0 {
            continue;
        }
        v /= C64::new(vn, 0.0);
        for rv in res.iter_mut() {
            let h = v.dotc(rv);
            rv.axpy(-h, &v, C64::new(1.0, 0.0));
        }
        q.push(v);
    }
    let mut out = CMatrix::zeros(n, q.len());
    for (j, c) in q.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Leading `r` left singular vectors. Fails if the numerical rank is below `r`.
pub fn truncated_svd_basis(x: &CMatrix, r: usize) -> Result<CMatrix> {
    let (u, s) = left_singular(x)?;
    let rank = numerical_rank(&s, x.nrows().max(x.ncols()));
    if rank < r {
        return Err(MorError::RankTooSmall { rank, requested: r });
    }
    Ok(u.columns(0, r).into_owned())
}

/// Real counterpart of [`truncated_svd_basis`].
pub fn truncated_svd_basis_real(x: &RMatrix, r: usize) -> Result<RMatrix> {
    if x.ncols() == 0 || x.nrows() == 0 {
        return Err(MorError::RankTooSmall {
            rank: 0,
            requested: r,
        });
    }
    // thin SVD works on the smaller Gram side when the matrix is very wide
    let svd = x.clone().svd(true, false);
    let u = svd
        .u
        .ok_or_else(|| MorError::InvalidInput("svd failed".into()))?;
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let s: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let rank = numerical_rank(&s, x.nrows().max(x.ncols()));
    if rank < r {
        return Err(MorError::RankTooSmall { rank, requested: r });
    }
    Ok(RMatrix::from_fn(x.nrows(), r, |i, j| u[(i, idx[j])]))
}

fn numerical_rank(s: &[f64], dim: usize) -> usize {
    let Some(&s0) = s.first() else { return 0 };
    if !(s0 > 0.0) {
        return 0;
    }
    let tol = dim as f64 * f64::EPSILON * s0;
    s.iter().filter(|&&v| v > tol).count()
}

/// Left singular vectors and singular values, sorted descending.
pub fn left_singular(x: &CMatrix) -> Result<(CMatrix, Vec<f64>)> {
    if x.ncols() == 0 || x.nrows() == 0 {
        return Ok((CMatrix::zeros(x.nrows(), 0), Vec::new()));
    }
    let svd = x.clone().svd(true, false);
    let u = svd
        .u
        .ok_or_else(|| MorError::InvalidInput("svd failed".into()))?;
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let s = idx.iter().map(|&i| svd.singular_values[i]).collect();
    Ok((
        CMatrix::from_fn(x.nrows(), idx.len(), |i, j| u[(i, idx[j])]),
        s,
    ))
}

/// Largest singular value.
pub fn spectral_norm(x: &CMatrix) -> f64 {
    if x.nrows() == 0 || x.ncols() == 0 {
        return 0.0;
    }
    // the Gram matrix on the short side keeps the eigenproblem tiny
    let g = if x.nrows() <= x.ncols() {
        x * x.adjoint()
    } else {
        x.adjoint() * x
    };
    if g.nrows() == 1 {
        return g[(0, 0)].re.max(0.0).sqrt();
    }
    let ev = g.symmetric_eigenvalues();
    ev.iter().fold(0.0f64, |m, v| m.max(*v)).max(0.0).sqrt()
}

pub fn to_complex(x: &RMatrix) -> CMatrix {
    x.map(|v| C64::new(v, 0.0))
}

/// Real part, failing if the imaginary part is not negligible.
pub fn to_real(x: &CMatrix, what: &str) -> Result<RMatrix> {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let im = x.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
    if im > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(MorError::Unsupported(format!(
            "{what} has imaginary entries (max |Im| = {im:.2e}); real-valued coefficients are required for time integration"
        )));
    }
    Ok(x.map(|v| v.re))
}

/// `k` logarithmically equidistant points in `[lo, hi]`, endpoints included.
/// A single point sits at the geometric midpoint.
pub fn logspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![(lo * hi).sqrt()],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..k)
                .map(|i| {
                    if i == k - 1 {
                        hi
                    } else if i == 0 {
                        lo
                    } else {
                        10f64.powf(a + (b - a) * i as f64 / (k - 1) as f64)
                    }
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormalize_drops_dependent_columns() {
        let x = CMatrix::from_fn(5, 3, |i, j| match j {
            0 => C64::new(i as f64, 1.0),
            1 => C64::new(2.0 * i as f64, 2.0),
            _ => C64::new(1.0, i as f64 * i as f64),
        });
        let q = orthonormalize(&x, DEFAULT_RANK_TOL);
        assert_eq!(q.ncols(), 2);
        let g = q.adjoint() * &q;
        assert!((g - CMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn logspace_endpoints() {
        let w = logspace(1e-3, 1e3, 7);
        assert_eq!(w[0], 1e-3);
        assert_eq!(w[6], 1e3);
        assert!((w[3] - 1.0).abs() < 1e-12);
        assert!((logspace(1e-2, 1e2, 1)[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_matches_svd() {
        let x = CMatrix::from_fn(2, 4, |i, j| C64::new((i + j) as f64, i as f64 - j as f64));
        let s = x.clone().svd(false, false).singular_values.max();
        assert!((spectral_norm(&x) - s).abs() < 1e-12 * s);
    }
}

//! Frequency-response sweeps along the imaginary axis.
//!
//! Level-1 responses are cached per frequency and reused by the level-2 grid,
//! which is where almost all of the time goes.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::Result;
use crate::linalg::{spectral_norm, CMatrix};
use crate::system::{Resolvent, StructuredQbSystem};

/// `G1(i w)` at each frequency; `None` where `K(i w)` is singular.
#[derive(Clone, Debug)]
pub struct Level1Sweep {
    pub omegas: Vec<f64>,
    pub values: Vec<Option<CMatrix>>,
}

impl Level1Sweep {
    pub fn norms(&self) -> Vec<Option<f64>> {
        self.values
            .iter()
            .map(|v| v.as_ref().map(spectral_norm))
            .collect()
    }
}

/// `G2(i w1, i w2)` on a tensor grid, stored flat.
#[derive(Clone, Debug)]
pub struct Level2Sweep {
    pub omegas1: Vec<f64>,
    pub omegas2: Vec<f64>,
    pub p: usize,
    pub cols: usize,
    data: Vec<C64>,
    valid: Vec<bool>,
}

impl Level2Sweep {
    fn offset(&self, i: usize, j: usize) -> usize {
        i * self.omegas2.len() + j
    }

    pub fn get(&self, i: usize, j: usize) -> Option<CMatrix> {
        let k = self.offset(i, j);
        if !self.valid[k] {
            return None;
        }
        let sz = self.p * self.cols;
        Some(CMatrix::from_column_slice(
            self.p,
            self.cols,
            &self.data[k * sz..(k + 1) * sz],
        ))
    }

    pub fn norm(&self, i: usize, j: usize) -> Option<f64> {
        self.get(i, j).map(|g| spectral_norm(&g))
    }
}

pub fn sweep_level1_values(sys: &StructuredQbSystem, omegas: &[f64]) -> Level1Sweep {
    let res = Resolvent::new(&sys.k);
    let values = omegas
        .par_iter()
        .map(|&w| {
            let s = C64::new(0.0, w);
            let lu = res.factor(s).ok()?;
            let psi = lu.solve(&sys.b.eval(s)).ok()?;
            Some(sys.c.apply(s, &psi))
        })
        .collect();
    Level1Sweep {
        omegas: omegas.to_vec(),
        values,
    }
}

/// `(w, ||G1(i w)||_2)` pairs; singular frequencies carry `None`.
pub fn sweep_level1(sys: &StructuredQbSystem, omegas: &[f64]) -> Vec<(f64, Option<f64>)> {
    let s = sweep_level1_values(sys, omegas);
    omegas.iter().copied().zip(s.norms()).collect()
}

struct PointData {
    psi: CMatrix,
    napp: CMatrix,
    /// per quadratic term, per input column b: `x -> H_t (x (x) psi[:, b])`
    right: Vec<Vec<CMatrix>>,
}

const PRECOMPUTE_BUDGET: usize = 20_000_000;

fn point_data(
    sys: &StructuredQbSystem,
    res: &Resolvent,
    w: f64,
    precompute: bool,
) -> Option<PointData> {
    let s = C64::new(0.0, w);
    let psi = res.factor(s).ok()?.solve(&sys.b.eval(s)).ok()?;
    let napp = sys.apply_n(s, &psi);
    let right = if precompute {
        sys.h
            .terms
            .iter()
            .map(|t| {
                (0..psi.ncols())
                    .map(|b| t.op.right_apply_vec(psi.column(b).as_slice()))
                    .collect()
            })
            .collect()
    } else {
        Vec::new()
    };
    Some(PointData { psi, napp, right })
}

fn quad_part(
    sys: &StructuredQbSystem,
    s1: C64,
    s2: C64,
    a: &PointData,
    b: &PointData,
    precompute: bool,
    out: &mut CMatrix,
) -> Result<()> {
    // H(s1, s2) (psi_a (x) psi_b)
    if !precompute {
        *out += sys.apply_h(s1, s2, &a.psi, &b.psi)?;
        return Ok(());
    }
    let m2 = b.psi.ncols();
    for (t, term) in sys.h.terms.iter().enumerate() {
        let coef = term.first.eval(s1) * term.second.eval(s2);
        if coef.norm_sqr() == 0.0 || term.op.is_empty() {
            continue;
        }
        for (bi, r) in b.right[t].iter().enumerate() {
            let part = r * &a.psi;
            for ai in 0..a.psi.ncols() {
                let mut col = out.column_mut(ai * m2 + bi);
                col.axpy(coef, &part.column(ai), C64::new(1.0, 0.0));
            }
        }
    }
    Ok(())
}

pub fn sweep_level2_values(
    sys: &StructuredQbSystem,
    omegas1: &[f64],
    omegas2: &[f64],
) -> Level2Sweep {
    let res = Resolvent::new(&sys.k);
    let same = omegas1 == omegas2;
    let distinct = if same {
        omegas1.len()
    } else {
        omegas1.len() + omegas2.len()
    };
    let dense_h = sys
        .h
        .terms
        .iter()
        .all(|t| t.op.is_dense() || t.op.is_empty());
    let precompute =
        dense_h && sys.n * sys.n * sys.m * sys.h.terms.len() * distinct <= PRECOMPUTE_BUDGET;

    let pd1: Vec<Option<PointData>> = omegas1
        .par_iter()
        .map(|&w| point_data(sys, &res, w, precompute))
        .collect();
    let pd2: Vec<Option<PointData>> = if same {
        Vec::new()
    } else {
        omegas2
            .par_iter()
            .map(|&w| point_data(sys, &res, w, precompute))
            .collect()
    };
    let pd2_ref = if same { &pd1 } else { &pd2 };
    let (p, m) = (sys.p, sys.m);
    let cols = m * m;
    let sz = p * cols;
    let n2 = omegas2.len();

    let rows: Vec<(Vec<C64>, Vec<bool>)> = (0..omegas1.len())
        .into_par_iter()
        .map(|i| {
            let mut data = vec![C64::new(0.0, 0.0); n2 * sz];
            let mut valid = vec![false; n2];
            let Some(a) = &pd1[i] else {
                return (data, valid);
            };
            let s1 = C64::new(0.0, omegas1[i]);
            let j0 = if same { i } else { 0 };
            for j in j0..n2 {
                let Some(b) = &pd2_ref[j] else { continue };
                let s2 = C64::new(0.0, omegas2[j]);
                let mut rhs = &a.napp + &b.napp;
                if quad_part(sys, s1, s2, a, b, precompute, &mut rhs).is_err()
                    || quad_part(sys, s2, s1, b, a, precompute, &mut rhs).is_err()
                {
                    continue;
                }
                let s = s1 + s2;
                let Ok(lu) = res.factor(s) else { continue };
                let Ok(x) = lu.solve(&rhs) else { continue };
                let g = sys.c.apply(s, &x) * C64::new(0.5, 0.0);
                data[j * sz..(j + 1) * sz].copy_from_slice(g.as_slice());
                valid[j] = true;
            }
            (data, valid)
        })
        .collect();

    let mut data = vec![C64::new(0.0, 0.0); omegas1.len() * n2 * sz];
    let mut valid = vec![false; omegas1.len() * n2];
    for (i, (d, v)) in rows.into_iter().enumerate() {
        data[i * n2 * sz..(i + 1) * n2 * sz].copy_from_slice(&d);
        valid[i * n2..(i + 1) * n2].copy_from_slice(&v);
    }
    if same {
        // G2 is symmetric in its arguments
        for i in 0..omegas1.len() {
            for j in 0..i {
                let (src, dst) = (j * n2 + i, i * n2 + j);
                valid[dst] = valid[src];
                let tmp: Vec<C64> = data[src * sz..(src + 1) * sz].to_vec();
                data[dst * sz..(dst + 1) * sz].copy_from_slice(&tmp);
            }
        }
    }
    Level2Sweep {
        omegas1: omegas1.to_vec(),
        omegas2: omegas2.to_vec(),
        p,
        cols,
        data,
        valid,
    }
}

/// Spectral norms of `G2` over the grid, row-major in `omegas1`.
pub fn sweep_level2(
    sys: &StructuredQbSystem,
    omegas1: &[f64],
    omegas2: &[f64],
) -> Vec<Vec<Option<f64>>> {
    let s = sweep_level2_values(sys, omegas1, omegas2);
    (0..omegas1.len())
        .map(|i| (0..omegas2.len()).map(|j| s.norm(i, j)).collect())
        .collect()
}

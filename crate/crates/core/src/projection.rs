//! Structure-preserving Petrov-Galerkin projection.
//!
//! Every coefficient matrix is projected termwise, so the reduced model keeps
//! the frequency functions (and with them the physical form) of the original.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{MorError, Result};
use crate::interpolation::{InterpolationCondition, InterpolationPointSet, ReductionBasis};
use crate::linalg::{orthonormalize, orthonormalize_against, CMatrix, DEFAULT_RANK_TOL};
use crate::system::{BivariateMatrixFunction, MatrixFunction, StructuredQbSystem};
use crate::tf::{TfEvaluator, Work};

/// Relative error below which a guaranteed condition counts as satisfied.
pub const CONDITION_RTOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: InterpolationCondition,
    pub rel_error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct ReducedModel {
    pub system: StructuredQbSystem,
    pub v: CMatrix,
    pub w: CMatrix,
    pub method_tag: String,
    pub parent_id: String,
    pub points_used: InterpolationPointSet,
    pub guaranteed: Vec<InterpolationCondition>,
    pub checks: Vec<ConditionCheck>,
    pub work: Work,
}

impl ReducedModel {
    pub fn order(&self) -> usize {
        self.system.n
    }

    pub fn all_checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Stable fingerprint of a system's coefficients.
pub fn system_id(sys: &StructuredQbSystem) -> String {
    let mut h = DefaultHasher::new();
    (sys.n, sys.m, sys.p).hash(&mut h);
    // `+ 0.0` folds -0 into +0, which files do not preserve
    let bits = |v: &C64| ((v.re + 0.0).to_bits(), (v.im + 0.0).to_bits());
    let mut feed = |m: &CMatrix| {
        m.shape().hash(&mut h);
        for v in m.iter() {
            bits(v).hash(&mut h);
        }
    };
    for f in [&sys.c, &sys.k, &sys.b]
        .into_iter()
        .chain(sys.n_blocks.iter())
    {
        for t in &f.terms {
            feed(&t.matrix);
        }
    }
    for t in &sys.h.terms {
        let mut entries = t.op.entries();
        entries.sort_by_key(|e| (e.slice, e.row, e.col));
        for e in entries {
            (e.slice, e.row, e.col, bits(&e.value)).hash(&mut h);
        }
    }
    format!("{:016x}", h.finish())
}

fn check_rank(x: &CMatrix, which: &'static str) -> Result<()> {
    let rank = orthonormalize(x, DEFAULT_RANK_TOL).ncols();
    if rank < x.ncols() {
        return Err(MorError::RankDeficientBasis {
            which,
            rank,
            cols: x.ncols(),
        });
    }
    Ok(())
}

/// `C(s) V`, `W^H K(s) V`, `W^H B(s)`, `W^H N(s) (I (x) V)`, `W^H H(s1, s2) (V (x) V)`.
pub fn project_matrices(
    sys: &StructuredQbSystem,
    v: &CMatrix,
    w: &CMatrix,
) -> Result<StructuredQbSystem> {
    if v.nrows() != sys.n || w.nrows() != sys.n {
        return Err(MorError::dims(
            "projection basis rows",
            sys.n,
            format!("{} / {}", v.nrows(), w.nrows()),
        ));
    }
    if v.ncols() != w.ncols() {
        return Err(MorError::dims(
            "projection basis columns",
            v.ncols(),
            w.ncols(),
        ));
    }
    check_rank(v, "V")?;
    check_rank(w, "W")?;
    let r = v.ncols();
    let wh = w.adjoint();
    let c = sys.c.map_terms(sys.p, r, |m| m * v);
    let k = sys.k.map_terms(r, r, |m| &wh * (m * v));
    let b = sys.b.map_terms(r, sys.m, |m| &wh * m);
    let n_blocks: Vec<MatrixFunction> = sys
        .n_blocks
        .iter()
        .map(|nb| nb.map_terms(r, r, |m| &wh * (m * v)))
        .collect();
    let mut h = BivariateMatrixFunction::new(r, r);
    for t in &sys.h.terms {
        h.push(t.first.clone(), t.second.clone(), t.op.compress(w, v)?)?;
    }
    StructuredQbSystem::new(c, k, b, n_blocks, h, sys.structure)
}

fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = (a - b).norm();
    let s = a.norm();
    if s > 0.0 {
        d / s
    } else {
        d
    }
}

/// Evaluate each condition on both models.
pub fn verify_conditions(
    full: &StructuredQbSystem,
    reduced: &StructuredQbSystem,
    conditions: &[InterpolationCondition],
) -> Vec<ConditionCheck> {
    let ef = TfEvaluator::new(full);
    let er = TfEvaluator::new(reduced);
    conditions
        .iter()
        .map(|c| {
            let err = match (ef.eval(c.kind, &c.points), er.eval(c.kind, &c.points)) {
                (Ok(g), Ok(gr)) => rel_diff(&g, &gr),
                _ => f64::INFINITY,
            };
            ConditionCheck {
                condition: c.clone(),
                rel_error: err,
                passed: err <= CONDITION_RTOL,
            }
        })
        .collect()
}

/// Project `sys` onto `basis` and re-verify the conditions the basis claims.
pub fn project(sys: &StructuredQbSystem, basis: &ReductionBasis) -> Result<ReducedModel> {
    let system = project_matrices(sys, &basis.v, &basis.w)?;
    let checks = verify_conditions(sys, &system, &basis.guaranteed);
    Ok(ReducedModel {
        system,
        v: basis.v.clone(),
        w: basis.w.clone(),
        method_tag: basis.method_tag.clone(),
        parent_id: system_id(sys),
        points_used: basis.points_used.clone(),
        guaranteed: basis.guaranteed.clone(),
        checks,
        work: basis.work,
    })
}

fn split_rows(x: &CMatrix, split: usize) -> CMatrix {
    let n = x.nrows();
    let top = orthonormalize(&x.rows(0, split).into_owned(), DEFAULT_RANK_TOL);
    let bot = orthonormalize(&x.rows(split, n - split).into_owned(), DEFAULT_RANK_TOL);
    let mut out = CMatrix::zeros(n, top.ncols() + bot.ncols());
    out.view_mut((0, 0), (split, top.ncols())).copy_from(&top);
    out.view_mut((split, top.ncols()), (n - split, bot.ncols()))
        .copy_from(&bot);
    out
}

fn pad_to(q: CMatrix, cols: usize, source: &CMatrix) -> CMatrix {
    if q.ncols() >= cols {
        return q;
    }
    let mut out = orthonormalize_against(&q, source, DEFAULT_RANK_TOL);
    let mut e = 0;
    while out.ncols() < cols && e < q.nrows() {
        let mut unit = CMatrix::zeros(q.nrows(), 1);
        unit[(e, 0)] = C64::new(1.0, 0.0);
        out = orthonormalize_against(&out, &unit, DEFAULT_RANK_TOL);
        e += 1;
    }
    out.columns(0, cols).into_owned()
}

/// Block-diagonalize both bases along rows `[0, split)` and `[split, n)`.
/// Spans only grow, so all interpolation conditions are kept; the order at
/// most doubles.
pub fn split_congruence(basis: &ReductionBasis, split: usize) -> Result<ReductionBasis> {
    let n = basis.v.nrows();
    if split == 0 || split >= n {
        return Err(MorError::InvalidInput(format!(
            "split index {split} must lie in 1..{n}"
        )));
    }
    let one_sided = basis.v == basis.w;
    let v = split_rows(&basis.v, split);
    let w = if one_sided {
        v.clone()
    } else {
        split_rows(&basis.w, split)
    };
    let cols = v.ncols().max(w.ncols());
    let v2 = pad_to(v.clone(), cols, &w);
    let w2 = if one_sided {
        v2.clone()
    } else {
        pad_to(w, cols, &v)
    };
    Ok(ReductionBasis {
        v: v2,
        w: w2,
        method_tag: basis.method_tag.clone(),
        points_used: basis.points_used.clone(),
        guaranteed: basis.guaranteed.clone(),
        work: basis.work,
    })
}

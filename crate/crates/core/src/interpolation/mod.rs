//! Projection bases that enforce interpolation of symmetric or generalized
//! transfer functions at chosen frequency points.

mod strategy;

pub use strategy::{
    method_tag, strategy_avg, strategy_equi, Compression, Method, Sidedness, StrategyOptions,
};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{hcat, CMatrix};
use crate::tf::{TfEvaluator, TfKind, Work};

/// A transfer function that a reduced model is expected to match at `points`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationCondition {
    pub kind: TfKind,
    pub points: Vec<C64>,
}

impl InterpolationCondition {
    pub fn new(kind: TfKind, points: Vec<C64>) -> Self {
        InterpolationCondition { kind, points }
    }

    pub fn label(&self) -> String {
        let pts: Vec<String> = self
            .points
            .iter()
            .map(|s| format!("{}{:+}i", s.re, s.im))
            .collect();
        format!("{}({})", self.kind.label(), pts.join(", "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosurePolicy {
    AsGiven,
    /// points stand for themselves and their complex conjugates; bases are real
    ConjugateClosed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationPointSet {
    pub points: Vec<C64>,
    pub closure: ClosurePolicy,
}

/// Output of a basis construction. `v` and `w` have orthonormal columns.
#[derive(Clone, Debug)]
pub struct ReductionBasis {
    pub v: CMatrix,
    pub w: CMatrix,
    pub method_tag: String,
    pub points_used: InterpolationPointSet,
    pub guaranteed: Vec<InterpolationCondition>,
    pub work: Work,
}

impl ReductionBasis {
    /// One-sided (Galerkin) basis with `W = V`.
    pub fn galerkin(v: CMatrix, method_tag: impl Into<String>) -> Self {
        ReductionBasis {
            w: v.clone(),
            v,
            method_tag: method_tag.into(),
            points_used: InterpolationPointSet {
                points: Vec::new(),
                closure: ClosurePolicy::AsGiven,
            },
            guaranteed: Vec::new(),
            work: Work::default(),
        }
    }

    pub fn order(&self) -> usize {
        self.v.ncols()
    }
}

/// `[V11, V12, V2]`: matches `G1(s1)`, `G1(s2)` and `G2(s1, s2)` under any `W`.
pub fn sym_one_sided_blocks(ev: &TfEvaluator, s1: C64, s2: C64) -> Result<CMatrix> {
    let v11 = ev.psi1(s1)?;
    let v2 = ev.psi2(s1, s2)?;
    if s1 == s2 {
        return hcat(&[v11, v2]);
    }
    let v12 = ev.psi1(s2)?;
    hcat(&[v11, v12, v2])
}

/// `V = [V11, V12]`, `W = K(s1 + s2)^-H C(s1 + s2)^H`: matches `G1(s1)`,
/// `G1(s2)`, `G1(s1 + s2)` and `G2(s1, s2)`.
pub fn sym_two_sided_blocks(ev: &TfEvaluator, s1: C64, s2: C64) -> Result<(CMatrix, CMatrix)> {
    let v = if s1 == s2 {
        ev.psi1(s1)?
    } else {
        hcat(&[ev.psi1(s1)?, ev.psi1(s2)?])?
    };
    Ok((v, ev.dual_state(s1 + s2)?))
}

/// `[V1, V2, V3]` built at the single point `s` for the level-3 conditions
/// `G1(s)`, `G2(s, s)`, `G3(s, s, s)`.
pub fn sym_level3_blocks(ev: &TfEvaluator, s: C64) -> Result<CMatrix> {
    let sys = ev.system();
    let v1 = ev.psi1(s)?;
    let mut r2 = sys.apply_h(s, s, &v1, &v1)?;
    r2 += sys.apply_n(s, &v1);
    let v2 = ev.solve(s + s, &r2)?;
    let mut r3 = sys.apply_h(s + s, s, &v2, &v1)?;
    r3 += sys.apply_h(s, s + s, &v1, &v2)?;
    r3 += sys.apply_n(s + s, &v2);
    let v3 = ev.solve(s + s + s, &r3)?;
    hcat(&[v1, v2, v3])
}

/// `V = V1(s)`, `W = K(2s)^-H C(2s)^H`: matches `G1(s)`, `G1(2s)`, `G2(s, s)`.
pub fn sym_two_sided_level2(ev: &TfEvaluator, s: C64) -> Result<(CMatrix, CMatrix)> {
    Ok((ev.psi1(s)?, ev.dual_state(s + s)?))
}

/// `V = [V1, V2](s)`, `W = K(3s)^-H C(3s)^H`: matches `G1(s)`, `G1(3s)`,
/// `G2(s, s)`, `G3(s, s, s)`.
pub fn sym_two_sided_level3(ev: &TfEvaluator, s: C64) -> Result<(CMatrix, CMatrix)> {
    let sys = ev.system();
    let v1 = ev.psi1(s)?;
    let mut r2 = sys.apply_h(s, s, &v1, &v1)?;
    r2 += sys.apply_n(s, &v1);
    let v2 = ev.solve(s + s, &r2)?;
    Ok((hcat(&[v1, v2])?, ev.dual_state(s + s + s)?))
}

/// `[V11, V12, V2, V31, V32]` for the generalized transfer functions
/// `B(s1)`, `B(s2)`, `NB(s1, s2)`, `NNB(s1, s2, s3)`, `HBB(s1, s2, s3)`.
/// Without `include_nnb`, `V31` and the `NNB` condition are dropped.
pub fn gen_one_sided_blocks(
    ev: &TfEvaluator,
    s1: C64,
    s2: C64,
    s3: C64,
    include_nnb: bool,
) -> Result<CMatrix> {
    let sys = ev.system();
    let v11 = ev.psi1(s1)?;
    let v12 = ev.psi1(s2)?;
    let v2 = ev.solve(s2, &sys.apply_n(s1, &v11))?;
    let v32 = ev.solve(s3, &sys.apply_h(s2, s1, &v12, &v11)?)?;
    if !include_nnb {
        return hcat(&[v11, v12, v2, v32]);
    }
    let v31 = ev.solve(s3, &sys.apply_n(s2, &v2))?;
    hcat(&[v11, v12, v2, v31, v32])
}

/// `V = K(s1)^-1 B(s1)`, `W = K(s2)^-H C(s2)^H`: matches `B(s1)`, `B(s2)`,
/// `NB(s1, s2)` and `HBB(s1, s1, s2)`.
pub fn gen_two_sided_blocks(ev: &TfEvaluator, s1: C64, s2: C64) -> Result<(CMatrix, CMatrix)> {
    Ok((ev.psi1(s1)?, ev.dual_state(s2)?))
}

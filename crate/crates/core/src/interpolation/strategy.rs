//! Point-selection strategies on the imaginary axis.
//!
//! `equi` places the smallest number of log-equidistant points whose blocks
//! reach the target order and keeps exact interpolation guarantees. `avg`
//! oversamples the frequency range and compresses the collected blocks,
//! trading guarantees for a better average fit.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{ClosurePolicy, InterpolationCondition, InterpolationPointSet, ReductionBasis};
use crate::error::{MorError, Result};
use crate::linalg::{
    hcat, logspace, orthonormalize_against, pivoted_compress, realify, truncated_svd_basis,
    CMatrix, DEFAULT_RANK_TOL,
};
use crate::system::StructuredQbSystem;
use crate::tf::{TfEvaluator, TfKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// symmetric transfer functions
    SymInt,
    /// generalized transfer functions
    GenInt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    /// `W = V`
    OneSided,
    TwoSided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compression {
    PivotedQr,
    Svd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyOptions {
    /// frequency range `[w_min, w_max]` on the imaginary axis
    pub range: (f64, f64),
    pub rank_tol: f64,
    /// number of sample frequencies for `avg`
    pub oversample: usize,
    pub compression: Compression,
}

impl Default for StrategyOptions {
    fn default() -> Self {
        StrategyOptions {
            range: (1e-3, 1e3),
            rank_tol: DEFAULT_RANK_TOL,
            oversample: 10,
            compression: Compression::PivotedQr,
        }
    }
}

pub fn method_tag(method: Method, side: Sidedness, strategy: &str) -> String {
    let m = match method {
        Method::SymInt => "SymInt",
        Method::GenInt => "GenInt",
    };
    let s = match side {
        Sidedness::OneSided => "V",
        Sidedness::TwoSided => "VW",
    };
    format!("{m}({s},{strategy})")
}

fn check_range(opts: &StrategyOptions) -> Result<()> {
    let (lo, hi) = opts.range;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(MorError::InvalidInput(format!(
            "frequency range [{lo}, {hi}] must satisfy 0 < lo <= hi"
        )));
    }
    Ok(())
}

/// Complex columns contributed to V by one point (index `idx` in the point list).
fn v_block(
    ev: &TfEvaluator,
    method: Method,
    side: Sidedness,
    s: C64,
    idx: usize,
) -> Result<CMatrix> {
    match (method, side) {
        (Method::SymInt, Sidedness::OneSided) => hcat(&[ev.psi1(s)?, ev.psi2(s, s)?]),
        (Method::SymInt, Sidedness::TwoSided) => ev.psi1(s),
        (Method::GenInt, _) => {
            let kind = if idx.is_multiple_of(2) {
                TfKind::GenNB
            } else {
                TfKind::GenHBB
            };
            let pt: Vec<C64> = vec![s; kind.arity()];
            hcat(&[ev.psi1(s)?, ev.gen_state(kind, &pt)?])
        }
    }
}

/// Columns contributed to W by one point.
fn w_block(ev: &TfEvaluator, method: Method, s: C64) -> Result<CMatrix> {
    match method {
        Method::SymInt => ev.dual_state(s + s),
        Method::GenInt => ev.dual_state(s),
    }
}

fn v_width(sys: &StructuredQbSystem, method: Method, side: Sidedness) -> usize {
    match (method, side) {
        (Method::SymInt, Sidedness::TwoSided) => sys.m,
        _ => sys.m + sys.m * sys.m,
    }
}

fn jw(w: f64) -> C64 {
    C64::new(0.0, w)
}

/// Accumulates real-ified blocks, recording the cumulative rank after each.
struct Accumulator {
    q: CMatrix,
    ranks: Vec<usize>,
    tol: f64,
}

impl Accumulator {
    fn new(n: usize, tol: f64) -> Self {
        Accumulator {
            q: CMatrix::zeros(n, 0),
            ranks: Vec::new(),
            tol,
        }
    }

    fn push(&mut self, block: &CMatrix) {
        let real = realify(block);
        self.q = orthonormalize_against(&self.q, &real, self.tol);
        self.ranks.push(self.q.ncols());
    }

    fn rank(&self) -> usize {
        self.q.ncols()
    }

    /// Block `i` lies entirely in the first `r` columns.
    fn intact(&self, i: usize, r: usize) -> bool {
        self.ranks[i] <= r
    }

    /// Number of blocks that contribute at least one of the first `r` columns.
    fn used(&self, r: usize) -> usize {
        let mut prev = 0;
        for (i, &k) in self.ranks.iter().enumerate() {
            if prev >= r {
                return i;
            }
            prev = k;
        }
        self.ranks.len()
    }

    fn truncated(&self, r: usize) -> CMatrix {
        self.q.columns(0, r.min(self.q.ncols())).into_owned()
    }
}

/// Candidate extra frequencies not in `taken`, ordered from the center of
/// the range outwards.
fn extra_points(range: (f64, f64), taken: &[f64], level: usize) -> Vec<f64> {
    let base = taken.len().max(2);
    let k = (base - 1) * (1 << level) + 1;
    let center = 0.5 * (range.0.log10() + range.1.log10());
    let mut c: Vec<f64> = logspace(range.0, range.1, k)
        .into_iter()
        .filter(|w| taken.iter().all(|t| (t / w - 1.0).abs() > 1e-9))
        .collect();
    c.sort_by(|a, b| {
        (a.log10() - center)
            .abs()
            .total_cmp(&(b.log10() - center).abs())
    });
    c
}

const MAX_POINTS_FACTOR: usize = 4;

/// Exact-interpolation basis at the fewest log-equidistant points reaching order `r`.
pub fn strategy_equi(
    sys: &StructuredQbSystem,
    method: Method,
    side: Sidedness,
    r: usize,
    opts: &StrategyOptions,
) -> Result<ReductionBasis> {
    check_range(opts)?;
    if r == 0 || r > sys.n {
        return Err(MorError::TargetOrderUnreachable {
            requested: r,
            reason: format!("order must lie in 1..={}", sys.n),
        });
    }
    let width = 2 * v_width(sys, method, side);
    if width > r {
        return Err(MorError::TargetOrderUnreachable {
            requested: r,
            reason: format!(
                "a single interpolation point already contributes {width} real columns"
            ),
        });
    }
    let max_points = MAX_POINTS_FACTOR * r + 8;
    let mut k = r.div_ceil(width);
    let (ev, omegas, acc) = loop {
        let ev = TfEvaluator::new(sys);
        let omegas = logspace(opts.range.0, opts.range.1, k);
        let mut acc = Accumulator::new(sys.n, opts.rank_tol);
        for (i, &w) in omegas.iter().enumerate() {
            acc.push(&v_block(&ev, method, side, jw(w), i)?);
            if acc.rank() >= r {
                break;
            }
        }
        if acc.rank() >= r {
            break (ev, omegas, acc);
        }
        k += 1;
        if k > max_points {
            return Err(MorError::TargetOrderUnreachable {
                requested: r,
                reason: format!("interpolation blocks span only {} dimensions", acc.rank()),
            });
        }
    };
    let used_v = acc.used(r);
    let v = acc.truncated(r);
    let v_pts: Vec<f64> = omegas[..used_v].to_vec();

    let mut guaranteed = Vec::new();
    let mut points: Vec<C64> = v_pts.iter().map(|&w| jw(w)).collect();
    let w = match side {
        Sidedness::OneSided => {
            for (i, &wv) in v_pts.iter().enumerate() {
                if !acc.intact(i, r) {
                    continue;
                }
                let s = jw(wv);
                match method {
                    Method::SymInt => {
                        guaranteed.push(InterpolationCondition::new(TfKind::Sym(1), vec![s]));
                        guaranteed.push(InterpolationCondition::new(TfKind::Sym(2), vec![s, s]));
                    }
                    Method::GenInt => {
                        guaranteed.push(InterpolationCondition::new(TfKind::GenB, vec![s]));
                        if i % 2 == 0 {
                            guaranteed.push(InterpolationCondition::new(TfKind::GenNB, vec![s, s]));
                        } else {
                            guaranteed
                                .push(InterpolationCondition::new(TfKind::GenHBB, vec![s, s, s]));
                        }
                    }
                }
            }
            v.clone()
        }
        Sidedness::TwoSided => {
            let mut wacc = Accumulator::new(sys.n, opts.rank_tol);
            let mut w_pts: Vec<f64> = Vec::new();
            for &wv in &v_pts {
                if wacc.rank() >= r {
                    break;
                }
                wacc.push(&w_block(&ev, method, jw(wv))?);
                w_pts.push(wv);
            }
            let mut level = 0;
            while wacc.rank() < r {
                let mut taken = v_pts.clone();
                taken.extend(&w_pts[v_pts.len().min(w_pts.len())..]);
                taken.sort_by(f64::total_cmp);
                for cand in extra_points(opts.range, &taken, level) {
                    if wacc.rank() >= r {
                        break;
                    }
                    if w_pts.iter().any(|t| (t / cand - 1.0).abs() <= 1e-9) {
                        continue;
                    }
                    wacc.push(&w_block(&ev, method, jw(cand))?);
                    w_pts.push(cand);
                }
                level += 1;
                if w_pts.len() > max_points {
                    return Err(MorError::TargetOrderUnreachable {
                        requested: r,
                        reason: format!("left blocks span only {} dimensions", wacc.rank()),
                    });
                }
            }
            let w_used = wacc.used(r);
            for (i, &wv) in v_pts.iter().enumerate() {
                let s = jw(wv);
                let v_ok = acc.intact(i, r);
                let w_ok = i < w_used && wacc.intact(i, r);
                match method {
                    Method::SymInt => {
                        if v_ok {
                            guaranteed.push(InterpolationCondition::new(TfKind::Sym(1), vec![s]));
                        }
                        if w_ok {
                            guaranteed
                                .push(InterpolationCondition::new(TfKind::Sym(1), vec![s + s]));
                        }
                        if v_ok && w_ok {
                            guaranteed
                                .push(InterpolationCondition::new(TfKind::Sym(2), vec![s, s]));
                        }
                    }
                    Method::GenInt => {
                        if v_ok {
                            guaranteed.push(InterpolationCondition::new(TfKind::GenB, vec![s]));
                            if i % 2 == 0 {
                                guaranteed
                                    .push(InterpolationCondition::new(TfKind::GenNB, vec![s, s]));
                            } else {
                                guaranteed.push(InterpolationCondition::new(
                                    TfKind::GenHBB,
                                    vec![s, s, s],
                                ));
                            }
                        }
                        if v_ok && w_ok {
                            if i % 2 == 0 {
                                guaranteed.push(InterpolationCondition::new(
                                    TfKind::GenHBB,
                                    vec![s, s, s],
                                ));
                            } else {
                                guaranteed
                                    .push(InterpolationCondition::new(TfKind::GenNB, vec![s, s]));
                            }
                        } else if w_ok {
                            guaranteed.push(InterpolationCondition::new(TfKind::GenB, vec![s]));
                        }
                    }
                }
            }
            for (i, &wv) in w_pts.iter().enumerate().take(w_used).skip(v_pts.len()) {
                if !wacc.intact(i, r) {
                    continue;
                }
                let s = jw(wv);
                points.push(s);
                let cond = match method {
                    Method::SymInt => InterpolationCondition::new(TfKind::Sym(1), vec![s + s]),
                    Method::GenInt => InterpolationCondition::new(TfKind::GenB, vec![s]),
                };
                guaranteed.push(cond);
            }
            wacc.truncated(r)
        }
    };
    Ok(ReductionBasis {
        v,
        w,
        method_tag: method_tag(method, side, "equi"),
        points_used: InterpolationPointSet {
            points,
            closure: ClosurePolicy::ConjugateClosed,
        },
        guaranteed,
        work: ev.work(),
    })
}

fn compress(x: &CMatrix, r: usize, opts: &StrategyOptions) -> Result<CMatrix> {
    match opts.compression {
        Compression::PivotedQr => {
            let q = pivoted_compress(x, r, opts.rank_tol);
            if q.ncols() < r {
                return Err(MorError::RankTooSmall {
                    rank: q.ncols(),
                    requested: r,
                });
            }
            Ok(q)
        }
        Compression::Svd => truncated_svd_basis(x, r),
    }
}

/// Oversampled basis compressed to order `r`; no interpolation guarantees.
pub fn strategy_avg(
    sys: &StructuredQbSystem,
    method: Method,
    side: Sidedness,
    r: usize,
    opts: &StrategyOptions,
) -> Result<ReductionBasis> {
    check_range(opts)?;
    if r == 0 || r > sys.n {
        return Err(MorError::TargetOrderUnreachable {
            requested: r,
            reason: format!("order must lie in 1..={}", sys.n),
        });
    }
    let ev = TfEvaluator::new(sys);
    let mut k = opts.oversample.max(1);
    let cap = MAX_POINTS_FACTOR * k.max(r);
    // `oversample` is a minimum: nearly dependent samples are refined until
    // the compressed basis reaches order r
    let (omegas, v) = loop {
        let omegas = logspace(opts.range.0, opts.range.1, k);
        let mut blocks = Vec::new();
        for &w in &omegas {
            let s = jw(w);
            let b = match (method, side) {
                (Method::SymInt, Sidedness::OneSided) => hcat(&[ev.psi1(s)?, ev.psi2(s, s)?])?,
                (Method::SymInt, Sidedness::TwoSided) => ev.psi1(s)?,
                (Method::GenInt, _) => hcat(&[
                    ev.psi1(s)?,
                    ev.gen_state(TfKind::GenNB, &[s, s])?,
                    ev.gen_state(TfKind::GenHBB, &[s, s, s])?,
                ])?,
            };
            blocks.push(realify(&b));
        }
        match compress(&hcat(&blocks)?, r, opts) {
            Ok(v) => break (omegas, v),
            Err(MorError::RankTooSmall { .. }) if k < cap => k = (2 * k).min(cap),
            Err(e) => return Err(e),
        }
    };
    let mut points: Vec<C64> = omegas.iter().map(|&w| jw(w)).collect();
    let w = match side {
        Sidedness::OneSided => v.clone(),
        Sidedness::TwoSided => {
            // spend about as much solver work on W as on V
            let per_point = 1 + sys.p;
            let mut kw = ev
                .work()
                .total()
                .div_ceil(per_point)
                .max(k)
                .max(r.div_ceil(2 * sys.p));
            let cap = MAX_POINTS_FACTOR * kw;
            // nearly dependent samples: refine until the left basis reaches order r
            loop {
                let w_omegas = logspace(opts.range.0, opts.range.1, kw);
                let mut wb = Vec::new();
                for &w in &w_omegas {
                    wb.push(realify(&w_block(&ev, method, jw(w))?));
                }
                match compress(&hcat(&wb)?, r, opts) {
                    Ok(w) => {
                        points.extend(w_omegas.iter().map(|&w| jw(w)));
                        break w;
                    }
                    Err(MorError::RankTooSmall { .. }) if kw < cap => kw = (2 * kw).min(cap),
                    Err(e) => return Err(e),
                }
            }
        }
    };
    Ok(ReductionBasis {
        v,
        w,
        method_tag: method_tag(method, side, "avg"),
        points_used: InterpolationPointSet {
            points,
            closure: ClosurePolicy::ConjugateClosed,
        },
        guaranteed: Vec::new(),
        work: ev.work(),
    })
}

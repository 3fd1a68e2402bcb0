//! Symmetric and generalized transfer functions of structured QB systems.

mod sweep;

pub use sweep::{
    sweep_level1, sweep_level1_values, sweep_level2, sweep_level2_values, Level1Sweep, Level2Sweep,
};

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{MorError, Result};
use crate::linalg::{CMatrix, LuFactors};
use crate::system::{Resolvent, StructuredQbSystem};

/// Which transfer function a value or interpolation condition refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TfKind {
    /// symmetric transfer function of level 1, 2 or 3
    Sym(u8),
    /// `C(s1) K(s1)^-1 B(s1)`
    GenB,
    /// `C(s2) K(s2)^-1 N(s1) (I (x) K(s1)^-1 B(s1))`
    GenNB,
    /// `C(s3) K(s3)^-1 N(s2) (I (x) K(s2)^-1 N(s1) (I (x) K(s1)^-1 B(s1)))`
    GenNNB,
    /// `C(s3) K(s3)^-1 H(s2, s1) (K(s2)^-1 B(s2) (x) K(s1)^-1 B(s1))`
    GenHBB,
}

impl TfKind {
    pub fn arity(&self) -> usize {
        match self {
            TfKind::Sym(k) => *k as usize,
            TfKind::GenB => 1,
            TfKind::GenNB => 2,
            TfKind::GenNNB | TfKind::GenHBB => 3,
        }
    }

    pub fn label(&self) -> String {
        match self {
            TfKind::Sym(k) => format!("G{k}"),
            TfKind::GenB => "B".into(),
            TfKind::GenNB => "NB".into(),
            TfKind::GenNNB => "NNB".into(),
            TfKind::GenHBB => "HBB".into(),
        }
    }
}

/// Linear-solver work spent so far: factorizations and solved columns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Work {
    pub factorizations: usize,
    pub solves: usize,
}

impl Work {
    pub fn total(&self) -> usize {
        self.factorizations + self.solves
    }
}

fn key(s: C64) -> (u64, u64) {
    (s.re.to_bits(), s.im.to_bits())
}

/// Evaluates transfer functions of one system, caching factorizations of `K(s)`.
pub struct TfEvaluator<'a> {
    sys: &'a StructuredQbSystem,
    resolvent: Resolvent,
    cache: Mutex<HashMap<(u64, u64), Arc<LuFactors<C64>>>>,
    factorizations: AtomicUsize,
    solves: AtomicUsize,
}

impl<'a> TfEvaluator<'a> {
    pub fn new(sys: &'a StructuredQbSystem) -> Self {
        TfEvaluator {
            sys,
            resolvent: Resolvent::new(&sys.k),
            cache: Mutex::new(HashMap::new()),
            factorizations: AtomicUsize::new(0),
            solves: AtomicUsize::new(0),
        }
    }

    pub fn system(&self) -> &StructuredQbSystem {
        self.sys
    }

    pub fn work(&self) -> Work {
        Work {
            factorizations: self.factorizations.load(Ordering::Relaxed),
            solves: self.solves.load(Ordering::Relaxed),
        }
    }

    pub fn factor(&self, s: C64) -> Result<Arc<LuFactors<C64>>> {
        if let Some(f) = self.cache.lock().unwrap().get(&key(s)) {
            return Ok(f.clone());
        }
        let f = Arc::new(self.resolvent.factor(s)?);
        self.factorizations.fetch_add(1, Ordering::Relaxed);
        self.cache.lock().unwrap().insert(key(s), f.clone());
        Ok(f)
    }

    /// `K(s)^-1 X`
    pub fn solve(&self, s: C64, x: &CMatrix) -> Result<CMatrix> {
        self.solves.fetch_add(x.ncols(), Ordering::Relaxed);
        self.factor(s)?.solve(x)
    }

    /// `K(s)^-H X`
    pub fn solve_adjoint(&self, s: C64, x: &CMatrix) -> Result<CMatrix> {
        self.solves.fetch_add(x.ncols(), Ordering::Relaxed);
        self.factor(s)?.solve_adjoint(x)
    }

    /// `K(s)^-H C(s)^H`, the dual input-to-state map.
    pub fn dual_state(&self, s: C64) -> Result<CMatrix> {
        self.solve_adjoint(s, &self.sys.c.eval(s).adjoint())
    }

    pub fn psi1(&self, s: C64) -> Result<CMatrix> {
        self.solve(s, &self.sys.b.eval(s))
    }

    pub fn psi2(&self, s1: C64, s2: C64) -> Result<CMatrix> {
        let (p1, p2) = (self.psi1(s1)?, self.psi1(s2)?);
        self.psi2_from(s1, s2, &p1, &p2)
    }

    fn psi2_from(&self, s1: C64, s2: C64, p1: &CMatrix, p2: &CMatrix) -> Result<CMatrix> {
        let sys = self.sys;
        let mut rhs = sys.apply_h(s1, s2, p1, p2)?;
        rhs += sys.apply_h(s2, s1, p2, p1)?;
        rhs += sys.apply_n(s1, p1);
        rhs += sys.apply_n(s2, p2);
        Ok(self.solve(s1 + s2, &rhs)? * C64::new(0.5, 0.0))
    }

    pub fn psi3(&self, s1: C64, s2: C64, s3: C64) -> Result<CMatrix> {
        let sys = self.sys;
        let (p1, p2, p3) = (self.psi1(s1)?, self.psi1(s2)?, self.psi1(s3)?);
        let p12 = self.psi2_from(s1, s2, &p1, &p2)?;
        let p13 = self.psi2_from(s1, s3, &p1, &p3)?;
        let p23 = self.psi2_from(s2, s3, &p2, &p3)?;
        let mut rhs = sys.apply_h(s1 + s2, s3, &p12, &p3)?;
        rhs += sys.apply_h(s1 + s3, s2, &p13, &p2)?;
        rhs += sys.apply_h(s2 + s3, s1, &p23, &p1)?;
        rhs += sys.apply_h(s1, s2 + s3, &p1, &p23)?;
        rhs += sys.apply_h(s2, s1 + s3, &p2, &p13)?;
        rhs += sys.apply_h(s3, s1 + s2, &p3, &p12)?;
        rhs += sys.apply_n(s1 + s2, &p12);
        rhs += sys.apply_n(s1 + s3, &p13);
        rhs += sys.apply_n(s2 + s3, &p23);
        Ok(self.solve(s1 + s2 + s3, &rhs)? * C64::new(1.0 / 6.0, 0.0))
    }

    /// State-side symmetric transfer function `Psi_k`.
    pub fn sym_state(&self, level: u8, pt: &[C64]) -> Result<CMatrix> {
        check_arity(level as usize, pt)?;
        match level {
            1 => self.psi1(pt[0]),
            2 => self.psi2(pt[0], pt[1]),
            3 => self.psi3(pt[0], pt[1], pt[2]),
            _ => Err(MorError::InvalidInput(format!(
                "level {level} not in 1..=3"
            ))),
        }
    }

    /// `G_k(s1, ..., sk) = C(s1 + ... + sk) Psi_k(s1, ..., sk)`.
    pub fn sym_tf(&self, level: u8, pt: &[C64]) -> Result<CMatrix> {
        let psi = self.sym_state(level, pt)?;
        let s: C64 = pt.iter().sum();
        Ok(self.sys.c.apply(s, &psi))
    }

    /// State-side generalized transfer function (everything but the leading `C`).
    pub fn gen_state(&self, kind: TfKind, pt: &[C64]) -> Result<CMatrix> {
        check_arity(kind.arity(), pt)?;
        let sys = self.sys;
        match kind {
            TfKind::GenB => self.psi1(pt[0]),
            TfKind::GenNB => {
                let v1 = self.psi1(pt[0])?;
                self.solve(pt[1], &sys.apply_n(pt[0], &v1))
            }
            TfKind::GenNNB => {
                let v1 = self.psi1(pt[0])?;
                let v2 = self.solve(pt[1], &sys.apply_n(pt[0], &v1))?;
                self.solve(pt[2], &sys.apply_n(pt[1], &v2))
            }
            TfKind::GenHBB => {
                let a = self.psi1(pt[1])?;
                let b = self.psi1(pt[0])?;
                self.solve(pt[2], &sys.apply_h(pt[1], pt[0], &a, &b)?)
            }
            TfKind::Sym(_) => Err(MorError::InvalidInput(
                "use sym_state for symmetric transfer functions".into(),
            )),
        }
    }

    pub fn gen_tf(&self, kind: TfKind, pt: &[C64]) -> Result<CMatrix> {
        let x = self.gen_state(kind, pt)?;
        let s_out = pt[kind.arity() - 1];
        Ok(self.sys.c.apply(s_out, &x))
    }

    /// Value of any transfer function kind.
    pub fn eval(&self, kind: TfKind, pt: &[C64]) -> Result<CMatrix> {
        match kind {
            TfKind::Sym(k) => self.sym_tf(k, pt),
            _ => self.gen_tf(kind, pt),
        }
    }
}

fn check_arity(k: usize, pt: &[C64]) -> Result<()> {
    if pt.len() != k {
        return Err(MorError::dims("frequency point arity", k, pt.len()));
    }
    Ok(())
}

pub fn symtf_state(level: u8, sys: &StructuredQbSystem, pt: &[C64]) -> Result<CMatrix> {
    TfEvaluator::new(sys).sym_state(level, pt)
}

pub fn sym_tf(level: u8, sys: &StructuredQbSystem, pt: &[C64]) -> Result<CMatrix> {
    TfEvaluator::new(sys).sym_tf(level, pt)
}

pub fn gen_tf(kind: TfKind, sys: &StructuredQbSystem, pt: &[C64]) -> Result<CMatrix> {
    TfEvaluator::new(sys).gen_tf(kind, pt)
}

//! Structured quadratic-bilinear systems in the frequency domain:
//!
//! ```text
//! y = C(s) x,   K(s) x = B(s) u + N(s) (u (x) x) + H(s1, s2) (x (x) x)
//! ```

mod functions;
mod resolvent;

pub use functions::{AffineTerm, BivariateMatrixFunction, BivariateTerm, MatrixFunction, ScalarFn};
pub use resolvent::Resolvent;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{MorError, Result};
use crate::linalg::{hcat, CMatrix, QuadEntry, QuadraticOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    FirstOrder,
    SecondOrder,
    TimeDelay,
    Generic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructuredQbSystem {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub c: MatrixFunction,
    pub k: MatrixFunction,
    pub b: MatrixFunction,
    /// `N(s) = [N_1(s), ..., N_m(s)]`, one `n x n` block per input
    pub n_blocks: Vec<MatrixFunction>,
    pub h: BivariateMatrixFunction,
    pub structure: Structure,
}

impl StructuredQbSystem {
    pub fn new(
        c: MatrixFunction,
        k: MatrixFunction,
        b: MatrixFunction,
        n_blocks: Vec<MatrixFunction>,
        h: BivariateMatrixFunction,
        structure: Structure,
    ) -> Result<Self> {
        let n = k.rows;
        if k.cols != n {
            return Err(MorError::dims(
                "K(s)",
                format!("{n}x{n}"),
                format!("{}x{}", k.rows, k.cols),
            ));
        }
        if b.rows != n {
            return Err(MorError::dims("B(s) rows", n, b.rows));
        }
        if c.cols != n {
            return Err(MorError::dims("C(s) columns", n, c.cols));
        }
        let m = b.cols;
        let p = c.rows;
        if !n_blocks.is_empty() && n_blocks.len() != m {
            return Err(MorError::dims("N(s) block count", m, n_blocks.len()));
        }
        for nb in &n_blocks {
            if nb.rows != n || nb.cols != n {
                return Err(MorError::dims(
                    "N_j(s)",
                    format!("{n}x{n}"),
                    format!("{}x{}", nb.rows, nb.cols),
                ));
            }
        }
        if h.rows != n || h.dim != n {
            return Err(MorError::dims(
                "H(s1,s2)",
                format!("{n}x{n}^2"),
                format!("{}x{}^2", h.rows, h.dim),
            ));
        }
        Ok(StructuredQbSystem {
            n,
            m,
            p,
            c,
            k,
            b,
            n_blocks,
            h,
            structure,
        })
    }

    /// `N(s) (I_m (x) X) = [N_1(s) X, ..., N_m(s) X]`.
    pub fn apply_n(&self, s: C64, x: &CMatrix) -> CMatrix {
        if self.n_blocks.is_empty() {
            return CMatrix::zeros(self.n, self.m * x.ncols());
        }
        let blocks: Vec<CMatrix> = self.n_blocks.iter().map(|nb| nb.apply(s, x)).collect();
        hcat(&blocks).expect("blocks share the state dimension")
    }

    /// `H(s1, s2) (X (x) Y)`.
    pub fn apply_h(&self, s1: C64, s2: C64, x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
        self.h.apply_kron(s1, s2, x, y)
    }

    pub fn has_bilinear(&self) -> bool {
        self.n_blocks.iter().any(|nb| {
            nb.terms
                .iter()
                .any(|t| t.matrix.iter().any(|v| v.norm_sqr() > 0.0))
        })
    }

    pub fn has_quadratic(&self) -> bool {
        self.h.terms.iter().any(|t| !t.op.is_empty())
    }

    /// True when every coefficient matrix is real.
    pub fn is_real(&self) -> bool {
        let real = |m: &CMatrix| m.iter().all(|v| v.im == 0.0);
        let mf = |f: &MatrixFunction| f.terms.iter().all(|t| real(&t.matrix));
        mf(&self.c)
            && mf(&self.k)
            && mf(&self.b)
            && self.n_blocks.iter().all(mf)
            && self
                .h
                .terms
                .iter()
                .all(|t| t.op.entries().iter().all(|e| e.value.im == 0.0))
    }
}

fn check_square(name: &str, a: &CMatrix, n: usize) -> Result<()> {
    if a.shape() != (n, n) {
        return Err(MorError::dims(
            name,
            format!("{n}x{n}"),
            format!("{}x{}", a.nrows(), a.ncols()),
        ));
    }
    Ok(())
}

fn n_functions(
    n: usize,
    m: usize,
    terms: &[(ScalarFn, &[CMatrix])],
) -> Result<Vec<MatrixFunction>> {
    let mut blocks = Vec::new();
    for j in 0..m {
        let mut f = MatrixFunction::new(n, n);
        for (scalar, mats) in terms {
            if mats.is_empty() {
                continue;
            }
            if mats.len() != m {
                return Err(MorError::dims("N block count", m, mats.len()));
            }
            check_square("N_j", &mats[j], n)?;
            f.push(scalar.clone(), mats[j].clone())?;
        }
        blocks.push(f);
    }
    Ok(blocks)
}

/// `E x' = A x + H (x (x) x) + sum_j N_j x u_j + B u`, `y = C x`.
pub fn preset_first_order(
    e: CMatrix,
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
    n: Vec<CMatrix>,
    h: QuadraticOperator,
) -> Result<StructuredQbSystem> {
    preset_time_delay(e, vec![a], vec![0.0], b, c, n, h).map(|mut s| {
        s.structure = Structure::FirstOrder;
        s
    })
}

/// `E x'(t) = sum_k A_k x(t - tau_k) + ...`; a zero delay is an undelayed term.
pub fn preset_time_delay(
    e: CMatrix,
    a_list: Vec<CMatrix>,
    taus: Vec<f64>,
    b: CMatrix,
    c: CMatrix,
    n: Vec<CMatrix>,
    h: QuadraticOperator,
) -> Result<StructuredQbSystem> {
    let nx = e.nrows();
    check_square("E", &e, nx)?;
    if a_list.len() != taus.len() {
        return Err(MorError::dims("delay list", a_list.len(), taus.len()));
    }
    let mut k = MatrixFunction::new(nx, nx).with_term(ScalarFn::Monomial(1), e)?;
    for (a, &tau) in a_list.into_iter().zip(&taus) {
        if tau < 0.0 || !tau.is_finite() {
            return Err(MorError::NegativeDelay(tau));
        }
        check_square("A_k", &a, nx)?;
        let scalar = if tau == 0.0 {
            ScalarFn::Constant
        } else {
            ScalarFn::ExpDecay(tau)
        };
        k.push(scalar, -a)?;
    }
    let m = b.ncols();
    let bf = MatrixFunction::constant(b);
    let cf = MatrixFunction::constant(c);
    let blocks = if n.is_empty() {
        (0..m).map(|_| MatrixFunction::new(nx, nx)).collect()
    } else {
        n_functions(nx, m, &[(ScalarFn::Constant, &n)])?
    };
    let mut hf = BivariateMatrixFunction::new(nx, nx);
    hf.push(ScalarFn::Constant, ScalarFn::Constant, h)?;
    let structure = if taus.iter().any(|&t| t > 0.0) {
        Structure::TimeDelay
    } else {
        Structure::FirstOrder
    };
    StructuredQbSystem::new(cf, k, bf, blocks, hf, structure)
}

/// Coefficients of a second-order system
/// `M q'' + D q' + K q + H_pp (q (x) q) + H_pv (q (x) q') + H_vp (q' (x) q) + H_vv (q' (x) q')
///  = sum_j (N_p,j q + N_v,j q') u_j + B_u u`, `y = C_p q + C_v q'`.
#[derive(Clone, Debug)]
pub struct SecondOrderParts {
    pub mass: CMatrix,
    pub damping: CMatrix,
    pub stiffness: CMatrix,
    pub b_u: CMatrix,
    pub c_p: CMatrix,
    pub c_v: CMatrix,
    pub n_p: Vec<CMatrix>,
    pub n_v: Vec<CMatrix>,
    pub h_pp: QuadraticOperator,
    pub h_pv: QuadraticOperator,
    pub h_vp: QuadraticOperator,
    pub h_vv: QuadraticOperator,
}

pub fn preset_second_order(parts: SecondOrderParts) -> Result<StructuredQbSystem> {
    let n = parts.mass.nrows();
    check_square("M", &parts.mass, n)?;
    check_square("D", &parts.damping, n)?;
    check_square("K", &parts.stiffness, n)?;
    let k = MatrixFunction::new(n, n)
        .with_term(ScalarFn::Monomial(2), parts.mass)?
        .with_term(ScalarFn::Monomial(1), parts.damping)?
        .with_term(ScalarFn::Constant, parts.stiffness)?;
    let b = MatrixFunction::constant(parts.b_u);
    let c = MatrixFunction::constant(parts.c_p).with_term(ScalarFn::Monomial(1), parts.c_v)?;
    let m = b.cols;
    let zeros: Vec<CMatrix> = (0..m).map(|_| CMatrix::zeros(n, n)).collect();
    let np = if parts.n_p.is_empty() {
        zeros.clone()
    } else {
        parts.n_p
    };
    let nv = if parts.n_v.is_empty() {
        zeros
    } else {
        parts.n_v
    };
    let blocks = n_functions(
        n,
        m,
        &[(ScalarFn::Constant, &np), (ScalarFn::Monomial(1), &nv)],
    )?;
    // the frequency-domain quadratic term carries the opposite sign
    let mut h = BivariateMatrixFunction::new(n, n);
    let neg = C64::new(-1.0, 0.0);
    h.push(
        ScalarFn::Constant,
        ScalarFn::Constant,
        parts.h_pp.scale(neg),
    )?;
    h.push(
        ScalarFn::Constant,
        ScalarFn::Monomial(1),
        parts.h_pv.scale(neg),
    )?;
    h.push(
        ScalarFn::Monomial(1),
        ScalarFn::Constant,
        parts.h_vp.scale(neg),
    )?;
    h.push(
        ScalarFn::Monomial(1),
        ScalarFn::Monomial(1),
        parts.h_vv.scale(neg),
    )?;
    let mut sys = StructuredQbSystem::new(c, k, b, blocks, h, Structure::SecondOrder)?;
    sys.structure = Structure::SecondOrder;
    Ok(sys)
}

fn only_tags(f: &MatrixFunction, allowed: &[ScalarFn], what: &str) -> Result<()> {
    for t in &f.terms {
        if !allowed.contains(&t.scalar) {
            return Err(MorError::Unsupported(format!(
                "{what} term {} in a second-order system",
                t.scalar.label()
            )));
        }
    }
    Ok(())
}

/// Recover second-order coefficients from the term tags of `sys`.
pub fn second_order_parts(sys: &StructuredQbSystem) -> Result<SecondOrderParts> {
    if sys.structure != Structure::SecondOrder {
        return Err(MorError::Unsupported(format!(
            "expected a second-order system, got {:?}",
            sys.structure
        )));
    }
    let (c0, c1, c2) = (
        ScalarFn::Constant,
        ScalarFn::Monomial(1),
        ScalarFn::Monomial(2),
    );
    only_tags(&sys.k, &[c0.clone(), c1.clone(), c2.clone()], "K")?;
    only_tags(&sys.b, std::slice::from_ref(&c0), "B")?;
    only_tags(&sys.c, &[c0.clone(), c1.clone()], "C")?;
    for nb in &sys.n_blocks {
        only_tags(nb, &[c0.clone(), c1.clone()], "N")?;
    }
    let n = sys.n;
    let mut quad = [
        QuadraticOperator::zeros(n, n),
        QuadraticOperator::zeros(n, n),
        QuadraticOperator::zeros(n, n),
        QuadraticOperator::zeros(n, n),
    ];
    let neg = C64::new(-1.0, 0.0);
    for t in &sys.h.terms {
        let idx = match (&t.first, &t.second) {
            (ScalarFn::Constant, ScalarFn::Constant) => 0,
            (ScalarFn::Constant, ScalarFn::Monomial(1)) => 1,
            (ScalarFn::Monomial(1), ScalarFn::Constant) => 2,
            (ScalarFn::Monomial(1), ScalarFn::Monomial(1)) => 3,
            (a, b) => {
                return Err(MorError::Unsupported(format!(
                    "quadratic term {}*{} in a second-order system",
                    a.label(),
                    b.label()
                )))
            }
        };
        quad[idx] = quad[idx].add(&t.op.scale(neg))?;
    }
    let [h_pp, h_pv, h_vp, h_vv] = quad;
    Ok(SecondOrderParts {
        mass: sys.k.coefficient(&c2),
        damping: sys.k.coefficient(&c1),
        stiffness: sys.k.coefficient(&c0),
        b_u: sys.b.coefficient(&c0),
        c_p: sys.c.coefficient(&c0),
        c_v: sys.c.coefficient(&c1),
        n_p: sys.n_blocks.iter().map(|nb| nb.coefficient(&c0)).collect(),
        n_v: sys.n_blocks.iter().map(|nb| nb.coefficient(&c1)).collect(),
        h_pp,
        h_pv,
        h_vp,
        h_vv,
    })
}

/// First-order realization of a second-order system on the state `[q; q']`.
pub fn companion_embedding(sys: &StructuredQbSystem) -> Result<StructuredQbSystem> {
    let p = second_order_parts(sys)?;
    let n = sys.n;
    let n2 = 2 * n;
    let mut e = CMatrix::identity(n2, n2);
    e.view_mut((n, n), (n, n)).copy_from(&p.mass);
    let mut a = CMatrix::zeros(n2, n2);
    a.view_mut((0, n), (n, n))
        .copy_from(&CMatrix::identity(n, n));
    a.view_mut((n, 0), (n, n)).copy_from(&(-&p.stiffness));
    a.view_mut((n, n), (n, n)).copy_from(&(-&p.damping));
    let mut b = CMatrix::zeros(n2, sys.m);
    b.view_mut((n, 0), (n, sys.m)).copy_from(&p.b_u);
    let mut c = CMatrix::zeros(sys.p, n2);
    c.view_mut((0, 0), (sys.p, n)).copy_from(&p.c_p);
    c.view_mut((0, n), (sys.p, n)).copy_from(&p.c_v);
    let nmats = p
        .n_p
        .iter()
        .zip(&p.n_v)
        .map(|(np, nv)| {
            let mut nj = CMatrix::zeros(n2, n2);
            nj.view_mut((n, 0), (n, n)).copy_from(np);
            nj.view_mut((n, n), (n, n)).copy_from(nv);
            nj
        })
        .collect();
    // slice a < n pairs with q_a, slice a >= n with q'_(a-n); the quadratic
    // terms move to the right-hand side
    let mut entries = Vec::new();
    let mut place = |op: &QuadraticOperator, slice_off: usize, col_off: usize| {
        for q in op.entries() {
            entries.push(QuadEntry {
                slice: q.slice + slice_off,
                row: q.row + n,
                col: q.col + col_off,
                value: -q.value,
            });
        }
    };
    place(&p.h_pp, 0, 0);
    place(&p.h_pv, 0, n);
    place(&p.h_vp, n, 0);
    place(&p.h_vv, n, n);
    let h = QuadraticOperator::from_entries(n2, n2, entries)?;
    preset_first_order(e, a, b, c, nmats, h)
}

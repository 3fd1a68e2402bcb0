use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{MorError, Result};
use crate::linalg::{czero, CMatrix, QuadraticOperator};

/// Scalar frequency functions multiplying constant coefficient matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarFn {
    Constant,
    /// `s^k`
    Monomial(u32),
    /// `exp(-tau s)`
    ExpDecay(f64),
    Product(Vec<ScalarFn>),
}

impl ScalarFn {
    pub fn eval(&self, s: C64) -> C64 {
        match self {
            ScalarFn::Constant => C64::new(1.0, 0.0),
            ScalarFn::Monomial(k) => s.powu(*k),
            ScalarFn::ExpDecay(tau) => (-s * *tau).exp(),
            ScalarFn::Product(fs) => fs.iter().fold(C64::new(1.0, 0.0), |a, f| a * f.eval(s)),
        }
    }

    /// Split into (derivative order, total delay) when the function is a
    /// product of monomials and exponentials.
    pub fn time_domain(&self) -> (u32, f64) {
        match self {
            ScalarFn::Constant => (0, 0.0),
            ScalarFn::Monomial(k) => (*k, 0.0),
            ScalarFn::ExpDecay(t) => (0, *t),
            ScalarFn::Product(fs) => fs.iter().fold((0, 0.0), |(k, t), f| {
                let (k2, t2) = f.time_domain();
                (k + k2, t + t2)
            }),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ScalarFn::Constant => "1".into(),
            ScalarFn::Monomial(k) => format!("s^{k}"),
            ScalarFn::ExpDecay(t) => format!("exp(-{t}s)"),
            ScalarFn::Product(fs) => fs.iter().map(|f| f.label()).collect::<Vec<_>>().join("*"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AffineTerm {
    pub scalar: ScalarFn,
    pub matrix: CMatrix,
}

/// `F(s) = sum_j f_j(s) F_j` with constant matrices `F_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFunction {
    pub rows: usize,
    pub cols: usize,
    pub terms: Vec<AffineTerm>,
}

impl MatrixFunction {
    pub fn new(rows: usize, cols: usize) -> Self {
        MatrixFunction {
            rows,
            cols,
            terms: Vec::new(),
        }
    }

    pub fn constant(m: CMatrix) -> Self {
        let (rows, cols) = m.shape();
        MatrixFunction {
            rows,
            cols,
            terms: vec![AffineTerm {
                scalar: ScalarFn::Constant,
                matrix: m,
            }],
        }
    }

    pub fn with_term(mut self, scalar: ScalarFn, matrix: CMatrix) -> Result<Self> {
        self.push(scalar, matrix)?;
        Ok(self)
    }

    pub fn push(&mut self, scalar: ScalarFn, matrix: CMatrix) -> Result<()> {
        if matrix.shape() != (self.rows, self.cols) {
            return Err(MorError::dims(
                "matrix function term",
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", matrix.nrows(), matrix.ncols()),
            ));
        }
        self.terms.push(AffineTerm { scalar, matrix });
        Ok(())
    }

    pub fn eval(&self, s: C64) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows, self.cols);
        for t in &self.terms {
            let a = t.scalar.eval(s);
            if a != czero() {
                out += &t.matrix * a;
            }
        }
        out
    }

    /// `F(s) X` without forming `F(s)`.
    pub fn apply(&self, s: C64, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows, x.ncols());
        for t in &self.terms {
            let a = t.scalar.eval(s);
            if a != czero() {
                out += (&t.matrix * x) * a;
            }
        }
        out
    }

    pub fn map_terms(&self, rows: usize, cols: usize, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        MatrixFunction {
            rows,
            cols,
            terms: self
                .terms
                .iter()
                .map(|t| AffineTerm {
                    scalar: t.scalar.clone(),
                    matrix: f(&t.matrix),
                })
                .collect(),
        }
    }

    /// Sum of coefficients of terms whose scalar function equals `f`.
    pub fn coefficient(&self, f: &ScalarFn) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows, self.cols);
        for t in &self.terms {
            if &t.scalar == f {
                out += &t.matrix;
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BivariateTerm {
    pub first: ScalarFn,
    pub second: ScalarFn,
    pub op: QuadraticOperator,
}

/// `H(s1, s2) = sum_j g_j(s1) h_j(s2) H_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct BivariateMatrixFunction {
    pub rows: usize,
    pub dim: usize,
    pub terms: Vec<BivariateTerm>,
}

impl BivariateMatrixFunction {
    pub fn new(rows: usize, dim: usize) -> Self {
        BivariateMatrixFunction {
            rows,
            dim,
            terms: Vec::new(),
        }
    }

    pub fn push(&mut self, first: ScalarFn, second: ScalarFn, op: QuadraticOperator) -> Result<()> {
        if op.rows() != self.rows || op.dim() != self.dim {
            return Err(MorError::dims(
                "bivariate term",
                format!("{}x{}^2", self.rows, self.dim),
                format!("{}x{}^2", op.rows(), op.dim()),
            ));
        }
        self.terms.push(BivariateTerm { first, second, op });
        Ok(())
    }

    pub fn eval(&self, s1: C64, s2: C64) -> Result<QuadraticOperator> {
        let mut acc = QuadraticOperator::zeros(self.rows, self.dim);
        for t in &self.terms {
            let a = t.first.eval(s1) * t.second.eval(s2);
            if a != czero() {
                acc = acc.add(&t.op.scale(a))?;
            }
        }
        Ok(acc)
    }

    /// `H(s1, s2) (X (x) Y)`.
    pub fn apply_kron(&self, s1: C64, s2: C64, x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(self.rows, x.ncols() * y.ncols());
        for t in &self.terms {
            let a = t.first.eval(s1) * t.second.eval(s2);
            if a != czero() && !t.op.is_empty() {
                out += t.op.apply_kron(x, y)? * a;
            }
        }
        Ok(out)
    }
}

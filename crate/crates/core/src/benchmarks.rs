//! Benchmark systems: a heated rod with delayed feedback and a Toda lattice
//! rewritten in quadratic-bilinear second-order form.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{MorError, Result};
use crate::linalg::{CMatrix, QuadEntry, QuadraticOperator};
use crate::system::{preset_second_order, preset_time_delay, SecondOrderParts, StructuredQbSystem};

fn c(v: f64) -> C64 {
    C64::new(v, 0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RodParams {
    /// interior grid points
    pub n: usize,
    pub delay: f64,
}

impl Default for RodParams {
    fn default() -> Self {
        RodParams { n: 200, delay: 1.0 }
    }
}

/// Central finite differences on `(0, pi)` with Dirichlet boundaries for
///
/// `v_t = v_zz - 2 sin(z) v + 2 sin(z) v(t - tau) - 2 sin(z) v^2 + sum_j b_j(z) (v + 1) u_j`.
///
/// `u_1` heats the first third of the rod, `u_2` the rest; `y_1`, `y_2` are
/// mean temperatures of the two halves.
pub fn build_rod(params: &RodParams) -> Result<StructuredQbSystem> {
    let n = params.n;
    if n < 2 {
        return Err(MorError::InvalidInput(format!(
            "rod needs at least 2 grid points, got {n}"
        )));
    }
    let h = PI / (n + 1) as f64;
    let z: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
    let sin2: Vec<f64> = z.iter().map(|v| 2.0 * v.sin()).collect();
    let inv_h2 = 1.0 / (h * h);
    let mut a = CMatrix::zeros(n, n);
    let mut ad = CMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = c(-2.0 * inv_h2 - sin2[i]);
        if i > 0 {
            a[(i, i - 1)] = c(inv_h2);
        }
        if i + 1 < n {
            a[(i, i + 1)] = c(inv_h2);
        }
        ad[(i, i)] = c(sin2[i]);
    }
    let mut b = CMatrix::zeros(n, 2);
    for (i, &zi) in z.iter().enumerate() {
        if zi < PI / 3.0 {
            b[(i, 0)] = c(1.0);
        } else {
            b[(i, 1)] = c(1.0);
        }
    }
    let mut cm = CMatrix::zeros(2, n);
    let left = z.iter().filter(|&&v| v < PI / 2.0).count();
    for i in 0..n {
        if i < left {
            cm[(0, i)] = c(1.0 / left as f64);
        } else {
            cm[(1, i)] = c(1.0 / (n - left) as f64);
        }
    }
    let nmats: Vec<CMatrix> = (0..2)
        .map(|j| CMatrix::from_diagonal(&b.column(j).into_owned()))
        .collect();
    let quad = QuadraticOperator::from_entries(
        n,
        n,
        (0..n).map(|i| QuadEntry {
            slice: i,
            row: i,
            col: i,
            value: c(-sin2[i]),
        }),
    )?;
    preset_time_delay(
        CMatrix::identity(n, n),
        vec![a, ad],
        vec![0.0, params.delay],
        b,
        cm,
        nmats,
        quad,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TodaParams {
    /// number of particles
    pub particles: usize,
    /// spring constants `k_j > 0`; a single value is broadcast
    pub stiffness: Vec<f64>,
    /// diagonal damping `d_j >= 0`; a single value is broadcast
    pub damping: Vec<f64>,
}

impl Default for TodaParams {
    fn default() -> Self {
        TodaParams {
            particles: 100,
            stiffness: vec![1.0],
            damping: vec![1.0],
        }
    }
}

impl TodaParams {
    fn expand(v: &[f64], l: usize, what: &str) -> Result<Vec<f64>> {
        match v.len() {
            1 => Ok(vec![v[0]; l]),
            k if k == l => Ok(v.to_vec()),
            k => Err(MorError::dims(what, l, k)),
        }
    }

    pub fn stiffness_vec(&self) -> Result<Vec<f64>> {
        let k = Self::expand(&self.stiffness, self.particles, "stiffness")?;
        if k.iter().any(|&v| !(v > 0.0)) {
            return Err(MorError::InvalidInput(
                "stiffness coefficients must be positive".into(),
            ));
        }
        Ok(k)
    }

    pub fn damping_vec(&self) -> Result<Vec<f64>> {
        let d = Self::expand(&self.damping, self.particles, "damping")?;
        if d.iter().any(|&v| v < 0.0 || v.is_nan()) {
            return Err(MorError::InvalidInput("damping must be nonnegative".into()));
        }
        Ok(d)
    }
}

/// `(G q)_j = k_j (q_j - q_(j+1))`, `(G q)_l = k_l q_l`.
pub fn toda_gamma(k: &[f64]) -> CMatrix {
    let l = k.len();
    let mut g = CMatrix::zeros(l, l);
    for j in 0..l {
        g[(j, j)] = c(k[j]);
        if j + 1 < l {
            g[(j, j + 1)] = c(-k[j]);
        }
    }
    g
}

/// Toda lattice with auxiliary variables `z_j = exp((G q)_j) - 1` on the
/// state `x = [q; z]` of size `2l`. Input forces the first particle, the
/// output is its velocity. Split index for block-preserving bases is `l`.
pub fn build_toda(params: &TodaParams) -> Result<StructuredQbSystem> {
    let l = params.particles;
    if l == 0 {
        return Err(MorError::InvalidInput(
            "Toda lattice needs at least one particle".into(),
        ));
    }
    let k = params.stiffness_vec()?;
    let d = params.damping_vec()?;
    let n = 2 * l;
    let gamma = toda_gamma(&k);
    let dt = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        l,
        d.iter().map(|&v| c(v)),
    ));
    // (L z)_j = z_j - z_(j-1)
    let mut lz = CMatrix::identity(l, l);
    for j in 1..l {
        lz[(j, j - 1)] = c(-1.0);
    }
    let g_d = &gamma * &dt;
    let g_l = &gamma * &lz;
    let mut bq = CMatrix::zeros(l, 1);
    bq[(0, 0)] = c(1.0);
    let gb = &gamma * &bq;

    let mut damping = CMatrix::zeros(n, n);
    damping.view_mut((0, 0), (l, l)).copy_from(&dt);
    damping.view_mut((l, 0), (l, l)).copy_from(&g_d);
    let mut stiffness = CMatrix::zeros(n, n);
    stiffness.view_mut((0, l), (l, l)).copy_from(&lz);
    stiffness.view_mut((l, l), (l, l)).copy_from(&g_l);
    let mut b_u = CMatrix::zeros(n, 1);
    b_u.view_mut((0, 0), (l, 1)).copy_from(&bq);
    b_u.view_mut((l, 0), (l, 1)).copy_from(&gb);
    let mut c_v = CMatrix::zeros(1, n);
    c_v[(0, 0)] = c(1.0);
    let mut n_p = CMatrix::zeros(n, n);
    for j in 0..l {
        n_p[(l + j, l + j)] = gb[(j, 0)];
    }
    let mut pp = Vec::new();
    let mut pv = Vec::new();
    let mut vv = Vec::new();
    for j in 0..l {
        for i in 0..l {
            if g_l[(j, i)] != c(0.0) {
                pp.push(QuadEntry {
                    slice: l + j,
                    row: l + j,
                    col: l + i,
                    value: g_l[(j, i)],
                });
            }
            if g_d[(j, i)] != c(0.0) {
                pv.push(QuadEntry {
                    slice: l + j,
                    row: l + j,
                    col: i,
                    value: g_d[(j, i)],
                });
            }
            if gamma[(j, i)] != c(0.0) {
                vv.push(QuadEntry {
                    slice: l + j,
                    row: l + j,
                    col: i,
                    value: -gamma[(j, i)],
                });
            }
        }
    }
    preset_second_order(SecondOrderParts {
        mass: CMatrix::identity(n, n),
        damping,
        stiffness,
        b_u,
        c_p: CMatrix::zeros(1, n),
        c_v,
        n_p: vec![n_p],
        n_v: vec![CMatrix::zeros(n, n)],
        h_pp: QuadraticOperator::from_entries(n, n, pp)?,
        h_pv: QuadraticOperator::from_entries(n, n, pv)?,
        h_vp: QuadraticOperator::zeros(n, n),
        h_vv: QuadraticOperator::from_entries(n, n, vv)?,
    })
}

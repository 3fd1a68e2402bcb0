#![allow(dead_code)]

pub mod criteria;

use nalgebra::DMatrix;
use qbmor::linalg::{CMatrix, QuadraticOperator};
use qbmor::system::{
    preset_first_order, preset_second_order, preset_time_delay, SecondOrderParts,
    StructuredQbSystem,
};
use qbmor::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_real(rng: &mut ChaCha8Rng, r: usize, c: usize, scale: f64) -> CMatrix {
    DMatrix::from_fn(r, c, |_, _| {
        C::new(scale * (rng.gen::<f64>() * 2.0 - 1.0), 0.0)
    })
}

/// Dense first-order data kept alongside the structured system for oracles.
pub struct FirstOrderData {
    pub e: CMatrix,
    pub a: CMatrix,
    pub b: CMatrix,
    pub c: CMatrix,
    pub n: Vec<CMatrix>,
    pub h: CMatrix,
}

/// Random stable-ish first-order QB system.
pub fn random_first_order(
    seed: u64,
    n: usize,
    m: usize,
    p: usize,
) -> (StructuredQbSystem, FirstOrderData) {
    let mut g = rng(seed);
    let e = CMatrix::identity(n, n) + rand_real(&mut g, n, n, 0.1);
    let a =
        rand_real(&mut g, n, n, 0.5) - CMatrix::identity(n, n) * C::new(2.0 + n as f64 * 0.1, 0.0);
    let b = rand_real(&mut g, n, m, 1.0);
    let c = rand_real(&mut g, p, n, 1.0);
    let nm: Vec<CMatrix> = (0..m).map(|_| rand_real(&mut g, n, n, 0.3)).collect();
    let h = rand_real(&mut g, n, n * n, 0.3);
    let sys = preset_first_order(
        e.clone(),
        a.clone(),
        b.clone(),
        c.clone(),
        nm.clone(),
        QuadraticOperator::from_matrix(h.clone()).unwrap(),
    )
    .unwrap();
    (
        sys,
        FirstOrderData {
            e,
            a,
            b,
            c,
            n: nm,
            h,
        },
    )
}

pub fn random_second_order(
    seed: u64,
    n: usize,
    m: usize,
    p: usize,
) -> (StructuredQbSystem, SecondOrderParts) {
    let mut g = rng(seed);
    let mass = CMatrix::identity(n, n) + rand_real(&mut g, n, n, 0.1);
    let damping = CMatrix::identity(n, n) * C::new(0.5, 0.0) + rand_real(&mut g, n, n, 0.05);
    let stiffness = CMatrix::identity(n, n) * C::new(2.0, 0.0) + rand_real(&mut g, n, n, 0.3);
    let q =
        |g: &mut ChaCha8Rng| QuadraticOperator::from_matrix(rand_real(g, n, n * n, 0.2)).unwrap();
    let parts = SecondOrderParts {
        mass,
        damping,
        stiffness,
        b_u: rand_real(&mut g, n, m, 1.0),
        c_p: rand_real(&mut g, p, n, 1.0),
        c_v: rand_real(&mut g, p, n, 1.0),
        n_p: (0..m).map(|_| rand_real(&mut g, n, n, 0.2)).collect(),
        n_v: (0..m).map(|_| rand_real(&mut g, n, n, 0.2)).collect(),
        h_pp: q(&mut g),
        h_pv: q(&mut g),
        h_vp: q(&mut g),
        h_vv: q(&mut g),
    };
    (preset_second_order(parts.clone()).unwrap(), parts)
}

pub fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / a.norm().max(1e-300)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    FirstOrder,
    SecondOrder,
    TimeDelay,
}

pub const KINDS: [Kind; 3] = [Kind::FirstOrder, Kind::SecondOrder, Kind::TimeDelay];

fn quad(g: &mut ChaCha8Rng, n: usize, scale: f64) -> QuadraticOperator {
    QuadraticOperator::from_matrix(rand_real(g, n, n * n, scale)).unwrap()
}

/// Random stable system of the given preset; perturbations shrink with `n`
/// so the shifted diagonal keeps dominating.
pub fn random_structured(
    kind: Kind,
    seed: u64,
    n: usize,
    m: usize,
    p: usize,
) -> StructuredQbSystem {
    let mut g = rng(seed);
    let sq = 1.0 / (n as f64).sqrt();
    let eye = CMatrix::identity(n, n);
    let e = &eye + rand_real(&mut g, n, n, 0.1 * sq);
    match kind {
        Kind::FirstOrder => {
            let a = rand_real(&mut g, n, n, sq) - &eye * C::new(2.0, 0.0);
            let b = rand_real(&mut g, n, m, 1.0);
            let c = rand_real(&mut g, p, n, 1.0);
            let nm = (0..m).map(|_| rand_real(&mut g, n, n, 0.3 * sq)).collect();
            let h = quad(&mut g, n, 0.3 * sq);
            preset_first_order(e, a, b, c, nm, h).unwrap()
        }
        Kind::TimeDelay => {
            let a0 = rand_real(&mut g, n, n, sq) - &eye * C::new(3.0, 0.0);
            let a1 = rand_real(&mut g, n, n, sq);
            let b = rand_real(&mut g, n, m, 1.0);
            let c = rand_real(&mut g, p, n, 1.0);
            let nm = (0..m).map(|_| rand_real(&mut g, n, n, 0.3 * sq)).collect();
            let h = quad(&mut g, n, 0.3 * sq);
            preset_time_delay(e, vec![a0, a1], vec![0.0, 1.0], b, c, nm, h).unwrap()
        }
        Kind::SecondOrder => {
            let parts = SecondOrderParts {
                mass: e,
                damping: &eye * C::new(0.5, 0.0) + rand_real(&mut g, n, n, 0.05 * sq),
                stiffness: &eye * C::new(2.0, 0.0) + rand_real(&mut g, n, n, 0.3 * sq),
                b_u: rand_real(&mut g, n, m, 1.0),
                c_p: rand_real(&mut g, p, n, 1.0),
                c_v: rand_real(&mut g, p, n, 1.0),
                n_p: (0..m).map(|_| rand_real(&mut g, n, n, 0.2 * sq)).collect(),
                n_v: (0..m).map(|_| rand_real(&mut g, n, n, 0.2 * sq)).collect(),
                h_pp: quad(&mut g, n, 0.2 * sq),
                h_pv: quad(&mut g, n, 0.2 * sq),
                h_vp: quad(&mut g, n, 0.2 * sq),
                h_vv: quad(&mut g, n, 0.2 * sq),
            };
            preset_second_order(parts).unwrap()
        }
    }
}

/// Random point `i * 10^u` with `u` uniform in `[-1, 1]` and a small real part.
pub fn rand_point(g: &mut ChaCha8Rng) -> C {
    C::new(
        0.05 * g.gen::<f64>(),
        10f64.powf(g.gen::<f64>() * 2.0 - 1.0),
    )
}

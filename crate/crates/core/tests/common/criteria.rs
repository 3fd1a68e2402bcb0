//! Measurements shared by the unit tests and the acceptance target. Each
//! function returns labelled values; callers compare them to tolerances.

use super::*;
use nalgebra::DMatrix;
use qbmor::benchmarks::{build_toda, TodaParams};
use qbmor::interpolation::{
    gen_one_sided_blocks, gen_two_sided_blocks, sym_level3_blocks, sym_one_sided_blocks,
    sym_two_sided_blocks, sym_two_sided_level2, sym_two_sided_level3,
};
use qbmor::linalg::{hcat, kron, orthonormalize, QuadEntry, RMatrix, DEFAULT_RANK_TOL};
use qbmor::metrics::relerr_l2;
use qbmor::projection::project_matrices;
use qbmor::simulation::{sample_gp_input, simulate, uniform_grid, InputSignal, SimOptions};
use qbmor::system::{companion_embedding, second_order_parts};
use qbmor::tf::{TfEvaluator, TfKind};

pub type Findings = Vec<(String, f64)>;

pub fn worst_of(f: &Findings) -> f64 {
    f.iter()
        .map(|(_, e)| *e)
        .fold(0.0, |a, e| if e.is_nan() { f64::NAN } else { a.max(e) })
}

/// Labels of findings above `tol` (NaN counts as above).
pub fn over(f: &Findings, tol: f64) -> Vec<String> {
    f.iter()
        .filter(|(_, e)| !(*e <= tol))
        .map(|(l, e)| format!("{l}: {e:.3e}"))
        .collect()
}

// ---------------------------------------------------------------- interpolation

/// Orthonormal basis of `x`, filled up with random directions to `cols` columns.
pub fn fill(x: &CMatrix, cols: usize, g: &mut ChaCha8Rng) -> CMatrix {
    let mut q = orthonormalize(x, DEFAULT_RANK_TOL);
    while q.ncols() < cols {
        let extra = rand_real(g, x.nrows(), cols - q.ncols(), 1.0);
        q = orthonormalize(&hcat(&[q, extra]).unwrap(), DEFAULT_RANK_TOL);
    }
    q.columns(0, cols).into_owned()
}

/// Largest relative mismatch between full and reduced model over `conds`.
pub fn worst(
    full: &StructuredQbSystem,
    v: &CMatrix,
    w: &CMatrix,
    conds: &[(TfKind, Vec<C>)],
) -> f64 {
    let red = project_matrices(full, v, w).unwrap();
    let (ef, er) = (TfEvaluator::new(full), TfEvaluator::new(&red));
    conds
        .iter()
        .map(|(k, pt)| rel(&ef.eval(*k, pt).unwrap(), &er.eval(*k, pt).unwrap()))
        .fold(0.0, f64::max)
}

/// Two-sided pair of equal width.
fn pair(v: &CMatrix, w: &CMatrix, g: &mut ChaCha8Rng) -> (CMatrix, CMatrix) {
    let r = orthonormalize(v, DEFAULT_RANK_TOL)
        .ncols()
        .max(orthonormalize(w, DEFAULT_RANK_TOL).ncols());
    (fill(v, r, g), fill(w, r, g))
}

/// One-sided: `W = V`, and again with a random full-rank `W`.
fn one_sided(
    full: &StructuredQbSystem,
    v: &CMatrix,
    conds: &[(TfKind, Vec<C>)],
    g: &mut ChaCha8Rng,
) -> f64 {
    let v = orthonormalize(v, DEFAULT_RANK_TOL);
    let w = fill(&CMatrix::zeros(full.n, 0), v.ncols(), g);
    worst(full, &v, &v, conds).max(worst(full, &v, &w, conds))
}

fn sizes(i: u64) -> (Kind, usize, usize, usize) {
    let kind = KINDS[i as usize % 3];
    let n = 20 + ((i * 17) % 41) as usize;
    let m = 1 + (i % 3) as usize;
    let p = 1 + ((i / 3) % 3) as usize;
    (kind, n, m, p)
}

/// Every guaranteed condition of every basis construction on 50 random
/// systems with `n` in 20..=60 and `m, p` in 1..=3.
pub fn interpolation_conditions() -> Findings {
    use TfKind::*;
    let mut out = Findings::new();
    for i in 0..50u64 {
        let (kind, n, m, p) = sizes(i);
        let sys = random_structured(kind, 1000 + i, n, m, p);
        let ev = TfEvaluator::new(&sys);
        let mut g = rng(i);
        let (s1, s2, s3) = (rand_point(&mut g), rand_point(&mut g), rand_point(&mut g));
        let tag = format!("{kind:?} n={n} m={m} p={p}");
        let mut report = |name: &str, e: f64| out.push((format!("{tag} {name}"), e));

        let v = sym_one_sided_blocks(&ev, s1, s2).unwrap();
        let conds = [
            (Sym(1), vec![s1]),
            (Sym(1), vec![s2]),
            (Sym(2), vec![s1, s2]),
        ];
        report("symV", one_sided(&sys, &v, &conds, &mut g));

        let (v, w) = sym_two_sided_blocks(&ev, s1, s2).unwrap();
        let (v, w) = pair(&v, &w, &mut g);
        let conds = [
            (Sym(1), vec![s1]),
            (Sym(1), vec![s2]),
            (Sym(1), vec![s1 + s2]),
            (Sym(2), vec![s1, s2]),
        ];
        report("symVW", worst(&sys, &v, &w, &conds));

        let v = sym_level3_blocks(&ev, s1).unwrap();
        let conds = [
            (Sym(1), vec![s1]),
            (Sym(2), vec![s1, s1]),
            (Sym(3), vec![s1, s1, s1]),
        ];
        report("level-3 one-sided", one_sided(&sys, &v, &conds, &mut g));

        let (v, w) = sym_two_sided_level2(&ev, s1).unwrap();
        let (v, w) = pair(&v, &w, &mut g);
        let conds = [
            (Sym(1), vec![s1]),
            (Sym(1), vec![s1 + s1]),
            (Sym(2), vec![s1, s1]),
        ];
        report("level-2 two-sided", worst(&sys, &v, &w, &conds));

        let (v, w) = sym_two_sided_level3(&ev, s1).unwrap();
        let (v, w) = pair(&v, &w, &mut g);
        let conds = [
            (Sym(1), vec![s1]),
            (Sym(1), vec![s1 + s1 + s1]),
            (Sym(2), vec![s1, s1]),
            (Sym(3), vec![s1, s1, s1]),
        ];
        report("level-3 two-sided", worst(&sys, &v, &w, &conds));

        let v = gen_one_sided_blocks(&ev, s1, s2, s3, true).unwrap();
        let mut conds = vec![
            (GenB, vec![s1]),
            (GenB, vec![s2]),
            (GenNB, vec![s1, s2]),
            (GenHBB, vec![s1, s2, s3]),
            (GenNNB, vec![s1, s2, s3]),
        ];
        report("genV", one_sided(&sys, &v, &conds, &mut g));
        let v = gen_one_sided_blocks(&ev, s1, s2, s3, false).unwrap();
        conds.pop();
        report("genV without NNB", one_sided(&sys, &v, &conds, &mut g));

        let (v, w) = gen_two_sided_blocks(&ev, s1, s2).unwrap();
        let (v, w) = pair(&v, &w, &mut g);
        let conds = [
            (GenB, vec![s1]),
            (GenB, vec![s2]),
            (GenNB, vec![s1, s2]),
            (GenHBB, vec![s1, s1, s2]),
        ];
        report("genVW", worst(&sys, &v, &w, &conds));
    }
    out
}

// ---------------------------------------------------------------- transfer functions

/// Dense first-order formulas with explicit Kronecker products.
pub struct Oracle<'a>(pub &'a FirstOrderData);

impl Oracle<'_> {
    fn res(&self, s: C, x: &CMatrix) -> CMatrix {
        let d = self.0;
        let k = &d.e * s - &d.a;
        k.lu().solve(x).unwrap()
    }
    fn n_dense(&self) -> CMatrix {
        let d = self.0;
        let n = d.e.nrows();
        let mut out = CMatrix::zeros(n, n * d.n.len());
        for (j, nj) in d.n.iter().enumerate() {
            out.columns_mut(j * n, n).copy_from(nj);
        }
        out
    }
    fn n_apply(&self, x: &CMatrix) -> CMatrix {
        let m = self.0.n.len();
        self.n_dense() * CMatrix::identity(m, m).kronecker(x)
    }
    pub fn g1s(&self, s: C) -> CMatrix {
        self.res(s, &self.0.b)
    }
    pub fn g2s(&self, s1: C, s2: C) -> CMatrix {
        let h = &self.0.h;
        let (a, b) = (self.g1s(s1), self.g1s(s2));
        let rhs = h * a.kronecker(&b) + h * b.kronecker(&a) + self.n_apply(&a) + self.n_apply(&b);
        self.res(s1 + s2, &rhs) * C::new(0.5, 0.0)
    }
    pub fn g3s(&self, s1: C, s2: C, s3: C) -> CMatrix {
        let h = &self.0.h;
        let (p1, p2, p3) = (self.g1s(s1), self.g1s(s2), self.g1s(s3));
        let (p12, p13, p23) = (self.g2s(s1, s2), self.g2s(s1, s3), self.g2s(s2, s3));
        let rhs = h * p12.kronecker(&p3)
            + h * p13.kronecker(&p2)
            + h * p23.kronecker(&p1)
            + h * p1.kronecker(&p23)
            + h * p2.kronecker(&p13)
            + h * p3.kronecker(&p12)
            + self.n_apply(&p12)
            + self.n_apply(&p13)
            + self.n_apply(&p23);
        self.res(s1 + s2 + s3, &rhs) * C::new(1.0 / 6.0, 0.0)
    }
    pub fn nb(&self, s1: C, s2: C) -> CMatrix {
        self.res(s2, &self.n_apply(&self.g1s(s1)))
    }
    pub fn nnb(&self, s1: C, s2: C, s3: C) -> CMatrix {
        self.res(s3, &self.n_apply(&self.nb(s1, s2)))
    }
    pub fn hbb(&self, s1: C, s2: C, s3: C) -> CMatrix {
        self.res(s3, &(&self.0.h * self.g1s(s2).kronecker(&self.g1s(s1))))
    }
}

pub fn points(g: &mut ChaCha8Rng) -> (C, C, C) {
    let mut p = || C::new(g.gen::<f64>() - 0.5, 4.0 * (g.gen::<f64>() - 0.5));
    (p(), p(), p())
}

/// Structured evaluation against the dense oracle at 20 point tuples.
pub fn first_order_oracle() -> Findings {
    let mut out = Findings::new();
    for t in 0..20u64 {
        let (m, p) = (1 + t as usize % 3, 1 + (t as usize / 3) % 3);
        let (sys, d) = random_first_order(t, 4 + t as usize % 4, m, p);
        let o = Oracle(&d);
        let (s1, s2, s3) = points(&mut rng(100 + t));
        let ev = TfEvaluator::new(&sys);
        let cases = [
            ("G1", ev.sym_tf(1, &[s1]).unwrap(), &d.c * o.g1s(s1)),
            ("G2", ev.sym_tf(2, &[s1, s2]).unwrap(), &d.c * o.g2s(s1, s2)),
            (
                "G3",
                ev.sym_tf(3, &[s1, s2, s3]).unwrap(),
                &d.c * o.g3s(s1, s2, s3),
            ),
            (
                "B",
                ev.gen_tf(TfKind::GenB, &[s1]).unwrap(),
                &d.c * o.g1s(s1),
            ),
            (
                "NB",
                ev.gen_tf(TfKind::GenNB, &[s1, s2]).unwrap(),
                &d.c * o.nb(s1, s2),
            ),
            (
                "NNB",
                ev.gen_tf(TfKind::GenNNB, &[s1, s2, s3]).unwrap(),
                &d.c * o.nnb(s1, s2, s3),
            ),
            (
                "HBB",
                ev.gen_tf(TfKind::GenHBB, &[s1, s2, s3]).unwrap(),
                &d.c * o.hbb(s1, s2, s3),
            ),
        ];
        for (name, got, want) in cases {
            out.push((format!("tuple {t} {name}"), rel(&want, &got)));
        }
    }
    out
}

pub const ALL_KINDS: [TfKind; 7] = [
    TfKind::Sym(1),
    TfKind::Sym(2),
    TfKind::Sym(3),
    TfKind::GenB,
    TfKind::GenNB,
    TfKind::GenNNB,
    TfKind::GenHBB,
];

/// Second-order evaluation against its companion embedding, `n <= 10`.
pub fn companion_equivalence() -> Findings {
    let mut out = Findings::new();
    for t in 0..10u64 {
        let n = 4 + t as usize % 7;
        let (sys, _) = random_second_order(200 + t, n, 1 + t as usize % 2, 1 + t as usize % 3);
        let comp = companion_embedding(&sys).unwrap();
        assert_eq!(comp.n, 2 * n);
        let (es, ec) = (TfEvaluator::new(&sys), TfEvaluator::new(&comp));
        let (s1, s2, s3) = points(&mut rng(300 + t));
        for kind in ALL_KINDS {
            let pt = &[s1, s2, s3][..kind.arity()];
            let e = rel(&ec.eval(kind, pt).unwrap(), &es.eval(kind, pt).unwrap());
            out.push((format!("tuple {t} {}", kind.label()), e));
        }
    }
    out
}

/// Level-2 swap and level-3 permutations on 30 random systems.
pub fn symmetry() -> Findings {
    let mut out = Findings::new();
    for t in 0..30u64 {
        let kind = KINDS[t as usize % 3];
        let sys = random_structured(
            kind,
            400 + t,
            10 + t as usize,
            1 + t as usize % 3,
            1 + t as usize % 2,
        );
        let ev = TfEvaluator::new(&sys);
        let mut g = rng(500 + t);
        let (a, b, c) = (rand_point(&mut g), rand_point(&mut g), rand_point(&mut g));
        let g2 = ev.sym_tf(2, &[a, b]).unwrap();
        out.push((
            format!("{t} {kind:?} level 2"),
            rel(&g2, &ev.sym_tf(2, &[b, a]).unwrap()),
        ));
        let g3 = ev.sym_tf(3, &[a, b, c]).unwrap();
        let e = [[a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]
            .iter()
            .map(|p| rel(&g3, &ev.sym_tf(3, p).unwrap()))
            .fold(0.0, f64::max);
        out.push((format!("{t} {kind:?} level 3"), e));
    }
    out
}

// ---------------------------------------------------------------- linear algebra

pub fn cmat(rows: usize, cols: usize, seed: u64) -> CMatrix {
    let mut g = rng(seed);
    DMatrix::from_fn(rows, cols, |_, _| {
        C::new(g.gen::<f64>() - 0.5, g.gen::<f64>() - 0.5)
    })
}

pub fn sparse_random(q: usize, n: usize, seed: u64) -> QuadraticOperator {
    let mut g = rng(seed);
    let entries: Vec<QuadEntry> = (0..3 * n)
        .map(|_| QuadEntry {
            slice: g.gen_range(0..n),
            row: g.gen_range(0..q),
            col: g.gen_range(0..n),
            value: C::new(g.gen::<f64>() - 0.5, g.gen::<f64>() - 0.5),
        })
        .collect();
    QuadraticOperator::from_entries(q, n, entries).unwrap()
}

/// `apply`, `apply_kron` and `jacobian` against the dense Kronecker form, `n <= 8`.
pub fn quadratic_apply() -> Findings {
    let mut out = Findings::new();
    for n in 1..=8 {
        let ops = [
            QuadraticOperator::from_matrix(cmat(n, n * n, n as u64)).unwrap(),
            sparse_random(n, n, 10 + n as u64),
        ];
        for (i, op) in ops.into_iter().enumerate() {
            let h = op.to_matrix();
            let (x, y) = (cmat(n, 1, 20 + n as u64), cmat(n, 1, 30 + n as u64));
            let got =
                CMatrix::from_column_slice(n, 1, &op.apply(x.as_slice(), y.as_slice()).unwrap());
            out.push((
                format!("n={n} repr {i} apply"),
                rel(&(&h * x.kronecker(&y)), &got),
            ));
            let (xm, ym) = (cmat(n, 3, 40 + n as u64), cmat(n, 2, 50 + n as u64));
            let e = rel(&(&h * kron(&xm, &ym)), &op.apply_kron(&xm, &ym).unwrap());
            out.push((format!("n={n} repr {i} kron"), e));
            // the Jacobian is the derivative of x -> H (x (x) x)
            let eye = CMatrix::identity(n, n);
            let want = &h * (kron(&eye, &x) + kron(&x, &eye));
            out.push((
                format!("n={n} repr {i} jacobian"),
                rel(&want, &op.jacobian(x.as_slice())),
            ));
        }
    }
    out
}

/// `compress` against `W^H H (V (x) V)`, `n <= 6`.
pub fn quadratic_compress() -> Findings {
    let mut out = Findings::new();
    for n in 1..=6 {
        for r in 1..=n {
            let ops = [
                QuadraticOperator::from_matrix(cmat(n, n * n, 60 + n as u64)).unwrap(),
                sparse_random(n, n, 70 + n as u64),
            ];
            for (i, op) in ops.into_iter().enumerate() {
                let (w, v) = (cmat(n, r, 80 + r as u64), cmat(n, r, 90 + r as u64));
                let want = w.adjoint() * op.to_matrix() * kron(&v, &v);
                out.push((
                    format!("n={n} r={r} repr {i}"),
                    rel(&want, &op.compress(&w, &v).unwrap().to_matrix()),
                ));
            }
        }
    }
    out
}

// ---------------------------------------------------------------- integration

fn scalar(v: f64) -> CMatrix {
    CMatrix::from_element(1, 1, C::new(v, 0.0))
}

/// Max error of the unit step response of `x' = -x + u` against `1 - e^-t`.
fn step_error(h: f64) -> f64 {
    let sys = qbmor::system::preset_first_order(
        scalar(1.0),
        scalar(-1.0),
        scalar(1.0),
        scalar(1.0),
        vec![],
        QuadraticOperator::zeros(1, 1),
    )
    .unwrap();
    let input = InputSignal::Step {
        m: 1,
        amplitude: 1.0,
    };
    let traj = simulate(&sys, &input, &SimOptions::new(4.0, h)).unwrap();
    traj.times
        .iter()
        .enumerate()
        .map(|(k, &t)| (traj.outputs[(0, k)] - (1.0 - (-t).exp())).abs())
        .fold(0.0, f64::max)
}

/// Errors at steps 0.2, 0.1, 0.05, 0.025 and the ratios under halving.
pub fn step_halving() -> (Vec<f64>, Vec<f64>) {
    let e: Vec<f64> = [0.2, 0.1, 0.05, 0.025]
        .iter()
        .map(|&h| step_error(h))
        .collect();
    let ratios = e.windows(2).map(|w| w[0] / w[1]).collect();
    (e, ratios)
}

// ---------------------------------------------------------------- Toda lattice

/// Accelerations of the original lattice with exponential forces.
pub fn exp_accel(k: &[f64], d: &[f64], q: &[f64], v: &[f64], u: f64) -> Vec<f64> {
    let l = q.len();
    let spring = |j: usize| {
        let stretch = if j + 1 < l { q[j] - q[j + 1] } else { q[j] };
        (k[j] * stretch).exp()
    };
    (0..l)
        .map(|j| {
            let left = if j == 0 { 1.0 } else { spring(j - 1) };
            let force = spring(j) - left;
            -d[j] * v[j] - force + if j == 0 { u } else { 0.0 }
        })
        .collect()
}

fn gamma_apply(k: &[f64], q: &[f64]) -> Vec<f64> {
    let l = q.len();
    (0..l)
        .map(|j| k[j] * (q[j] - if j + 1 < l { q[j + 1] } else { 0.0 }))
        .collect()
}

fn cvec(x: &[f64]) -> Vec<C> {
    x.iter().map(|&v| C::new(v, 0.0)).collect()
}

fn mat_vec(m: &CMatrix, x: &[C]) -> Vec<C> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum())
        .collect()
}

/// `M^-1` times the right-hand side of the lifted second-order equations.
fn lifted_accel(p: &SecondOrderParts, x: &[C], v: &[C], u: f64) -> Vec<f64> {
    let n = x.len();
    let uc = C::new(u, 0.0);
    let mut rhs = vec![C::new(0.0, 0.0); n];
    let terms = [
        mat_vec(&p.damping, v),
        mat_vec(&p.stiffness, x),
        p.h_pp.apply(x, x).unwrap(),
        p.h_pv.apply(x, v).unwrap(),
        p.h_vp.apply(v, x).unwrap(),
        p.h_vv.apply(v, v).unwrap(),
    ];
    for t in &terms {
        for i in 0..n {
            rhs[i] -= t[i];
        }
    }
    for f in [mat_vec(&p.n_p[0], x), mat_vec(&p.n_v[0], v)] {
        for i in 0..n {
            rhs[i] += f[i] * uc;
        }
    }
    for i in 0..n {
        rhs[i] += p.b_u[(i, 0)] * uc;
    }
    let sol = p
        .mass
        .clone()
        .lu()
        .solve(&CMatrix::from_column_slice(n, 1, &rhs))
        .unwrap();
    sol.iter().map(|c| c.re).collect()
}

/// Lifted vector field against the exponential one on consistent states,
/// relative to the largest acceleration component.
pub fn toda_vector_field() -> Findings {
    let mut out = Findings::new();
    for (trial, l) in [3usize, 8, 20].into_iter().enumerate() {
        let mut g = rng(trial as u64);
        let k: Vec<f64> = (0..l).map(|_| 0.5 + 1.5 * g.gen::<f64>()).collect();
        let d: Vec<f64> = (0..l).map(|_| g.gen::<f64>()).collect();
        let sys = build_toda(&TodaParams {
            particles: l,
            stiffness: k.clone(),
            damping: d.clone(),
        })
        .unwrap();
        let parts = second_order_parts(&sys).unwrap();
        assert!(parts.h_vp.is_empty());
        for s in 0..5 {
            let q: Vec<f64> = (0..l).map(|_| 0.6 * (g.gen::<f64>() - 0.5)).collect();
            let qd: Vec<f64> = (0..l).map(|_| g.gen::<f64>() - 0.5).collect();
            let u = g.gen::<f64>() - 0.5;
            let gq = gamma_apply(&k, &q);
            let gqd = gamma_apply(&k, &qd);
            let z: Vec<f64> = gq.iter().map(|a| a.exp() - 1.0).collect();
            let zd: Vec<f64> = (0..l).map(|j| (1.0 + z[j]) * gqd[j]).collect();
            let x = cvec(&[q.clone(), z.clone()].concat());
            let v = cvec(&[qd.clone(), zd].concat());
            let lifted = lifted_accel(&parts, &x, &v, u);

            let qdd = exp_accel(&k, &d, &q, &qd, u);
            let gqdd = gamma_apply(&k, &qdd);
            let zdd: Vec<f64> = (0..l)
                .map(|j| (1.0 + z[j]) * (gqdd[j] + gqd[j] * gqd[j]))
                .collect();
            let want = [qdd, zdd].concat();
            let scale = want.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let err = want
                .iter()
                .zip(&lifted)
                .fold(0.0f64, |a, (w, h)| a.max((w - h).abs()));
            out.push((format!("l={l} state {s}"), err / scale));
        }
    }
    out
}

/// Classical RK4 on `(q, q')` of the exponential model, output `q_1`.
fn rk4_output(k: &[f64], d: &[f64], input: &InputSignal, t_final: f64, h: f64) -> Vec<f64> {
    let l = k.len();
    let f = |t: f64, y: &[f64]| -> Vec<f64> {
        let mut u = [0.0];
        input.eval(t, &mut u);
        let a = exp_accel(k, d, &y[..l], &y[l..], u[0]);
        [y[l..].to_vec(), a].concat()
    };
    let axpy = |y: &[f64], a: f64, k: &[f64]| -> Vec<f64> {
        y.iter().zip(k).map(|(p, q)| p + a * q).collect()
    };
    let steps = (t_final / h).round() as usize;
    let mut y = vec![0.0; 2 * l];
    let mut out = vec![0.0];
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + h / 2.0, &axpy(&y, h / 2.0, &k1));
        let k3 = f(t + h / 2.0, &axpy(&y, h / 2.0, &k2));
        let k4 = f(t + h, &axpy(&y, h, &k3));
        for j in 0..2 * l {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        out.push(y[l]);
    }
    out
}

/// Relative L2 error of the lifted 20-particle simulation over 10 s against
/// RK4 on the exponential model.
pub fn toda_trajectory() -> f64 {
    let params = TodaParams {
        particles: 20,
        stiffness: vec![1.0],
        damping: vec![0.5],
    };
    let sys = build_toda(&params).unwrap();
    let t_final = 10.0;
    let gp = sample_gp_input(0.0, 1.0, &uniform_grid(t_final, 0.1), 4, 1).unwrap();
    let input = InputSignal::Sampled {
        times: gp.times.clone(),
        values: gp.values * 0.2,
    };
    let step = 5e-4;
    let qb = simulate(&sys, &input, &SimOptions::new(t_final, step)).unwrap();
    let k = params.stiffness_vec().unwrap();
    let d = params.damping_vec().unwrap();
    let reference = rk4_output(&k, &d, &input, t_final, step);
    let y = RMatrix::from_row_slice(1, reference.len(), &reference);
    relerr_l2(&y, &qb.outputs).unwrap()
}

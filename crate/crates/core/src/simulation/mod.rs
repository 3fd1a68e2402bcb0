//! Time-domain simulation with the implicit trapezoidal rule.
//!
//! Systems are brought into first-order form
//! `E x' = A x + sum_k A_k x(t - tau_k) + H (x (x) x) + sum_j u_j N_j x + B u`
//! (second-order systems through their companion form). Each step solves the trapezoidal equations with Newton's
//! method; the Jacobian is assembled in band storage under a fixed ordering.
//! Delays must be integer multiples of the step; the history is zero.

mod gp;

pub use gp::{sample_gp_input, uniform_grid, GpInputSignal};

use serde::{Deserialize, Serialize};

use crate::error::{MorError, Result};
use crate::linalg::ordering::choose_ordering;
use crate::linalg::{to_real, BandMatrix, RMatrix};
use crate::system::{companion_embedding, Structure, StructuredQbSystem};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum InputSignal {
    Zero {
        m: usize,
    },
    Step {
        m: usize,
        amplitude: f64,
    },
    /// piecewise linear through the samples, constant outside
    Sampled {
        times: Vec<f64>,
        values: RMatrix,
    },
}

impl InputSignal {
    pub fn channels(&self) -> usize {
        match self {
            InputSignal::Zero { m } | InputSignal::Step { m, .. } => *m,
            InputSignal::Sampled { values, .. } => values.nrows(),
        }
    }

    pub fn eval(&self, t: f64, out: &mut [f64]) {
        match self {
            InputSignal::Zero { .. } => out.iter_mut().for_each(|v| *v = 0.0),
            InputSignal::Step { amplitude, .. } => out.iter_mut().for_each(|v| *v = *amplitude),
            InputSignal::Sampled { times, values } => {
                let nt = times.len();
                if nt == 0 {
                    out.iter_mut().for_each(|v| *v = 0.0);
                    return;
                }
                let (i0, i1, w) = if t <= times[0] {
                    (0, 0, 0.0)
                } else if t >= times[nt - 1] {
                    (nt - 1, nt - 1, 0.0)
                } else {
                    let i = times.partition_point(|&s| s <= t) - 1;
                    let w = (t - times[i]) / (times[i + 1] - times[i]);
                    (i, i + 1, w)
                };
                for (j, o) in out.iter_mut().enumerate() {
                    *o = (1.0 - w) * values[(j, i0)] + w * values[(j, i1)];
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimOptions {
    pub t_final: f64,
    pub step: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    /// abort once `max |y|` exceeds this bound
    pub blowup_bound: Option<f64>,
    pub keep_states: bool,
}

impl SimOptions {
    pub fn new(t_final: f64, step: f64) -> Self {
        SimOptions {
            t_final,
            step,
            newton_tol: 1e-10,
            max_newton: 25,
            blowup_bound: None,
            keep_states: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `p x (steps + 1)`
    pub outputs: RMatrix,
    /// `n x (steps + 1)` when requested
    pub states: Option<RMatrix>,
    pub newton_iterations: usize,
}

#[derive(Clone, Debug, Default)]
struct Sparse {
    entries: Vec<(usize, usize, f64)>,
}

impl Sparse {
    fn from_dense(a: &RMatrix) -> Self {
        let mut entries = Vec::new();
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                let v = a[(i, j)];
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        Sparse { entries }
    }

    #[inline]
    fn mul_add(&self, x: &[f64], alpha: f64, out: &mut [f64]) {
        for &(i, j, v) in &self.entries {
            out[i] += alpha * v * x[j];
        }
    }
}

/// Real first-order time-domain data of a structured system.
struct TimeForm {
    n: usize,
    m: usize,
    p: usize,
    e: Sparse,
    a: Sparse,
    delayed: Vec<(f64, Sparse)>,
    b: Sparse,
    c: Sparse,
    nmats: Vec<Sparse>,
    /// `(slice, row, col, value)`
    h: Vec<(usize, usize, usize, f64)>,
}

fn time_form(sys: &StructuredQbSystem) -> Result<TimeForm> {
    if sys.structure == Structure::SecondOrder {
        return time_form(&companion_embedding(sys)?);
    }
    let n = sys.n;
    let mut e = RMatrix::zeros(n, n);
    let mut a = RMatrix::zeros(n, n);
    let mut delayed: Vec<(f64, RMatrix)> = Vec::new();
    for t in &sys.k.terms {
        let m = to_real(&t.matrix, "K(s) coefficient")?;
        match t.scalar.time_domain() {
            (1, d) if d == 0.0 => e += m,
            (0, d) if d == 0.0 => a -= m,
            (0, d) if d > 0.0 => match delayed.iter_mut().find(|(tau, _)| *tau == d) {
                Some((_, acc)) => *acc -= m,
                None => delayed.push((d, -m)),
            },
            _ => {
                return Err(MorError::Unsupported(format!(
                    "K(s) term {} has no first-order time-domain meaning",
                    t.scalar.label()
                )))
            }
        }
    }
    let constant = |f: &crate::system::MatrixFunction, what: &str| -> Result<RMatrix> {
        let mut out = RMatrix::zeros(f.rows, f.cols);
        for t in &f.terms {
            if t.scalar.time_domain() != (0, 0.0) {
                return Err(MorError::Unsupported(format!(
                    "{what} term {} must be constant",
                    t.scalar.label()
                )));
            }
            out += to_real(&t.matrix, what)?;
        }
        Ok(out)
    };
    let b = constant(&sys.b, "B(s)")?;
    let c = constant(&sys.c, "C(s)")?;
    let nmats = sys
        .n_blocks
        .iter()
        .map(|nb| constant(nb, "N(s)").map(|m| Sparse::from_dense(&m)))
        .collect::<Result<Vec<_>>>()?;
    let mut h = Vec::new();
    for t in &sys.h.terms {
        if t.first.time_domain() != (0, 0.0) || t.second.time_domain() != (0, 0.0) {
            return Err(MorError::Unsupported(
                "H(s1, s2) terms must be constant in first-order form".into(),
            ));
        }
        let entries = t.op.entries();
        let scale = entries.iter().fold(0.0f64, |m, q| m.max(q.value.norm()));
        for q in entries {
            if q.value.im.abs() > 1e-10 * scale {
                return Err(MorError::Unsupported("H has imaginary entries".into()));
            }
            h.push((q.slice, q.row, q.col, q.value.re));
        }
    }
    Ok(TimeForm {
        n,
        m: sys.m,
        p: sys.p,
        e: Sparse::from_dense(&e),
        a: Sparse::from_dense(&a),
        delayed: delayed
            .into_iter()
            .map(|(d, m)| (d, Sparse::from_dense(&m)))
            .collect(),
        b: Sparse::from_dense(&b),
        c: Sparse::from_dense(&c),
        nmats,
        h,
    })
}

/// Jacobian assembly in band storage under a fixed symmetric ordering.
struct JacobianPattern {
    inv: Option<Vec<usize>>,
    perm: Option<Vec<usize>>,
    kl: usize,
    ku: usize,
}

impl JacobianPattern {
    fn new(f: &TimeForm) -> Self {
        let mut pat: Vec<(usize, usize)> = (0..f.n).map(|i| (i, i)).collect();
        for s in [&f.e, &f.a].into_iter().chain(f.nmats.iter()) {
            pat.extend(s.entries.iter().map(|&(i, j, _)| (i, j)));
        }
        for &(k, i, l, _) in &f.h {
            pat.push((i, k));
            pat.push((i, l));
        }
        pat.sort_unstable();
        pat.dedup();
        let (perm, kl, ku) = choose_ordering(f.n, &pat);
        let inv = perm.as_ref().map(|p| {
            let mut inv = vec![0; f.n];
            for (new, &old) in p.iter().enumerate() {
                inv[old] = new;
            }
            inv
        });
        JacobianPattern { inv, perm, kl, ku }
    }

    #[inline]
    fn map(&self, i: usize) -> usize {
        match &self.inv {
            Some(inv) => inv[i],
            None => i,
        }
    }
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Integrate `sys` from zero initial state under `input`.
pub fn simulate(
    sys: &StructuredQbSystem,
    input: &InputSignal,
    opts: &SimOptions,
) -> Result<Trajectory> {
    if input.channels() != sys.m {
        return Err(MorError::dims("input channels", sys.m, input.channels()));
    }
    if !(opts.step > 0.0) || !(opts.t_final >= 0.0) {
        return Err(MorError::InvalidInput(format!(
            "need step > 0 and t_final >= 0, got step {} and t_final {}",
            opts.step, opts.t_final
        )));
    }
    let f = time_form(sys)?;
    let n = f.n;
    let h = opts.step;
    let steps = (opts.t_final / h).round() as usize;
    let mut lags = Vec::new();
    for (tau, m) in &f.delayed {
        let d = tau / h;
        let di = d.round();
        if (d - di).abs() > 1e-9 * di.max(1.0) || di < 1.0 {
            return Err(MorError::InvalidInput(format!(
                "delay {tau} is not a positive integer multiple of the step {h}"
            )));
        }
        lags.push((di as usize, m));
    }
    let pattern = JacobianPattern::new(&f);

    let mut history: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    let mut outputs = RMatrix::zeros(f.p, steps + 1);
    let mut times = Vec::with_capacity(steps + 1);
    let mut u_next = vec![0.0; f.m];
    let mut u_cur = vec![0.0; f.m];
    history.push(vec![0.0; n]);
    times.push(0.0);
    input.eval(0.0, &mut u_cur);

    // F(x, t) at the current step, with the delayed states of that step
    let rhs = |x: &[f64], u: &[f64], step_idx: usize, hist: &Vec<Vec<f64>>, out: &mut [f64]| {
        out.iter_mut().for_each(|v| *v = 0.0);
        f.a.mul_add(x, 1.0, out);
        for (lag, m) in &lags {
            if step_idx >= *lag {
                m.mul_add(&hist[step_idx - lag], 1.0, out);
            }
        }
        for &(k, i, l, v) in &f.h {
            out[i] += v * x[k] * x[l];
        }
        for (j, nm) in f.nmats.iter().enumerate() {
            if u[j] != 0.0 {
                nm.mul_add(x, u[j], out);
            }
        }
        f.b.mul_add(u, 1.0, out);
    };

    let mut f_cur = vec![0.0; n];
    rhs(&history[0], &u_cur, 0, &history, &mut f_cur);
    let mut f_new = vec![0.0; n];
    let mut ex = vec![0.0; n];
    let mut exn = vec![0.0; n];
    let mut res = vec![0.0; n];
    let mut work = vec![0.0; n];
    let mut y = vec![0.0; f.p];
    let mut newton_total = 0;

    for step in 1..=steps {
        let t = step as f64 * h;
        input.eval(t, &mut u_next);
        let xn = history[step - 1].clone();
        exn.iter_mut().for_each(|v| *v = 0.0);
        f.e.mul_add(&xn, 1.0, &mut exn);
        let mut x = xn.clone();
        let mut converged = false;
        for _ in 0..opts.max_newton {
            newton_total += 1;
            rhs(&x, &u_next, step, &history, &mut f_new);
            ex.iter_mut().for_each(|v| *v = 0.0);
            f.e.mul_add(&x, 1.0, &mut ex);
            for i in 0..n {
                res[i] = ex[i] - exn[i] - 0.5 * h * (f_new[i] + f_cur[i]);
            }
            let scale =
                max_abs(&ex) + max_abs(&exn) + 0.5 * h * (max_abs(&f_new) + max_abs(&f_cur));
            let rn = max_abs(&res);
            if !rn.is_finite() {
                break;
            }
            if rn <= opts.newton_tol * scale || scale == 0.0 {
                converged = true;
                break;
            }
            // J = E - h/2 (A + dH + sum u_j N_j)
            let mut band = BandMatrix::<f64>::zeros(n, pattern.kl, pattern.ku);
            for &(i, j, v) in &f.e.entries {
                band.add(pattern.map(i), pattern.map(j), v);
            }
            let c = -0.5 * h;
            for &(i, j, v) in &f.a.entries {
                band.add(pattern.map(i), pattern.map(j), c * v);
            }
            for (jn, nm) in f.nmats.iter().enumerate() {
                if u_next[jn] != 0.0 {
                    for &(i, j, v) in &nm.entries {
                        band.add(pattern.map(i), pattern.map(j), c * u_next[jn] * v);
                    }
                }
            }
            for &(k, i, l, v) in &f.h {
                let pi = pattern.map(i);
                band.add(pi, pattern.map(k), c * v * x[l]);
                band.add(pi, pattern.map(l), c * v * x[k]);
            }
            let lu = match band.factor() {
                Ok(lu) => lu,
                Err(e) => {
                    return Err(MorError::IntegrationFailure {
                        time: t,
                        reason: format!("Newton matrix singular: {e}"),
                    })
                }
            };
            match &pattern.perm {
                Some(p) => {
                    for (w, &old) in work.iter_mut().zip(p) {
                        *w = -res[old];
                    }
                    lu.solve_in_place(&mut work);
                    for (w, &old) in work.iter().zip(p) {
                        x[old] += *w;
                    }
                }
                None => {
                    for i in 0..n {
                        work[i] = -res[i];
                    }
                    lu.solve_in_place(&mut work);
                    for i in 0..n {
                        x[i] += work[i];
                    }
                }
            }
            let dn = max_abs(&work);
            if !dn.is_finite() {
                break;
            }
            if dn <= opts.newton_tol * max_abs(&x) {
                rhs(&x, &u_next, step, &history, &mut f_new);
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(MorError::IntegrationFailure {
                time: t,
                reason: format!("Newton did not converge in {} iterations", opts.max_newton),
            });
        }
        y.iter_mut().for_each(|v| *v = 0.0);
        f.c.mul_add(&x, 1.0, &mut y);
        let ym = max_abs(&y);
        if !ym.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(MorError::IntegrationFailure {
                time: t,
                reason: "state is no longer finite".into(),
            });
        }
        if let Some(bound) = opts.blowup_bound {
            if ym > bound {
                return Err(MorError::IntegrationFailure {
                    time: t,
                    reason: format!("output magnitude {ym:.3e} exceeds {bound:.3e}"),
                });
            }
        }
        for (j, v) in y.iter().enumerate() {
            outputs[(j, step)] = *v;
        }
        times.push(t);
        history.push(x);
        std::mem::swap(&mut f_cur, &mut f_new);
    }
    let states = if opts.keep_states {
        let mut s = RMatrix::zeros(n, steps + 1);
        for (j, x) in history.iter().enumerate() {
            s.column_mut(j).copy_from_slice(x);
        }
        Some(s)
    } else {
        None
    };
    Ok(Trajectory {
        times,
        outputs,
        states,
        newton_iterations: newton_total,
    })
}

/// Number of states of the first-order form used for time integration.
pub fn time_form_dim(sys: &StructuredQbSystem) -> usize {
    match sys.structure {
        Structure::SecondOrder => 2 * sys.n,
        _ => sys.n,
    }
}

//! Proper orthogonal decomposition from unit-step simulation snapshots.

use crate::error::{MorError, Result};
use crate::interpolation::ReductionBasis;
use crate::linalg::{to_complex, truncated_svd_basis_real, RMatrix};
use crate::simulation::{simulate, InputSignal, SimOptions};
use crate::system::{Structure, StructuredQbSystem};
use crate::tf::Work;

#[derive(Clone, Debug)]
pub struct SnapshotSet {
    /// one snapshot per column; second-order systems stack `[q; q']`
    pub states: RMatrix,
    /// simulation time of every column
    pub times: Vec<f64>,
    /// which training signal produced the snapshots
    pub input_descriptor: String,
    /// number of stacked `n`-blocks per snapshot (1 or 2)
    pub blocks: usize,
    /// implicit time steps over all training runs
    pub steps: usize,
    pub newton_iterations: usize,
}

/// One unit-step run per input channel (the other channels held at zero),
/// keeping every `stride`-th state of each run. The runs are concatenated.
pub fn collect_snapshots(
    sys: &StructuredQbSystem,
    t_final: f64,
    step: f64,
    stride: usize,
) -> Result<SnapshotSet> {
    if stride == 0 {
        return Err(MorError::InvalidInput(
            "snapshot stride must be positive".into(),
        ));
    }
    let mut opts = SimOptions::new(t_final, step);
    opts.keep_states = true;
    let mut blocks = Vec::new();
    let mut times = Vec::new();
    let mut steps = 0;
    let mut newton = 0;
    for j in 0..sys.m {
        let input = InputSignal::Sampled {
            times: vec![0.0],
            values: RMatrix::from_fn(sys.m, 1, |i, _| if i == j { 1.0 } else { 0.0 }),
        };
        let traj = simulate(sys, &input, &opts)?;
        let all = traj.states.expect("states requested");
        let cols: Vec<usize> = (0..all.ncols()).step_by(stride).collect();
        blocks.push(RMatrix::from_fn(all.nrows(), cols.len(), |i, c| {
            all[(i, cols[c])]
        }));
        times.extend(cols.iter().map(|&c| traj.times[c]));
        steps += traj.times.len() - 1;
        newton += traj.newton_iterations;
    }
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let mut states = RMatrix::zeros(rows, times.len());
    let mut c0 = 0;
    for b in &blocks {
        states.columns_mut(c0, b.ncols()).copy_from(b);
        c0 += b.ncols();
    }
    Ok(SnapshotSet {
        states,
        times,
        input_descriptor: format!("unit step per input ({} runs)", sys.m),
        blocks: if sys.structure == Structure::SecondOrder {
            2
        } else {
            1
        },
        steps,
        newton_iterations: newton,
    })
}

/// Time steps per training run for a POD basis whose cost matches `work`
/// linear solves. At least `r` snapshots in total are kept so the basis can
/// reach order `r`.
pub fn equal_cost_steps(work: usize, inputs: usize, r: usize) -> usize {
    let inputs = inputs.max(1);
    work.div_ceil(inputs).max(r.div_ceil(inputs)).max(1)
}

/// Step size spreading `steps` implicit steps over `[0, t_final]`, rounded
/// down to a multiple of `base_step` that still divides every delay of `sys`.
pub fn coarse_step(sys: &StructuredQbSystem, t_final: f64, base_step: f64, steps: usize) -> f64 {
    let delays: Vec<f64> = sys
        .k
        .terms
        .iter()
        .map(|t| t.scalar.time_domain().1)
        .filter(|&tau| tau > 0.0)
        .collect();
    let target = (t_final / steps.max(1) as f64 / base_step).floor().max(1.0) as usize;
    (1..=target)
        .rev()
        .map(|k| k as f64 * base_step)
        .find(|&h| {
            delays.iter().all(|&tau| {
                let q = tau / h;
                q >= 1.0 - 1e-9 && (q - q.round()).abs() <= 1e-9 * q.max(1.0)
            })
        })
        .unwrap_or(base_step)
}

/// Leading left singular vectors of the snapshots. For stacked second-order
/// snapshots the position and velocity parts are placed side by side so the
/// basis lives in the configuration space.
pub fn pod_basis(snaps: &SnapshotSet, r: usize) -> Result<ReductionBasis> {
    let x = if snaps.blocks == 1 {
        snaps.states.clone()
    } else {
        let n = snaps.states.nrows() / snaps.blocks;
        let k = snaps.states.ncols();
        let mut x = RMatrix::zeros(n, k * snaps.blocks);
        for b in 0..snaps.blocks {
            x.columns_mut(b * k, k)
                .copy_from(&snaps.states.rows(b * n, n));
        }
        x
    };
    if r > x.nrows() {
        return Err(MorError::TargetOrderUnreachable {
            requested: r,
            reason: format!("state dimension is {}", x.nrows()),
        });
    }
    let v = to_complex(&truncated_svd_basis_real(&x, r)?);
    let mut basis = ReductionBasis::galerkin(v, "POD");
    basis.work = Work {
        factorizations: snaps.newton_iterations,
        solves: snaps.newton_iterations,
    };
    Ok(basis)
}

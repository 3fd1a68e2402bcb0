//! Smooth random input signals drawn from a Gaussian process with constant
//! mean and squared-exponential covariance.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::InputSignal;
use crate::error::{MorError, Result};
use crate::linalg::RMatrix;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GpInputSignal {
    pub mean: f64,
    pub smoothing: f64,
    pub seed: u64,
    pub times: Vec<f64>,
    /// one row per input channel
    pub values: RMatrix,
    /// diagonal shift that made the covariance factorizable
    pub jitter: f64,
}

impl GpInputSignal {
    pub fn to_input(&self) -> InputSignal {
        InputSignal::Sampled {
            times: self.times.clone(),
            values: self.values.clone(),
        }
    }
}

const JITTER_START: f64 = 1e-12;
const JITTER_CAP: f64 = 1.0;

/// Sample `m` independent channels on `grid`. The jitter added to the
/// covariance diagonal grows by decades until the Cholesky factorization
/// succeeds; the Gram matrix is positive semidefinite, so the capped shift
/// always factorizes.
pub fn sample_gp_input(
    mean: f64,
    smoothing: f64,
    grid: &[f64],
    seed: u64,
    m: usize,
) -> Result<GpInputSignal> {
    if smoothing < 0.0 || smoothing.is_nan() {
        return Err(MorError::InvalidInput(format!(
            "smoothing must be nonnegative, got {smoothing}"
        )));
    }
    let nt = grid.len();
    let gram = DMatrix::from_fn(nt, nt, |i, j| {
        if smoothing == 0.0 {
            if i == j {
                1.0
            } else {
                0.0
            }
        } else {
            let d = (grid[i] - grid[j]) / smoothing;
            (-0.5 * d * d).exp()
        }
    });
    let (chol, jitter) = {
        let mut jitter = 0.0;
        loop {
            let mut g = gram.clone();
            for i in 0..nt {
                g[(i, i)] += jitter;
            }
            if let Some(c) = Cholesky::new(g) {
                break (c, jitter);
            }
            jitter = if jitter == 0.0 {
                JITTER_START
            } else {
                jitter * 10.0
            };
            if jitter > JITTER_CAP {
                jitter = JITTER_CAP;
            }
        }
    };
    let l = chol.l();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = RMatrix::zeros(m, nt);
    for ch in 0..m {
        let z = DVector::from_fn(nt, |_, _| StandardNormal.sample(&mut rng));
        let x = &l * z;
        for t in 0..nt {
            values[(ch, t)] = mean + x[t];
        }
    }
    Ok(GpInputSignal {
        mean,
        smoothing,
        seed,
        times: grid.to_vec(),
        values,
        jitter,
    })
}

/// Uniform grid `0, dt, ..., t_final`.
pub fn uniform_grid(t_final: f64, dt: f64) -> Vec<f64> {
    let steps = (t_final / dt).round() as usize;
    (0..=steps).map(|i| i as f64 * dt).collect()
}

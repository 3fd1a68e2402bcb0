//! End-to-end comparison runs: build a benchmark, reduce it with every
//! requested method, simulate full and reduced models under a shared random
//! input and sweep their transfer functions.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{build_rod, build_toda, RodParams, TodaParams};
use crate::error::{MorError, Result};
use crate::interpolation::{
    method_tag, strategy_avg, strategy_equi, Compression, Method, ReductionBasis, Sidedness,
    StrategyOptions,
};
use crate::linalg::{logspace, DEFAULT_RANK_TOL};
use crate::metrics::{
    hinf_relerr1, hinf_relerr2, relerr_freq1, relerr_freq2, relerr_l2, relerr_linf, ErrorReport,
};
use crate::pod::{coarse_step, collect_snapshots, equal_cost_steps, pod_basis};
use crate::projection::{project, split_congruence, system_id, ReducedModel};
use crate::simulation::{
    sample_gp_input, simulate, uniform_grid, GpInputSignal, SimOptions, Trajectory,
};
use crate::system::StructuredQbSystem;
use crate::tf::{sweep_level1_values, sweep_level2_values, Level1Sweep, Level2Sweep};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSpec {
    HeatedRod(RodParams),
    Toda(TodaParams),
    Load { path: PathBuf },
}

impl SystemSpec {
    pub fn build(&self) -> Result<StructuredQbSystem> {
        match self {
            SystemSpec::HeatedRod(p) => build_rod(p),
            SystemSpec::Toda(p) => build_toda(p),
            SystemSpec::Load { path } => crate::io::load_system(path),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStrategy {
    Equi,
    Avg,
}

/// One row of the method roster.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodSpec {
    Interpolation {
        method: Method,
        side: Sidedness,
        strategy: PointStrategy,
    },
    /// POD whose training cost matches `SymInt(V,equi)`
    PodEqualCost,
    /// POD trained on the full unit-step responses
    PodAvg,
}

impl MethodSpec {
    pub fn tag(&self) -> String {
        match self {
            MethodSpec::Interpolation {
                method,
                side,
                strategy,
            } => method_tag(
                *method,
                *side,
                match strategy {
                    PointStrategy::Equi => "equi",
                    PointStrategy::Avg => "avg",
                },
            ),
            MethodSpec::PodEqualCost => "POD(equi-cost)".into(),
            MethodSpec::PodAvg => "POD(avg)".into(),
        }
    }

    pub fn is_pod(&self) -> bool {
        matches!(self, MethodSpec::PodEqualCost | MethodSpec::PodAvg)
    }

    /// The ten methods compared on the benchmarks, in table order.
    pub fn roster() -> Vec<MethodSpec> {
        let mut out = Vec::new();
        for method in [Method::SymInt, Method::GenInt] {
            for side in [Sidedness::OneSided, Sidedness::TwoSided] {
                for strategy in [PointStrategy::Equi, PointStrategy::Avg] {
                    out.push(MethodSpec::Interpolation {
                        method,
                        side,
                        strategy,
                    });
                }
            }
        }
        out.push(MethodSpec::PodEqualCost);
        out.push(MethodSpec::PodAvg);
        out
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for MethodSpec {
    type Err = MorError;

    /// Accepts tags such as `SymInt(VW,avg)`, `genint(v, equi)`, `POD(avg)`.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect::<String>()
            .to_ascii_lowercase();
        let bad = || MorError::InvalidInput(format!("unknown method tag `{s}`"));
        let (head, rest) = compact.split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        if head == "pod" {
            return match args {
                "equi-cost" | "equi_cost" | "equi" => Ok(MethodSpec::PodEqualCost),
                "avg" => Ok(MethodSpec::PodAvg),
                _ => Err(bad()),
            };
        }
        let method = match head {
            "symint" => Method::SymInt,
            "genint" => Method::GenInt,
            _ => return Err(bad()),
        };
        let (side, strategy) = args.split_once(',').ok_or_else(bad)?;
        let side = match side {
            "v" => Sidedness::OneSided,
            "vw" => Sidedness::TwoSided,
            _ => return Err(bad()),
        };
        let strategy = match strategy {
            "equi" => PointStrategy::Equi,
            "avg" => PointStrategy::Avg,
            _ => return Err(bad()),
        };
        Ok(MethodSpec::Interpolation {
            method,
            side,
            strategy,
        })
    }
}

impl Serialize for MethodSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.tag())
    }
}

impl<'de> Deserialize<'de> for MethodSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimeConfig {
    pub t_final: f64,
    pub step: f64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            t_final: 30.0,
            step: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GpConfig {
    pub mean: f64,
    pub smoothing: f64,
    pub seed: u64,
    /// spacing of the GP sample grid; `None` picks `max(step, smoothing / 10)`
    pub grid_step: Option<f64>,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            mean: 2.0,
            smoothing: 0.25,
            seed: 1,
            grid_step: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub system: SystemSpec,
    pub methods: Vec<MethodSpec>,
    /// order of every basis; split congruence doubles it
    pub r: usize,
    pub freq_range: (f64, f64),
    /// sample frequencies of the `avg` strategies
    pub oversample: usize,
    pub compression: Compression,
    pub rank_tol: f64,
    pub time: TimeConfig,
    pub gp: GpConfig,
    /// points of the level-1 frequency grid
    pub sweep_points: usize,
    /// points per axis of the level-2 frequency grid; 0 skips it
    pub sweep2_points: usize,
    /// block split row for congruence-preserving bases
    pub split: Option<usize>,
    /// reduced simulations are stopped once `|y|` exceeds this multiple of the full output's maximum
    pub blowup_factor: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::heated_rod()
    }
}

impl RunConfig {
    /// Time-delay benchmark at desk scale.
    pub fn heated_rod() -> Self {
        RunConfig {
            system: SystemSpec::HeatedRod(RodParams::default()),
            methods: MethodSpec::roster(),
            r: 24,
            freq_range: (1e-3, 1e3),
            oversample: 10,
            compression: Compression::PivotedQr,
            rank_tol: DEFAULT_RANK_TOL,
            time: TimeConfig::default(),
            gp: GpConfig::default(),
            sweep_points: 500,
            sweep2_points: 100,
            split: None,
            blowup_factor: 1e6,
        }
    }

    /// Toda lattice at desk scale with position/auxiliary split bases.
    pub fn toda() -> Self {
        let params = TodaParams::default();
        let split = params.particles;
        RunConfig {
            system: SystemSpec::Toda(params),
            r: 20,
            time: TimeConfig {
                t_final: 100.0,
                step: 0.01,
            },
            gp: GpConfig {
                mean: 0.0,
                smoothing: 2.0,
                seed: 1,
                grid_step: None,
            },
            split: Some(split),
            ..RunConfig::heated_rod()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return Err(MorError::InvalidInput("r must be at least 1".into()));
        }
        let (lo, hi) = self.freq_range;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(MorError::InvalidInput(format!(
                "frequency range [{lo}, {hi}] must satisfy 0 < lo < hi"
            )));
        }
        if !(self.time.step > 0.0 && self.time.t_final > 0.0) {
            return Err(MorError::InvalidInput(
                "time step and horizon must be positive".into(),
            ));
        }
        if self.sweep_points == 0 {
            return Err(MorError::InvalidInput(
                "sweep_points must be at least 1".into(),
            ));
        }
        if !(self.blowup_factor > 1.0) {
            return Err(MorError::InvalidInput("blowup_factor must exceed 1".into()));
        }
        Ok(())
    }

    pub fn strategy_options(&self) -> StrategyOptions {
        StrategyOptions {
            range: self.freq_range,
            rank_tol: self.rank_tol,
            oversample: self.oversample,
            compression: self.compression,
        }
    }

    pub fn gp_grid_step(&self) -> f64 {
        self.gp
            .grid_step
            .unwrap_or_else(|| self.time.step.max(self.gp.smoothing / 10.0))
    }

    pub fn level1_grid(&self) -> Vec<f64> {
        logspace(self.freq_range.0, self.freq_range.1, self.sweep_points)
    }

    pub fn level2_grid(&self) -> Vec<f64> {
        logspace(self.freq_range.0, self.freq_range.1, self.sweep2_points)
    }
}

/// Basis for one method before projection.
pub fn build_basis(
    sys: &StructuredQbSystem,
    spec: MethodSpec,
    cfg: &RunConfig,
) -> Result<ReductionBasis> {
    let opts = cfg.strategy_options();
    let basis = match spec {
        MethodSpec::Interpolation {
            method,
            side,
            strategy,
        } => match strategy {
            PointStrategy::Equi => strategy_equi(sys, method, side, cfg.r, &opts)?,
            PointStrategy::Avg => strategy_avg(sys, method, side, cfg.r, &opts)?,
        },
        MethodSpec::PodAvg => {
            let snaps = collect_snapshots(sys, cfg.time.t_final, cfg.time.step, 1)?;
            let mut b = pod_basis(&snaps, cfg.r)?;
            b.method_tag = spec.tag();
            b
        }
        MethodSpec::PodEqualCost => {
            let reference = strategy_equi(sys, Method::SymInt, Sidedness::OneSided, cfg.r, &opts)?;
            let mut steps = equal_cost_steps(reference.work.total(), sys.m, cfg.r);
            // Newton may fail on very coarse steps; refine until the training run succeeds
            let snaps = loop {
                let step = coarse_step(sys, cfg.time.t_final, cfg.time.step, steps);
                match collect_snapshots(sys, cfg.time.t_final, step, 1) {
                    Ok(s) => break s,
                    Err(MorError::IntegrationFailure { .. }) if step > cfg.time.step => steps *= 2,
                    Err(e) => return Err(e),
                }
            };
            let mut b = pod_basis(&snaps, cfg.r)?;
            b.method_tag = spec.tag();
            b
        }
    };
    match cfg.split {
        Some(split) => split_congruence(&basis, split),
        None => Ok(basis),
    }
}

pub fn reduce_one(
    sys: &StructuredQbSystem,
    spec: MethodSpec,
    cfg: &RunConfig,
) -> Result<ReducedModel> {
    let basis = build_basis(sys, spec, cfg)?;
    let mut red = project(sys, &basis)?;
    red.method_tag = spec.tag();
    Ok(red)
}

/// Outcome of one method; failures do not affect the other methods.
pub struct MethodOutcome {
    pub spec: MethodSpec,
    pub model: Result<ReducedModel>,
}

pub fn run_reduce(sys: &StructuredQbSystem, cfg: &RunConfig) -> Result<Vec<MethodOutcome>> {
    cfg.validate()?;
    Ok(cfg
        .methods
        .par_iter()
        .map(|&spec| MethodOutcome {
            spec,
            model: reduce_one(sys, spec, cfg),
        })
        .collect())
}

/// Full-model data shared by every method.
pub struct Reference {
    pub system_id: String,
    pub input: GpInputSignal,
    pub trajectory: Trajectory,
    pub level1: Level1Sweep,
    pub level2: Option<Level2Sweep>,
}

pub fn gp_input(sys: &StructuredQbSystem, cfg: &RunConfig) -> Result<GpInputSignal> {
    let grid = uniform_grid(cfg.time.t_final, cfg.gp_grid_step());
    sample_gp_input(cfg.gp.mean, cfg.gp.smoothing, &grid, cfg.gp.seed, sys.m)
}

pub fn sim_options(cfg: &RunConfig) -> SimOptions {
    SimOptions::new(cfg.time.t_final, cfg.time.step)
}

pub fn reference(sys: &StructuredQbSystem, cfg: &RunConfig) -> Result<Reference> {
    cfg.validate()?;
    let input = gp_input(sys, cfg)?;
    let trajectory = simulate(sys, &input.to_input(), &sim_options(cfg))?;
    let level1 = sweep_level1_values(sys, &cfg.level1_grid());
    let level2 = (cfg.sweep2_points > 0).then(|| {
        let g = cfg.level2_grid();
        sweep_level2_values(sys, &g, &g)
    });
    Ok(Reference {
        system_id: system_id(sys),
        input,
        trajectory,
        level1,
        level2,
    })
}

/// Per-method results of a comparison.
pub struct Evaluation {
    pub report: ErrorReport,
    pub trajectory: Option<Trajectory>,
    pub freq1: Vec<Option<f64>>,
    pub freq2: Option<Vec<Vec<Option<f64>>>>,
}

pub fn evaluate(red: &ReducedModel, reference: &Reference, cfg: &RunConfig) -> Evaluation {
    let mut opts = sim_options(cfg);
    opts.blowup_bound = Some(cfg.blowup_factor * reference.trajectory.outputs.amax());
    let sim = simulate(&red.system, &reference.input.to_input(), &opts);
    let y = &reference.trajectory.outputs;
    let (l2, linf, trajectory, note) = match sim {
        Ok(t) => match (relerr_l2(y, &t.outputs), relerr_linf(y, &t.outputs)) {
            (Ok(a), Ok(b)) if a.is_finite() && b.is_finite() => (a, b, Some(t), None),
            (Err(e), _) | (_, Err(e)) => {
                (f64::INFINITY, f64::INFINITY, Some(t), Some(e.to_string()))
            }
            _ => (
                f64::INFINITY,
                f64::INFINITY,
                Some(t),
                Some("non-finite output".into()),
            ),
        },
        Err(e) => (f64::INFINITY, f64::INFINITY, None, Some(e.to_string())),
    };
    let red1 = sweep_level1_values(&red.system, &reference.level1.omegas);
    let h1 = hinf_relerr1(&reference.level1, &red1);
    let freq1 = relerr_freq1(&reference.level1, &red1);
    let (h2, freq2) = match &reference.level2 {
        Some(full2) => {
            let red2 = sweep_level2_values(&red.system, &full2.omegas1, &full2.omegas2);
            (hinf_relerr2(full2, &red2), Some(relerr_freq2(full2, &red2)))
        }
        None => (f64::NAN, None),
    };
    Evaluation {
        report: ErrorReport {
            method: red.method_tag.clone(),
            relerr_l2: l2,
            relerr_linf: linf,
            relerr_hinf1: h1,
            relerr_hinf2: h2,
            stable: note.is_none(),
            note,
        },
        trajectory,
        freq1,
        freq2,
    }
}

pub struct MethodResult {
    pub spec: MethodSpec,
    pub model: Option<ReducedModel>,
    pub evaluation: Evaluation,
}

impl MethodResult {
    pub fn checks_passed(&self) -> bool {
        self.model.as_ref().is_none_or(|m| m.all_checks_passed())
    }
}

pub struct Comparison {
    pub reference: Reference,
    pub results: Vec<MethodResult>,
}

impl Comparison {
    pub fn reports(&self) -> Vec<ErrorReport> {
        self.results
            .iter()
            .map(|r| r.evaluation.report.clone())
            .collect()
    }

    pub fn all_checks_passed(&self) -> bool {
        self.results.iter().all(|r| r.checks_passed())
    }
}

/// Reduce with every configured method and compare against the full model.
/// Methods that cannot be built report infinity in every column.
pub fn run_compare(sys: &StructuredQbSystem, cfg: &RunConfig) -> Result<Comparison> {
    let reference = reference(sys, cfg)?;
    let outcomes = run_reduce(sys, cfg)?;
    let results = outcomes
        .into_par_iter()
        .map(|o| {
            let tag = o.spec.tag();
            match o.model {
                Ok(mut m) => {
                    m.parent_id = reference.system_id.clone();
                    let evaluation = evaluate(&m, &reference, cfg);
                    MethodResult {
                        spec: o.spec,
                        model: Some(m),
                        evaluation,
                    }
                }
                Err(e) => MethodResult {
                    spec: o.spec,
                    model: None,
                    evaluation: Evaluation {
                        report: ErrorReport::failed(&tag, e.to_string()),
                        trajectory: None,
                        freq1: vec![None; reference.level1.omegas.len()],
                        freq2: None,
                    },
                },
            }
        })
        .collect();
    Ok(Comparison { reference, results })
}

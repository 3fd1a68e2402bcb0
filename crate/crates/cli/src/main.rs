use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qbmor::experiment::{MethodSpec, RunConfig, SystemSpec};
use qbmor::interpolation::Compression;

mod commands;

#[derive(Parser)]
#[command(
    name = "qbmor",
    version,
    about = "Structure-preserving reduction of quadratic-bilinear systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build every requested reduced model and check its interpolation conditions
    Reduce(RunArgs),
    /// Simulate the full system, or a saved reduced model, under the configured random input
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// reduced model directory written by `reduce`
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Frequency sweeps of the full system and, optionally, saved reduced models
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long = "model")]
        models: Vec<PathBuf>,
    },
    /// Reduce, simulate and sweep, then write the error table
    Compare(RunArgs),
    /// Write the configured system as a matrix directory
    Export {
        #[command(flatten)]
        run: RunArgs,
        /// target directory (default: <out>/system)
        #[arg(long)]
        to: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// heated rod with delayed feedback
    Rod,
    /// Toda lattice in second-order form
    Toda,
}

#[derive(Clone, Copy, ValueEnum)]
enum CompressionArg {
    PivotedQr,
    Svd,
}

#[derive(Args, Clone)]
pub struct RunArgs {
    /// TOML run configuration; flags below override its entries
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// start from a built-in configuration instead of a file
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// output directory
    #[arg(long, short, env = "QBMOR_OUT_DIR", default_value = "qbmor-out")]
    out: PathBuf,
    /// load the full system from a matrix directory
    #[arg(long)]
    system_dir: Option<PathBuf>,
    /// rod: interior grid points
    #[arg(long)]
    n: Option<usize>,
    /// rod: feedback delay
    #[arg(long)]
    delay: Option<f64>,
    /// Toda: number of particles
    #[arg(long)]
    particles: Option<usize>,
    /// Toda: spring constants, one value or one per particle
    #[arg(long, value_delimiter = ',')]
    stiffness: Option<Vec<f64>>,
    /// Toda: damping coefficients, one value or one per particle
    #[arg(long, value_delimiter = ',')]
    damping: Option<Vec<f64>>,
    /// comma-separated method tags, e.g. "SymInt(V,equi),POD(avg)"; repeatable
    #[arg(long)]
    methods: Option<Vec<String>>,
    /// reduced order (per block when splitting)
    #[arg(long, short)]
    r: Option<usize>,
    #[arg(long)]
    omega_min: Option<f64>,
    #[arg(long)]
    omega_max: Option<f64>,
    /// sample frequencies of the avg strategies
    #[arg(long)]
    oversample: Option<usize>,
    #[arg(long, value_enum)]
    compression: Option<CompressionArg>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// mean of the random input
    #[arg(long)]
    mean: Option<f64>,
    /// length scale of the random input
    #[arg(long)]
    smoothing: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sweep_points: Option<usize>,
    /// points per axis of the level-2 sweep (0 disables it)
    #[arg(long)]
    sweep2_points: Option<usize>,
    /// block split row for congruence-preserving bases
    #[arg(long)]
    split: Option<usize>,
    /// disable splitting even if the configuration asks for it
    #[arg(long, conflicts_with = "split")]
    no_split: bool,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, self.preset) {
            (Some(path), None) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            (None, Some(Preset::Toda)) => RunConfig::toda(),
            (None, Some(Preset::Rod)) | (None, None) => RunConfig::heated_rod(),
            (Some(_), Some(_)) => bail!("--config and --preset are mutually exclusive"),
        };
        if let Some(dir) = &self.system_dir {
            cfg.system = SystemSpec::Load { path: dir.clone() };
        }
        match &mut cfg.system {
            SystemSpec::HeatedRod(p) => {
                if let Some(n) = self.n {
                    p.n = n;
                }
                if let Some(d) = self.delay {
                    p.delay = d;
                }
                if self.particles.is_some() || self.stiffness.is_some() || self.damping.is_some() {
                    bail!("Toda options given for a heated-rod system");
                }
            }
            SystemSpec::Toda(p) => {
                if let Some(l) = self.particles {
                    p.particles = l;
                    if cfg.split.is_some() {
                        cfg.split = Some(l);
                    }
                }
                if let Some(k) = &self.stiffness {
                    p.stiffness = k.clone();
                }
                if let Some(d) = &self.damping {
                    p.damping = d.clone();
                }
                if self.n.is_some() || self.delay.is_some() {
                    bail!("heated-rod options given for a Toda system");
                }
            }
            SystemSpec::Load { .. } => {
                if self.n.is_some() || self.delay.is_some() || self.particles.is_some() {
                    bail!("benchmark size options do not apply to a loaded system");
                }
            }
        }
        if let Some(list) = &self.methods {
            cfg.methods = list
                .iter()
                .flat_map(|s| split_tags(s))
                .map(|t| t.parse::<MethodSpec>())
                .collect::<qbmor::Result<_>>()?;
        }
        macro_rules! set {
            ($field:expr, $value:expr) => {
                if let Some(v) = $value {
                    $field = v;
                }
            };
        }
        set!(cfg.r, self.r);
        set!(cfg.freq_range.0, self.omega_min);
        set!(cfg.freq_range.1, self.omega_max);
        set!(cfg.oversample, self.oversample);
        set!(cfg.time.t_final, self.t_final);
        set!(cfg.time.step, self.step);
        set!(cfg.gp.mean, self.mean);
        set!(cfg.gp.smoothing, self.smoothing);
        set!(cfg.gp.seed, self.seed);
        set!(cfg.sweep_points, self.sweep_points);
        set!(cfg.sweep2_points, self.sweep2_points);
        if let Some(c) = self.compression {
            cfg.compression = match c {
                CompressionArg::PivotedQr => Compression::PivotedQr,
                CompressionArg::Svd => Compression::Svd,
            };
        }
        if self.split.is_some() {
            cfg.split = self.split;
        }
        if self.no_split {
            cfg.split = None;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn out(&self) -> &PathBuf {
        &self.out
    }
}

/// Split "SymInt(V,equi),POD(avg)" at commas outside parentheses.
fn split_tags(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    out.push(cur);
    out.into_iter()
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Reduce(run) => commands::reduce(run),
        Command::Simulate { run, model } => commands::simulate(run, model.as_deref()),
        Command::Sweep { run, models } => commands::sweep(run, models),
        Command::Compare(run) => commands::compare(run),
        Command::Export { run, to } => commands::export(run, to.as_deref()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!(
                "qbmor: at least one guaranteed interpolation condition failed its self-check"
            );
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("qbmor: {e:#}");
            ExitCode::FAILURE
        }
    }
}

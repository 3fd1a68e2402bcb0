use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use qbmor::experiment::{gp_input, run_compare, run_reduce, sim_options, Comparison, RunConfig};
use qbmor::io::{load_reduced, save_reduced, save_system, tag_slug, trajectory_csv, write_text};
use qbmor::metrics::{emit_table, relerr_freq1, relerr_freq2, relerr_pointwise};
use qbmor::projection::{system_id, ReducedModel};
use qbmor::simulation::simulate as integrate;
use qbmor::tf::{sweep_level1_values, sweep_level2_values, Level1Sweep, Level2Sweep};

use crate::RunArgs;

/// Written next to every output so runs can be reproduced.
#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    qbmor_version: &'a str,
    system_id: String,
    gp_seed: u64,
    gp_grid_step: f64,
    gp_jitter: Option<f64>,
    time_step: f64,
    time_steps: usize,
    methods: Vec<MethodEntry>,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct MethodEntry {
    method: String,
    status: String,
    order: Option<usize>,
    factorizations: Option<usize>,
    solves: Option<usize>,
    conditions: usize,
    conditions_passed: usize,
}

impl MethodEntry {
    fn from_model(m: &ReducedModel, status: String) -> Self {
        MethodEntry {
            method: m.method_tag.clone(),
            status,
            order: Some(m.order()),
            factorizations: Some(m.work.factorizations),
            solves: Some(m.work.solves),
            conditions: m.checks.len(),
            conditions_passed: m.checks.iter().filter(|c| c.passed).count(),
        }
    }

    fn failed(method: String, err: String) -> Self {
        MethodEntry {
            method,
            status: err,
            order: None,
            factorizations: None,
            solves: None,
            conditions: 0,
            conditions_passed: 0,
        }
    }
}

fn write_manifest(out: &Path, manifest: &RunManifest) -> Result<()> {
    let text = toml::to_string(manifest).context("serializing run manifest")?;
    write_text(&out.join("run_manifest.toml"), &text)?;
    Ok(())
}

fn steps(cfg: &RunConfig) -> usize {
    (cfg.time.t_final / cfg.time.step).round() as usize
}

/// One line per checked condition.
fn ledger(models: &[&ReducedModel], failures: &[(String, String)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "condition", "points", "rel_error", "passed"])?;
    for m in models {
        for c in &m.checks {
            let pts: Vec<String> = c
                .condition
                .points
                .iter()
                .map(|s| format!("{}{:+}i", s.re, s.im))
                .collect();
            w.write_record([
                m.method_tag.clone(),
                c.condition.kind.label(),
                pts.join(" "),
                format!("{:.3e}", c.rel_error),
                c.passed.to_string(),
            ])?;
        }
    }
    for (tag, err) in failures {
        w.write_record([
            tag.clone(),
            "construction failed".into(),
            String::new(),
            String::new(),
            err.clone(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn reduce(run: &RunArgs) -> Result<bool> {
    let cfg = run.resolve()?;
    let out = run.out();
    let sys = cfg.system.build()?;
    let sid = system_id(&sys);
    let outcomes = run_reduce(&sys, &cfg)?;
    let mut models = Vec::new();
    let mut failures = Vec::new();
    let mut entries = Vec::new();
    for o in outcomes {
        let tag = o.spec.tag();
        match o.model {
            Ok(mut m) => {
                m.parent_id = sid.clone();
                save_reduced(&out.join("models").join(tag_slug(&tag)), &m)?;
                entries.push(MethodEntry::from_model(&m, "ok".into()));
                println!(
                    "{tag}: order {}, {}/{} conditions verified",
                    m.order(),
                    m.checks.iter().filter(|c| c.passed).count(),
                    m.checks.len()
                );
                models.push(m);
            }
            Err(e) => {
                println!("{tag}: {e}");
                entries.push(MethodEntry::failed(tag.clone(), e.to_string()));
                failures.push((tag, e.to_string()));
            }
        }
    }
    let refs: Vec<&ReducedModel> = models.iter().collect();
    write_text(&out.join("ledger.csv"), &ledger(&refs, &failures)?)?;
    write_manifest(
        out,
        &RunManifest {
            command: "reduce",
            qbmor_version: env!("CARGO_PKG_VERSION"),
            system_id: sid,
            gp_seed: cfg.gp.seed,
            gp_grid_step: cfg.gp_grid_step(),
            gp_jitter: None,
            time_step: cfg.time.step,
            time_steps: steps(&cfg),
            methods: entries,
            config: &cfg,
        },
    )?;
    Ok(models.iter().all(|m| m.all_checks_passed()))
}

pub fn simulate(run: &RunArgs, model: Option<&Path>) -> Result<bool> {
    let cfg = run.resolve()?;
    let out = run.out();
    let full = cfg.system.build()?;
    let input = gp_input(&full, &cfg)?;
    let (sys, name, entry) = match model {
        Some(dir) => {
            let red = load_reduced(dir).with_context(|| format!("loading {}", dir.display()))?;
            let entry = MethodEntry::from_model(&red, "ok".into());
            (red.system, tag_slug(&red.method_tag), vec![entry])
        }
        None => (full.clone(), "full".to_string(), Vec::new()),
    };
    let traj = integrate(&sys, &input.to_input(), &sim_options(&cfg))?;
    let path = out.join(format!("trajectory_{name}.csv"));
    write_text(&path, &trajectory_csv(&traj.times, &traj.outputs)?)?;
    println!("wrote {}", path.display());
    write_manifest(
        out,
        &RunManifest {
            command: "simulate",
            qbmor_version: env!("CARGO_PKG_VERSION"),
            system_id: system_id(&full),
            gp_seed: cfg.gp.seed,
            gp_grid_step: cfg.gp_grid_step(),
            gp_jitter: Some(input.jitter),
            time_step: cfg.time.step,
            time_steps: steps(&cfg),
            methods: entry,
            config: &cfg,
        },
    )?;
    Ok(true)
}

fn level1_csv(full: &Level1Sweep, reduced: &[(String, Level1Sweep)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["omega".to_string(), "full".to_string()];
    for (tag, _) in reduced {
        header.push(tag.clone());
        header.push(format!("relerr {tag}"));
    }
    w.write_record(&header)?;
    let full_norms = full.norms();
    let errs: Vec<Vec<Option<f64>>> = reduced.iter().map(|(_, s)| relerr_freq1(full, s)).collect();
    let norms: Vec<Vec<Option<f64>>> = reduced.iter().map(|(_, s)| s.norms()).collect();
    for (i, &omega) in full.omegas.iter().enumerate() {
        let mut rec = vec![format!("{omega:.17e}"), fmt_opt(full_norms[i])];
        for (k, _) in reduced.iter().enumerate() {
            rec.push(fmt_opt(norms[k][i]));
            rec.push(fmt_opt(errs[k][i]));
        }
        w.write_record(&rec)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Long format `omega1,omega2,value`.
fn level2_csv(
    omegas1: &[f64],
    omegas2: &[f64],
    value: impl Fn(usize, usize) -> Option<f64>,
    column: &str,
) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["omega1", "omega2", column])?;
    for (i, a) in omegas1.iter().enumerate() {
        for (j, b) in omegas2.iter().enumerate() {
            w.write_record([
                format!("{a:.17e}"),
                format!("{b:.17e}"),
                fmt_opt(value(i, j)),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.17e}"),
        Some(x) if x.is_infinite() => "inf".into(),
        _ => "nan".into(),
    }
}

pub fn sweep(run: &RunArgs, models: &[std::path::PathBuf]) -> Result<bool> {
    let cfg = run.resolve()?;
    let out = run.out();
    let full = cfg.system.build()?;
    let g1 = cfg.level1_grid();
    let full1 = sweep_level1_values(&full, &g1);
    let mut reduced = Vec::new();
    let mut entries = Vec::new();
    for dir in models {
        let red = load_reduced(dir).with_context(|| format!("loading {}", dir.display()))?;
        reduced.push((
            red.method_tag.clone(),
            sweep_level1_values(&red.system, &g1),
            red,
        ));
    }
    let l1: Vec<(String, Level1Sweep)> = reduced
        .iter()
        .map(|(t, s, _)| (t.clone(), s.clone()))
        .collect();
    write_text(&out.join("sweep_level1.csv"), &level1_csv(&full1, &l1)?)?;
    if cfg.sweep2_points > 0 {
        let g2 = cfg.level2_grid();
        let full2 = sweep_level2_values(&full, &g2, &g2);
        write_text(
            &out.join("sweep_level2_full.csv"),
            &level2_csv(&g2, &g2, |i, j| full2.norm(i, j), "norm")?,
        )?;
        for (tag, _, red) in &reduced {
            let red2 = sweep_level2_values(&red.system, &g2, &g2);
            write_level2_errors(out, tag, &full2, &red2)?;
        }
    }
    for (_, _, red) in &reduced {
        entries.push(MethodEntry::from_model(red, "ok".into()));
    }
    println!("wrote sweeps to {}", out.display());
    write_manifest(
        out,
        &RunManifest {
            command: "sweep",
            qbmor_version: env!("CARGO_PKG_VERSION"),
            system_id: system_id(&full),
            gp_seed: cfg.gp.seed,
            gp_grid_step: cfg.gp_grid_step(),
            gp_jitter: None,
            time_step: cfg.time.step,
            time_steps: steps(&cfg),
            methods: entries,
            config: &cfg,
        },
    )?;
    Ok(true)
}

fn write_level2_errors(out: &Path, tag: &str, full: &Level2Sweep, red: &Level2Sweep) -> Result<()> {
    let e = relerr_freq2(full, red);
    let text = level2_csv(&full.omegas1, &full.omegas2, |i, j| e[i][j], "relerr")?;
    write_text(
        &out.join(format!("sweep_level2_{}.csv", tag_slug(tag))),
        &text,
    )?;
    Ok(())
}

pub fn compare(run: &RunArgs) -> Result<bool> {
    let cfg = run.resolve()?;
    let out = run.out();
    let sys = cfg.system.build()?;
    let cmp = run_compare(&sys, &cfg)?;
    write_comparison(out, &cfg, &cmp)?;
    Ok(cmp.all_checks_passed())
}

fn write_comparison(out: &Path, cfg: &RunConfig, cmp: &Comparison) -> Result<()> {
    let reports = cmp.reports();
    let (csv_text, table) = emit_table(&reports)?;
    write_text(&out.join("table.csv"), &csv_text)?;
    write_text(&out.join("table.txt"), &table)?;
    print!("{table}");

    let rf = &cmp.reference;
    write_text(
        &out.join("trajectories").join("full.csv"),
        &trajectory_csv(&rf.trajectory.times, &rf.trajectory.outputs)?,
    )?;
    let mut pointwise = String::new();
    let _ = write!(pointwise, "time");
    let mut columns = Vec::new();
    for r in &cmp.results {
        if let Some(t) = &r.evaluation.trajectory {
            let slug = tag_slug(&r.spec.tag());
            write_text(
                &out.join("trajectories").join(format!("{slug}.csv")),
                &trajectory_csv(&t.times, &t.outputs)?,
            )?;
            if t.outputs.ncols() == rf.trajectory.outputs.ncols() {
                columns.push((
                    r.spec.tag(),
                    relerr_pointwise(&rf.trajectory.outputs, &t.outputs)?,
                ));
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["time".to_string()];
    header.extend(columns.iter().map(|(t, _)| t.clone()));
    w.write_record(&header)?;
    for (k, time) in rf.trajectory.times.iter().enumerate() {
        let mut rec = vec![format!("{time:.17e}")];
        rec.extend(columns.iter().map(|(_, e)| fmt_opt(e[k])));
        w.write_record(&rec)?;
    }
    write_text(
        &out.join("relerr_time.csv"),
        &String::from_utf8(w.into_inner()?)?,
    )?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["omega".to_string(), "full".to_string()];
    header.extend(cmp.results.iter().map(|r| r.spec.tag()));
    w.write_record(&header)?;
    let norms = rf.level1.norms();
    for (i, omega) in rf.level1.omegas.iter().enumerate() {
        let mut rec = vec![format!("{omega:.17e}"), fmt_opt(norms[i])];
        rec.extend(cmp.results.iter().map(|r| fmt_opt(r.evaluation.freq1[i])));
        w.write_record(&rec)?;
    }
    write_text(
        &out.join("relerr_freq1.csv"),
        &String::from_utf8(w.into_inner()?)?,
    )?;

    if let Some(full2) = &rf.level2 {
        for r in &cmp.results {
            if let Some(e) = &r.evaluation.freq2 {
                let text = level2_csv(&full2.omegas1, &full2.omegas2, |i, j| e[i][j], "relerr")?;
                write_text(
                    &out.join("sweeps")
                        .join(format!("relerr_freq2_{}.csv", tag_slug(&r.spec.tag()))),
                    &text,
                )?;
            }
        }
    }

    let mut models = Vec::new();
    let mut failures = Vec::new();
    let mut entries = Vec::new();
    for r in &cmp.results {
        match &r.model {
            Some(m) => {
                save_reduced(&out.join("models").join(tag_slug(&m.method_tag)), m)?;
                let status = match &r.evaluation.report.note {
                    Some(n) => format!("unstable: {n}"),
                    None => "ok".into(),
                };
                entries.push(MethodEntry::from_model(m, status));
                models.push(m);
            }
            None => {
                let note = r.evaluation.report.note.clone().unwrap_or_default();
                entries.push(MethodEntry::failed(r.spec.tag(), note.clone()));
                failures.push((r.spec.tag(), note));
            }
        }
    }
    write_text(&out.join("ledger.csv"), &ledger(&models, &failures)?)?;
    write_manifest(
        out,
        &RunManifest {
            command: "compare",
            qbmor_version: env!("CARGO_PKG_VERSION"),
            system_id: rf.system_id.clone(),
            gp_seed: cfg.gp.seed,
            gp_grid_step: cfg.gp_grid_step(),
            gp_jitter: Some(rf.input.jitter),
            time_step: cfg.time.step,
            time_steps: steps(cfg),
            methods: entries,
            config: cfg,
        },
    )?;
    Ok(())
}

pub fn export(run: &RunArgs, to: Option<&Path>) -> Result<bool> {
    let cfg = run.resolve()?;
    let sys = cfg.system.build()?;
    let dir = to
        .map(Path::to_path_buf)
        .unwrap_or_else(|| run.out().join("system"));
    save_system(&dir, &sys)?;
    println!(
        "wrote {} (n = {}, m = {}, p = {})",
        dir.display(),
        sys.n,
        sys.m,
        sys.p
    );
    Ok(true)
}

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use wlns::config::RunConfig;
use wlns::criteria::{format_number, holder_check, CriterionTrace};
use wlns::degiorgi::{fit_beta, level_energy, CylinderScheme, FitOutcome};
use wlns::field::snapshot::Snapshot;
use wlns::field::VectorField;
use wlns::lorentz::{lebesgue_norm, weak_norm, NormRow, Region};
use wlns::nse::{Frame, Solver, StepReport, Trajectory};
use wlns::Error;

use crate::manifest::{unix_now, RunManifest};
use crate::{BlowUpHalt, ConfigError};

pub const STEP_COLUMNS: [&str; 6] = ["step", "t", "energy", "sup_norm", "max_divergence", "cfl"];

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    RunConfig::parse(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())).into())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_steps(path: &Path, steps: &[StepReport<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(STEP_COLUMNS)?;
    for r in steps {
        w.write_record([
            r.step.to_string(),
            format_number(r.time),
            format_number(r.energy),
            format_number(r.sup_norm),
            format_number(r.max_divergence),
            format_number(r.cfl),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn snapshot_name(index: usize) -> String {
    format!("snap_{index:06}.wlns")
}

fn scheme_from(cfg: &RunConfig, length: f64) -> Result<CylinderScheme<f64>> {
    let d = &cfg.diagnostics;
    let center = d.center.unwrap_or([length / 2.0; 3]);
    let t_origin = d.t_origin.unwrap_or(d.scale * d.scale);
    Ok(CylinderScheme::new(d.k_max, center, d.scale, t_origin)?)
}

fn write_levels(dir: &Path, traj: &Trajectory<f64>, cfg: &RunConfig) -> Result<()> {
    let Some(g) = traj.grid() else { return Ok(()) };
    let scheme = scheme_from(cfg, g.length())?;
    match level_energy(traj, &scheme) {
        Ok(table) => {
            table.write_csv(create(&dir.join("level_energy.csv"))?)?;
            match fit_beta(&table.u())? {
                FitOutcome::Fit(f) => eprintln!("level energies: beta ≈ {:.4}, C ≈ {:.4}, r² = {:.4}", f.beta, f.c, f.r2),
                FitOutcome::TriviallyRegular => eprintln!("level energies: trivially regular, no fit"),
            }
        }
        Err(e @ (Error::InsufficientData(_) | Error::InvalidInput(_) | Error::Precondition(_))) => {
            eprintln!("warning: level_energy.csv skipped: {e}");
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

pub fn simulate(config: &Path, out: Option<&Path>) -> Result<()> {
    let started = unix_now();
    let cfg = load_config(config)?;
    let dir: PathBuf = match (out, &cfg.output.dir) {
        (Some(p), _) => p.into(),
        (None, Some(d)) => d.into(),
        (None, None) => bail!(ConfigError("no output directory: pass OUT or set [output] dir".into())),
    };
    let solver_cfg = cfg.solver_config()?;
    let mut solver = Solver::new(solver_cfg.clone())?;
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let snap_dir = dir.join("snapshots");
    if cfg.output.snapshots {
        fs::create_dir_all(&snap_dir)?;
    }

    let mut trace = CriterionTrace::new(cfg.diagnostics.q)?;
    let mut frames = Vec::new();
    let mut steps = Vec::new();
    let mut snaps = 0usize;
    let mut record = |solver: &Solver<f64>, frames: &mut Vec<Frame<f64>>| -> Result<()> {
        let u = solver.velocity();
        trace.push_field(solver.time(), &u)?;
        if cfg.output.snapshots {
            Snapshot::from_velocity(solver.time(), &u).save(snap_dir.join(snapshot_name(snaps)))?;
            snaps += 1;
        }
        if cfg.diagnostics.degiorgi {
            frames.push(Frame::new(solver.time(), u));
        }
        Ok(())
    };

    record(&solver, &mut frames)?;
    let mut halt = None;
    let mut last_recorded = 0;
    for _ in 0..solver_cfg.steps() {
        match solver.step() {
            Ok(r) => {
                steps.push(r);
                if r.step % solver_cfg.snapshot_every == 0 {
                    record(&solver, &mut frames)?;
                    last_recorded = r.step;
                }
            }
            Err(e @ Error::BlowUp { .. }) => {
                halt = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    if halt.is_some() && solver.state().step_index > last_recorded {
        // keep the last valid state so the trace reaches the halt
        record(&solver, &mut frames)?;
    }
    drop(record);

    trace.write_csv(create(&dir.join("trace.csv"))?)?;
    if cfg.output.steps {
        write_steps(&dir.join("steps.csv"), &steps)?;
    }
    if cfg.diagnostics.degiorgi {
        write_levels(&dir, &Trajectory::new(frames)?, &cfg)?;
    }
    let manifest = RunManifest::new("simulate", cfg.to_toml(), Some(cfg.solver.seed), started);
    match halt {
        Some(msg) => {
            manifest.finish(&dir, "blow-up")?;
            Err(BlowUpHalt(msg).into())
        }
        None => {
            manifest.finish(&dir, "ok")?;
            eprintln!(
                "simulate: {} steps to t = {}, final energy {}",
                steps.len(),
                solver.time(),
                format_number(solver.energy())
            );
            Ok(())
        }
    }
}

/// Reads every `.wlns` file of `dir` (or of `dir/snapshots`), ordered by time.
pub fn load_snapshots(dir: &Path) -> Result<Vec<Snapshot>> {
    let nested = dir.join("snapshots");
    let dir = if nested.is_dir() { nested } else { dir.to_path_buf() };
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "wlns"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!(ConfigError(format!("no .wlns snapshots in {}", dir.display())));
    }
    let mut snaps = paths
        .iter()
        .map(|p| Snapshot::load(p).map_err(|e| ConfigError(format!("{}: {e}", p.display())).into()))
        .collect::<Result<Vec<_>>>()?;
    snaps.sort_by(|a, b| a.time.total_cmp(&b.time));
    Ok(snaps)
}

#[derive(Serialize)]
struct TimedNorm {
    t: f64,
    #[serde(flatten)]
    row: NormRow,
}

pub struct DiagnoseArgs<'a> {
    pub snapshots: &'a Path,
    pub out: &'a Path,
    pub config: Option<&'a Path>,
    pub q: Option<f64>,
    pub degiorgi: bool,
}

pub fn diagnose(a: DiagnoseArgs) -> Result<()> {
    let started = unix_now();
    let mut cfg = match a.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    if let Some(q) = a.q {
        cfg.diagnostics.q = q;
    }
    cfg.diagnostics.degiorgi |= a.degiorgi;
    let snaps = load_snapshots(a.snapshots)?;
    fs::create_dir_all(a.out).with_context(|| format!("creating {}", a.out.display()))?;

    let mut trace = CriterionTrace::new(cfg.diagnostics.q).map_err(|e| ConfigError(e.to_string()))?;
    let e = trace.exponents;
    let mut norms = create(&a.out.join("norms.jsonl"))?;
    let mut frames = Vec::new();
    for s in &snaps {
        let u: VectorField<f64> = s.velocity()?;
        trace.push_field(s.time, &u)?;
        let m = u.magnitude();
        for rep in [
            weak_norm(&m, &Region::Full, e.q)?,
            lebesgue_norm(&m, &Region::Full, e.q)?,
            weak_norm(&m, &Region::Full, e.sigma)?,
        ] {
            serde_json::to_writer(&mut norms, &TimedNorm { t: s.time, row: rep.row() })?;
            norms.write_all(b"\n")?;
        }
        if cfg.diagnostics.degiorgi {
            frames.push(Frame::new(s.time, u));
        }
    }
    norms.flush()?;
    trace.write_csv(create(&a.out.join("trace.csv"))?)?;
    let h = holder_check(&trace.rows, &e);
    if cfg.diagnostics.degiorgi {
        write_levels(a.out, &Trajectory::new(frames)?, &cfg)?;
    }
    let last = trace.rows.last().expect("at least one snapshot");
    println!("snapshots: {}", snaps.len());
    println!("q = {}, p = {}, sigma = {}, rho = {}", e.q, format_number(e.p), format_number(e.sigma), format_number(e.rho));
    println!("criterion integral (weak-log) at t = {}: {}", last.t, format_number(last.c_wlog));
    println!("interpolation violations: {}", h.row_violations.len());
    RunManifest::new("diagnose", cfg.to_toml(), None, started).finish(a.out, "ok")
}

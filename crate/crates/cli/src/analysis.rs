use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use wlns::config::RunConfig;
use wlns::counterexample::{
    claim1_bracket_violations, claim2_lower_bound, criterion_vs_lorentz, schedule_table, weak_norm_constant,
    write_schedule_csv, DyadicSchedule,
};
use wlns::criteria::format_number;
use wlns::degiorgi::{recursive_sequence, threshold_scan};
use wlns::gronwall::{implicit_deviation, read_forcing_csv, solve_bound, write_solution_csv, BoundProblem, Forcing};

use crate::manifest::{unix_now, RunManifest};
use crate::{BlowUpHalt, ConfigError};

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

/// Term counts at which the criterion-vs-Lorentz summary is sampled.
fn checkpoints(terms: usize) -> Vec<usize> {
    let mut v: Vec<usize> = [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000]
        .into_iter()
        .filter(|&n| n < terms)
        .collect();
    v.push(terms);
    v
}

#[derive(Serialize)]
struct Summary {
    q: f64,
    p: f64,
    r: f64,
    t_inf: f64,
    terms: usize,
    weak_constant: f64,
    claim1_partial_sum: f64,
    claim1_bracket_violations: Vec<(usize, f64)>,
    claim2_partial_sum: f64,
    claim2_comparison_sum: f64,
    claim2_comparison_limit: f64,
}

pub fn counterexample(mut cfg: RunConfig, out: &Path) -> Result<()> {
    let started = unix_now();
    let c = cfg.counterexample.clone();
    let bad = |e: wlns::Error| ConfigError(e.to_string());
    let s = DyadicSchedule::new(c.q, c.t_inf).map_err(bad)?;
    let rows = schedule_table(&s, c.terms, c.r).map_err(bad)?;
    let claim2 = claim2_lower_bound(&s, c.terms, c.r).map_err(bad)?;
    let sep = criterion_vs_lorentz(&s, c.r, &checkpoints(c.terms)).map_err(bad)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_schedule_csv(&rows, create(&out.join("counterexample.csv"))?)?;

    let mut w = csv::Writer::from_writer(create(&out.join("separation.csv"))?);
    w.write_record(["n_terms", "criterion", "lorentz", "weak"])?;
    for r in &sep {
        w.write_record([r.n_terms.to_string(), format_number(r.criterion), format_number(r.lorentz), format_number(r.weak)])?;
    }
    w.flush()?;

    let last = rows.last().expect("terms ≥ 1");
    let summary = Summary {
        q: c.q,
        p: s.p,
        r: c.r,
        t_inf: c.t_inf,
        terms: c.terms,
        weak_constant: weak_norm_constant(c.q),
        claim1_partial_sum: last.partial_claim1,
        claim1_bracket_violations: claim1_bracket_violations(&s, c.terms),
        claim2_partial_sum: last.partial_claim2,
        claim2_comparison_sum: *claim2.comparison.last().unwrap(),
        claim2_comparison_limit: claim2.comparison_limit,
    };
    serde_json::to_writer_pretty(create(&out.join("summary.json"))?, &summary)?;

    println!("p = {}, c(q) = {}", format_number(s.p), format_number(summary.weak_constant));
    println!("claim 1 partial sum over {} terms: {}", c.terms, format_number(summary.claim1_partial_sum));
    println!("claim 2 partial sum: {}", format_number(summary.claim2_partial_sum));
    println!(
        "claim 2 comparison sum: {} (limit {})",
        format_number(summary.claim2_comparison_sum),
        format_number(summary.claim2_comparison_limit)
    );
    for r in &sep {
        println!(
            "N = {:>5}: criterion {}  L^(p,r) {}  L^(p,inf) {}",
            r.n_terms,
            format_number(r.criterion),
            format_number(r.lorentz),
            format_number(r.weak)
        );
    }
    cfg.counterexample = c;
    RunManifest::new("counterexample", cfg.to_toml(), None, started).finish(out, "ok")
}

pub fn recursive(cfg: &RunConfig) -> Result<()> {
    let r = &cfg.recursive;
    let bad = |e: wlns::Error| ConfigError(e.to_string());
    if r.scan {
        let b = threshold_scan(r.c, r.beta).map_err(bad)?;
        println!("W0_critical in [{}, {}]", format_number(b.lo), format_number(b.hi));
        return Ok(());
    }
    let rep = recursive_sequence(r.c, r.beta, r.w0, r.k_max).map_err(bad)?;
    println!("k,log2_W,W");
    for (k, (l, e)) in rep.log_w.iter().zip(rep.log2_exponents()).enumerate() {
        println!("{k},{},{}", format_number(-e), format_number(l.exp()));
    }
    println!("converged: {}", rep.converged);
    Ok(())
}

pub fn gronwall(cfg: &RunConfig, forcing: &Path, out: &Path) -> Result<()> {
    let started = unix_now();
    let g = &cfg.gronwall;
    let file = File::open(forcing).map_err(|e| ConfigError(format!("{}: {e}", forcing.display())))?;
    let (t, b) = read_forcing_csv::<f64, _>(file).map_err(|e| ConfigError(format!("{}: {e}", forcing.display())))?;
    let bad = |e: wlns::Error| ConfigError(format!("{}: {e}", forcing.display()));
    let f = if g.linear { Forcing::linear(t, b) } else { Forcing::steps_from_samples(t, b) }.map_err(bad)?;
    let p = BoundProblem::over_data(f, g.c, g.h0).map_err(bad)?.with_growth(cfg.growth()?);
    let sol = solve_bound(&p, g.dt).map_err(bad)?;
    let dev = implicit_deviation(&sol, &p);
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_solution_csv(&sol, &dev, create(&out.join("gronwall.csv"))?)?;
    let worst = dev.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    println!(
        "H({}) = {}, max deviation {}",
        format_number(*sol.times.last().unwrap()),
        format_number(*sol.h.last().unwrap()),
        format_number(worst)
    );
    let manifest = RunManifest::new("gronwall", cfg.to_toml(), None, started);
    match sol.overflow {
        Some(msg) => {
            manifest.finish(out, "overflow")?;
            Err(BlowUpHalt(msg).into())
        }
        None => manifest.finish(out, "ok"),
    }
}

//! `wlns`: simulation, regularity diagnostics and the analysis tables.
//!
//! Exit codes: 0 ok, 1 usage or configuration error, 2 blow-up halt.

mod analysis;
mod manifest;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use wlns::config::RunConfig;

/// Bad flags, config or input files.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

/// The run halted on blow-up; partial outputs were written.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct BlowUpHalt(pub String);

#[derive(Parser)]
#[command(name = "wlns", version, about = "Navier-Stokes runs with weak-Lebesgue regularity diagnostics")]
struct Cli {
    /// Worker threads for the FFT kernels (default: all cores).
    #[arg(long, global = true, env = "WLNS_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver from a config file.
    ///
    /// [solver] keys: n, length, viscosity, dt, t_end, dealias,
    /// snapshot_every, seed, initial_condition ("zero", "taylor-green",
    /// "shear-wave", "abc", "random"), amplitude, modes, nonlinear.
    /// [diagnostics] keys: q, c_star, a_lambda, c_lambda, degiorgi, k_max,
    /// center, scale, t_origin.
    /// [output] keys: dir, snapshots, steps.
    ///
    /// Writes trace.csv, steps.csv, snapshots/*.wlns, level_energy.csv (with
    /// degiorgi = true) and manifest.json.
    Simulate {
        config: PathBuf,
        /// Output directory; overrides [output] dir.
        out: Option<PathBuf>,
    },
    /// Recompute norms and criteria from stored snapshots.
    ///
    /// Writes trace.csv, norms.jsonl, level_energy.csv (with --degiorgi) and
    /// manifest.json. The cylinder comes from the [diagnostics] section.
    Diagnose {
        /// A snapshot directory or a simulate output directory.
        snapshots: PathBuf,
        out: PathBuf,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Evaluate level-set energies.
        #[arg(long)]
        degiorgi: bool,
    },
    /// Tables of the dyadic counterexample.
    ///
    /// [counterexample] keys: q, r, terms, t_inf. Writes counterexample.csv,
    /// separation.csv, summary.json and manifest.json.
    Counterexample {
        out: PathBuf,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        terms: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Iterate W_{k+1} = C^k W_k^beta, or bracket the critical W0.
    ///
    /// [recursive] keys: c, beta, w0, k_max, scan.
    Recursive {
        #[arg(long = "C")]
        c: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        w0: Option<f64>,
        #[arg(long)]
        kmax: Option<usize>,
        /// Bisect for the threshold between convergence and divergence.
        #[arg(long)]
        scan: bool,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Solve H' = C·Psi(H)·B for a sampled B.
    ///
    /// The CSV holds `t,B` rows (header optional). [gronwall] keys: c, h0,
    /// dt, growth ("log", "identity"), linear. Writes gronwall.csv with
    /// columns t, H, deviation and manifest.json.
    Gronwall {
        forcing: PathBuf,
        out: PathBuf,
        #[arg(long = "C")]
        c: Option<f64>,
        #[arg(long = "H0")]
        h0: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Interpolate B linearly instead of holding each sample.
        #[arg(long)]
        linear: bool,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn base_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => run::load_config(p),
        None => Ok(RunConfig::default()),
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate { config, out } => run::simulate(&config, out.as_deref()),
        Command::Diagnose { snapshots, out, q, config, degiorgi } => run::diagnose(run::DiagnoseArgs {
            snapshots: &snapshots,
            out: &out,
            config: config.as_deref(),
            q,
            degiorgi,
        }),
        Command::Counterexample { out, q, r, terms, config } => {
            let mut cfg = base_config(config.as_deref())?;
            let c = &mut cfg.counterexample;
            c.q = q.unwrap_or(c.q);
            c.r = r.unwrap_or(c.r);
            c.terms = terms.unwrap_or(c.terms);
            analysis::counterexample(cfg, &out)
        }
        Command::Recursive { c, beta, w0, kmax, scan, config } => {
            let mut cfg = base_config(config.as_deref())?;
            let r = &mut cfg.recursive;
            r.c = c.unwrap_or(r.c);
            r.beta = beta.unwrap_or(r.beta);
            r.w0 = w0.unwrap_or(r.w0);
            r.k_max = kmax.unwrap_or(r.k_max);
            r.scan |= scan;
            analysis::recursive(&cfg)
        }
        Command::Gronwall { forcing, out, c, h0, dt, linear, config } => {
            let mut cfg = base_config(config.as_deref())?;
            let g = &mut cfg.gronwall;
            g.c = c.unwrap_or(g.c);
            g.h0 = h0.unwrap_or(g.h0);
            g.dt = dt.unwrap_or(g.dt);
            g.linear |= linear;
            analysis::gronwall(&cfg, &forcing, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<BlowUpHalt>() => {
            eprintln!("halted: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

//! Run configuration: `key = value` lines under `[solver]`, `[diagnostics]`
//! and `[output]`, plus one section per analysis subcommand
//! (`[counterexample]`, `[recursive]`, `[gronwall]`). Read with a TOML
//! parser, so strings are quoted.
//!
//! ```toml
//! [solver]
//! n = 32
//! dt = 1e-3
//! t_end = 0.1
//! initial_condition = "taylor-green"
//!
//! [diagnostics]
//! q = 6.0
//!
//! [output]
//! snapshots = true
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gronwall::Growth;
use crate::nse::{InitialCondition, SolverConfig};

fn two_pi() -> f64 {
    std::f64::consts::TAU
}
fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "SolverSection::default_n")]
    pub n: usize,
    #[serde(default = "two_pi")]
    pub length: f64,
    #[serde(default = "one")]
    pub viscosity: f64,
    #[serde(default = "SolverSection::default_dt")]
    pub dt: f64,
    #[serde(default = "SolverSection::default_t_end")]
    pub t_end: f64,
    #[serde(default = "SolverSection::default_dealias")]
    pub dealias: f64,
    #[serde(default = "SolverSection::default_snapshot_every")]
    pub snapshot_every: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "SolverSection::default_ic")]
    pub initial_condition: String,
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Highest wavenumber of the `random` initial condition.
    #[serde(default = "SolverSection::default_modes")]
    pub modes: usize,
    #[serde(default = "yes")]
    pub nonlinear: bool,
}

impl SolverSection {
    fn default_n() -> usize {
        32
    }
    fn default_dt() -> f64 {
        1e-3
    }
    fn default_t_end() -> f64 {
        0.1
    }
    fn default_dealias() -> f64 {
        2.0 / 3.0
    }
    fn default_snapshot_every() -> usize {
        10
    }
    fn default_ic() -> String {
        "taylor-green".into()
    }
    fn default_modes() -> usize {
        4
    }
}

impl Default for SolverSection {
    fn default() -> Self {
        toml::from_str("").expect("defaults deserialize")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    /// Spatial exponent `q ∈ (3, 9)` of the criterion.
    #[serde(default = "DiagnosticsSection::default_q")]
    pub q: f64,
    /// Smallness constant `C*` of the rescaling step.
    #[serde(default = "one")]
    pub c_star: f64,
    /// Constant `A_λ` of the sup-norm bound.
    #[serde(default = "one")]
    pub a_lambda: f64,
    /// Constant `C_λ`, the initial value of the Gronwall majorant.
    #[serde(default = "one")]
    pub c_lambda: f64,
    /// Evaluate De Giorgi level energies on the cylinder below.
    #[serde(default)]
    pub degiorgi: bool,
    #[serde(default = "DiagnosticsSection::default_k_max")]
    pub k_max: usize,
    /// Cylinder centre; defaults to the box centre.
    #[serde(default)]
    pub center: Option<[f64; 3]>,
    #[serde(default = "one")]
    pub scale: f64,
    /// Simulation time of reference time 0; defaults to `scale²`, so the
    /// cylinder window `[−1, 1]` maps to `[0, 2·scale²]`.
    #[serde(default)]
    pub t_origin: Option<f64>,
}

impl DiagnosticsSection {
    fn default_q() -> f64 {
        6.0
    }
    fn default_k_max() -> usize {
        4
    }
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        toml::from_str("").expect("defaults deserialize")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Output directory used when none is given on the command line.
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default = "yes")]
    pub snapshots: bool,
    #[serde(default = "yes")]
    pub steps: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        toml::from_str("").expect("defaults deserialize")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleSection {
    #[serde(default = "DiagnosticsSection::default_q")]
    pub q: f64,
    /// Second Lorentz index, `r > 1`.
    #[serde(default = "CounterexampleSection::default_r")]
    pub r: f64,
    #[serde(default = "CounterexampleSection::default_terms")]
    pub terms: usize,
    #[serde(default = "one")]
    pub t_inf: f64,
}

impl CounterexampleSection {
    fn default_r() -> f64 {
        2.0
    }
    fn default_terms() -> usize {
        40
    }
}

impl Default for CounterexampleSection {
    fn default() -> Self {
        toml::from_str("").expect("defaults deserialize")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecursiveSection {
    #[serde(default = "RecursiveSection::default_c")]
    pub c: f64,
    #[serde(default = "RecursiveSection::default_c")]
    pub beta: f64,
    #[serde(default = "RecursiveSection::default_w0")]
    pub w0: f64,
    #[serde(default = "RecursiveSection::default_k_max")]
    pub k_max: usize,
    #[serde(default)]
    pub scan: bool,
}

impl RecursiveSection {
    fn default_c() -> f64 {
        2.0
    }
    fn default_w0() -> f64 {
        0.0625
    }
    fn default_k_max() -> usize {
        20
    }
}

impl Default for RecursiveSection {
    fn default() -> Self {
        toml::from_str("").expect("defaults deserialize")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GronwallSection {
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "one")]
    pub h0: f64,
    #[serde(default = "GronwallSection::default_dt")]
    pub dt: f64,
    /// `"log"` for `Ψ(r) = r(e + log(e + r))`, `"identity"` for `Ψ(r) = r`.
    #[serde(default = "GronwallSection::default_growth")]
    pub growth: String,
    /// Read `B` as piecewise-linear through the samples instead of
    /// piecewise-constant.
    #[serde(default)]
    pub linear: bool,
}

impl GronwallSection {
    fn default_dt() -> f64 {
        1e-3
    }
    fn default_growth() -> String {
        "log".into()
    }
}

impl Default for GronwallSection {
    fn default() -> Self {
        toml::from_str("").expect("defaults deserialize")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub counterexample: CounterexampleSection,
    #[serde(default)]
    pub recursive: RecursiveSection,
    #[serde(default)]
    pub gronwall: GronwallSection,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl RunConfig {
    /// Parses and validates; errors name the offending line.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| format!("line {}: ", line_of(text, s.start))).unwrap_or_default();
            Error::Format(format!("{line}{}", e.message()))
        })?;
        cfg.solver_config()?;
        let q = cfg.diagnostics.q;
        if !(q > 3.0 && q < 9.0) {
            return Err(Error::InvalidInput(format!("[diagnostics] q must lie in (3, 9), got {q}")));
        }
        for (name, v) in [
            ("c_star", cfg.diagnostics.c_star),
            ("a_lambda", cfg.diagnostics.a_lambda),
            ("c_lambda", cfg.diagnostics.c_lambda),
            ("scale", cfg.diagnostics.scale),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("[diagnostics] {name} must be positive, got {v}")));
            }
        }
        let ce = &cfg.counterexample;
        if !(ce.q > 3.0 && ce.q < 9.0) || !(ce.r > 1.0) || ce.terms == 0 || !(ce.t_inf > 0.0) {
            return Err(Error::InvalidInput(
                "[counterexample] needs q in (3, 9), r > 1, terms ≥ 1 and t_inf > 0".into(),
            ));
        }
        let rc = &cfg.recursive;
        if !(rc.c > 1.0) || !(rc.beta > 1.0) || !(rc.w0 > 0.0) || !rc.w0.is_finite() {
            return Err(Error::InvalidInput("[recursive] needs c > 1, beta > 1 and w0 > 0".into()));
        }
        let gw = &cfg.gronwall;
        if !(gw.c > 0.0) || !(gw.h0 > 0.0) || !(gw.dt > 0.0) {
            return Err(Error::InvalidInput("[gronwall] needs c, h0 and dt positive".into()));
        }
        cfg.growth()?;
        Ok(cfg)
    }

    pub fn growth(&self) -> Result<Growth> {
        match self.gronwall.growth.as_str() {
            "log" => Ok(Growth::Log),
            "identity" => Ok(Growth::Identity),
            other => Err(Error::InvalidInput(format!(
                "[gronwall] growth must be \"log\" or \"identity\", got {other:?}"
            ))),
        }
    }

    pub fn solver_config(&self) -> Result<SolverConfig<f64>> {
        let s = &self.solver;
        let cfg = SolverConfig {
            n: s.n,
            length: s.length,
            viscosity: s.viscosity,
            dt: s.dt,
            t_end: s.t_end,
            dealias: s.dealias,
            snapshot_every: s.snapshot_every,
            seed: s.seed,
            initial_condition: InitialCondition::from_name(&s.initial_condition, s.amplitude, s.modes)?,
            nonlinear: s.nonlinear,
        };
        cfg.validate().map_err(|e| match e {
            Error::InvalidInput(m) => Error::InvalidInput(format!("[solver] {m}")),
            other => other,
        })?;
        Ok(cfg)
    }

    /// Canonical text form with every key spelled out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c.solver.n, 32);
        assert_eq!(c.solver_config().unwrap(), SolverConfig::default());
        assert_eq!(c.diagnostics.q, 6.0);
        assert!(c.output.snapshots);
    }

    #[test]
    fn canonical_form_round_trips() {
        let c = RunConfig::parse("[solver]\nn = 16\nseed = 4\ninitial_condition = \"random\"\n[diagnostics]\ncenter = [1.0, 2.0, 3.0]\n").unwrap();
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = RunConfig::parse("[solver]\nn = 16\nbogus = 1\n").unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
        let e = RunConfig::parse("[solver]\n\ndt = \"fast\"\n").unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
        let e = RunConfig::parse("[solver]\ndt = -1.0\n").unwrap_err().to_string();
        assert!(e.contains("dt"), "{e}");
        assert!(RunConfig::parse("[solver]\ninitial_condition = \"vortex\"\n").is_err());
        assert!(RunConfig::parse("[diagnostics]\nq = 9.5\n").is_err());
        assert!(RunConfig::parse("[recursive]\nbeta = 1.0\n").is_err());
        assert!(RunConfig::parse("[gronwall]\ngrowth = \"cubic\"\n").is_err());
    }
}

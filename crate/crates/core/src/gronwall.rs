//! The log-Gronwall majorant: `H' = C·Ψ(H)·B(t)`, `H(λ) = H₀`, with
//! `Ψ(r) = r(e + log(e + r))`. Since `∫₁^∞ dr/Ψ = ∞`, `H` stays finite
//! whenever `∫B` is, and integrating gives the implicit identity
//! `Φ(H(t)) = C∫_λ^t B` with `Φ(h) = ∫_{H₀}^h dr/Ψ(r)`.
//!
//! `Φ` is evaluated in the variable `s = ln r`, where its integrand
//! `1/(e + log(e + e^s))` is smooth and bounded, so arguments up to
//! `e^{e^{10}}` and beyond can be passed by their logarithm.

use std::fmt;
use std::io::{Read, Write};

use crate::criteria::{csv_err, format_number};
use crate::error::{Error, Result};
use crate::Real;

/// `H` beyond this is reported as numeric overflow.
pub const OVERFLOW_LIMIT: f64 = 1e300;

/// Growth function of the ODE.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Growth {
    /// `Ψ(r) = r(e + log(e + r))`
    #[default]
    Log,
    /// `Ψ(r) = r`; the linear ODE with solution `H₀·exp(C∫B)`.
    Identity,
}

impl Growth {
    pub fn psi<T: Real>(self, r: T) -> T {
        match self {
            Growth::Log => r * (T::E() + (T::E() + r).ln()),
            Growth::Identity => r,
        }
    }

    /// `r/Ψ(r)` at `r = e^s`, the integrand of `Φ` in log variables.
    fn weight<T: Real>(self, s: T) -> T {
        match self {
            Growth::Log => (T::E() + T::log_add_exp(T::one(), s)).recip(),
            Growth::Identity => T::one(),
        }
    }

    /// `∫_{e^a}^{e^b} dr/Ψ(r)`
    fn phi_log<T: Real>(self, a: T, b: T) -> T {
        match self {
            Growth::Identity => b - a,
            Growth::Log => {
                if a == b {
                    return T::zero();
                }
                let (lo, hi, sign) = if a < b { (a, b, T::one()) } else { (b, a, -T::one()) };
                sign * adaptive_simpson(&|s| self.weight(s), lo, hi, T::lit(1e-15) * (T::one() + hi - lo))
            }
        }
    }

    /// `Φ(h) = ∫_{h0}^h dr/Ψ(r)`
    pub fn phi<T: Real>(self, h0: T, h: T) -> T {
        self.phi_log(h0.ln(), h.ln())
    }

    /// `h'` with `∫_h^{h'} dr/Ψ = delta ≥ 0`, by Newton iteration in `ln h'`.
    pub fn advance<T: Real>(self, h: T, delta: T) -> Result<T> {
        let limit = T::lit(OVERFLOW_LIMIT).ln();
        let s0 = h.ln();
        let s = match self {
            Growth::Identity => s0 + delta,
            Growth::Log => {
                if delta == T::zero() {
                    return Ok(h);
                }
                // Φ in log variables is concave and increasing, so Newton from
                // the left converges monotonically
                let mut s = s0;
                for _ in 0..100 {
                    let g = self.phi_log(s0, s) - delta;
                    let step = g / self.weight(s);
                    s -= step;
                    if s > limit {
                        break;
                    }
                    if step.abs() <= T::lit(4.0) * T::epsilon() * (T::one() + s.abs()) {
                        break;
                    }
                }
                s
            }
        };
        if !(s <= limit) {
            return Err(Error::InvalidInput(format!(
                "numeric overflow: H exceeds {OVERFLOW_LIMIT:e}, which a finite ∫B cannot produce"
            )));
        }
        Ok(s.exp())
    }
}

fn simpson<T: Real>(f: &dyn Fn(T) -> T, a: T, fa: T, b: T, fb: T) -> (T, T, T) {
    let m = (a + b) * T::lit(0.5);
    let fm = f(m);
    (m, fm, (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<T: Real>(f: &dyn Fn(T) -> T, a: T, fa: T, b: T, fb: T, m: T, fm: T, whole: T, tol: T, depth: u32) -> T {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::lit(15.0) * tol {
        return left + right + delta / T::lit(15.0);
    }
    let half = tol * T::lit(0.5);
    simpson_rec(f, a, fa, m, fm, lm, flm, left, half, depth - 1) + simpson_rec(f, m, fm, b, fb, rm, frm, right, half, depth - 1)
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<T: Real>(f: &dyn Fn(T) -> T, a: T, b: T, tol: T) -> T {
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, 48)
}

/// `∫₁^M dr/Ψ(r)`
pub fn psi_tail<T: Real>(m: T) -> Result<T> {
    if !(m >= T::one()) {
        return Err(Error::Precondition(format!("psi_tail needs M ≥ 1, got {m}")));
    }
    Ok(psi_tail_ln(m.ln()))
}

/// `∫₁^M dr/Ψ(r)` for `M = e^{ln_m}`, usable far beyond floating-point range.
pub fn psi_tail_ln<T: Real>(ln_m: T) -> T {
    Growth::Log.phi_log(T::zero(), ln_m)
}

/// `log(e + log(e + M)) − log(e + log(e + 1))`, the comparison primitive
/// below [`psi_tail_ln`].
pub fn psi_tail_lower<T: Real>(ln_m: T) -> T {
    let e = T::E();
    (e + T::log_add_exp(T::one(), ln_m)).ln() - (e + (e + T::one()).ln()).ln()
}

/// The nonnegative signal `B`.
pub enum Forcing<T> {
    /// Any smooth function.
    Function(Box<dyn Fn(T) -> T + Send + Sync>),
    /// Piecewise-linear through the samples.
    Linear { times: Vec<T>, values: Vec<T> },
    /// `values[i]` on `[edges[i], edges[i+1])`.
    Steps { edges: Vec<T>, values: Vec<T> },
}

impl<T> fmt::Debug for Forcing<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::Function(_) => f.write_str("Forcing::Function"),
            Forcing::Linear { times, .. } => write!(f, "Forcing::Linear({} samples)", times.len()),
            Forcing::Steps { values, .. } => write!(f, "Forcing::Steps({} pieces)", values.len()),
        }
    }
}

fn check_knots<T: Real>(t: &[T], v: &[T], pieces: bool) -> Result<()> {
    let want = if pieces { v.len() + 1 } else { v.len() };
    if t.len() != want || v.is_empty() {
        return Err(Error::InvalidInput(format!("{} knots do not fit {} values", t.len(), v.len())));
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("knot times must be strictly increasing".into()));
    }
    if v.iter().any(|&x| !(x >= T::zero()) || !x.is_finite()) {
        return Err(Error::InvalidInput("B must be finite and nonnegative".into()));
    }
    Ok(())
}

impl<T: Real> Forcing<T> {
    pub fn constant(b: T) -> Self {
        Forcing::Function(Box::new(move |_| b))
    }

    pub fn linear(times: Vec<T>, values: Vec<T>) -> Result<Self> {
        check_knots(&times, &values, false)?;
        if times.len() < 2 {
            return Err(Error::InsufficientData("piecewise-linear B needs at least 2 samples".into()));
        }
        Ok(Forcing::Linear { times, values })
    }

    pub fn steps(edges: Vec<T>, values: Vec<T>) -> Result<Self> {
        check_knots(&edges, &values, true)?;
        Ok(Forcing::Steps { edges, values })
    }

    /// Samples `(t_i, B_i)` read as `B = B_i` on `[t_i, t_{i+1})`.
    pub fn steps_from_samples(times: Vec<T>, values: Vec<T>) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(Error::InsufficientData("step B needs at least 2 samples of (t, B)".into()));
        }
        let mut v = values;
        v.pop();
        Self::steps(times, v)
    }

    pub fn value(&self, t: T) -> T {
        match self {
            Forcing::Function(f) => f(t),
            Forcing::Linear { times, values } => {
                let i = times.partition_point(|&x| x <= t).clamp(1, times.len() - 1);
                let (t0, t1) = (times[i - 1], times[i]);
                values[i - 1] + (values[i] - values[i - 1]) * (t - t0) / (t1 - t0)
            }
            Forcing::Steps { edges, values } => {
                let i = edges.partition_point(|&x| x <= t).clamp(1, values.len());
                values[i - 1]
            }
        }
    }

    /// Times where `B` or its derivative may jump.
    fn knots(&self) -> &[T] {
        match self {
            Forcing::Function(_) => &[],
            Forcing::Linear { times, .. } => times,
            Forcing::Steps { edges, .. } => edges,
        }
    }

    /// Domain of the data, if any.
    pub fn span(&self) -> Option<(T, T)> {
        let k = self.knots();
        (!k.is_empty()).then(|| (k[0], k[k.len() - 1]))
    }

    /// `∫_a^b B` over an interval containing no knot.
    fn piece_integral(&self, a: T, b: T) -> T {
        match self {
            Forcing::Function(f) => adaptive_simpson(&|t| f(t), a, b, T::lit(1e-15) * (b - a)),
            Forcing::Linear { .. } => (b - a) * (self.value(a) + self.value(b)) * T::lit(0.5),
            Forcing::Steps { .. } => (b - a) * self.value((a + b) * T::lit(0.5)),
        }
    }
}

/// `H' = C·Ψ(H)·B(t)` on `[t0, t1]` with `H(t0) = h0`.
#[derive(Debug)]
pub struct BoundProblem<T> {
    pub forcing: Forcing<T>,
    pub c: T,
    pub h0: T,
    pub t0: T,
    pub t1: T,
    pub growth: Growth,
}

impl<T: Real> BoundProblem<T> {
    pub fn new(forcing: Forcing<T>, c: T, h0: T, t0: T, t1: T) -> Result<Self> {
        if !(c > T::zero()) || !c.is_finite() {
            return Err(Error::Precondition(format!("C must be positive, got {c}")));
        }
        if !(h0 > T::zero()) || !h0.is_finite() {
            return Err(Error::Precondition(format!("H0 must be positive, got {h0}")));
        }
        if !(t1 > t0) {
            return Err(Error::Precondition(format!("need t1 > t0, got [{t0}, {t1}]")));
        }
        if let Some((a, b)) = forcing.span() {
            if t0 < a || t1 > b {
                return Err(Error::Precondition(format!("B is given on [{a}, {b}], not on [{t0}, {t1}]")));
            }
        }
        Ok(Self {
            forcing,
            c,
            h0,
            t0,
            t1,
            growth: Growth::Log,
        })
    }

    /// Solves on the full span of sampled or stepped data.
    pub fn over_data(forcing: Forcing<T>, c: T, h0: T) -> Result<Self> {
        let (a, b) = forcing
            .span()
            .ok_or_else(|| Error::InvalidInput("a function B needs an explicit interval".into()))?;
        Self::new(forcing, c, h0, a, b)
    }

    pub fn with_growth(mut self, growth: Growth) -> Self {
        self.growth = growth;
        self
    }

    /// Integration nodes: the uniform grid of spacing `dt` merged with the knots.
    fn nodes(&self, dt: T) -> Vec<T> {
        let steps = ((self.t1 - self.t0) / dt).ceil().to_usize().unwrap_or(1).max(1);
        let mut t: Vec<T> = (0..steps)
            .map(|i| self.t0 + dt * T::from_usize_exact(i))
            .chain(self.forcing.knots().iter().copied().filter(|&k| k > self.t0 && k < self.t1))
            .chain(std::iter::once(self.t1))
            .collect();
        t.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let tol = T::lit(1e-12) * dt;
        t.dedup_by(|b, a| (*b - *a).abs() <= tol);
        *t.last_mut().unwrap() = self.t1;
        t
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundSolution<T> {
    pub times: Vec<T>,
    pub h: Vec<T>,
    /// `C∫_{t0}^t B`
    pub integral: Vec<T>,
    /// Set when `H` overflowed before `t1`; the signal stops there.
    pub overflow: Option<String>,
}

fn rk4_step<T: Real>(p: &BoundProblem<T>, t: T, h: T, dt: T) -> T {
    let f = |t: T, h: T| p.c * p.growth.psi(h) * p.forcing.value(t);
    let half = dt * T::lit(0.5);
    let k1 = f(t, h);
    let k2 = f(t + half, h + half * k1);
    let k3 = f(t + half, h + half * k2);
    let k4 = f(t + dt, h + dt * k3);
    h + dt / T::lit(6.0) * (k1 + T::lit(2.0) * (k2 + k3) + k4)
}

/// Classic RK4 between consecutive nodes; piecewise-constant `B` advances
/// exactly through `Φ`.
pub fn solve_bound<T: Real>(p: &BoundProblem<T>, dt: T) -> Result<BoundSolution<T>> {
    if !(dt > T::zero()) {
        return Err(Error::Precondition(format!("dt must be positive, got {dt}")));
    }
    let nodes = p.nodes(dt);
    let mut sol = BoundSolution {
        times: vec![nodes[0]],
        h: vec![p.h0],
        integral: vec![T::zero()],
        overflow: None,
    };
    let limit = T::lit(OVERFLOW_LIMIT);
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h = *sol.h.last().unwrap();
        let mass = p.c * p.forcing.piece_integral(a, b);
        if !(mass >= T::zero()) || !mass.is_finite() {
            return Err(Error::InvalidInput(format!("∫B over [{a}, {b}] is {mass}; B must be nonnegative and integrable")));
        }
        let next = match p.forcing {
            Forcing::Steps { .. } => p.growth.advance(h, mass),
            _ => Ok(rk4_step(p, a, h, b - a)),
        };
        match next {
            Ok(v) if v.is_finite() && v <= limit => {
                sol.times.push(b);
                sol.h.push(v);
                sol.integral.push(*sol.integral.last().unwrap() + mass);
            }
            Ok(_) | Err(_) => {
                sol.overflow = Some(format!(
                    "numeric overflow at t = {b}: H exceeds {OVERFLOW_LIMIT:e}; a finite ∫B cannot do this, check the B signal"
                ));
                break;
            }
        }
    }
    Ok(sol)
}

/// `Φ(H(t)) − C∫_{t0}^t B` at every output time.
pub fn implicit_deviation<T: Real>(sol: &BoundSolution<T>, p: &BoundProblem<T>) -> Vec<T> {
    let s0 = p.h0.ln();
    let mut phi = T::zero();
    let mut prev = s0;
    sol.h
        .iter()
        .zip(&sol.integral)
        .map(|(&h, &i)| {
            let s = h.ln();
            phi += p.growth.phi_log(prev, s);
            prev = s;
            phi - i
        })
        .collect()
}

/// `max_t |Φ(H(t)) − C∫B|`
pub fn implicit_check<T: Real>(sol: &BoundSolution<T>, p: &BoundProblem<T>) -> T {
    implicit_deviation(sol, p)
        .into_iter()
        .fold(T::zero(), |m, d| m.max(d.abs()))
}

/// `H` after each impulse of a piecewise-constant `B` that is zero between
/// pieces, given only the masses `∫B` of the pieces.
pub fn solve_masses<T: Real>(growth: Growth, c: T, h0: T, masses: &[T]) -> Result<Vec<T>> {
    if masses.iter().any(|&m| !(m >= T::zero()) || !m.is_finite()) {
        return Err(Error::InvalidInput("masses must be finite and nonnegative".into()));
    }
    let mut h = vec![h0];
    for &m in masses {
        h.push(growth.advance(*h.last().unwrap(), c * m)?);
    }
    Ok(h)
}

/// Reads `t,B` rows (header optional).
pub fn read_forcing_csv<T: Real, R: Read>(r: R) -> Result<(Vec<T>, Vec<T>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(r);
    let (mut t, mut b) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(i as u64 + 1, |p| p.line());
        if rec.len() != 2 {
            return Err(Error::Format(format!("line {line}: expected 2 columns (t, B), found {}", rec.len())));
        }
        let parse = |s: &str| s.parse::<f64>().ok();
        match (parse(&rec[0]), parse(&rec[1])) {
            (Some(x), Some(y)) => {
                t.push(T::lit(x));
                b.push(T::lit(y));
            }
            _ if i == 0 => continue,
            _ => {
                return Err(Error::Format(format!(
                    "line {line}: cannot parse \"{}\", \"{}\" as numbers",
                    &rec[0], &rec[1]
                )))
            }
        }
    }
    Ok((t, b))
}

pub fn write_solution_csv<T: Real, W: Write>(sol: &BoundSolution<T>, deviation: &[T], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "H", "deviation"]).map_err(csv_err)?;
    for ((t, h), d) in sol.times.iter().zip(&sol.h).zip(deviation) {
        out.write_record([format_number(*t), format_number(*h), format_number(*d)])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

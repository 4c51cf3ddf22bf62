//! De Giorgi level-set energies on shrinking parabolic cylinders, the cutoff
//! energy budget, the superlinear recursion `W_{k+1} = C^k W_k^β` and an
//! exploratory fit of its constants.
//!
//! The reference cylinder `[−1, 1] × B(1)` sits in the simulation through
//! the universal scaling: reference time `τ` and point `y` correspond to
//! `t = t₀ + s²τ`, `x = x₀ + s·y`, and the reference velocity is
//! `s·u(t, x)`. Level `k` uses
//!
//! ```text
//! T_k = −(1 + 2^{−k})/2,   r_k = (1 + 2^{−3k})/2,   c_k = 1 − 2^{−k},
//! v_k = (|u| − c_k)_+,
//! d_k² = v_k|∇u|²/|u| + χ_{v_k>0}·c_k|∇|u||²/|u|,
//! U_k = ½ sup_{(T_k,1]} ∫_{B_k} v_k² + ∫_{T_k}^1 ∫_{B_k} d_k².
//! ```

use std::io::Write;

use crate::criteria::{csv_err, format_number, trapezoid};
use crate::error::{Error, Result};
use crate::field::ops::{gradient_with, velocity_gradient_with};
use crate::field::{Fft3, Grid, ScalarField, VectorField};
use crate::lorentz::Region;
use crate::nse::energy::frame_terms;
use crate::nse::{SpaceTimeCutoff, Symbols, Trajectory};
use crate::Real;

/// Minimum number of snapshots required inside every window `(T_k, 1]`.
pub const MIN_WINDOW_SAMPLES: usize = 10;

/// `T_k = −(1 + 2^{−k})/2`; `k = −1` gives `−3/2`.
pub fn level_time<T: Real>(k: i32) -> T {
    -(T::one() + T::lit(2.0).powi(-k)) * T::lit(0.5)
}

/// `r_k = (1 + 2^{−3k})/2`; `k = −1` gives `4.5`.
pub fn level_radius<T: Real>(k: i32) -> T {
    (T::one() + T::lit(2.0).powi(-3 * k)) * T::lit(0.5)
}

/// `c_k = 1 − 2^{−k}`
pub fn level_threshold<T: Real>(k: usize) -> T {
    T::one() - T::lit(2.0).powi(-(k as i32))
}

/// Placement of the reference cylinder in the simulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CylinderScheme<T> {
    pub k_max: usize,
    pub center: [T; 3],
    pub scale: T,
    /// Simulation time of reference time 0.
    pub t_origin: T,
}

impl<T: Real> CylinderScheme<T> {
    pub fn new(k_max: usize, center: [T; 3], scale: T, t_origin: T) -> Result<Self> {
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(Error::InvalidInput(format!("cylinder scale must be positive, got {scale}")));
        }
        Ok(Self { k_max, center, scale, t_origin })
    }

    pub fn to_reference_time(&self, t: T) -> T {
        (t - self.t_origin) / (self.scale * self.scale)
    }

    pub fn to_simulation_time(&self, tau: T) -> T {
        self.t_origin + self.scale * self.scale * tau
    }

    /// Cells of the mapped ball `B_k`; errors if it leaves the box.
    pub fn ball(&self, grid: &Grid<T>, k: i32) -> Result<Region> {
        Region::ball(grid, self.center, self.scale * level_radius::<T>(k))
    }
}

/// `v_k = (|u| − (1 − 2^{−k}))_+`
pub fn truncate<T: Real>(u: &VectorField<T>, k: usize) -> ScalarField<T> {
    let c = level_threshold::<T>(k);
    u.magnitude().map(|m| (m - c).max(T::zero())).expect("finite input")
}

/// Pointwise `d_k²` from `|u|`, `|∇u|²` and `|∇|u||²`, with `d_k² = 0` where
/// `v_k = 0` and `v_0/|u| = 1`.
#[inline]
fn density<T: Real>(mag: T, grad_u2: T, grad_mag2: T, k: usize) -> T {
    let c = level_threshold::<T>(k);
    let v = mag - c;
    if !(v > T::zero()) {
        return T::zero();
    }
    if k == 0 {
        return grad_u2;
    }
    (v * grad_u2 + c * grad_mag2) / mag
}

struct Gradients<T> {
    mag: Vec<T>,
    grad_u2: Vec<T>,
    grad_mag2: Vec<T>,
}

fn gradients<T: Real>(plan: &Fft3<T>, u: &VectorField<T>) -> Gradients<T> {
    let g = u.grid();
    let du = velocity_gradient_with(plan, u);
    let mag = u.magnitude();
    let dm = gradient_with(plan, &mag);
    let sq = |v: [T; 3]| v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    Gradients {
        grad_u2: (0..g.len()).map(|i| du.iter().map(|r| sq(r.at(i))).sum()).collect(),
        grad_mag2: (0..g.len()).map(|i| sq(dm.at(i))).collect(),
        mag: mag.into_values(),
    }
}

/// `d_k²` of one snapshot, derivatives taken spectrally.
pub fn dissipation_density<T: Real>(u: &VectorField<T>, k: usize) -> ScalarField<T> {
    let g = *u.grid();
    let gr = gradients(&Fft3::new(g.n()), u);
    let values = (0..g.len())
        .map(|i| density(gr.mag[i], gr.grad_u2[i], gr.grad_mag2[i], k))
        .collect();
    ScalarField::new(g, values).expect("finite input")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelRow<T> {
    pub k: usize,
    pub t_k: T,
    pub radius_k: T,
    pub threshold_k: T,
    pub sup_term: T,
    pub diss_term: T,
    pub u_k: T,
    /// Cell-count measure of `B_k` in reference units.
    pub ball_measure: T,
    /// Measure of the cells within half a cell diagonal of the sphere; the
    /// geometric error of every ball integral is bracketed by this.
    pub surface_bracket: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelSetEnergy<T> {
    pub rows: Vec<LevelRow<T>>,
}

pub const LEVEL_COLUMNS: [&str; 7] = ["k", "T_k", "radius_k", "threshold_k", "sup_term", "diss_term", "U_k"];

impl<T: Real> LevelSetEnergy<T> {
    pub fn u(&self) -> Vec<T> {
        self.rows.iter().map(|r| r.u_k).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(LEVEL_COLUMNS).map_err(csv_err)?;
        for r in &self.rows {
            let rec = [
                r.k.to_string(),
                format_number(r.t_k),
                format_number(r.radius_k),
                format_number(r.threshold_k),
                format_number(r.sup_term),
                format_number(r.diss_term),
                format_number(r.u_k),
            ];
            out.write_record(&rec).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `∫_a^b` of the piecewise-linear interpolant through `(t_i, y_i)`.
fn integrate_linear<T: Real>(t: &[T], y: &[T], a: T, b: T) -> T {
    let mut acc = T::zero();
    for i in 0..t.len().saturating_sub(1) {
        let (t0, t1) = (t[i], t[i + 1]);
        let lo = t0.max(a);
        let hi = t1.min(b);
        if !(hi > lo) {
            continue;
        }
        let at = |s: T| y[i] + (y[i + 1] - y[i]) * (s - t0) / (t1 - t0);
        acc += (hi - lo) * (at(lo) + at(hi)) * T::lit(0.5);
    }
    acc
}

fn surface_cells<T: Real>(grid: &Grid<T>, center: [T; 3], radius: T) -> usize {
    let band = grid.spacing() * T::lit(3.0).sqrt() * T::lit(0.5);
    (0..grid.len())
        .filter(|&i| {
            let p = grid.point(i);
            let d = (0..3).map(|a| (p[a] - center[a]) * (p[a] - center[a])).sum::<T>().sqrt();
            (d - radius).abs() <= band
        })
        .count()
}

/// Level energies `U_0..U_{k_max}` of a trajectory covering the mapped
/// window `[−1, 1]`.
pub fn level_energy<T: Real>(traj: &Trajectory<T>, scheme: &CylinderScheme<T>) -> Result<LevelSetEnergy<T>> {
    let g = *traj
        .grid()
        .ok_or_else(|| Error::InsufficientData("empty trajectory".into()))?;
    let s = scheme.scale;
    let tau: Vec<T> = traj.times().into_iter().map(|t| scheme.to_reference_time(t)).collect();
    let tol = T::lit(1e-9);
    if !(tau[0] <= -T::one() + tol && *tau.last().unwrap() >= T::one() - tol) {
        return Err(Error::InsufficientData(format!(
            "trajectory spans [{}, {}] but the cylinder needs [{}, {}]",
            traj.times()[0],
            traj.times().last().unwrap(),
            scheme.to_simulation_time(-T::one()),
            scheme.to_simulation_time(T::one())
        )));
    }
    // frames bracketing [−1, 1]
    let first = tau.iter().rposition(|&x| x <= -T::one() + tol).unwrap();
    let last = tau.iter().position(|&x| x >= T::one() - tol).unwrap();
    let frames = &traj.frames()[first..=last];
    let tau = &tau[first..=last];

    let plan = Fft3::new(g.n());
    let grads: Vec<Gradients<T>> = frames.iter().map(|f| gradients(&plan, &f.velocity)).collect();
    let s2 = s * s;
    let s4 = s2 * s2;
    let dv = g.cell_volume() / (s2 * s);

    let mut rows = Vec::with_capacity(scheme.k_max + 1);
    for k in 0..=scheme.k_max {
        let kk = k as i32;
        let t_k = level_time::<T>(kk);
        let count = tau.iter().filter(|&&x| x > t_k && x <= T::one() + tol).count();
        if count < MIN_WINDOW_SAMPLES {
            return Err(Error::InsufficientData(format!(
                "level {k} window ({t_k}, 1] holds {count} snapshots; at least {MIN_WINDOW_SAMPLES} are required, \
                 i.e. a snapshot spacing of at most {} in simulation time",
                (T::one() - t_k) * s2 / T::from_usize_exact(MIN_WINDOW_SAMPLES)
            )));
        }
        let ball = scheme.ball(&g, kk)?;
        let radius = level_radius::<T>(kk);
        let mut sup = T::zero();
        let mut diss = Vec::with_capacity(frames.len());
        for (fi, gr) in grads.iter().enumerate() {
            let (mut a, mut d) = (T::zero(), T::zero());
            for i in (0..g.len()).filter(|&i| ball.contains(i)) {
                let m = s * gr.mag[i];
                let v = (m - level_threshold::<T>(k)).max(T::zero());
                a += v * v;
                d += density(m, s4 * gr.grad_u2[i], s4 * gr.grad_mag2[i], k);
            }
            if tau[fi] > t_k && tau[fi] <= T::one() + tol {
                sup = sup.max(a * dv);
            }
            diss.push(d * dv);
        }
        let sup_term = T::lit(0.5) * sup;
        let diss_term = integrate_linear(tau, &diss, t_k, T::one());
        rows.push(LevelRow {
            k,
            t_k,
            radius_k: radius,
            threshold_k: level_threshold(k),
            sup_term,
            diss_term,
            u_k: sup_term + diss_term,
            ball_measure: T::from_usize_exact(ball.cell_count(&g)) * dv,
            surface_bracket: T::from_usize_exact(surface_cells(&g, scheme.center, s * radius)) * dv,
        });
    }
    Ok(LevelSetEnergy { rows })
}

/// Terms of the cutoff energy inequality, integrated from the first frame:
/// `slack(t) = K(t₀) + ∫(S + F) − K(t) − ∫D`, nonnegative for suitable weak
/// solutions and zero up to discretization for smooth ones.
#[derive(Clone, Debug, PartialEq)]
pub struct BudgetReport<T> {
    pub times: Vec<T>,
    /// `∫η|u|²/2`
    pub kinetic: Vec<T>,
    /// `ν∫η|∇u|²`
    pub dissipation: Vec<T>,
    /// `∫(|u|²/2)(η_t + νΔη)`
    pub source: Vec<T>,
    /// `∫(∇η·u)(|u|²/2 + P)`
    pub flux: Vec<T>,
    pub slack: Vec<T>,
}

impl<T: Real> BudgetReport<T> {
    pub fn min_slack(&self) -> T {
        self.slack.iter().copied().fold(T::infinity(), T::min)
    }
}

/// Evaluates the budget over the frames with reference time in `[−3/2, 1]`.
/// `eta` must be 1 on the mapped `Q_0` and vanish outside the mapped `B_{−1}`.
pub fn energy_budget<T: Real>(
    traj: &Trajectory<T>,
    eta: &dyn SpaceTimeCutoff<T>,
    scheme: &CylinderScheme<T>,
    viscosity: T,
) -> Result<BudgetReport<T>> {
    let g = *traj
        .grid()
        .ok_or_else(|| Error::InsufficientData("empty trajectory".into()))?;
    let outer = scheme.ball(&g, -1)?;
    let inner = scheme.ball(&g, 0)?;
    let lo = level_time::<T>(-1);
    let tol = T::lit(1e-9);
    let frames: Vec<_> = traj
        .frames()
        .iter()
        .filter(|f| {
            let tau = scheme.to_reference_time(f.time);
            tau >= lo - tol && tau <= T::one() + tol
        })
        .collect();
    if frames.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "energy budget needs at least 2 frames in the mapped window, got {}",
            frames.len()
        )));
    }

    let eps = T::lit(1e-12);
    let mut bad = Vec::new();
    for f in &frames {
        let tau = scheme.to_reference_time(f.time);
        let in_q0 = tau >= -T::one() - tol;
        for i in 0..g.len() {
            let x = g.point(i);
            let e = eta.value(f.time, x);
            let ok = if in_q0 && inner.contains(i) {
                (e - T::one()).abs() <= eps
            } else if !outer.contains(i) {
                e.abs() <= eps
            } else {
                true
            };
            if !ok {
                bad.push((f.time, i));
            }
        }
    }
    if !bad.is_empty() {
        let shown: Vec<String> = bad
            .iter()
            .take(5)
            .map(|(t, i)| {
                let (a, b, c) = g.coords(*i);
                format!("t = {t}, cell ({a}, {b}, {c})")
            })
            .collect();
        return Err(Error::Precondition(format!(
            "cutoff violates its support conditions at {} cells, e.g. {}",
            bad.len(),
            shown.join("; ")
        )));
    }

    let plan = Fft3::new(g.n());
    let sym = Symbols::new(&g, T::one());
    let terms: Vec<_> = frames.iter().map(|f| frame_terms(&plan, &sym, f, eta, viscosity)).collect();
    let times: Vec<T> = frames.iter().map(|f| f.time).collect();
    let kinetic: Vec<T> = terms.iter().map(|t| t.local_energy).collect();
    let dissipation: Vec<T> = terms.iter().map(|t| t.dissipation).collect();
    let source: Vec<T> = terms.iter().map(|t| t.source).collect();
    let flux: Vec<T> = terms.iter().map(|t| t.flux).collect();
    let gain: Vec<T> = source.iter().zip(&flux).map(|(a, b)| *a + *b).collect();
    let slack = (0..times.len())
        .map(|j| {
            let upto = &times[..=j];
            kinetic[0] + trapezoid(upto, &gain[..=j]) - kinetic[j] - trapezoid(upto, &dissipation[..=j])
        })
        .collect();
    Ok(BudgetReport {
        times,
        kinetic,
        dissipation,
        source,
        flux,
        slack,
    })
}

/// Iterates of `W_{k+1} = C^k W_k^β` kept as `ℓ_k = ln W_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct RecursiveReport<T> {
    pub log_w: Vec<T>,
    /// `ℓ_k` is eventually below the marginal solution, so `W_k → 0`.
    pub converged: bool,
}

impl<T: Real> RecursiveReport<T> {
    /// `e_k = −log₂ W_k`
    pub fn log2_exponents(&self) -> Vec<T> {
        self.log_w.iter().map(|l| -*l / T::LN_2()).collect()
    }
}

/// Marginal solution `ℓ*_k = −(k/(β−1) + 1/(β−1)²)·ln C` of the equality
/// recursion. Any other solution differs from it by `β^k(ℓ_0 − ℓ*_0)`, so the
/// sign of that difference decides between `W_k → 0` and `W_k → ∞`.
pub fn marginal_log<T: Real>(c: T, beta: T, k: usize) -> T {
    let b1 = beta - T::one();
    -(T::from_usize_exact(k) / b1 + (b1 * b1).recip()) * c.ln()
}

fn check_recursion<T: Real>(c: T, beta: T) -> Result<()> {
    if !(c > T::one() && beta > T::one()) {
        return Err(Error::Precondition(format!("need C > 1 and β > 1, got C = {c}, β = {beta}")));
    }
    Ok(())
}

pub fn recursive_sequence<T: Real>(c: T, beta: T, w0: T, k_max: usize) -> Result<RecursiveReport<T>> {
    check_recursion(c, beta)?;
    if !(w0 > T::zero()) || !w0.is_finite() {
        return Err(Error::Precondition(format!("W0 must be positive, got {w0}")));
    }
    Ok(recursive_from_log(c, beta, w0.ln(), k_max))
}

fn recursive_from_log<T: Real>(c: T, beta: T, l0: T, k_max: usize) -> RecursiveReport<T> {
    let lc = c.ln();
    let mut log_w = vec![l0];
    for k in 0..k_max {
        let next = T::from_usize_exact(k) * lc + beta * log_w[k];
        if !next.is_finite() {
            break;
        }
        log_w.push(next);
    }
    let k = log_w.len() - 1;
    let converged = log_w[k] < marginal_log(c, beta, k);
    RecursiveReport { log_w, converged }
}

/// Bracket `[lo, hi]` of the critical `W_0`: `lo` converges, `hi` does not.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdBracket<T> {
    pub lo: T,
    pub hi: T,
}

pub const SCAN_K_MAX: usize = 200;

/// Bisection in `ln W_0` between a converging and a diverging start until
/// the bracket is relatively narrower than `1e−12`.
pub fn threshold_scan<T: Real>(c: T, beta: T) -> Result<ThresholdBracket<T>> {
    check_recursion(c, beta)?;
    let (mut lo, mut hi) = (T::lit(-690.0), T::zero());
    if !recursive_from_log(c, beta, lo, SCAN_K_MAX).converged {
        return Ok(ThresholdBracket { lo: T::zero(), hi: lo.exp() });
    }
    for _ in 0..400 {
        if hi.exp() - lo.exp() <= T::lit(1e-12) * hi.exp() {
            break;
        }
        let mid = (lo + hi) * T::lit(0.5);
        if recursive_from_log(c, beta, mid, SCAN_K_MAX).converged {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdBracket { lo: lo.exp(), hi: hi.exp() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaFit<T> {
    pub beta: T,
    pub c: T,
    pub r2: T,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FitOutcome<T> {
    Fit(BetaFit<T>),
    /// Some `U_k` vanished: the iteration terminated, nothing to fit.
    TriviallyRegular,
}

/// Least squares for `ln U_k = k·ln C + β·ln U_{k−1}` over consecutive
/// positive terms.
pub fn fit_beta<T: Real>(u: &[T]) -> Result<FitOutcome<T>> {
    if u.iter().any(|&x| !(x >= T::zero())) {
        return Err(Error::InvalidInput("level energies must be nonnegative".into()));
    }
    let run = u.iter().take_while(|&&x| x > T::zero()).count();
    if run < u.len() && run < 5 {
        return Ok(FitOutcome::TriviallyRegular);
    }
    if run < 5 {
        return Err(Error::InsufficientData(format!("need at least 5 positive terms, got {run}")));
    }
    let (mut skk, mut skx, mut sxx, mut sky, mut sxy) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    let mut ys = Vec::with_capacity(run - 1);
    for k in 1..run {
        let kf = T::from_usize_exact(k);
        let x = u[k - 1].ln();
        let y = u[k].ln();
        skk += kf * kf;
        skx += kf * x;
        sxx += x * x;
        sky += kf * y;
        sxy += x * y;
        ys.push((kf, x, y));
    }
    let det = skk * sxx - skx * skx;
    if det == T::zero() {
        return Err(Error::InsufficientData("degenerate regression".into()));
    }
    let log_c = (sky * sxx - sxy * skx) / det;
    let beta = (skk * sxy - skx * sky) / det;
    let n = T::from_usize_exact(ys.len());
    let mean = ys.iter().map(|r| r.2).sum::<T>() / n;
    let ss_tot: T = ys.iter().map(|r| (r.2 - mean) * (r.2 - mean)).sum();
    let ss_res: T = ys
        .iter()
        .map(|&(k, x, y)| {
            let e = y - k * log_c - beta * x;
            e * e
        })
        .sum();
    let r2 = if ss_tot > T::zero() { T::one() - ss_res / ss_tot } else { T::one() };
    Ok(FitOutcome::Fit(BetaFit {
        beta,
        c: log_c.exp(),
        r2,
        points: ys.len(),
    }))
}

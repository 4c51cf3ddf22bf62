//! Pseudo-spectral Navier-Stokes solver on the periodic box.
//!
//! The state is the Fourier transform `û` of a divergence-free velocity.
//! Time stepping is classical RK4 on `dû/dt = −ν|k|²û + N(û)` with the viscous
//! term absorbed by the integrating factor `e^{−ν|k|²τ}`, where
//! `N(û) = −P(∇·(u⊗u))` is the Leray-projected, 2/3-dealiased advection.

pub(crate) mod energy;
mod initial;
mod pressure;

pub use energy::{energy_residual, energy_terms, Constant, EnergyTerms, Frame, GaussianBump, PolynomialBump, ResidualSignal, SpaceTimeCutoff, Trajectory};
pub use initial::InitialCondition;
pub use pressure::{pressure_from_velocity, pressure_split};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{Fft3, Grid, ScalarField, SpectralField, SpectralVectorField, VectorField};
use crate::Real;

/// Velocities above this are treated as loss of resolution.
pub const BLOWUP_THRESHOLD: f64 = 1e8;

pub(crate) type Modes<T> = [Vec<Complex<T>>; 3];

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig<T> {
    pub n: usize,
    pub length: T,
    pub viscosity: T,
    pub dt: T,
    pub t_end: T,
    /// Retained fraction of the resolved band; modes with any `|m_j| > dealias·n/2` are zeroed.
    pub dealias: T,
    pub snapshot_every: usize,
    pub seed: u64,
    pub initial_condition: InitialCondition<T>,
    /// Set to `false` to drop advection and solve the heat equation.
    pub nonlinear: bool,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            n: 32,
            length: T::TAU(),
            viscosity: T::one(),
            dt: T::lit(1e-3),
            t_end: T::lit(0.1),
            dealias: T::lit(2.0 / 3.0),
            snapshot_every: 10,
            seed: 0,
            initial_condition: InitialCondition::TaylorGreen { amplitude: T::one() },
            nonlinear: true,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<Grid<T>> {
        let grid = Grid::new(self.n, self.length)?;
        let bad = |what: &str, v: T| Err(Error::InvalidInput(format!("{what} must be positive, got {v}")));
        if !(self.viscosity > T::zero()) {
            return bad("viscosity", self.viscosity);
        }
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return bad("dt", self.dt);
        }
        if !(self.t_end >= T::zero()) || !self.t_end.is_finite() {
            return Err(Error::InvalidInput(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        if !(self.dealias > T::zero() && self.dealias <= T::one()) {
            return Err(Error::InvalidInput(format!("dealias must lie in (0, 1], got {}", self.dealias)));
        }
        if self.snapshot_every == 0 {
            return Err(Error::InvalidInput("snapshot_every must be at least 1".into()));
        }
        self.initial_condition.validate()?;
        Ok(grid)
    }

    /// Number of steps needed to reach `t_end`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().to_usize().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverState<T> {
    pub time: T,
    pub velocity: SpectralVectorField<T>,
    pub step_index: usize,
}

/// Per-step diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport<T> {
    pub step: usize,
    pub time: T,
    pub energy: T,
    pub sup_norm: T,
    /// `max_k |k·û(k)| / max_k |û(k)|`
    pub max_divergence: T,
    /// `dt·max|u|/h`
    pub cfl: T,
}

/// Wavenumber tables shared by the spectral operators.
pub(crate) struct Symbols<T> {
    /// First-derivative wavenumbers, Nyquist dropped.
    pub kd: Vec<[T; 3]>,
    /// Full `|k|²`.
    pub k2: Vec<T>,
    pub keep: Vec<bool>,
}

impl<T: Real> Symbols<T> {
    pub fn new(grid: &Grid<T>, dealias: T) -> Self {
        let cut = dealias * T::from_usize_exact(grid.n()) / T::lit(2.0);
        let len = grid.len();
        let mut kd = Vec::with_capacity(len);
        let mut k2 = Vec::with_capacity(len);
        let mut keep = Vec::with_capacity(len);
        for idx in 0..len {
            let (i, j, k) = grid.coords(idx);
            kd.push([grid.derivative_wavenumber(i), grid.derivative_wavenumber(j), grid.derivative_wavenumber(k)]);
            let w = [grid.wavenumber(i), grid.wavenumber(j), grid.wavenumber(k)];
            k2.push(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
            keep.push(
                [i, j, k]
                    .iter()
                    .all(|&m| T::from_isize(grid.mode_number(m).abs()).unwrap() <= cut),
            );
        }
        Self { kd, k2, keep }
    }

    pub fn project(&self, u: &mut Modes<T>) {
        for idx in 0..self.kd.len() {
            let k = self.kd[idx];
            let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if kk == T::zero() {
                continue;
            }
            let dot = (u[0][idx] * k[0] + u[1][idx] * k[1] + u[2][idx] * k[2]) / kk;
            for c in 0..3 {
                u[c][idx] = u[c][idx] - dot * k[c];
            }
        }
    }
}

pub(crate) fn to_modes<T: Real>(v: &SpectralVectorField<T>) -> Modes<T> {
    [0, 1, 2].map(|c| v.component(c).modes().to_vec())
}

pub(crate) fn from_modes<T: Real>(grid: Grid<T>, m: Modes<T>) -> SpectralVectorField<T> {
    SpectralVectorField::new(m.map(|c| SpectralField::from_vec_unchecked(grid, c))).expect("shared grid")
}

fn physical<T: Real>(plan: &Fft3<T>, modes: &[Complex<T>]) -> Vec<T> {
    let mut data = modes.to_vec();
    plan.inverse(&mut data);
    data.into_iter().map(|c| c.re).collect()
}

fn spectral<T: Real>(plan: &Fft3<T>, values: impl Iterator<Item = T>) -> Vec<Complex<T>> {
    let mut data: Vec<Complex<T>> = values.map(|v| Complex::new(v, T::zero())).collect();
    plan.forward(&mut data);
    data
}

/// Fourier transform of each distinct entry of `u⊗u`, ordered
/// (00, 01, 02, 11, 12, 22).
pub(crate) fn tensor_modes<T: Real>(plan: &Fft3<T>, u: &[Vec<T>; 3]) -> [Vec<Complex<T>>; 6] {
    PAIRS.map(|(a, b)| spectral(plan, u[a].iter().zip(&u[b]).map(|(&x, &y)| x * y)))
}

pub(crate) const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

#[inline]
pub(crate) fn pair_slot(a: usize, b: usize) -> usize {
    match (a.min(b), a.max(b)) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

/// Largest `|u|` over the grid, or a reason why the field is unusable.
fn check_velocity<T: Real>(u: &[Vec<T>; 3]) -> std::result::Result<T, String> {
    let mut sup = T::zero();
    for idx in 0..u[0].len() {
        let s = u[0][idx] * u[0][idx] + u[1][idx] * u[1][idx] + u[2][idx] * u[2][idx];
        if !s.is_finite() {
            return Err(format!("non-finite velocity at grid index {idx}"));
        }
        sup = sup.max(s);
    }
    let sup = sup.sqrt();
    if sup > T::lit(BLOWUP_THRESHOLD) {
        return Err(format!("max |u| = {sup:e} exceeds {BLOWUP_THRESHOLD:e}"));
    }
    Ok(sup)
}

/// `∇·(u⊗u)` from physical velocity components, dealiased.
fn advection<T: Real>(plan: &Fft3<T>, sym: &Symbols<T>, u: &[Vec<T>; 3]) -> Modes<T> {
    let t = tensor_modes(plan, u);
    let len = u[0].len();
    let zero = Complex::new(T::zero(), T::zero());
    let mut out: Modes<T> = [vec![zero; len], vec![zero; len], vec![zero; len]];
    for idx in 0..len {
        if !sym.keep[idx] {
            continue;
        }
        let k = sym.kd[idx];
        for a in 0..3 {
            let mut acc = zero;
            for b in 0..3 {
                acc += t[pair_slot(a, b)][idx] * k[b];
            }
            out[a][idx] = Complex::new(-acc.im, acc.re);
        }
    }
    out
}

/// `P(v)`: removes the gradient part mode by mode, `k = 0` untouched.
pub fn leray_project<T: Real>(v: &SpectralVectorField<T>) -> SpectralVectorField<T> {
    let g = *v.grid();
    let sym = Symbols::new(&g, T::one());
    let mut m = to_modes(v);
    sym.project(&mut m);
    from_modes(g, m)
}

/// `∇·(u⊗u)` in Fourier space with the `dealias` truncation applied.
pub fn nonlinear_term<T: Real>(u: &VectorField<T>, dealias: T) -> Result<SpectralVectorField<T>> {
    let g = *u.grid();
    let plan = Fft3::new(g.n());
    let sym = Symbols::new(&g, dealias);
    let comps = [0, 1, 2].map(|c| u.component(c).values().to_vec());
    check_velocity(&comps).map_err(|reason| Error::BlowUp {
        step: 0,
        last_valid_time: f64::NAN,
        reason,
    })?;
    Ok(from_modes(g, advection(&plan, &sym, &comps)))
}

/// Total kinetic energy `½L³Σ|û|²` of a spectral velocity.
pub fn spectral_energy<T: Real>(v: &SpectralVectorField<T>) -> T {
    let g = v.grid();
    T::lit(0.5) * g.volume() * v.components().iter().map(|c| c.power()).sum::<T>()
}

pub struct Solver<T: Real> {
    config: SolverConfig<T>,
    grid: Grid<T>,
    plan: Fft3<T>,
    sym: Symbols<T>,
    e_full: Vec<T>,
    e_half: Vec<T>,
    state: SolverState<T>,
}

impl<T: Real> Solver<T> {
    /// Builds the initial condition named in the config.
    pub fn new(config: SolverConfig<T>) -> Result<Self> {
        let grid = config.validate()?;
        let u0 = config.initial_condition.build(&grid, config.seed)?;
        Self::with_velocity(config, &u0)
    }

    /// Starts from a given velocity; it is projected onto divergence-free fields.
    pub fn with_velocity(config: SolverConfig<T>, u0: &VectorField<T>) -> Result<Self> {
        let grid = config.validate()?;
        u0.grid().same_as(&grid)?;
        let plan = Fft3::new(grid.n());
        let sym = Symbols::new(&grid, config.dealias);
        let mut m: Modes<T> = [0, 1, 2].map(|c| spectral(&plan, u0.component(c).values().iter().copied()));
        sym.project(&mut m);
        let nu_dt = config.viscosity * config.dt;
        let e_full = sym.k2.iter().map(|&k2| (-nu_dt * k2).exp()).collect();
        let e_half = sym.k2.iter().map(|&k2| (-nu_dt * k2 * T::lit(0.5)).exp()).collect();
        Ok(Self {
            state: SolverState {
                time: T::zero(),
                velocity: from_modes(grid, m),
                step_index: 0,
            },
            config,
            grid,
            plan,
            sym,
            e_full,
            e_half,
        })
    }

    pub fn config(&self) -> &SolverConfig<T> {
        &self.config
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn state(&self) -> &SolverState<T> {
        &self.state
    }

    pub fn time(&self) -> T {
        self.state.time
    }

    pub fn velocity(&self) -> VectorField<T> {
        let comps = [0, 1, 2].map(|c| {
            ScalarField::from_vec_unchecked(self.grid, physical(&self.plan, self.state.velocity.component(c).modes()))
        });
        VectorField::new(comps).expect("shared grid")
    }

    pub fn energy(&self) -> T {
        spectral_energy(&self.state.velocity)
    }

    fn rhs(&self, uh: &Modes<T>) -> std::result::Result<Modes<T>, String> {
        let len = self.grid.len();
        let zero = Complex::new(T::zero(), T::zero());
        if !self.config.nonlinear {
            return Ok([vec![zero; len], vec![zero; len], vec![zero; len]]);
        }
        let u = [0, 1, 2].map(|c| physical(&self.plan, &uh[c]));
        check_velocity(&u)?;
        let mut n = advection(&self.plan, &self.sym, &u);
        self.sym.project(&mut n);
        for c in n.iter_mut() {
            for v in c.iter_mut() {
                *v = -*v;
            }
        }
        Ok(n)
    }

    /// Advances one step of size `dt`. On blow-up the state is left at the
    /// last valid time.
    pub fn step(&mut self) -> Result<StepReport<T>> {
        let h = self.config.dt;
        let half = h * T::lit(0.5);
        let u0 = to_modes(&self.state.velocity);
        let len = self.grid.len();
        let (ef, eh) = (&self.e_full, &self.e_half);
        let blowup = |reason: String, s: &SolverState<T>| Error::BlowUp {
            step: s.step_index + 1,
            last_valid_time: s.time.as_f64(),
            reason,
        };
        let combine = |f: &dyn Fn(usize, usize) -> Complex<T>| -> Modes<T> {
            [0, 1, 2].map(|c| (0..len).map(|i| f(c, i)).collect())
        };

        let k1 = self.rhs(&u0).map_err(|r| blowup(r, &self.state))?;
        let a = combine(&|c, i| (u0[c][i] + k1[c][i] * half) * eh[i]);
        let k2 = self.rhs(&a).map_err(|r| blowup(r, &self.state))?;
        let b = combine(&|c, i| u0[c][i] * eh[i] + k2[c][i] * half);
        let k3 = self.rhs(&b).map_err(|r| blowup(r, &self.state))?;
        let cc = combine(&|c, i| u0[c][i] * ef[i] + k3[c][i] * eh[i] * h);
        let k4 = self.rhs(&cc).map_err(|r| blowup(r, &self.state))?;
        let sixth = h / T::lit(6.0);
        let two = T::lit(2.0);
        let mut next = combine(&|c, i| {
            u0[c][i] * ef[i]
                + (k1[c][i] * ef[i] + (k2[c][i] + k3[c][i]) * eh[i] * two + k4[c][i]) * sixth
        });
        self.sym.project(&mut next);

        let u = [0, 1, 2].map(|c| physical(&self.plan, &next[c]));
        let sup = check_velocity(&u).map_err(|r| blowup(r, &self.state))?;
        self.state = SolverState {
            time: self.state.time + h,
            velocity: from_modes(self.grid, next),
            step_index: self.state.step_index + 1,
        };
        let scale = self.state.velocity.max_mode();
        Ok(StepReport {
            step: self.state.step_index,
            time: self.state.time,
            energy: self.energy(),
            sup_norm: sup,
            max_divergence: if scale > T::zero() {
                self.state.velocity.max_divergence() / scale
            } else {
                T::zero()
            },
            cfl: h * sup / self.grid.spacing(),
        })
    }

    /// Runs to `t_end`, keeping every `snapshot_every`-th state (and the
    /// initial one) in the returned trajectory.
    pub fn run(&mut self) -> Result<(Trajectory<T>, Vec<StepReport<T>>)> {
        let mut traj = Trajectory::new(vec![Frame::new(self.time(), self.velocity())])?;
        let mut reports = Vec::new();
        for _ in 0..self.config.steps() {
            let r = self.step()?;
            reports.push(r);
            if r.step % self.config.snapshot_every == 0 {
                traj.push(Frame::new(self.time(), self.velocity()))?;
            }
        }
        Ok((traj, reports))
    }
}

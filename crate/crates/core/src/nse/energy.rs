//! Stored trajectories, space-time cutoffs and the residual of the local
//! energy balance
//!
//! ```text
//! r(t) = d/dt ∫φ|u|²/2 + ν∫φ|∇u|² − ∫(|u|²/2)(∂_tφ + νΔφ) − ∫(u·∇φ)(|u|²/2 + P)
//! ```
//!
//! which vanishes for smooth solutions and is `≤ 0` for suitable weak ones.

use super::pressure::pressure_with;
use super::Symbols;
use crate::error::{Error, Result};
use crate::field::ops::velocity_gradient_with;
use crate::field::snapshot::Snapshot;
use crate::field::{Fft3, Grid, VectorField};
use crate::Real;

/// Velocity at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame<T> {
    pub time: T,
    pub velocity: VectorField<T>,
}

impl<T: Real> Frame<T> {
    pub fn new(time: T, velocity: VectorField<T>) -> Self {
        Self { time, velocity }
    }

    pub fn from_snapshot(s: &Snapshot) -> Result<Self> {
        Ok(Self::new(T::lit(s.time), s.velocity()?))
    }

    pub fn to_snapshot(&self) -> Snapshot {
        Snapshot::from_velocity(self.time, &self.velocity)
    }
}

/// Frames on one grid with strictly increasing times.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    frames: Vec<Frame<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(frames: Vec<Frame<T>>) -> Result<Self> {
        let mut t = Self { frames: Vec::with_capacity(frames.len()) };
        for f in frames {
            t.push(f)?;
        }
        Ok(t)
    }

    pub fn push(&mut self, frame: Frame<T>) -> Result<()> {
        if let Some(last) = self.frames.last() {
            frame.velocity.grid().same_as(last.velocity.grid())?;
            if !(frame.time > last.time) {
                return Err(Error::InvalidInput(format!(
                    "frame times must increase: {} after {}",
                    frame.time, last.time
                )));
            }
        }
        self.frames.push(frame);
        Ok(())
    }

    pub fn frames(&self) -> &[Frame<T>] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn times(&self) -> Vec<T> {
        self.frames.iter().map(|f| f.time).collect()
    }

    pub fn grid(&self) -> Option<&Grid<T>> {
        self.frames.first().map(|f| f.velocity.grid())
    }
}

/// Smooth test function `φ(t, x)` with closed-form derivatives.
pub trait SpaceTimeCutoff<T>: Sync {
    fn value(&self, t: T, x: [T; 3]) -> T;
    fn dt(&self, t: T, x: [T; 3]) -> T;
    fn grad(&self, t: T, x: [T; 3]) -> [T; 3];
    fn laplacian(&self, t: T, x: [T; 3]) -> T;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constant<T>(pub T);

impl<T: Real> SpaceTimeCutoff<T> for Constant<T> {
    fn value(&self, _: T, _: [T; 3]) -> T {
        self.0
    }
    fn dt(&self, _: T, _: [T; 3]) -> T {
        T::zero()
    }
    fn grad(&self, _: T, _: [T; 3]) -> [T; 3] {
        [T::zero(); 3]
    }
    fn laplacian(&self, _: T, _: [T; 3]) -> T {
        T::zero()
    }
}

/// Periodized Gaussian: `Π_j exp((cos κ(x_j − c_j) − 1)/(κw)²)`, which is
/// `≈ exp(−|x − c|²/2w²)` near the center and smooth on the torus, times an
/// optional temporal Gaussian `exp(−(t − t_c)²/2τ²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianBump<T> {
    center: [T; 3],
    width: T,
    kappa: T,
    time: Option<(T, T)>,
}

impl<T: Real> GaussianBump<T> {
    pub fn new(grid: &Grid<T>, center: [T; 3], width: T) -> Result<Self> {
        if !(width > T::zero()) {
            return Err(Error::InvalidInput(format!("bump width must be positive, got {width}")));
        }
        Ok(Self {
            center,
            width,
            kappa: T::TAU() / grid.length(),
            time: None,
        })
    }

    pub fn with_time(mut self, t_center: T, t_width: T) -> Result<Self> {
        if !(t_width > T::zero()) {
            return Err(Error::InvalidInput(format!("temporal width must be positive, got {t_width}")));
        }
        self.time = Some((t_center, t_width));
        Ok(self)
    }

    /// Per-axis factor and its first two derivatives.
    fn axis(&self, x: T, c: T) -> (T, T, T) {
        let k = self.kappa;
        let a = (k * self.width).powi(-2);
        let (s, co) = (k * (x - c)).sin_cos();
        let g = (a * (co - T::one())).exp();
        let d1 = -a * k * s * g;
        let d2 = (a * a * k * k * s * s - a * k * k * co) * g;
        (g, d1, d2)
    }

    fn temporal(&self, t: T) -> (T, T) {
        match self.time {
            None => (T::one(), T::zero()),
            Some((tc, tw)) => {
                let z = (t - tc) / tw;
                let g = (-z * z * T::lit(0.5)).exp();
                (g, -z / tw * g)
            }
        }
    }

    fn axes(&self, x: [T; 3]) -> [(T, T, T); 3] {
        [0, 1, 2].map(|j| self.axis(x[j], self.center[j]))
    }
}

impl<T: Real> SpaceTimeCutoff<T> for GaussianBump<T> {
    fn value(&self, t: T, x: [T; 3]) -> T {
        let a = self.axes(x);
        self.temporal(t).0 * a[0].0 * a[1].0 * a[2].0
    }
    fn dt(&self, t: T, x: [T; 3]) -> T {
        let a = self.axes(x);
        self.temporal(t).1 * a[0].0 * a[1].0 * a[2].0
    }
    fn grad(&self, t: T, x: [T; 3]) -> [T; 3] {
        let a = self.axes(x);
        let g = self.temporal(t).0;
        [
            g * a[0].1 * a[1].0 * a[2].0,
            g * a[0].0 * a[1].1 * a[2].0,
            g * a[0].0 * a[1].0 * a[2].1,
        ]
    }
    fn laplacian(&self, t: T, x: [T; 3]) -> T {
        let a = self.axes(x);
        let g = self.temporal(t).0;
        g * (a[0].2 * a[1].0 * a[2].0 + a[0].0 * a[1].2 * a[2].0 + a[0].0 * a[1].0 * a[2].2)
    }
}

/// Radial C⁴ bump: `1` on `|x − c| ≤ R/2`, `0` outside `R`, joined by the
/// degree-9 smoothstep. Constant in time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolynomialBump<T> {
    center: [T; 3],
    radius: T,
}

impl<T: Real> PolynomialBump<T> {
    /// The support must not wrap around the box.
    pub fn new(grid: &Grid<T>, center: [T; 3], radius: T) -> Result<Self> {
        if !(radius > T::zero()) {
            return Err(Error::InvalidInput(format!("bump radius must be positive, got {radius}")));
        }
        if center.iter().any(|&c| c - radius < T::zero() || c + radius > grid.length()) {
            return Err(Error::InvalidInput("bump support leaves the box".into()));
        }
        Ok(Self { center, radius })
    }

    /// Profile `ψ(s)` and its first two derivatives in `s = |x − c|/R`.
    fn profile(s: T) -> (T, T, T) {
        let half = T::lit(0.5);
        if s <= half {
            return (T::one(), T::zero(), T::zero());
        }
        if s >= T::one() {
            return (T::zero(), T::zero(), T::zero());
        }
        let y = (s - half) / half;
        let w = T::one() - y;
        let (y3, w3) = (y * y * y, w * w * w);
        let step = y3
            * y
            * y
            * (T::lit(126.0) + y * (T::lit(-420.0) + y * (T::lit(540.0) + y * (T::lit(-315.0) + y * T::lit(70.0)))));
        let d1 = T::lit(630.0) * y3 * y * w3 * w;
        let d2 = T::lit(2520.0) * y3 * w3 * (T::one() - T::lit(2.0) * y);
        // dy/ds = 2
        (T::one() - step, -d1 * T::lit(2.0), -d2 * T::lit(4.0))
    }

    fn offset(&self, x: [T; 3]) -> ([T; 3], T) {
        let d = [0, 1, 2].map(|j| x[j] - self.center[j]);
        let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        (d, r)
    }
}

impl<T: Real> SpaceTimeCutoff<T> for PolynomialBump<T> {
    fn value(&self, _: T, x: [T; 3]) -> T {
        Self::profile(self.offset(x).1 / self.radius).0
    }
    fn dt(&self, _: T, _: [T; 3]) -> T {
        T::zero()
    }
    fn grad(&self, _: T, x: [T; 3]) -> [T; 3] {
        let (d, r) = self.offset(x);
        let (_, p1, _) = Self::profile(r / self.radius);
        if p1 == T::zero() {
            return [T::zero(); 3];
        }
        d.map(|dj| p1 / self.radius * dj / r)
    }
    fn laplacian(&self, _: T, x: [T; 3]) -> T {
        let (_, r) = self.offset(x);
        let s = r / self.radius;
        let (_, p1, p2) = Self::profile(s);
        if p1 == T::zero() && p2 == T::zero() {
            return T::zero();
        }
        let r2 = self.radius * self.radius;
        p2 / r2 + T::lit(2.0) * p1 / (r2 * s)
    }
}

/// Residual of the local energy balance at the interior frames.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualSignal<T> {
    pub times: Vec<T>,
    pub values: Vec<T>,
    /// `d/dt ∫φ|u|²/2` at each time.
    pub time_derivative: Vec<T>,
    /// `ν∫φ|∇u|²`
    pub dissipation: Vec<T>,
    /// `∫(|u|²/2)(∂_tφ + νΔφ)`
    pub source: Vec<T>,
    /// `∫(u·∇φ)(|u|²/2 + P)`
    pub flux: Vec<T>,
}

impl<T: Real> ResidualSignal<T> {
    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Spatial integrals entering the local energy balance at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyTerms<T> {
    /// `∫φ|u|²/2`
    pub local_energy: T,
    /// `ν∫φ|∇u|²`
    pub dissipation: T,
    /// `∫(|u|²/2)(∂_tφ + νΔφ)`
    pub source: T,
    /// `∫(u·∇φ)(|u|²/2 + P)`
    pub flux: T,
}

pub(crate) fn frame_terms<T: Real>(
    plan: &Fft3<T>,
    sym: &Symbols<T>,
    frame: &Frame<T>,
    phi: &dyn SpaceTimeCutoff<T>,
    nu: T,
) -> EnergyTerms<T> {
    let u = &frame.velocity;
    let g = *u.grid();
    let t = frame.time;
    let grad = velocity_gradient_with(plan, u);
    let p = pressure_with(plan, sym, u);
    let half = T::lit(0.5);
    let (mut e, mut d, mut s, mut f) = (T::zero(), T::zero(), T::zero(), T::zero());
    for idx in 0..g.len() {
        let x = g.point(idx);
        let v = u.at(idx);
        let e_loc = half * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        let mut du2 = T::zero();
        for gi in &grad {
            let r = gi.at(idx);
            du2 += r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
        }
        let ph = phi.value(t, x);
        let gp = phi.grad(t, x);
        e += ph * e_loc;
        d += ph * du2;
        s += e_loc * (phi.dt(t, x) + nu * phi.laplacian(t, x));
        f += (v[0] * gp[0] + v[1] * gp[1] + v[2] * gp[2]) * (e_loc + p.values()[idx]);
    }
    let w = g.cell_volume();
    EnergyTerms {
        local_energy: e * w,
        dissipation: nu * d * w,
        source: s * w,
        flux: f * w,
    }
}

pub fn energy_terms<T: Real>(frame: &Frame<T>, phi: &dyn SpaceTimeCutoff<T>, viscosity: T) -> EnergyTerms<T> {
    let g = frame.velocity.grid();
    let plan = Fft3::new(g.n());
    let sym = Symbols::new(g, T::one());
    frame_terms(&plan, &sym, frame, phi, viscosity)
}

fn is_uniform<T: Real>(times: &[T]) -> bool {
    let h = times[1] - times[0];
    times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= T::lit(1e-9) * h)
}

/// Evaluates the residual at every frame that has neighbours on both sides.
/// With at least five uniformly spaced frames the time derivative is fourth
/// order (centered in the interior, offset next to the ends); otherwise the
/// three-point formula for uneven spacing is used.
pub fn energy_residual<T: Real>(
    traj: &Trajectory<T>,
    phi: &dyn SpaceTimeCutoff<T>,
    viscosity: T,
) -> Result<ResidualSignal<T>> {
    let m = traj.len();
    if m < 3 {
        return Err(Error::InsufficientData(format!(
            "energy residual needs at least 3 frames, got {m}"
        )));
    }
    let g = *traj.grid().unwrap();
    let plan = Fft3::new(g.n());
    let sym = Symbols::new(&g, T::one());
    let terms: Vec<EnergyTerms<T>> = traj
        .frames()
        .iter()
        .map(|f| frame_terms(&plan, &sym, f, phi, viscosity))
        .collect();
    let times = traj.times();
    let a: Vec<T> = terms.iter().map(|t| t.local_energy).collect();
    let five = m >= 5 && is_uniform(&times);

    let mut out = ResidualSignal {
        times: Vec::new(),
        values: Vec::new(),
        time_derivative: Vec::new(),
        dissipation: Vec::new(),
        source: Vec::new(),
        flux: Vec::new(),
    };
    for j in 1..m - 1 {
        let c = |x: f64| T::lit(x);
        let deriv = if five {
            let h12 = T::lit(12.0) * (times[1] - times[0]);
            if j >= 2 && j + 2 < m {
                (a[j - 2] - c(8.0) * a[j - 1] + c(8.0) * a[j + 1] - a[j + 2]) / h12
            } else if j == 1 {
                // fourth-order offset stencil next to the ends
                (-c(3.0) * a[0] - c(10.0) * a[1] + c(18.0) * a[2] - c(6.0) * a[3] + a[4]) / h12
            } else {
                (c(3.0) * a[j + 1] + c(10.0) * a[j] - c(18.0) * a[j - 1] + c(6.0) * a[j - 2] - a[j - 3]) / h12
            }
        } else {
            let h1 = times[j] - times[j - 1];
            let h2 = times[j + 1] - times[j];
            -h2 / (h1 * (h1 + h2)) * a[j - 1] + (h2 - h1) / (h1 * h2) * a[j] + h1 / (h2 * (h1 + h2)) * a[j + 1]
        };
        let t = &terms[j];
        out.times.push(times[j]);
        out.values.push(deriv + t.dissipation - t.source - t.flux);
        out.time_derivative.push(deriv);
        out.dissipation.push(t.dissipation);
        out.source.push(t.source);
        out.flux.push(t.flux);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(phi: &dyn SpaceTimeCutoff<f64>, t: f64, x: [f64; 3]) {
        let h = 1e-4;
        let shift = |j: usize, s: f64| {
            let mut y = x;
            y[j] += s;
            y
        };
        let g = phi.grad(t, x);
        let mut lap = 0.0;
        for j in 0..3 {
            let fd = (phi.value(t, shift(j, h)) - phi.value(t, shift(j, -h))) / (2.0 * h);
            assert!((fd - g[j]).abs() < 1e-6, "grad {j}: {fd} vs {}", g[j]);
            lap += (phi.value(t, shift(j, h)) - 2.0 * phi.value(t, x) + phi.value(t, shift(j, -h))) / (h * h);
        }
        assert!((lap - phi.laplacian(t, x)).abs() < 1e-4, "lap {lap} vs {}", phi.laplacian(t, x));
        let fdt = (phi.value(t + h, x) - phi.value(t - h, x)) / (2.0 * h);
        assert!((fdt - phi.dt(t, x)).abs() < 1e-6 * (1.0 + fdt.abs()), "dt {fdt} vs {}", phi.dt(t, x));
    }

    #[test]
    fn cutoff_derivatives_match_finite_differences() {
        let g = Grid::<f64>::periodic(16).unwrap();
        let gb = GaussianBump::new(&g, [3.0, 3.1, 2.9], 0.8).unwrap().with_time(0.05, 0.1).unwrap();
        let pb = PolynomialBump::new(&g, [3.0, 3.0, 3.0], 2.0).unwrap();
        for x in [[3.0, 3.0, 3.0], [2.2, 3.5, 3.9], [4.2, 2.0, 3.3], [1.7, 3.0, 3.1]] {
            fd_check(&gb, 0.02, x);
            fd_check(&pb, 0.0, x);
        }
        assert_eq!(pb.value(0.0, [3.0, 3.0, 3.0]), 1.0);
        assert_eq!(pb.value(0.0, [5.1, 3.0, 3.0]), 0.0);
        assert!(PolynomialBump::new(&g, [1.0, 3.0, 3.0], 2.0).is_err());
    }

    #[test]
    fn too_few_frames_is_an_error() {
        let g = Grid::<f64>::periodic(8).unwrap();
        let tr = Trajectory::new(vec![
            Frame::new(0.0, VectorField::zeros(g)),
            Frame::new(0.1, VectorField::zeros(g)),
        ])
        .unwrap();
        assert!(matches!(energy_residual(&tr, &Constant(1.0), 1.0), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn zero_velocity_has_zero_residual() {
        let g = Grid::<f64>::periodic(8).unwrap();
        let frames = (0..5).map(|i| Frame::new(i as f64 * 0.1, VectorField::zeros(g))).collect();
        let tr = Trajectory::new(frames).unwrap();
        let phi = GaussianBump::new(&g, [3.0; 3], 1.0).unwrap();
        let r = energy_residual(&tr, &phi, 1.0).unwrap();
        assert_eq!(r.values.len(), 3);
        assert!(r.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn frames_must_increase() {
        let g = Grid::<f64>::periodic(8).unwrap();
        let mut tr = Trajectory::new(vec![Frame::new(1.0, VectorField::zeros(g))]).unwrap();
        assert!(tr.push(Frame::new(1.0, VectorField::zeros(g))).is_err());
        let other = Grid::<f64>::periodic(10).unwrap();
        assert!(tr.push(Frame::new(2.0, VectorField::zeros(other))).is_err());
    }
}

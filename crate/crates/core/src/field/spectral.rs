use num_complex::Complex;

use super::{Fft3, Grid, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::Real;

/// Fourier coefficients of a scalar field, stored in the same x-fastest
/// layout as the physical values (storage index `m` ↔ mode `m` or `m − n`).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField<T> {
    grid: Grid<T>,
    modes: Vec<Complex<T>>,
}

impl<T: Real> SpectralField<T> {
    pub fn new(grid: Grid<T>, modes: Vec<Complex<T>>) -> Result<Self> {
        if modes.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} modes, got {}",
                grid.len(),
                modes.len()
            )));
        }
        Ok(Self { grid, modes })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self {
            grid,
            modes: vec![Complex::new(T::zero(), T::zero()); grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn modes(&self) -> &[Complex<T>] {
        &self.modes
    }

    pub fn into_modes(self) -> Vec<Complex<T>> {
        self.modes
    }

    /// Coefficient of the wavevector with signed mode numbers `(kx, ky, kz)`.
    pub fn mode(&self, kx: isize, ky: isize, kz: isize) -> Complex<T> {
        let g = &self.grid;
        self.modes[g.index(g.mode_index(kx), g.mode_index(ky), g.mode_index(kz))]
    }

    /// `Σ |F_k|²`, equal to the mean of `|f|²` by Parseval.
    pub fn power(&self) -> T {
        self.modes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest violation of `F(−k) = conj(F(k))` over all modes.
    pub fn hermitian_defect(&self) -> T {
        let g = &self.grid;
        let n = g.n();
        let mut worst = T::zero();
        for idx in 0..g.len() {
            let (i, j, k) = g.coords(idx);
            let mirror = g.index((n - i) % n, (n - j) % n, (n - k) % n);
            worst = worst.max((self.modes[idx] - self.modes[mirror].conj()).norm());
        }
        worst
    }

    pub(crate) fn from_vec_unchecked(grid: Grid<T>, modes: Vec<Complex<T>>) -> Self {
        Self { grid, modes }
    }
}

/// Fourier coefficients of a three-component vector field.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralVectorField<T> {
    components: [SpectralField<T>; 3],
}

impl<T: Real> SpectralVectorField<T> {
    pub fn new(components: [SpectralField<T>; 3]) -> Result<Self> {
        let g = components[0].grid;
        components[1].grid.same_as(&g)?;
        components[2].grid.same_as(&g)?;
        Ok(Self { components })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self {
            components: [SpectralField::zeros(grid), SpectralField::zeros(grid), SpectralField::zeros(grid)],
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.components[0].grid
    }

    pub fn components(&self) -> &[SpectralField<T>; 3] {
        &self.components
    }

    pub fn component(&self, axis: usize) -> &SpectralField<T> {
        &self.components[axis]
    }

    pub fn into_components(self) -> [SpectralField<T>; 3] {
        self.components
    }

    /// `max_k |k·û(k)|` using first-derivative wavenumbers.
    pub fn max_divergence(&self) -> T {
        let g = self.grid();
        let mut worst = T::zero();
        for idx in 0..g.len() {
            let (i, j, k) = g.coords(idx);
            let kv = [g.derivative_wavenumber(i), g.derivative_wavenumber(j), g.derivative_wavenumber(k)];
            let d = self.components[0].modes[idx] * kv[0]
                + self.components[1].modes[idx] * kv[1]
                + self.components[2].modes[idx] * kv[2];
            worst = worst.max(d.norm());
        }
        worst
    }

    /// `max_k |û(k)|` over all components.
    pub fn max_mode(&self) -> T {
        self.components
            .iter()
            .flat_map(|c| c.modes.iter())
            .fold(T::zero(), |m, c| m.max(c.norm()))
    }
}

pub fn forward_transform<T: Real>(f: &ScalarField<T>) -> SpectralField<T> {
    let plan = Fft3::new(f.grid().n());
    forward_with(&plan, f)
}

pub fn inverse_transform<T: Real>(f: &SpectralField<T>) -> ScalarField<T> {
    let plan = Fft3::new(f.grid().n());
    inverse_with(&plan, f)
}

pub fn forward_vector<T: Real>(v: &VectorField<T>) -> SpectralVectorField<T> {
    let plan = Fft3::new(v.grid().n());
    SpectralVectorField {
        components: [
            forward_with(&plan, v.component(0)),
            forward_with(&plan, v.component(1)),
            forward_with(&plan, v.component(2)),
        ],
    }
}

pub fn inverse_vector<T: Real>(v: &SpectralVectorField<T>) -> VectorField<T> {
    let plan = Fft3::new(v.grid().n());
    VectorField::new([
        inverse_with(&plan, v.component(0)),
        inverse_with(&plan, v.component(1)),
        inverse_with(&plan, v.component(2)),
    ])
    .expect("components share a grid")
}

pub(crate) fn forward_with<T: Real>(plan: &Fft3<T>, f: &ScalarField<T>) -> SpectralField<T> {
    let mut data: Vec<Complex<T>> = f.values().iter().map(|&v| Complex::new(v, T::zero())).collect();
    plan.forward(&mut data);
    SpectralField::from_vec_unchecked(*f.grid(), data)
}

pub(crate) fn inverse_with<T: Real>(plan: &Fft3<T>, f: &SpectralField<T>) -> ScalarField<T> {
    let mut data = f.modes.clone();
    plan.inverse(&mut data);
    ScalarField::from_vec_unchecked(*f.grid(), data.into_iter().map(|c| c.re).collect())
}

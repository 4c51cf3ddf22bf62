//! Periodic-grid fields on the box `[0, L)³`, their Fourier representation,
//! spectral differential operators and the parabolic rescaling
//! `x ↦ ε·u(x₀ + ε·x)`.
//!
//! Physical data is stored x-fastest: the value at grid index `(i, j, k)`
//! lives at `i + n·(j + n·k)` and sits at the point `(i·h, j·h, k·h)`.

mod fft;
pub(crate) mod ops;
mod rescale;
pub mod snapshot;
mod spectral;

pub use fft::Fft3;
pub use ops::{divergence, gradient, laplacian, magnitude_gradient};
pub use rescale::{rescale, rescale_closed_form, sample, sample_scalar, Rescaled, VectorFunction};
pub use spectral::{forward_transform, forward_vector, inverse_transform, inverse_vector, SpectralField, SpectralVectorField};

use crate::error::{Error, Result};
use crate::Real;

/// Uniform periodic grid with `n` points per axis and period `length`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    n: usize,
    length: T,
}

impl<T: Real> Grid<T> {
    pub fn new(n: usize, length: T) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "grid size must be even and at least 8, got {n}"
            )));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::InvalidInput(format!("grid length must be positive, got {length}")));
        }
        Ok(Self { n, length })
    }

    /// Grid on the standard `2π`-periodic box.
    pub fn periodic(n: usize) -> Result<Self> {
        Self::new(n, T::TAU())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn spacing(&self) -> T {
        self.length / T::from_usize_exact(self.n)
    }

    /// Number of grid points, `n³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> T {
        let h = self.spacing();
        h * h * h
    }

    /// Measure of the whole box, `L³`.
    pub fn volume(&self) -> T {
        self.length * self.length * self.length
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx % n, (idx / n) % n, idx / (n * n))
    }

    #[inline]
    pub fn point(&self, idx: usize) -> [T; 3] {
        let (i, j, k) = self.coords(idx);
        let h = self.spacing();
        [
            T::from_usize_exact(i) * h,
            T::from_usize_exact(j) * h,
            T::from_usize_exact(k) * h,
        ]
    }

    /// Signed mode number in `[-n/2, n/2)` for storage index `m`.
    #[inline]
    pub fn mode_number(&self, m: usize) -> isize {
        if m < self.n / 2 {
            m as isize
        } else {
            m as isize - self.n as isize
        }
    }

    /// Storage index of signed mode number `k` (taken modulo `n`).
    #[inline]
    pub fn mode_index(&self, k: isize) -> usize {
        k.rem_euclid(self.n as isize) as usize
    }

    /// Physical wavenumber `2π·m/L` of storage index `m`.
    #[inline]
    pub fn wavenumber(&self, m: usize) -> T {
        T::from_isize(self.mode_number(m)).unwrap() * T::TAU() / self.length
    }

    /// Wavenumber used by first derivatives: the Nyquist mode is dropped so
    /// derivatives of real fields stay real.
    #[inline]
    pub fn derivative_wavenumber(&self, m: usize) -> T {
        if m == self.n / 2 {
            T::zero()
        } else {
            self.wavenumber(m)
        }
    }

    pub(crate) fn same_as(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::InvalidInput("fields live on different grids".into()))
        }
    }
}

/// Real scalar field sampled on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite value at index {i}")));
        }
        Ok(Self { grid, values })
    }

    /// Field with the same value everywhere.
    pub fn constant(grid: Grid<T>, c: T) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self::constant(grid, T::zero())
    }

    /// Samples a closed-form function at the grid points.
    pub fn from_fn(grid: Grid<T>, f: impl Fn([T; 3]) -> T) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self::new(grid, values)
    }

    pub(crate) fn from_vec_unchecked(grid: Grid<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn abs(&self) -> Self {
        Self::from_vec_unchecked(self.grid, self.values.iter().map(|v| v.abs()).collect())
    }

    pub fn scale(&self, c: T) -> Result<Self> {
        self.map(|v| v * c)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `∫ f` over the box as a cell sum.
    pub fn integral(&self) -> T {
        self.values.iter().copied().sum::<T>() * self.grid.cell_volume()
    }

    pub fn mean(&self) -> T {
        self.values.iter().copied().sum::<T>() / T::from_usize_exact(self.values.len())
    }
}

/// Real three-component vector field on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField<T> {
    components: [ScalarField<T>; 3],
}

impl<T: Real> VectorField<T> {
    pub fn new(components: [ScalarField<T>; 3]) -> Result<Self> {
        let g = components[0].grid;
        components[1].grid.same_as(&g)?;
        components[2].grid.same_as(&g)?;
        Ok(Self { components })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self {
            components: [ScalarField::zeros(grid), ScalarField::zeros(grid), ScalarField::zeros(grid)],
        }
    }

    pub fn constant(grid: Grid<T>, c: [T; 3]) -> Self {
        Self {
            components: c.map(|ci| ScalarField::constant(grid, ci)),
        }
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn([T; 3]) -> [T; 3]) -> Result<Self> {
        let mut comps = [
            Vec::with_capacity(grid.len()),
            Vec::with_capacity(grid.len()),
            Vec::with_capacity(grid.len()),
        ];
        for i in 0..grid.len() {
            let v = f(grid.point(i));
            for c in 0..3 {
                comps[c].push(v[c]);
            }
        }
        let [a, b, c] = comps;
        Self::new([
            ScalarField::new(grid, a)?,
            ScalarField::new(grid, b)?,
            ScalarField::new(grid, c)?,
        ])
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.components[0].grid
    }

    pub fn components(&self) -> &[ScalarField<T>; 3] {
        &self.components
    }

    pub fn component(&self, axis: usize) -> &ScalarField<T> {
        &self.components[axis]
    }

    pub fn into_components(self) -> [ScalarField<T>; 3] {
        self.components
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [T; 3] {
        [
            self.components[0].values[idx],
            self.components[1].values[idx],
            self.components[2].values[idx],
        ]
    }

    /// Pointwise Euclidean magnitude `|u|`.
    pub fn magnitude(&self) -> ScalarField<T> {
        let [a, b, c] = &self.components;
        let values = a
            .values
            .iter()
            .zip(&b.values)
            .zip(&c.values)
            .map(|((&x, &y), &z)| (x * x + y * y + z * z).sqrt())
            .collect();
        ScalarField::from_vec_unchecked(*self.grid(), values)
    }

    /// `max |u|` over the grid points.
    pub fn sup_norm(&self) -> T {
        self.magnitude().max_abs()
    }

    /// `½ ∫ |u|²`.
    pub fn kinetic_energy(&self) -> T {
        let half = T::lit(0.5);
        let g = self.grid();
        let s: T = (0..g.len())
            .map(|i| {
                let u = self.at(i);
                u[0] * u[0] + u[1] * u[1] + u[2] * u[2]
            })
            .sum();
        half * s * g.cell_volume()
    }

    pub fn scale(&self, c: T) -> Result<Self> {
        Ok(Self {
            components: [
                self.components[0].scale(c)?,
                self.components[1].scale(c)?,
                self.components[2].scale(c)?,
            ],
        })
    }
}

//! Spectral differential operators. First derivatives multiply mode `k` by
//! `i·k_j` with the Nyquist mode dropped; the Laplacian uses the full symbol
//! `−|k|²`. Both are exact on band-limited fields.

use num_complex::Complex;

use super::spectral::{forward_with, inverse_with};
use super::{Fft3, ScalarField, SpectralField, VectorField};
use crate::error::Result;
use crate::Real;

/// `∂f/∂x_axis` in Fourier space.
pub(crate) fn spectral_derivative<T: Real>(f: &SpectralField<T>, axis: usize) -> SpectralField<T> {
    let g = *f.grid();
    let modes = f
        .modes()
        .iter()
        .enumerate()
        .map(|(idx, &c)| {
            let (i, j, k) = g.coords(idx);
            let m = [i, j, k][axis];
            c * Complex::new(T::zero(), g.derivative_wavenumber(m))
        })
        .collect();
    SpectralField::from_vec_unchecked(g, modes)
}

pub(crate) fn spectral_laplacian<T: Real>(f: &SpectralField<T>) -> SpectralField<T> {
    let g = *f.grid();
    let modes = f
        .modes()
        .iter()
        .enumerate()
        .map(|(idx, &c)| {
            let (i, j, k) = g.coords(idx);
            let (a, b, d) = (g.wavenumber(i), g.wavenumber(j), g.wavenumber(k));
            c * (-(a * a + b * b + d * d))
        })
        .collect();
    SpectralField::from_vec_unchecked(g, modes)
}

pub fn gradient<T: Real>(f: &ScalarField<T>) -> VectorField<T> {
    let plan = Fft3::new(f.grid().n());
    gradient_with(&plan, f)
}

pub(crate) fn gradient_with<T: Real>(plan: &Fft3<T>, f: &ScalarField<T>) -> VectorField<T> {
    let s = forward_with(plan, f);
    VectorField::new([0, 1, 2].map(|a| inverse_with(plan, &spectral_derivative(&s, a))))
        .expect("shared grid")
}

pub fn divergence<T: Real>(v: &VectorField<T>) -> ScalarField<T> {
    let plan = Fft3::new(v.grid().n());
    let g = *v.grid();
    let mut acc = SpectralField::zeros(g).into_modes();
    for axis in 0..3 {
        let d = spectral_derivative(&forward_with(&plan, v.component(axis)), axis);
        for (a, b) in acc.iter_mut().zip(d.modes()) {
            *a += *b;
        }
    }
    inverse_with(&plan, &SpectralField::from_vec_unchecked(g, acc))
}

pub fn laplacian<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    let plan = Fft3::new(f.grid().n());
    inverse_with(&plan, &spectral_laplacian(&forward_with(&plan, f)))
}

/// Velocity gradient `∂_j u_i`, returned as `[i][j]`.
pub(crate) fn velocity_gradient_with<T: Real>(plan: &Fft3<T>, u: &VectorField<T>) -> [VectorField<T>; 3] {
    [0, 1, 2].map(|i| gradient_with(plan, u.component(i)))
}

/// `∇|u|`, differentiating the magnitude field spectrally.
pub fn magnitude_gradient<T: Real>(u: &VectorField<T>) -> Result<VectorField<T>> {
    let plan = Fft3::new(u.grid().n());
    Ok(gradient_with(&plan, &u.magnitude()))
}

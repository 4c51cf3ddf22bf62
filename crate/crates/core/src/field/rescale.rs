//! Spatial part of the Navier-Stokes scaling `u_ε(x) = ε·u(x₀ + ε·x)`.
//! Time is remapped by the caller (`t ↦ t₀ + ε²·t`).

use super::{Grid, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::Real;

/// A velocity field known in closed form.
pub trait VectorFunction<T>: Sync {
    fn eval(&self, x: [T; 3]) -> [T; 3];
}

impl<T, F: VectorFunction<T> + ?Sized> VectorFunction<T> for &F {
    fn eval(&self, x: [T; 3]) -> [T; 3] {
        (**self).eval(x)
    }
}

impl<T, F: VectorFunction<T> + ?Sized> VectorFunction<T> for Box<F> {
    fn eval(&self, x: [T; 3]) -> [T; 3] {
        (**self).eval(x)
    }
}

/// Closed-form field rescaled by `eps` about `center`.
#[derive(Clone, Debug)]
pub struct Rescaled<F, T> {
    inner: F,
    eps: T,
    center: [T; 3],
}

impl<T: Real, F: VectorFunction<T>> VectorFunction<T> for Rescaled<F, T> {
    fn eval(&self, x: [T; 3]) -> [T; 3] {
        let y = [
            self.center[0] + self.eps * x[0],
            self.center[1] + self.eps * x[1],
            self.center[2] + self.eps * x[2],
        ];
        self.inner.eval(y).map(|c| self.eps * c)
    }
}

/// Wraps a closed-form field so that it evaluates to `eps·f(center + eps·x)`.
/// Any positive real `eps` is allowed.
pub fn rescale_closed_form<T: Real, F: VectorFunction<T>>(f: F, eps: T, center: [T; 3]) -> Rescaled<F, T> {
    Rescaled { inner: f, eps, center }
}

/// Samples a closed-form vector field at the grid points.
pub fn sample<T: Real>(grid: Grid<T>, f: &impl VectorFunction<T>) -> Result<VectorField<T>> {
    VectorField::from_fn(grid, |p| f.eval(p))
}

pub fn sample_scalar<T: Real>(grid: Grid<T>, f: impl Fn([T; 3]) -> T) -> Result<ScalarField<T>> {
    ScalarField::from_fn(grid, f)
}

/// Rescales raw grid data. Exact evaluation requires `eps` to be a positive
/// integer and `center` to be a grid point: then `center + eps·x_i` is again
/// a grid point (modulo the period). Anything else needs a closed form.
pub fn rescale<T: Real>(v: &VectorField<T>, eps: T, center: [T; 3]) -> Result<VectorField<T>> {
    let g = *v.grid();
    if !(eps > T::zero()) || eps.fract() != T::zero() {
        return Err(Error::InvalidInput(format!(
            "raw grid data can only be rescaled by a positive integer factor, got {eps}; use rescale_closed_form"
        )));
    }
    let h = g.spacing();
    let tol = T::lit(1e-9);
    let mut offset = [0usize; 3];
    for a in 0..3 {
        let c = center[a] / h;
        if (c - c.round()).abs() > tol * c.abs().max(T::one()) {
            return Err(Error::InvalidInput(format!(
                "center component {} is not a grid point",
                center[a]
            )));
        }
        offset[a] = c.round().to_i64().unwrap().rem_euclid(g.n() as i64) as usize;
    }
    let e = eps.to_usize().unwrap();
    let n = g.n();
    let comps = [0, 1, 2].map(|axis| {
        let src = v.component(axis).values();
        let values = (0..g.len())
            .map(|idx| {
                let (i, j, k) = g.coords(idx);
                let s = g.index((offset[0] + e * i) % n, (offset[1] + e * j) % n, (offset[2] + e * k) % n);
                eps * src[s]
            })
            .collect();
        ScalarField::from_vec_unchecked(g, values)
    });
    VectorField::new(comps)
}

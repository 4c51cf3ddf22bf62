//! Pressure from `−ΔP = ∂_i∂_j(u_i u_j)`, solved mode by mode:
//! `P̂(k) = −k_i k_j (u_i u_j)^(k) / |k|²`, zero mean.

use num_complex::Complex;

use super::{pair_slot, tensor_modes, Symbols};
use crate::field::{Fft3, ScalarField, VectorField};
use crate::Real;

fn solve<T: Real>(plan: &Fft3<T>, sym: &Symbols<T>, t: &[Vec<Complex<T>>; 6]) -> Vec<T> {
    let len = sym.k2.len();
    let mut p = vec![Complex::new(T::zero(), T::zero()); len];
    for (idx, out) in p.iter_mut().enumerate() {
        let k2 = sym.k2[idx];
        if k2 == T::zero() {
            continue;
        }
        let k = sym.kd[idx];
        let mut acc = Complex::new(T::zero(), T::zero());
        for a in 0..3 {
            for b in 0..3 {
                acc += t[pair_slot(a, b)][idx] * (k[a] * k[b]);
            }
        }
        *out = -acc / k2;
    }
    plan.inverse(&mut p);
    p.into_iter().map(|c| c.re).collect()
}

pub(crate) fn pressure_with<T: Real>(plan: &Fft3<T>, sym: &Symbols<T>, u: &VectorField<T>) -> ScalarField<T> {
    let comps = [0, 1, 2].map(|c| u.component(c).values().to_vec());
    ScalarField::from_vec_unchecked(*u.grid(), solve(plan, sym, &tensor_modes(plan, &comps)))
}

pub fn pressure_from_velocity<T: Real>(u: &VectorField<T>) -> ScalarField<T> {
    let plan = Fft3::new(u.grid().n());
    let sym = Symbols::new(u.grid(), T::one());
    pressure_with(&plan, &sym, u)
}

/// `(P₁, P₂)` generated by `u_i u_j χ_{|u|≥1}` and `u_i u_j χ_{|u|<1}`.
pub fn pressure_split<T: Real>(u: &VectorField<T>) -> (ScalarField<T>, ScalarField<T>) {
    let g = *u.grid();
    let plan = Fft3::new(g.n());
    let sym = Symbols::new(&g, T::one());
    let big: Vec<bool> = u.magnitude().values().iter().map(|&m| m >= T::one()).collect();
    let part = |high: bool| {
        let comps = [0, 1, 2].map(|c| {
            u.component(c)
                .values()
                .iter()
                .zip(&big)
                .map(|(&v, &b)| if b == high { v } else { T::zero() })
                .collect::<Vec<T>>()
        });
        // χ² = χ, so the masked components give the masked tensor
        ScalarField::from_vec_unchecked(g, solve(&plan, &sym, &tensor_modes(&plan, &comps)))
    };
    (part(true), part(false))
}

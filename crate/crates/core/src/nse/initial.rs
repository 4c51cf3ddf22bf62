use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Symbols;
use crate::error::{Error, Result};
use crate::field::{Fft3, Grid, ScalarField, VectorField};
use crate::Real;

/// Named initial velocity fields. Arguments are scaled by `κ = 2π/L` so every
/// generator is periodic on the box.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition<T> {
    Zero,
    /// `A(sin κx cos κy, −cos κx sin κy, 0)`
    TaylorGreen { amplitude: T },
    /// `(0, A sin κx, 0)`
    ShearWave { amplitude: T },
    /// `A(sin κz + cos κy, sin κx + cos κz, sin κy + cos κx)`
    Abc { amplitude: T },
    /// Divergence-free random field on wavenumbers `|m_j| ≤ modes`, scaled
    /// so that `max|u| = amplitude`. Drawn from the solver seed.
    Random { amplitude: T, modes: usize },
}

impl<T: Real> InitialCondition<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::TaylorGreen { .. } => "taylor-green",
            Self::ShearWave { .. } => "shear-wave",
            Self::Abc { .. } => "abc",
            Self::Random { .. } => "random",
        }
    }

    pub fn from_name(name: &str, amplitude: T, modes: usize) -> Result<Self> {
        Ok(match name {
            "zero" => Self::Zero,
            "taylor-green" => Self::TaylorGreen { amplitude },
            "shear-wave" => Self::ShearWave { amplitude },
            "abc" => Self::Abc { amplitude },
            "random" => Self::Random { amplitude, modes },
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown initial condition `{other}` (expected zero, taylor-green, shear-wave, abc or random)"
                )))
            }
        })
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match self {
            Self::Random { modes: 0, .. } => Err(Error::InvalidInput("random initial condition needs modes ≥ 1".into())),
            Self::TaylorGreen { amplitude } | Self::ShearWave { amplitude } | Self::Abc { amplitude } | Self::Random { amplitude, .. }
                if !amplitude.is_finite() =>
            {
                Err(Error::InvalidInput("amplitude must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn build(&self, grid: &Grid<T>, seed: u64) -> Result<VectorField<T>> {
        let kappa = T::TAU() / grid.length();
        match *self {
            Self::Zero => Ok(VectorField::zeros(*grid)),
            Self::TaylorGreen { amplitude: a } => VectorField::from_fn(*grid, |p| {
                let (x, y) = (kappa * p[0], kappa * p[1]);
                [a * x.sin() * y.cos(), -a * x.cos() * y.sin(), T::zero()]
            }),
            Self::ShearWave { amplitude: a } => {
                VectorField::from_fn(*grid, |p| [T::zero(), a * (kappa * p[0]).sin(), T::zero()])
            }
            Self::Abc { amplitude: a } => VectorField::from_fn(*grid, |p| {
                let (x, y, z) = (kappa * p[0], kappa * p[1], kappa * p[2]);
                [a * (z.sin() + y.cos()), a * (x.sin() + z.cos()), a * (y.sin() + x.cos())]
            }),
            Self::Random { amplitude, modes } => random_field(grid, amplitude, modes, seed),
        }
    }
}

fn random_field<T: Real>(grid: &Grid<T>, amplitude: T, modes: usize, seed: u64) -> Result<VectorField<T>> {
    if 2 * modes >= grid.n() {
        return Err(Error::InvalidInput(format!(
            "random initial condition with {modes} modes needs n > {}",
            2 * modes
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan = Fft3::new(grid.n());
    let zero = Complex::new(T::zero(), T::zero());
    let mut m: [Vec<Complex<T>>; 3] = [vec![zero; grid.len()], vec![zero; grid.len()], vec![zero; grid.len()]];
    let mi = modes as isize;
    // fixed iteration order keeps the draw sequence independent of threading
    for kz in -mi..=mi {
        for ky in -mi..=mi {
            for kx in -mi..=mi {
                if (kx, ky, kz) == (0, 0, 0) {
                    continue;
                }
                let k2 = (kx * kx + ky * ky + kz * kz) as f64;
                let weight = T::lit(1.0 / (1.0 + k2));
                let idx = grid.index(grid.mode_index(kx), grid.mode_index(ky), grid.mode_index(kz));
                for c in m.iter_mut() {
                    let re = T::lit(rng.gen_range(-1.0..1.0));
                    let im = T::lit(rng.gen_range(-1.0..1.0));
                    c[idx] = Complex::new(re, im) * weight;
                }
            }
        }
    }
    Symbols::new(grid, T::one()).project(&mut m);
    // the real part of the inverse transform is the Hermitian symmetrization
    let comps = m.map(|c| {
        let mut d = c;
        plan.inverse(&mut d);
        ScalarField::from_vec_unchecked(*grid, d.into_iter().map(|z| z.re).collect())
    });
    let u = VectorField::new(comps)?;
    let sup = u.sup_norm();
    if sup == T::zero() {
        return Ok(u);
    }
    u.scale(amplitude / sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::divergence;

    #[test]
    fn generators_are_solenoidal() {
        let g = Grid::<f64>::periodic(16).unwrap();
        for ic in [
            InitialCondition::TaylorGreen { amplitude: 1.0 },
            InitialCondition::ShearWave { amplitude: 2.0 },
            InitialCondition::Abc { amplitude: 0.5 },
            InitialCondition::Random { amplitude: 1.0, modes: 3 },
        ] {
            let u = ic.build(&g, 42).unwrap();
            assert!(divergence(&u).max_abs() < 1e-12, "{}", ic.name());
        }
    }

    #[test]
    fn random_field_is_seeded() {
        let g = Grid::<f64>::periodic(16).unwrap();
        let ic = InitialCondition::Random { amplitude: 1.5, modes: 2 };
        let a = ic.build(&g, 1).unwrap();
        assert_eq!(a, ic.build(&g, 1).unwrap());
        assert_ne!(a, ic.build(&g, 2).unwrap());
        assert!((a.sup_norm() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn names_round_trip() {
        for name in ["zero", "taylor-green", "shear-wave", "abc", "random"] {
            assert_eq!(InitialCondition::<f64>::from_name(name, 1.0, 2).unwrap().name(), name);
        }
        assert!(InitialCondition::<f64>::from_name("vortex", 1.0, 2).is_err());
    }
}

//! Three-dimensional complex FFT over an `n³` cube stored x-fastest.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::Real;

/// Forward/inverse plans for one cube edge length.
///
/// The forward transform is normalized by `1/n³`, so a constant field maps to
/// its value at the zero mode and Parseval reads `mean |f|² = Σ |F_k|²`.
pub struct Fft3<T: Real> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> Clone for Fft3<T> {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            forward: Arc::clone(&self.forward),
            inverse: Arc::clone(&self.inverse),
        }
    }
}

impl<T: Real> Fft3<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.transform(data, &self.forward);
        let scale = T::one() / T::from_usize_exact(data.len());
        data.par_iter_mut().for_each(|c| *c = *c * scale);
    }

    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.transform(data, &self.inverse);
    }

    fn transform(&self, data: &mut [Complex<T>], plan: &Arc<dyn Fft<T>>) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "cube size mismatch");
        let scratch_len = plan.get_inplace_scratch_len();
        let zero = Complex::new(T::zero(), T::zero());

        // x: contiguous lines
        data.par_chunks_mut(n).for_each_init(
            || vec![zero; scratch_len],
            |scratch, line| plan.process_with_scratch(line, scratch),
        );

        // y: strided by n inside each z-slab
        data.par_chunks_mut(n * n).for_each_init(
            || (vec![zero; n], vec![zero; scratch_len]),
            |(line, scratch), slab| {
                for i in 0..n {
                    for j in 0..n {
                        line[j] = slab[i + n * j];
                    }
                    plan.process_with_scratch(line, scratch);
                    for j in 0..n {
                        slab[i + n * j] = line[j];
                    }
                }
            },
        );

        // z: transpose so z runs fastest, transform, transpose back
        let mut tmp = vec![zero; data.len()];
        tmp.par_chunks_mut(n * n).enumerate().for_each(|(j, out)| {
            for i in 0..n {
                for k in 0..n {
                    out[k + n * i] = data[i + n * (j + n * k)];
                }
            }
        });
        tmp.par_chunks_mut(n).for_each_init(
            || vec![zero; scratch_len],
            |scratch, line| plan.process_with_scratch(line, scratch),
        );
        data.par_chunks_mut(n * n).enumerate().for_each(|(k, slab)| {
            for j in 0..n {
                for i in 0..n {
                    slab[i + n * j] = tmp[k + n * (i + n * j)];
                }
            }
        });
    }
}

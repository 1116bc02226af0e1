//! Multidimensional DFT on a periodic grid, used to apply operators that are
//! diagonal in the Fourier basis.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::operators::GridShape;

/// Forward/inverse plans for every axis of a grid. Plans are immutable and
/// scratch space is allocated per call, so one `GridFft` can be shared
/// between threads.
#[derive(Clone)]
pub struct GridFft {
    dims: Vec<usize>,
    strides: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for GridFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridFft").field("dims", &self.dims).finish()
    }
}

impl GridFft {
    pub fn new(shape: &GridShape) -> Self {
        let mut planner = FftPlanner::new();
        let dims = shape.dims().to_vec();
        let forward = dims.iter().map(|&l| planner.plan_fft_forward(l)).collect();
        let inverse = dims.iter().map(|&l| planner.plan_fft_inverse(l)).collect();
        Self {
            strides: shape.strides(),
            dims,
            forward,
            inverse,
        }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn transform(&self, buf: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        let n = buf.len();
        for (axis, plan) in plans.iter().enumerate() {
            let len = self.dims[axis];
            let stride = self.strides[axis];
            if stride == 1 {
                plan.process(buf);
                continue;
            }
            let mut line = vec![Complex64::default(); len];
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            let block = len * stride;
            for outer in (0..n).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (t, slot) in line.iter_mut().enumerate() {
                        *slot = buf[base + t * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (t, slot) in line.iter().enumerate() {
                        buf[base + t * stride] = *slot;
                    }
                }
            }
        }
    }

    /// Unnormalised forward DFT of a real field.
    pub fn forward_real(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, &self.forward);
        buf
    }

    /// Inverse DFT (normalised by `1/n`) returning the real part and the
    /// largest absolute imaginary residue.
    pub fn inverse_real(&self, mut spec: Vec<Complex64>) -> (Vec<f64>, f64) {
        self.transform(&mut spec, &self.inverse);
        let scale = 1.0 / spec.len() as f64;
        let mut residue = 0.0f64;
        let out = spec
            .iter()
            .map(|c| {
                residue = residue.max((c.im * scale).abs());
                c.re * scale
            })
            .collect();
        (out, residue)
    }

    /// `Fᴴ diag(multiplier) F x` for a real, DFT-symmetric multiplier.
    pub fn apply_multiplier(&self, x: &[f64], multiplier: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), multiplier.len());
        let mut spec = self.forward_real(x);
        for (s, &m) in spec.iter_mut().zip(multiplier) {
            *s *= m;
        }
        let (out, residue) = self.inverse_real(spec);
        debug_assert!(
            residue <= 1e-9 * (1.0 + crate::linalg::max_abs(&out)),
            "imaginary residue {residue}"
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_3d() {
        let shape = GridShape::new(vec![3, 4, 5]).unwrap();
        let fft = GridFft::new(&shape);
        let x: Vec<f64> = (0..60).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let (back, residue) = fft.inverse_real(fft.forward_real(&x));
        assert!(residue < 1e-12);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dc_bin_is_sum() {
        let shape = GridShape::new(vec![4, 2]).unwrap();
        let fft = GridFft::new(&shape);
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let spec = fft.forward_real(&x);
        assert!((spec[0].re - 36.0).abs() < 1e-12);
    }
}

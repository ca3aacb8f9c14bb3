//! rustfft-backed transforms for the core solver.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use wsav_core::fourier::{for_each_line, FourierBackend};
use wsav_core::spectral::SpectralOperators;
use wsav_core::{Grid, Result};

/// Separable FFT over the axes of a row-major array.
pub struct RustFft {
    shape: [usize; 3],
    forward: [Option<Arc<dyn Fft<f64>>>; 3],
    inverse: [Option<Arc<dyn Fft<f64>>>; 3],
}

impl RustFft {
    pub fn new(shape: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let mut plan = |inverse: bool| {
            shape.map(|n| {
                (n > 1).then(|| {
                    if inverse {
                        planner.plan_fft_inverse(n)
                    } else {
                        planner.plan_fft_forward(n)
                    }
                })
            })
        };
        let forward = plan(false);
        let inverse = plan(true);
        Self { shape, forward, inverse }
    }

    fn transform(&self, data: &mut [Complex64], plans: &[Option<Arc<dyn Fft<f64>>>; 3]) {
        assert_eq!(data.len(), self.shape.iter().product::<usize>());
        for (axis, plan) in plans.iter().enumerate() {
            let Some(fft) = plan else { continue };
            let n = self.shape[axis];
            let stride: usize = self.shape[axis + 1..].iter().product();
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            if stride == 1 {
                fft.process_with_scratch(data, &mut scratch);
                continue;
            }
            let mut line = vec![Complex64::default(); n];
            for_each_line(self.shape, axis, |start| {
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[start + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    data[start + j * stride] = *v;
                }
            });
        }
    }
}

impl FourierBackend for RustFft {
    fn shape(&self) -> [usize; 3] {
        self.shape
    }

    fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }
}

/// Spectral operators on `grid` using [`RustFft`].
pub fn operators(grid: Grid, nu: f64, eps: f64, gamma: f64) -> Result<SpectralOperators> {
    SpectralOperators::new(grid, nu, eps, gamma, Arc::new(RustFft::new(grid.shape())))
}

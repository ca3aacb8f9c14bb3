//! Fourier-multiplier operators: `-Δ`, the mobility `G = (-Δ)^ν`,
//! `L = -ε²Δ + γ`, and the backward-Euler / Crank–Nicolson propagators
//! built from them.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{mode_index, DirectDft, FourierBackend};
use crate::grid::{check_same, Grid, RealField};

#[derive(Clone)]
pub struct SpectralOperators {
    grid: Grid,
    nu: f64,
    eps: f64,
    gamma: f64,
    sym_minus_laplace: Vec<f64>,
    sym_g: Vec<f64>,
    sym_l: Vec<f64>,
    backend: Arc<dyn FourierBackend>,
}

impl fmt::Debug for SpectralOperators {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralOperators")
            .field("grid", &self.grid)
            .field("nu", &self.nu)
            .field("eps", &self.eps)
            .field("gamma", &self.gamma)
            .finish_non_exhaustive()
    }
}

/// Operators backed by the reference [`DirectDft`].
pub fn make_operators(grid: Grid, nu: f64, eps: f64, gamma: f64) -> Result<SpectralOperators> {
    SpectralOperators::new(grid, nu, eps, gamma, Arc::new(DirectDft::new(grid.shape())))
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::Config(format!("time step must be positive, got {tau}")));
    }
    Ok(())
}

impl SpectralOperators {
    pub fn new(
        grid: Grid,
        nu: f64,
        eps: f64,
        gamma: f64,
        backend: Arc<dyn FourierBackend>,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&nu) {
            return Err(Error::Config(format!("nu must lie in [0, 1], got {nu}")));
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::Config(format!("eps must be positive, got {eps}")));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::Config(format!("gamma must be non-negative, got {gamma}")));
        }
        if backend.shape() != grid.shape() {
            return Err(Error::Config(format!(
                "transform shape {:?} does not match grid {:?}",
                backend.shape(),
                grid.shape()
            )));
        }

        let shape = grid.shape();
        let wavenumber = |axis: usize, i: usize| {
            2.0 * PI * mode_index(i, shape[axis]) as f64 / grid.length(axis)
        };
        let sym_minus_laplace: Vec<f64> = (0..grid.len())
            .map(|idx| {
                let m = grid.multi_index(idx);
                (0..grid.dim())
                    .map(|a| {
                        let k = wavenumber(a, m[a]);
                        k * k
                    })
                    .sum()
            })
            .collect();
        let sym_g = sym_minus_laplace.iter().map(|&k2| mobility_symbol(k2, nu)).collect();
        let sym_l = sym_minus_laplace.iter().map(|&k2| eps * eps * k2 + gamma).collect();

        Ok(Self { grid, nu, eps, gamma, sym_minus_laplace, sym_g, sym_l, backend })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `|k|²` per mode.
    pub fn sym_minus_laplace(&self) -> &[f64] {
        &self.sym_minus_laplace
    }

    pub fn sym_g(&self) -> &[f64] {
        &self.sym_g
    }

    pub fn sym_l(&self) -> &[f64] {
        &self.sym_l
    }

    /// Unnormalized forward transform of a real field.
    pub fn forward(&self, f: &RealField) -> Result<Vec<Complex64>> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let mut data: Vec<Complex64> =
            f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.backend.forward(&mut data);
        Ok(data)
    }

    /// Inverse transform, keeping the real part.
    pub fn inverse(&self, mut spectrum: Vec<Complex64>) -> RealField {
        assert_eq!(spectrum.len(), self.grid.len());
        self.backend.inverse(&mut spectrum);
        RealField::from_values_unchecked(self.grid, spectrum.into_iter().map(|c| c.re).collect())
    }

    /// Multiplies the spectrum of `f` by `symbol(mode)`.
    pub fn apply_symbol(&self, f: &RealField, symbol: impl Fn(usize) -> f64) -> Result<RealField> {
        let mut spec = self.forward(f)?;
        spec.iter_mut().enumerate().for_each(|(i, c)| *c *= symbol(i));
        Ok(self.inverse(spec))
    }

    pub fn apply_l(&self, f: &RealField) -> Result<RealField> {
        self.apply_symbol(f, |i| self.sym_l[i])
    }

    pub fn apply_g(&self, f: &RealField) -> Result<RealField> {
        self.apply_symbol(f, |i| self.sym_g[i])
    }

    /// `(I + τ G L)⁻¹ rhs`.
    pub fn solve_be_propagator(&self, tau: f64, rhs: &RealField) -> Result<RealField> {
        check_tau(tau)?;
        self.apply_symbol(rhs, |i| 1.0 / (1.0 + tau * self.sym_g[i] * self.sym_l[i]))
    }

    /// `(I + (τ/2) G L)⁻¹ rhs`.
    pub fn solve_cn_propagator(&self, tau: f64, rhs: &RealField) -> Result<RealField> {
        check_tau(tau)?;
        self.apply_symbol(rhs, |i| 1.0 / (1.0 + 0.5 * tau * self.sym_g[i] * self.sym_l[i]))
    }

    /// `(I - (τ/2) G L) f`.
    pub fn apply_cn_explicit(&self, tau: f64, f: &RealField) -> Result<RealField> {
        check_tau(tau)?;
        self.apply_symbol(f, |i| 1.0 - 0.5 * tau * self.sym_g[i] * self.sym_l[i])
    }

    /// `∫ f g` evaluated from Fourier coefficients (Parseval).
    pub fn spectral_inner_product(&self, f: &RealField, g: &RealField) -> Result<f64> {
        check_same(f, g)?;
        let fh = self.forward(f)?;
        let gh = self.forward(g)?;
        Ok(self.spectral_dot(&fh, &gh, |_| 1.0))
    }

    /// `∫ f (S g)` for spectra `f̂, ĝ` and a real even symbol `S`.
    pub fn spectral_dot(
        &self,
        f: &[Complex64],
        g: &[Complex64],
        symbol: impl Fn(usize) -> f64,
    ) -> f64 {
        let sum: f64 = f
            .iter()
            .zip(g)
            .enumerate()
            .map(|(i, (a, b))| symbol(i) * (a * b.conj()).re)
            .sum();
        sum * self.grid.cell_volume() / self.grid.len() as f64
    }
}

fn mobility_symbol(k2: f64, nu: f64) -> f64 {
    if nu == 0.0 {
        1.0
    } else if k2 == 0.0 {
        0.0
    } else if nu == 1.0 {
        k2
    } else if nu == 0.5 {
        libm::sqrt(k2)
    } else {
        libm::pow(k2, nu)
    }
}

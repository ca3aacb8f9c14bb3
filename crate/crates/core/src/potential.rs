//! Ginzburg–Landau energy split with a C²-truncated double well.
//!
//! The bulk density is `F(φ) = ¼(φ² - 1 - γ)²` on `[-δ, δ]`; outside, it is
//! glued to the exponential tails `(±aφ + b)e^{∓φ} + c`, which keeps
//! `E_N[φ] = ∫ F_δ(φ)` bounded while matching value, slope and curvature
//! at `±δ`.

use alloc::format;

use crate::error::{Error, Result};
use crate::grid::{inner_product, Grid, RealField};
use crate::spectral::SpectralOperators;

pub const DEFAULT_DELTA: f64 = 5.0;
pub const DEFAULT_SHIFT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialParams {
    gamma: f64,
    delta: f64,
    a: f64,
    b: f64,
    c: f64,
    shift: f64,
}

/// Gluing coefficients `(a, b, c)` of the exponential tails.
pub fn truncation_coefficients(gamma: f64, delta: f64) -> (f64, f64, f64) {
    let d = delta;
    let g1 = 1.0 + gamma;
    let ed = libm::exp(d);
    let a = -(d * d * d + 3.0 * d * d - g1 * d - g1) * ed;
    let b = (d * d * d * d + d * d * d - (4.0 + gamma) * d * d + g1 * d + g1) * ed;
    let c = 0.25 * d * d * d * d + 2.0 * d * d * d + 0.5 * (5.0 - gamma) * d * d - 2.0 * g1 * d
        + 0.25 * g1 * (gamma - 3.0);
    (a, b, c)
}

impl PotentialParams {
    /// `gamma ∈ [0, 4]`, `delta > 0`, `shift > 0` (the SAV constant `C`).
    pub fn new(gamma: f64, delta: f64, shift: f64) -> Result<Self> {
        if !(0.0..=4.0).contains(&gamma) {
            return Err(Error::Config(format!("gamma must lie in [0, 4], got {gamma}")));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Config(format!("delta must be positive, got {delta}")));
        }
        if !(shift.is_finite() && shift > 0.0) {
            return Err(Error::Config(format!("C must be positive, got {shift}")));
        }
        let (a, b, c) = truncation_coefficients(gamma, delta);
        Ok(Self { gamma, delta, a, b, c, shift })
    }

    /// `δ = 5`, `C = 1`.
    pub fn with_gamma(gamma: f64) -> Result<Self> {
        Self::new(gamma, DEFAULT_DELTA, DEFAULT_SHIFT)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn coefficients(&self) -> (f64, f64, f64) {
        (self.a, self.b, self.c)
    }

    /// The SAV shift `C` in `r = √(E_N + C)`.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn f(&self, phi: f64) -> f64 {
        if phi > self.delta {
            (self.a * phi + self.b) * libm::exp(-phi) + self.c
        } else if phi < -self.delta {
            self.f(-phi)
        } else {
            let s = phi * phi - 1.0 - self.gamma;
            0.25 * s * s
        }
    }

    pub fn df(&self, phi: f64) -> f64 {
        if phi > self.delta {
            (self.a - self.a * phi - self.b) * libm::exp(-phi)
        } else if phi < -self.delta {
            -self.df(-phi)
        } else {
            (phi * phi - 1.0 - self.gamma) * phi
        }
    }

    pub fn d2f(&self, phi: f64) -> f64 {
        if phi > self.delta {
            (self.a * phi + self.b - 2.0 * self.a) * libm::exp(-phi)
        } else if phi < -self.delta {
            self.d2f(-phi)
        } else {
            3.0 * phi * phi - 1.0 - self.gamma
        }
    }

    /// The untruncated quartic branch at `phi`, ignoring `δ`.
    pub fn f_untruncated(&self, phi: f64) -> f64 {
        let s = phi * phi - 1.0 - self.gamma;
        0.25 * s * s
    }
}

/// Components of the discrete free energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySplit {
    /// `½(φ, Lφ)`
    pub quadratic: f64,
    /// `E_N[φ]`
    pub nonlinear: f64,
    /// `quadratic + nonlinear`
    pub total: f64,
    /// `quadratic + λ(r² - C) + (1 - λ) nonlinear`
    pub modified: f64,
}

impl EnergySplit {
    pub fn new(quadratic: f64, nonlinear: f64, r: f64, lambda: f64, shift: f64) -> Self {
        Self {
            quadratic,
            nonlinear,
            total: quadratic + nonlinear,
            modified: quadratic + lambda * (r * r - shift) + (1.0 - lambda) * nonlinear,
        }
    }
}

/// `E_N[f] = ∫ F_δ(f)`.
pub fn nonlinear_energy(f: &RealField, p: &PotentialParams) -> f64 {
    nonlinear_energy_of(f.grid(), f.values(), p)
}

pub(crate) fn nonlinear_energy_of(grid: &Grid, values: &[f64], p: &PotentialParams) -> f64 {
    grid.cell_volume() * values.iter().map(|&v| p.f(v)).sum::<f64>()
}

/// Pointwise `F_δ'(f)`, the variational derivative of `E_N`.
pub fn h_field(f: &RealField, p: &PotentialParams) -> RealField {
    f.map(|v| p.df(v))
}

pub fn energy_split(
    f: &RealField,
    r: f64,
    lambda: f64,
    ops: &SpectralOperators,
    p: &PotentialParams,
) -> Result<EnergySplit> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Config(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    let quadratic = 0.5 * inner_product(f, &ops.apply_l(f)?)?;
    Ok(EnergySplit::new(quadratic, nonlinear_energy(f, p), r, lambda, p.shift()))
}

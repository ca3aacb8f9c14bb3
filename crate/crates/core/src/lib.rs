//! Weighted scalar-auxiliary-variable (SAV) time stepping for phase-field
//! gradient flows on periodic grids.
//!
//! The free energy is split as `E[φ] = ½(φ, Lφ) + E_N[φ]` with
//! `L = -ε²Δ + γ` and a truncated Ginzburg–Landau double well in `E_N`.
//! The dynamics `φ_t = -G μ`, `G = (-Δ)^ν`, cover Allen–Cahn (`ν = 0`),
//! Cahn–Hilliard (`ν = 1`) and the space-fractional variants in between.
//!
//! Every step reduces to two constant-coefficient elliptic solves plus a
//! scalar equation for the auxiliary variable `r`. The weight `λ ∈ [0, 1]`
//! blends the nonlinear-energy update (`λ = 1`, always solvable) with the
//! Lagrange-multiplier update (`λ = 0`, dissipates the original energy);
//! [`scalar::find_lambda_min`] bisects for the smallest weight that still
//! admits a root.
//!
//! The crate is `no_std` and only needs `alloc`. Fourier transforms are
//! pluggable through [`fourier::FourierBackend`]; [`fourier::DirectDft`] is a
//! dependency-free reference implementation suitable for small grids.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod fourier;
pub mod grid;
pub mod initial;
pub mod potential;
pub mod scalar;
pub mod spectral;
pub mod stepper;

pub use error::{Error, Result};
pub use grid::{Grid, RealField};
pub use potential::{EnergySplit, PotentialParams};
pub use scalar::{RootMethod, RootOptions, RootResult, RootStatus, ScalarEquation, Scheme};
pub use spectral::SpectralOperators;
pub use stepper::{LambdaPolicy, SavState, StepParams, StepReport};

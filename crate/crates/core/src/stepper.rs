//! Weighted SAV time steppers.
//!
//! Both schemes split `φⁿ⁺¹ = p + r q` with two constant-coefficient
//! Fourier solves, then pick `r` (and, for the adaptive policy, the weight
//! `λ`) from the scalar equation in [`crate::scalar`].

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{integrate, RealField};
use crate::potential::{h_field, nonlinear_energy, EnergySplit, PotentialParams};
use crate::scalar::{
    assemble, find_lambda_min, sav_radical, solve_r, RootMethod, RootOptions, RootResult,
    RootStatus, ScalarEquation, Scheme,
};
use crate::spectral::SpectralOperators;

pub const DEFAULT_TOL_LAMBDA: f64 = 1e-8;

/// How the weight `λ` is chosen each step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaPolicy {
    /// Smallest admissible weight, found by bisection.
    AdaptiveMin,
    Fixed(f64),
    /// `λ = 1` through the explicit root.
    NonlinearEnergy,
    /// `λ = 0`; the step fails when the equation has no root.
    LagrangeStrict,
}

#[derive(Debug, Clone)]
pub struct StepParams {
    pub tau: f64,
    pub lambda_policy: LambdaPolicy,
    pub ops: SpectralOperators,
    pub pparams: PotentialParams,
    pub root_opts: RootOptions,
    pub tol_lambda: f64,
}

impl StepParams {
    pub fn new(
        tau: f64,
        lambda_policy: LambdaPolicy,
        ops: SpectralOperators,
        pparams: PotentialParams,
    ) -> Result<Self> {
        let sp = Self {
            tau,
            lambda_policy,
            ops,
            pparams,
            root_opts: RootOptions::default(),
            tol_lambda: DEFAULT_TOL_LAMBDA,
        };
        sp.validate()?;
        Ok(sp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::Config(format!("tau must be positive, got {}", self.tau)));
        }
        if let LambdaPolicy::Fixed(l) = self.lambda_policy {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::Config(format!("fixed lambda must lie in [0, 1], got {l}")));
            }
        }
        if !(self.tol_lambda > 0.0) {
            return Err(Error::Config(format!(
                "tol_lambda must be positive, got {}",
                self.tol_lambda
            )));
        }
        let o = &self.root_opts;
        if !(o.newton_rtol > 0.0
            && o.max_newton_iters > 0
            && o.bracket_samples >= 2
            && o.bracket_radius_factor > 0.0)
        {
            return Err(Error::Config(format!("invalid root options {o:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SavState {
    pub phi: RealField,
    pub r: f64,
    pub t: f64,
    pub step: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub lambda_used: f64,
    pub r_new: f64,
    pub newton_iters: u32,
    /// Number of weights tried by the adaptive policy (1 otherwise).
    pub lambda_probes: u32,
    pub method: RootMethod,
    /// Energies of the new state, with `modified` taken at `lambda_used`.
    pub energy: EnergySplit,
    /// Modified energy of the old state at the same `lambda_used`.
    pub modified_prev: f64,
    pub mass: f64,
    /// `τ (μ, G μ)` for the discrete chemical potential of the step.
    pub mu_dissipation: f64,
    /// `r_new / S`, the multiplier the step implies.
    pub eta_equiv: f64,
    /// `h(r_new, lambda_used)`.
    pub residual: f64,
}

/// `r⁰ = √(E_N[φ⁰] + C)`, `t = 0`.
pub fn init_state(phi0: RealField, pparams: &PotentialParams) -> Result<SavState> {
    if !phi0.is_finite() {
        return Err(Error::NonFinite);
    }
    let r = sav_radical(nonlinear_energy(&phi0, pparams), pparams)?;
    Ok(SavState { phi: phi0, r, t: 0.0, step: 0 })
}

fn choose_root(eq: &ScalarEquation, sp: &StepParams) -> Result<(f64, RootResult, u32)> {
    let solve_fixed = |lambda: f64| {
        let res = solve_r(eq, lambda, &sp.root_opts);
        if res.is_solved() {
            Ok((lambda, res, 1))
        } else {
            Err(Error::Unsolvable { lambda, state: eq.state() })
        }
    };
    match sp.lambda_policy {
        LambdaPolicy::NonlinearEnergy => {
            let r = eq.closed_form_root();
            if !r.is_finite() {
                return Err(Error::Unsolvable { lambda: 1.0, state: eq.state() });
            }
            let res = RootResult { status: RootStatus::Solved, r, iterations: 0, method: RootMethod::ClosedForm };
            Ok((1.0, res, 1))
        }
        LambdaPolicy::Fixed(lambda) => solve_fixed(lambda),
        LambdaPolicy::LagrangeStrict => solve_fixed(0.0),
        LambdaPolicy::AdaptiveMin => find_lambda_min(eq, sp.tol_lambda, &sp.root_opts),
    }
}

fn spectrum_of(ops: &SpectralOperators, f: &RealField) -> Result<Vec<Complex64>> {
    ops.forward(f)
}

fn combine(a: &[Complex64], s: f64, b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x + y * s).collect()
}

struct Finish<'a> {
    sp: &'a StepParams,
    state: &'a SavState,
    eq: ScalarEquation,
    p: RealField,
    q: RealField,
    p_hat: Vec<Complex64>,
    q_hat: Vec<Complex64>,
    phi_hat: Vec<Complex64>,
    /// Spectrum of the `H` used in the scheme.
    h_hat: Vec<Complex64>,
}

impl Finish<'_> {
    fn run(self) -> Result<(SavState, StepReport)> {
        let Finish { sp, state, eq, p, q, p_hat, q_hat, phi_hat, h_hat } = self;
        let ops = &sp.ops;
        let (lambda, root, probes) = choose_root(&eq, sp)?;
        let r = root.r;
        let phi_new = p.add_scaled(r, &q)?;
        if !phi_new.is_finite() || !r.is_finite() {
            return Err(Error::NonFinite);
        }
        let new_hat = combine(&p_hat, r, &q_hat);
        let (sym_l, sym_g) = (ops.sym_l(), ops.sym_g());
        let s = eq.sqrt_ec;

        let mu_hat: Vec<Complex64> = match eq.scheme {
            Scheme::BackwardEuler => new_hat
                .iter()
                .zip(&h_hat)
                .enumerate()
                .map(|(i, (f, h))| f * sym_l[i] + h * (r / s))
                .collect(),
            Scheme::CrankNicolson => new_hat
                .iter()
                .zip(&phi_hat)
                .zip(&h_hat)
                .enumerate()
                .map(|(i, ((f1, f0), h))| (f1 + f0) * (0.5 * sym_l[i]) + h * ((r + eq.r_prev) / (2.0 * s)))
                .collect(),
        };
        let mu_dissipation = sp.tau * ops.spectral_dot(&mu_hat, &mu_hat, |i| sym_g[i]);

        let shift = sp.pparams.shift();
        let quad_new = 0.5 * ops.spectral_dot(&new_hat, &new_hat, |i| sym_l[i]);
        let quad_old = 0.5 * ops.spectral_dot(&phi_hat, &phi_hat, |i| sym_l[i]);
        let energy = EnergySplit::new(quad_new, nonlinear_energy(&phi_new, &sp.pparams), r, lambda, shift);
        let modified_prev = EnergySplit::new(quad_old, eq.en_prev, state.r, lambda, shift).modified;

        let report = StepReport {
            lambda_used: lambda,
            r_new: r,
            newton_iters: root.iterations,
            lambda_probes: probes,
            method: root.method,
            energy,
            modified_prev,
            mass: integrate(&phi_new),
            mu_dissipation,
            eta_equiv: r / s,
            residual: eq.eval_h(r, lambda),
        };
        let next = SavState {
            phi: phi_new,
            r,
            t: state.t + sp.tau,
            step: state.step + 1,
        };
        Ok((next, report))
    }
}

/// One weighted SAV backward-Euler step.
pub fn be_step(state: &SavState, sp: &StepParams) -> Result<(SavState, StepReport)> {
    let ops = &sp.ops;
    let tau = sp.tau;
    let phi_hat = spectrum_of(ops, &state.phi)?;
    let h = h_field(&state.phi, &sp.pparams);
    let h_hat = spectrum_of(ops, &h)?;
    let en = nonlinear_energy(&state.phi, &sp.pparams);
    let s = sav_radical(en, &sp.pparams)?;
    let (sym_g, sym_l) = (ops.sym_g(), ops.sym_l());

    let denom = |i: usize| 1.0 + tau * sym_g[i] * sym_l[i];
    let p_hat: Vec<Complex64> = phi_hat.iter().enumerate().map(|(i, c)| c / denom(i)).collect();
    let q_hat: Vec<Complex64> = h_hat
        .iter()
        .enumerate()
        .map(|(i, c)| c * (-tau * sym_g[i] / (s * denom(i))))
        .collect();
    let p = ops.inverse(p_hat.clone());
    let q = ops.inverse(q_hat.clone());
    let eq = assemble(Scheme::BackwardEuler, &state.phi, state.r, &p, &q, h.values(), s, en, &sp.pparams)?;
    Finish { sp, state, eq, p, q, p_hat, q_hat, phi_hat, h_hat }.run()
}

/// Half-step predictor `(I + τ/2 GL)⁻¹(φⁿ - τ/2 G H(φⁿ))`.
pub fn cn_predictor(state: &SavState, sp: &StepParams) -> Result<RealField> {
    let phi_hat = spectrum_of(&sp.ops, &state.phi)?;
    predictor_from(&phi_hat, state, sp)
}

fn predictor_from(phi_hat: &[Complex64], state: &SavState, sp: &StepParams) -> Result<RealField> {
    let ops = &sp.ops;
    let half = 0.5 * sp.tau;
    let h_hat = spectrum_of(ops, &h_field(&state.phi, &sp.pparams))?;
    let (sym_g, sym_l) = (ops.sym_g(), ops.sym_l());
    let star_hat = phi_hat
        .iter()
        .zip(&h_hat)
        .enumerate()
        .map(|(i, (f, h))| (f - h * (half * sym_g[i])) / (1.0 + half * sym_g[i] * sym_l[i]))
        .collect();
    Ok(ops.inverse(star_hat))
}

/// One weighted SAV Crank–Nicolson step.
pub fn cn_step(state: &SavState, sp: &StepParams) -> Result<(SavState, StepReport)> {
    let ops = &sp.ops;
    let half = 0.5 * sp.tau;
    let phi_hat = spectrum_of(ops, &state.phi)?;
    let phi_star = predictor_from(&phi_hat, state, sp)?;
    let h_star = h_field(&phi_star, &sp.pparams);
    let h_hat = spectrum_of(ops, &h_star)?;
    let s = sav_radical(nonlinear_energy(&phi_star, &sp.pparams), &sp.pparams)?;
    let en = nonlinear_energy(&state.phi, &sp.pparams);
    let (sym_g, sym_l) = (ops.sym_g(), ops.sym_l());

    let z = |i: usize| half * sym_g[i] * sym_l[i];
    let q_hat: Vec<Complex64> = h_hat
        .iter()
        .enumerate()
        .map(|(i, h)| h * (-half * sym_g[i] / (s * (1.0 + z(i)))))
        .collect();
    let p_hat: Vec<Complex64> = phi_hat
        .iter()
        .zip(&q_hat)
        .enumerate()
        .map(|(i, (f, qh))| f * ((1.0 - z(i)) / (1.0 + z(i))) + qh * state.r)
        .collect();
    let p = ops.inverse(p_hat.clone());
    let q = ops.inverse(q_hat.clone());
    let eq = assemble(Scheme::CrankNicolson, &state.phi, state.r, &p, &q, h_star.values(), s, en, &sp.pparams)?;
    Finish { sp, state, eq, p, q, p_hat, q_hat, phi_hat, h_hat }.run()
}

pub fn step(state: &SavState, sp: &StepParams, scheme: Scheme) -> Result<(SavState, StepReport)> {
    match scheme {
        Scheme::BackwardEuler => be_step(state, sp),
        Scheme::CrankNicolson => cn_step(state, sp),
    }
}

/// Advances `n_steps` steps, handing every report to `recorder`.
///
/// A failing step is returned as [`Error::Step`] carrying its index.
pub fn run(
    state0: SavState,
    sp: &StepParams,
    scheme: Scheme,
    n_steps: u64,
    mut recorder: impl FnMut(&SavState, &StepReport),
) -> Result<SavState> {
    sp.validate()?;
    let mut state = state0;
    for _ in 0..n_steps {
        let index = state.step + 1;
        let (next, report) = step(&state, sp, scheme)
            .map_err(|e| Error::Step { step: index, source: alloc::boxed::Box::new(e) })?;
        recorder(&next, &report);
        state = next;
    }
    Ok(state)
}

#![allow(dead_code)]

use std::f64::consts::PI;

use proptest::prelude::*;
use wsav_core::grid::{inner_product, norm_linf};
use wsav_core::potential::{h_field, nonlinear_energy};
use wsav_core::scalar::{build_equation_be, build_equation_cn, sav_radical};
use wsav_core::spectral::make_operators;
use wsav_core::stepper::{cn_predictor, init_state};
use wsav_core::{
    Grid, LambdaPolicy, PotentialParams, RealField, SavState, ScalarEquation, Scheme, SpectralOperators, StepParams,
};

/// `(kx, ky, cos amplitude, sin amplitude)`
pub type Mode = (i32, i32, f64, f64);

pub fn grid(n: usize) -> Grid {
    Grid::square(n, 0.0, 2.0 * PI).unwrap()
}

pub fn smooth_field(grid: Grid, offset: f64, modes: &[Mode]) -> RealField {
    RealField::from_fn(grid, |x| {
        offset
            + modes
                .iter()
                .map(|&(k, l, a, b)| {
                    let arg = k as f64 * x[0] + l as f64 * x[1];
                    a * arg.cos() + b * arg.sin()
                })
                .sum::<f64>()
    })
}

pub fn modes(max_amp: f64) -> impl Strategy<Value = Vec<Mode>> {
    prop::collection::vec((-3i32..=3, -3i32..=3, -max_amp..max_amp, -max_amp..max_amp), 1..5)
}

/// A randomized problem: field, physical parameters and step size.
#[derive(Debug, Clone)]
pub struct Setup {
    pub offset: f64,
    pub modes: Vec<Mode>,
    pub nu: f64,
    pub eps: f64,
    pub gamma: f64,
    pub tau: f64,
}

pub fn setup(max_amp: f64, log_tau: std::ops::Range<f64>) -> impl Strategy<Value = Setup> {
    (
        -0.3f64..0.3,
        modes(max_amp),
        prop::sample::select(vec![0.0, 0.5, 1.0]),
        0.05f64..0.3,
        0.0f64..4.0,
        log_tau,
    )
        .prop_map(|(offset, modes, nu, eps, gamma, lt)| Setup { offset, modes, nu, eps, gamma, tau: 10f64.powf(lt) })
}

impl Setup {
    pub fn ops(&self, n: usize) -> SpectralOperators {
        make_operators(grid(n), self.nu, self.eps, self.gamma).unwrap()
    }

    pub fn params(&self) -> PotentialParams {
        PotentialParams::with_gamma(self.gamma).unwrap()
    }

    pub fn state(&self, n: usize) -> SavState {
        init_state(smooth_field(grid(n), self.offset, &self.modes), &self.params()).unwrap()
    }

    pub fn step_params(&self, n: usize, policy: LambdaPolicy) -> StepParams {
        StepParams::new(self.tau, policy, self.ops(n), self.params()).unwrap()
    }
}

/// The backward-Euler equation assembled from operator solves.
pub fn be_equation(state: &SavState, sp: &StepParams) -> ScalarEquation {
    let ops = &sp.ops;
    let s = sav_radical(nonlinear_energy(&state.phi, &sp.pparams), &sp.pparams).unwrap();
    let p = ops.solve_be_propagator(sp.tau, &state.phi).unwrap();
    let gh = ops.apply_g(&h_field(&state.phi, &sp.pparams)).unwrap();
    let q = ops.solve_be_propagator(sp.tau, &gh).unwrap().scaled(-sp.tau / s);
    build_equation_be(&state.phi, state.r, &p, &q, &sp.pparams).unwrap()
}

/// The Crank–Nicolson equation assembled from operator solves.
pub fn cn_equation(state: &SavState, sp: &StepParams) -> ScalarEquation {
    let ops = &sp.ops;
    let star = cn_predictor(state, sp).unwrap();
    let s = sav_radical(nonlinear_energy(&star, &sp.pparams), &sp.pparams).unwrap();
    let gh = ops.apply_g(&h_field(&star, &sp.pparams)).unwrap();
    let q = ops.solve_cn_propagator(sp.tau, &gh).unwrap().scaled(-0.5 * sp.tau / s);
    let p0 = ops.solve_cn_propagator(sp.tau, &ops.apply_cn_explicit(sp.tau, &state.phi).unwrap()).unwrap();
    let p = p0.add_scaled(state.r, &q).unwrap();
    build_equation_cn(&state.phi, &star, state.r, &p, &q, &sp.pparams).unwrap()
}

pub fn rel(a: &RealField, b: &RealField) -> f64 {
    norm_linf(&a.add_scaled(-1.0, b).unwrap()) / norm_linf(b).max(1e-300)
}

/// Classical SAV backward Euler with the auxiliary variable updated from
/// `r' - r = ½(b, φ' - φ)`, `b = H(φ)/S`.
pub fn sav_be_oracle(state: &SavState, sp: &StepParams) -> (RealField, f64) {
    let ops = &sp.ops;
    let s = sav_radical(nonlinear_energy(&state.phi, &sp.pparams), &sp.pparams).unwrap();
    let b = h_field(&state.phi, &sp.pparams).scaled(1.0 / s);
    let u1 = ops.solve_be_propagator(sp.tau, &state.phi).unwrap();
    let u2 = ops.solve_be_propagator(sp.tau, &ops.apply_g(&b).unwrap()).unwrap().scaled(-sp.tau);
    let b_u1 = inner_product(&b, &u1.add_scaled(-1.0, &state.phi).unwrap()).unwrap();
    let b_u2 = inner_product(&b, &u2).unwrap();
    let r = (state.r + 0.5 * b_u1) / (1.0 - 0.5 * b_u2);
    (u1.add_scaled(r, &u2).unwrap(), r)
}

/// Lagrange-multiplier backward Euler: `μ = Lφ' + η H(φ)` with
/// `E_N[φ'] - E_N[φ] = η (H, φ' - φ)`.
pub struct Lagrange {
    u1: RealField,
    u2: RealField,
    h: RealField,
    phi: RealField,
    pub en: f64,
    params: PotentialParams,
}

impl Lagrange {
    pub fn new(state: &SavState, sp: &StepParams) -> Self {
        let ops = &sp.ops;
        let h = h_field(&state.phi, &sp.pparams);
        let u1 = ops.solve_be_propagator(sp.tau, &state.phi).unwrap();
        let u2 = ops.solve_be_propagator(sp.tau, &ops.apply_g(&h).unwrap()).unwrap().scaled(-sp.tau);
        let en = nonlinear_energy(&state.phi, &sp.pparams);
        assert!(norm_linf(&state.phi) < sp.pparams.delta());
        Self { u1, u2, h, phi: state.phi.clone(), en, params: sp.pparams }
    }

    pub fn field(&self, eta: f64) -> RealField {
        self.u1.add_scaled(eta, &self.u2).unwrap()
    }

    /// Residual of the energy equation and its derivative in `η`.
    pub fn residual(&self, eta: f64) -> (f64, f64) {
        let phi = self.field(eta);
        let dphi = phi.add_scaled(-1.0, &self.phi).unwrap();
        let h_d = inner_product(&self.h, &dphi).unwrap();
        // E_N[φ'] - E_N[φ] summed pointwise from the factored quartic difference
        let g1 = 1.0 + self.params.gamma();
        let gap: f64 = phi
            .values()
            .iter()
            .zip(self.phi.values())
            .map(|(&x, &y)| 0.25 * (x - y) * (x + y) * (x * x + y * y - 2.0 * g1))
            .sum::<f64>()
            * phi.grid().cell_volume();
        let val = gap - eta * h_d;
        let slope = inner_product(&phi.map(|v| self.params.df(v)), &self.u2).unwrap()
            - h_d
            - eta * inner_product(&self.h, &self.u2).unwrap();
        (val, slope)
    }

    /// Newton from `η = 1` until the update stagnates.
    pub fn solve(&self) -> Option<f64> {
        let mut eta = 1.0;
        for _ in 0..100 {
            let (v, dv) = self.residual(eta);
            let next = eta - v / dv;
            let done = (next - eta).abs() <= 1e-15 * eta.abs();
            eta = next;
            if done {
                break;
            }
        }
        // same residual tolerance as the solver, so tangential minima are not roots
        (self.residual(eta).0.abs() <= 1e-12 * self.en.abs().max(1.0)).then_some(eta)
    }
}

/// Classical SAV Crank–Nicolson with the predictor supplied by the scheme.
pub fn sav_cn_oracle(state: &SavState, sp: &StepParams) -> (RealField, f64) {
    let ops = &sp.ops;
    let star = cn_predictor(state, sp).unwrap();
    let s = sav_radical(nonlinear_energy(&star, &sp.pparams), &sp.pparams).unwrap();
    let b = h_field(&star, &sp.pparams).scaled(1.0 / s);
    let u0 = ops.solve_cn_propagator(sp.tau, &ops.apply_cn_explicit(sp.tau, &state.phi).unwrap()).unwrap();
    let w = ops.solve_cn_propagator(sp.tau, &ops.apply_g(&b).unwrap()).unwrap().scaled(-0.5 * sp.tau);
    let b_w = inner_product(&b, &w).unwrap();
    let b_u0 = inner_product(&b, &u0.add_scaled(-1.0, &state.phi).unwrap()).unwrap();
    // r - rⁿ = ½(b, u0 + (r + rⁿ) w - φⁿ)
    let r = (state.r + 0.5 * b_u0 + 0.5 * state.r * b_w) / (1.0 - 0.5 * b_w);
    (u0.add_scaled(r + state.r, &w).unwrap(), r)
}

/// `h` with the line energy `E_N[φⁿ] + d + e1 r`, a quadratic in `r`.
pub fn quadratic_problem(
    r_prev: f64,
    a: f64,
    b: f64,
    d: f64,
    e1: f64,
) -> ScalarEquation<impl Fn(f64) -> (f64, f64) + Clone> {
    ScalarEquation {
        scheme: Scheme::BackwardEuler,
        r_prev,
        sqrt_ec: r_prev,
        a,
        b,
        en_prev: 0.0,
        line: move |r: f64| (d + e1 * r, e1),
    }
}

/// Smallest `λ ∈ [0, 1]` where the quadratic's discriminant becomes
/// non-negative, from the discriminant's own quadratic in `λ`.
pub fn threshold_oracle(r_prev: f64, a: f64, b: f64, d: f64, e1: f64) -> f64 {
    // c1(λ) = -(2 r λ + B) + (1 - λ) e1 = u + v λ, c2 = 2λ - A, c0 = (1 - λ) d
    let (u, v) = (e1 - b, -2.0 * r_prev - e1);
    // D(λ) = (u + vλ)² - 4 d (2λ - A)(1 - λ)
    let k2 = v * v + 8.0 * d;
    let k1 = 2.0 * u * v - 4.0 * d * (2.0 + a);
    let k0 = u * u + 4.0 * d * a;
    let disc = (k1 * k1 - 4.0 * k2 * k0).sqrt();
    let roots = [(-k1 - disc) / (2.0 * k2), (-k1 + disc) / (2.0 * k2)];
    roots.into_iter().filter(|l| (0.0..=1.0).contains(l)).fold(f64::INFINITY, f64::min)
}

/// Tail `(aφ + b)e^{-φ} + c` solved from value, slope and curvature
/// matching at `δ`, by Cramer's rule on the 3×3 system in `(a, b, c)`.
pub fn solved_tail(gamma: f64, d: f64) -> (f64, f64, f64) {
    let g1 = 1.0 + gamma;
    let f0 = 0.25 * (d * d - g1).powi(2);
    let f1 = (d * d - g1) * d;
    let f2 = 3.0 * d * d - g1;
    let e = (-d).exp();
    // value: (a d + b) e + c, slope: (a - a d - b) e, curvature: (a d + b - 2a) e
    let m = [[d * e, e, 1.0], [(1.0 - d) * e, -e, 0.0], [(d - 2.0) * e, e, 0.0]];
    let rhs = [f0, f1, f2];
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d0 = det(m);
    let col = |k: usize| {
        let mut mk = m;
        for i in 0..3 {
            mk[i][k] = rhs[i];
        }
        det(mk) / d0
    };
    (col(0), col(1), col(2))
}

//! The per-step nonlinear scalar equation for the auxiliary variable `r`.
//!
//! After the two elliptic solves `φⁿ⁺¹ = p + r q`, the weighted update
//! leaves one scalar unknown. Writing `S = √(E_N + C)`, `A = (H, q)/S` and
//! `B = (H, p - φⁿ)/S`, the residual is
//!
//! ```text
//! BE: h(r, λ) = (2λ - A) r² - (2 rⁿ λ + B) r + (1 - λ)(E_N[p + r q] - E_N[φⁿ])
//! CN: h(r, λ) = λ(r + rⁿ)(r - rⁿ) - ½(r + rⁿ)(A r + B) + (1 - λ)(E_N[p + r q] - E_N[φⁿ])
//! ```
//!
//! At `λ = 1` both collapse to a quadratic with the explicit nontrivial root
//! `(2rⁿ + B)/(2 - A)`. For `λ < 1` a root may not exist; [`find_lambda_min`]
//! bisects for the smallest weight that admits one.

use alloc::vec::Vec;

use crate::error::{EquationState, Error, Result};
use crate::grid::{check_same, dot, RealField};
use crate::potential::{nonlinear_energy, PotentialParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    BackwardEuler,
    CrankNicolson,
}

/// `r ↦ E_N[p + r q] - E_N[φⁿ]` together with its slope in `r`.
///
/// Working with the change rather than the energy itself keeps `h`
/// accurate when the step is small and both energies nearly agree.
pub trait LineEnergy {
    fn eval(&self, r: f64) -> (f64, f64);

    /// Coefficients `e0..e4` with `eval(r).0 = Σ e_k r^k`, and the radius
    /// `ρ` such that the expansion is exact for `|r| ≤ ρ`.
    fn quartic(&self) -> Option<([f64; 5], f64)> {
        None
    }
}

/// Line energy through two grid functions `p`, `q`, measured from `φⁿ`.
///
/// While `p + r q` stays inside `[-δ, δ]` the truncated potential is the
/// plain quartic, so the energy is a degree-4 polynomial in `r` whose
/// coefficients are field moments. Evaluation switches to that polynomial
/// whenever it is exact.
#[derive(Debug, Clone)]
pub struct FieldLineEnergy {
    base: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    weight: f64,
    params: PotentialParams,
    moments: [f64; 5],
    radius: f64,
    fast_path: bool,
}

/// `F_δ(x) - F_δ(y)`, factored on the quartic branch so that nearby
/// arguments do not cancel.
fn potential_gap(params: &PotentialParams, x: f64, y: f64) -> f64 {
    let d = params.delta();
    if x.abs() <= d && y.abs() <= d {
        0.25 * (x - y) * (x + y) * (x * x + y * y - 2.0 * (1.0 + params.gamma()))
    } else {
        params.f(x) - params.f(y)
    }
}

impl FieldLineEnergy {
    pub fn new(base: &RealField, p: &RealField, q: &RealField, params: &PotentialParams) -> Result<Self> {
        check_same(p, q)?;
        check_same(base, p)?;
        let delta = params.delta();
        let shift = 1.0 + params.gamma();
        let mut moments = [0.0; 5];
        let mut radius = f64::INFINITY;
        for ((&pi, &qi), &bi) in p.values().iter().zip(q.values()).zip(base.values()) {
            let s = pi * pi - shift;
            let q2 = qi * qi;
            moments[0] += 4.0 * potential_gap(params, pi, bi);
            moments[1] += 4.0 * pi * qi * s;
            moments[2] += 4.0 * pi * pi * q2 + 2.0 * s * q2;
            moments[3] += 4.0 * pi * qi * q2;
            moments[4] += q2 * q2;
            let slack = delta - pi.abs();
            if slack < 0.0 {
                radius = -1.0;
            } else if qi != 0.0 {
                radius = radius.min(slack / qi.abs());
            }
        }
        let weight = p.grid().cell_volume();
        moments.iter_mut().for_each(|m| *m *= 0.25 * weight);
        Ok(Self {
            base: base.values().to_vec(),
            p: p.values().to_vec(),
            q: q.values().to_vec(),
            weight,
            params: *params,
            moments,
            radius,
            fast_path: true,
        })
    }

    /// Always evaluate by summing over the grid.
    pub fn without_fast_path(mut self) -> Self {
        self.fast_path = false;
        self
    }

    pub fn eval_direct(&self, r: f64) -> (f64, f64) {
        let (mut e, mut de) = (0.0, 0.0);
        for ((&pi, &qi), &bi) in self.p.iter().zip(&self.q).zip(&self.base) {
            let v = pi + r * qi;
            e += potential_gap(&self.params, v, bi);
            de += self.params.df(v) * qi;
        }
        (self.weight * e, self.weight * de)
    }
}

impl LineEnergy for FieldLineEnergy {
    fn eval(&self, r: f64) -> (f64, f64) {
        if self.fast_path && r.abs() <= self.radius {
            let m = &self.moments;
            let e = m[0] + r * (m[1] + r * (m[2] + r * (m[3] + r * m[4])));
            let de = m[1] + r * (2.0 * m[2] + r * (3.0 * m[3] + r * 4.0 * m[4]));
            (e, de)
        } else {
            self.eval_direct(r)
        }
    }

    fn quartic(&self) -> Option<([f64; 5], f64)> {
        (self.radius >= 0.0).then_some((self.moments, self.radius))
    }
}

impl<F: Fn(f64) -> (f64, f64)> LineEnergy for F {
    fn eval(&self, r: f64) -> (f64, f64) {
        self(r)
    }
}

/// The data defining `h(r, λ)` for one time step.
#[derive(Debug, Clone)]
pub struct ScalarEquation<E = FieldLineEnergy> {
    pub scheme: Scheme,
    /// `rⁿ`
    pub r_prev: f64,
    /// `√(E_N + C)` at `φⁿ` (BE) or at the predictor `φ*` (CN).
    pub sqrt_ec: f64,
    /// `(H, q)/S`
    pub a: f64,
    /// `(H, p - φⁿ)/S`
    pub b: f64,
    /// `E_N[φⁿ]`
    pub en_prev: f64,
    pub line: E,
}

/// Builds the backward-Euler equation from `φⁿ` and the solved `p`, `q`.
pub fn build_equation_be(
    phi_n: &RealField,
    r_n: f64,
    p: &RealField,
    q: &RealField,
    params: &PotentialParams,
) -> Result<ScalarEquation> {
    let en = nonlinear_energy(phi_n, params);
    let sqrt_ec = sav_radical(en, params)?;
    let h = phi_n.values().iter().map(|&v| params.df(v)).collect::<Vec<_>>();
    assemble(Scheme::BackwardEuler, phi_n, r_n, p, q, &h, sqrt_ec, en, params)
}

/// Builds the Crank–Nicolson equation; `H` and `S` come from the predictor.
pub fn build_equation_cn(
    phi_n: &RealField,
    phi_star: &RealField,
    r_n: f64,
    p_star: &RealField,
    q_star: &RealField,
    params: &PotentialParams,
) -> Result<ScalarEquation> {
    check_same(phi_n, phi_star)?;
    let sqrt_ec = sav_radical(nonlinear_energy(phi_star, params), params)?;
    let h = phi_star.values().iter().map(|&v| params.df(v)).collect::<Vec<_>>();
    let en = nonlinear_energy(phi_n, params);
    assemble(Scheme::CrankNicolson, phi_n, r_n, p_star, q_star, &h, sqrt_ec, en, params)
}

/// Shared constructor once `H`, `S` and `E_N[φⁿ]` are known.
#[allow(clippy::too_many_arguments)]
pub(crate) fn assemble(
    scheme: Scheme,
    phi_n: &RealField,
    r_n: f64,
    p: &RealField,
    q: &RealField,
    h: &[f64],
    sqrt_ec: f64,
    en_prev: f64,
    params: &PotentialParams,
) -> Result<ScalarEquation> {
    let (a, b) = coupling_coefficients(h, phi_n, p, q, sqrt_ec)?;
    Ok(ScalarEquation {
        scheme,
        r_prev: r_n,
        sqrt_ec,
        a,
        b,
        en_prev,
        line: FieldLineEnergy::new(phi_n, p, q, params)?,
    })
}

/// `√(E_N + C)`, rejecting a non-positive radicand.
pub fn sav_radical(en: f64, params: &PotentialParams) -> Result<f64> {
    let radicand = en + params.shift();
    if !(radicand > 0.0) {
        return Err(Error::NonPositiveRadicand(radicand));
    }
    Ok(libm::sqrt(radicand))
}

fn coupling_coefficients(
    h: &[f64],
    phi_n: &RealField,
    p: &RealField,
    q: &RealField,
    sqrt_ec: f64,
) -> Result<(f64, f64)> {
    check_same(p, q)?;
    check_same(phi_n, p)?;
    let w = p.grid().cell_volume();
    let a = w * dot(h, q.values()) / sqrt_ec;
    let b = w
        * h.iter()
            .zip(p.values().iter().zip(phi_n.values()))
            .map(|(hi, (pi, fi))| hi * (pi - fi))
            .sum::<f64>()
        / sqrt_ec;
    Ok((a, b))
}

impl<E: LineEnergy> ScalarEquation<E> {
    /// `h(r, λ)` and `∂h/∂r`.
    pub fn eval_with_slope(&self, r: f64, lambda: f64) -> (f64, f64) {
        let (e, de) = self.line.eval(r);
        let nonlinear = (1.0 - lambda) * e;
        let dnonlinear = (1.0 - lambda) * de;
        let rp = self.r_prev;
        match self.scheme {
            Scheme::BackwardEuler => {
                let c2 = 2.0 * lambda - self.a;
                let c1 = 2.0 * rp * lambda + self.b;
                (c2 * r * r - c1 * r + nonlinear, 2.0 * c2 * r - c1 + dnonlinear)
            }
            Scheme::CrankNicolson => {
                let h = lambda * (r + rp) * (r - rp) - 0.5 * (r + rp) * (self.a * r + self.b)
                    + nonlinear;
                let dh = 2.0 * lambda * r - 0.5 * (2.0 * self.a * r + self.b + self.a * rp)
                    + dnonlinear;
                (h, dh)
            }
        }
    }

    pub fn eval_h(&self, r: f64, lambda: f64) -> f64 {
        self.eval_with_slope(r, lambda).0
    }

    /// Nontrivial root at `λ = 1`: `(2rⁿ + B)/(2 - A)` for both schemes.
    pub fn closed_form_root(&self) -> f64 {
        (2.0 * self.r_prev + self.b) / (2.0 - self.a)
    }

    /// Coefficients `c0..c4` of `h(·, λ)` when the line energy is an exact
    /// quartic on the whole search interval `[-R, R]`.
    pub fn quartic_coefficients(&self, lambda: f64, opts: &RootOptions) -> Option<[f64; 5]> {
        let (e, radius) = self.line.quartic()?;
        if radius < self.bracket_radius(opts) {
            return None;
        }
        Some(self.quartic_from_moments(&e, lambda))
    }

    fn quartic_from_moments(&self, e: &[f64; 5], lambda: f64) -> [f64; 5] {
        let w = 1.0 - lambda;
        let rp = self.r_prev;
        let (a, b) = (self.a, self.b);
        match self.scheme {
            Scheme::BackwardEuler => [
                w * e[0],
                -(2.0 * rp * lambda + b) + w * e[1],
                2.0 * lambda - a + w * e[2],
                w * e[3],
                w * e[4],
            ],
            Scheme::CrankNicolson => [
                -lambda * rp * rp - 0.5 * b * rp + w * e[0],
                -0.5 * (b + a * rp) + w * e[1],
                lambda - 0.5 * a + w * e[2],
                w * e[3],
                w * e[4],
            ],
        }
    }

    pub fn bracket_radius(&self, opts: &RootOptions) -> f64 {
        opts.bracket_radius_factor * self.r_prev.abs().max(self.sqrt_ec)
    }

    pub fn state(&self) -> EquationState {
        EquationState {
            scheme: self.scheme,
            r_prev: self.r_prev,
            sqrt_ec: self.sqrt_ec,
            a: self.a,
            b: self.b,
            en_prev: self.en_prev,
        }
    }
}

/// Free-function form of [`ScalarEquation::eval_h`].
pub fn eval_h<E: LineEnergy>(eq: &ScalarEquation<E>, r: f64, lambda: f64) -> f64 {
    eq.eval_h(r, lambda)
}

/// Free-function form of [`ScalarEquation::quartic_coefficients`]; `None`
/// when the untruncated-zone condition fails on the search interval.
pub fn quartic_coefficients<E: LineEnergy>(
    eq: &ScalarEquation<E>,
    lambda: f64,
    opts: &RootOptions,
) -> Option<[f64; 5]> {
    eq.quartic_coefficients(lambda, opts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Residual tolerance relative to `max(1, |E_N[φⁿ]|)`.
    pub newton_rtol: f64,
    pub max_newton_iters: u32,
    pub bracket_samples: usize,
    /// The search interval is `[-R, R]`, `R = factor · max(|rⁿ|, S)`.
    pub bracket_radius_factor: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            newton_rtol: 1e-12,
            max_newton_iters: 50,
            bracket_samples: 256,
            bracket_radius_factor: 4.0,
        }
    }
}

impl RootOptions {
    pub fn tolerance<E>(&self, eq: &ScalarEquation<E>) -> f64 {
        self.newton_rtol * eq.en_prev.abs().max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootStatus {
    Solved,
    Unsolvable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootMethod {
    Newton,
    Bracket,
    ClosedForm,
    Quartic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult {
    pub status: RootStatus,
    /// Meaningful only when solved.
    pub r: f64,
    pub iterations: u32,
    pub method: RootMethod,
}

impl RootResult {
    pub fn is_solved(&self) -> bool {
        self.status == RootStatus::Solved
    }
}

/// Solves `h(r, λ) = 0`.
///
/// At `λ = 1` the quadratic's nontrivial root is returned directly.
/// Otherwise Newton from `S = √(E_N + C)` first. If it stalls, diverges or lands on
/// the trivial root, every root in `[-R, R]` is enumerated (exactly via the
/// quartic when it applies, otherwise by a sign-change scan plus
/// bisection) and the nontrivial one closest to `S` is returned.
pub fn solve_r<E: LineEnergy>(eq: &ScalarEquation<E>, lambda: f64, opts: &RootOptions) -> RootResult {
    if lambda == 1.0 {
        let r = eq.closed_form_root();
        if r.is_finite() {
            return RootResult { status: RootStatus::Solved, r, iterations: 0, method: RootMethod::ClosedForm };
        }
    }
    let tol = opts.tolerance(eq);
    let trivial = |r: f64| r.abs() <= 1e-10 * eq.sqrt_ec;

    let newton_root = newton(eq, lambda, eq.sqrt_ec, tol, opts.max_newton_iters);
    if let Some((r, iters)) = newton_root {
        if !trivial(r) {
            return RootResult { status: RootStatus::Solved, r, iterations: iters, method: RootMethod::Newton };
        }
    }

    let radius = eq.bracket_radius(opts);
    let (mut roots, method) = match eq.quartic_coefficients(lambda, opts) {
        Some(c) => (polynomial_roots(&c, -radius, radius, tol), RootMethod::Quartic),
        None => (scan_roots(eq, lambda, radius, opts.bracket_samples, tol), RootMethod::Bracket),
    };
    let iterations = newton_root.map_or(opts.max_newton_iters, |(_, it)| it);
    if let Some((r, _)) = newton_root {
        roots.push(r);
    }

    let pick = roots
        .iter()
        .copied()
        .filter(|&r| !trivial(r))
        .min_by(|x, y| (x - eq.sqrt_ec).abs().total_cmp(&(y - eq.sqrt_ec).abs()))
        .or_else(|| roots.first().copied());
    match pick {
        Some(r) => {
            let r = polish(eq, lambda, r);
            RootResult { status: RootStatus::Solved, r, iterations, method }
        }
        None => RootResult { status: RootStatus::Unsolvable, r: f64::NAN, iterations, method },
    }
}

fn newton<E: LineEnergy>(
    eq: &ScalarEquation<E>,
    lambda: f64,
    guess: f64,
    tol: f64,
    max_iters: u32,
) -> Option<(f64, u32)> {
    let limit = 1e8 * eq.sqrt_ec.max(eq.r_prev.abs()).max(1.0);
    let mut r = guess;
    for it in 0..=max_iters {
        let (h, dh) = eq.eval_with_slope(r, lambda);
        if !h.is_finite() {
            return None;
        }
        if h.abs() <= tol {
            return Some((polish(eq, lambda, r), it));
        }
        if it == max_iters || dh == 0.0 || !dh.is_finite() {
            return None;
        }
        r -= h / dh;
        if !r.is_finite() || r.abs() > limit {
            return None;
        }
    }
    None
}

/// Newton steps past the residual tolerance until `r` settles. A step is
/// kept only if it is bounded and lowers the residual, so an ill-conditioned
/// root is refined without jumping to a neighbouring one.
fn polish<E: LineEnergy>(eq: &ScalarEquation<E>, lambda: f64, mut r: f64) -> f64 {
    let scale = r.abs().max(eq.sqrt_ec);
    let (mut h, mut dh) = eq.eval_with_slope(r, lambda);
    for _ in 0..8 {
        if dh == 0.0 || !dh.is_finite() || h == 0.0 {
            break;
        }
        let next = r - h / dh;
        if !next.is_finite() || (next - r).abs() > 1e-3 * scale {
            break;
        }
        let (h_next, dh_next) = eq.eval_with_slope(next, lambda);
        if !(h_next.abs() < h.abs()) {
            break;
        }
        let settled = (next - r).abs() <= 4.0 * f64::EPSILON * scale;
        (r, h, dh) = (next, h_next, dh_next);
        if settled {
            break;
        }
    }
    r
}

fn scan_roots<E: LineEnergy>(
    eq: &ScalarEquation<E>,
    lambda: f64,
    radius: f64,
    samples: usize,
    tol: f64,
) -> Vec<f64> {
    let samples = samples.max(2);
    let f = |r: f64| eq.eval_h(r, lambda);
    let xs: Vec<f64> = (0..samples)
        .map(|i| -radius + 2.0 * radius * i as f64 / (samples - 1) as f64)
        .collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..samples {
        if fs[i].abs() <= tol {
            roots.push(xs[i]);
        } else if i + 1 < samples && fs[i + 1].abs() > tol && (fs[i] < 0.0) != (fs[i + 1] < 0.0) {
            roots.push(bisect(&f, xs[i], xs[i + 1], fs[i], tol));
        }
    }
    roots
}

/// Bisection on a sign change until `|f| ≤ tol` or the bracket collapses.
fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm.abs() <= tol {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub(crate) fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}

/// All real roots of `Σ c_k x^k` in `[lo, hi]`, found by isolating them
/// between consecutive critical points (where the polynomial is monotone).
/// Critical points with `|P| ≤ tol` count as tangential roots.
pub fn polynomial_roots(c: &[f64], lo: f64, hi: f64, tol: f64) -> Vec<f64> {
    let mut deg = c.len();
    while deg > 0 && c[deg - 1] == 0.0 {
        deg -= 1;
    }
    let c = &c[..deg];
    let mut roots = Vec::new();
    match deg {
        0 | 1 => {}
        2 => {
            let x = -c[0] / c[1];
            if (lo..=hi).contains(&x) {
                roots.push(x);
            }
        }
        _ => {
            let deriv: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, &ck)| k as f64 * ck).collect();
            let crit = polynomial_roots(&deriv, lo, hi, 0.0);
            let mut knots = Vec::with_capacity(crit.len() + 2);
            knots.push(lo);
            knots.extend(crit.iter().copied().filter(|&x| x > lo && x < hi));
            knots.push(hi);
            let f = |x: f64| poly_eval(c, x);
            for w in knots.windows(2) {
                let (x0, x1) = (w[0], w[1]);
                let (f0, f1) = (f(x0), f(x1));
                if f0.abs() <= tol {
                    roots.push(x0);
                } else if f1.abs() > tol && (f0 < 0.0) != (f1 < 0.0) {
                    roots.push(bisect(&f, x0, x1, f0, tol));
                }
            }
            let last = *knots.last().unwrap();
            if f(last).abs() <= tol {
                roots.push(last);
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + a.abs()));
    roots
}

/// Smallest weight in `[0, 1]` whose equation has a root, with that root.
///
/// `λ = 0` is tried first and returned exactly when solvable. Otherwise
/// bisection on `[0, 1]` keeps the upper end solvable and stops once the
/// bracket is narrower than `tol_lambda`.
pub fn find_lambda_min<E: LineEnergy>(
    eq: &ScalarEquation<E>,
    tol_lambda: f64,
    opts: &RootOptions,
) -> Result<(f64, RootResult, u32)> {
    if !(tol_lambda > 0.0) {
        return Err(Error::Config(alloc::format!("tol_lambda must be positive, got {tol_lambda}")));
    }
    let at_zero = solve_r(eq, 0.0, opts);
    let mut probes = 1;
    if at_zero.is_solved() {
        return Ok((0.0, at_zero, probes));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best: Option<RootResult> = None;
    while hi - lo >= tol_lambda {
        let mid = 0.5 * (lo + hi);
        let res = solve_r(eq, mid, opts);
        probes += 1;
        if res.is_solved() {
            hi = mid;
            best = Some(res);
        } else {
            lo = mid;
        }
    }
    match best {
        Some(res) => Ok((hi, res, probes)),
        None => {
            let res = solve_r(eq, 1.0, opts);
            probes += 1;
            if res.is_solved() {
                Ok((1.0, res, probes))
            } else {
                Err(Error::NoAdmissibleWeight { state: eq.state() })
            }
        }
    }
}

//! Initial phase fields.
//!
//! Interface profiles are `tanh(d / (√2 ε))` where `d` is the signed
//! distance to a closed curve or surface, negative inside. The phase is
//! therefore close to `-1` inside the shape and `+1` outside.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::grid::{Grid, RealField};

pub const DEFAULT_SAMPLES: usize = 4096;
pub const MIN_SAMPLES: usize = 256;

/// Parametric closed curves, `θ ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curve {
    /// `(cos θ, 2 sin θ - 1.9 sin³θ)`
    II,
    /// The astroid `(cos³θ, sin³θ)`.
    III,
    /// `(0.5 cos θ, 0.25 sin θ + 0.5 sin(cos θ) + 0.5(0.2 + sin θ sin²3θ) sin θ)`
    IV,
}

impl Curve {
    pub fn point(self, theta: f64) -> [f64; 2] {
        let (s, c) = (libm::sin(theta), libm::cos(theta));
        match self {
            Curve::II => [c, 2.0 * s - 1.9 * s * s * s],
            Curve::III => [
                0.25 * (3.0 * c + libm::cos(3.0 * theta)),
                0.25 * (3.0 * s - libm::sin(3.0 * theta)),
            ],
            Curve::IV => {
                let s3 = libm::sin(3.0 * theta);
                [0.5 * c, 0.25 * s + 0.5 * libm::sin(c) + 0.5 * (0.2 + s * s3 * s3) * s]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShapeKind {
    /// `amplitude · sin x · cos y`; not an interface profile.
    Sinusoidal { amplitude: f64 },
    /// Union of `[-0.75, 0.75] × [-0.25, 0.25]` and its 90° rotation.
    Cross,
    Parametric(Curve),
    /// Torus around the `z` axis.
    Torus { major: f64, minor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedDistanceSpec {
    pub kind: ShapeKind,
    /// Samples per parametric curve.
    pub sample_count: usize,
}

impl SignedDistanceSpec {
    pub fn new(kind: ShapeKind) -> Result<Self> {
        Self::with_samples(kind, DEFAULT_SAMPLES)
    }

    pub fn with_samples(kind: ShapeKind, sample_count: usize) -> Result<Self> {
        if sample_count < MIN_SAMPLES {
            return Err(Error::Config(alloc::format!(
                "sample_count must be at least {MIN_SAMPLES}, got {sample_count}"
            )));
        }
        if let ShapeKind::Torus { major, minor } = kind {
            if !(minor > 0.0 && major > minor && major.is_finite()) {
                return Err(Error::Config(alloc::format!(
                    "torus radii must satisfy R > r > 0, got R = {major}, r = {minor}"
                )));
            }
        }
        Ok(Self { kind, sample_count })
    }

    fn expected_dim(&self) -> usize {
        match self.kind {
            ShapeKind::Torus { .. } => 3,
            _ => 2,
        }
    }
}

const CROSS: [[f64; 2]; 12] = [
    [0.75, -0.25],
    [0.75, 0.25],
    [0.25, 0.25],
    [0.25, 0.75],
    [-0.25, 0.75],
    [-0.25, 0.25],
    [-0.75, 0.25],
    [-0.75, -0.25],
    [-0.25, -0.25],
    [-0.25, -0.75],
    [0.25, -0.75],
    [0.25, -0.25],
];

fn segment_distance2(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
    let (wx, wy) = (p[0] - a[0], p[1] - a[1]);
    let len2 = ex * ex + ey * ey;
    let t = if len2 > 0.0 { ((wx * ex + wy * ey) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let (dx, dy) = (wx - t * ex, wy - t * ey);
    dx * dx + dy * dy
}

/// Even–odd rule against a closed polygon.
fn inside(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    let mut odd = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                odd = !odd;
            }
        }
        j = i;
    }
    odd
}

fn polygon_signed_distance(poly: &[[f64; 2]], p: [f64; 2]) -> f64 {
    let mut d2 = f64::INFINITY;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        d2 = d2.min(segment_distance2(p, poly[j], poly[i]));
        j = i;
    }
    let d = libm::sqrt(d2);
    if inside(poly, p) {
        -d
    } else {
        d
    }
}

/// A parametric curve sampled at uniform `θ`.
#[derive(Debug, Clone)]
pub struct SampledCurve {
    curve: Curve,
    samples: Vec<[f64; 2]>,
    dtheta: f64,
}

impl SampledCurve {
    pub fn new(curve: Curve, sample_count: usize) -> Self {
        let dtheta = 2.0 * PI / sample_count as f64;
        let samples = (0..sample_count).map(|i| curve.point(i as f64 * dtheta)).collect();
        Self { curve, samples, dtheta }
    }

    pub fn samples(&self) -> &[[f64; 2]] {
        &self.samples
    }

    /// Nearest sample, then Newton on `|c(θ) - p|²` with difference
    /// derivatives, confined to the neighbouring sample interval.
    pub fn signed_distance(&self, p: [f64; 2]) -> f64 {
        let dist2 = |q: [f64; 2]| (q[0] - p[0]) * (q[0] - p[0]) + (q[1] - p[1]) * (q[1] - p[1]);
        let (best, mut d2) = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, &q)| (i, dist2(q)))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });

        let theta0 = best as f64 * self.dtheta;
        let f = |t: f64| dist2(self.curve.point(t));
        let hd = 1e-4 * self.dtheta;
        let (fm, f0, fp) = (f(theta0 - hd), d2, f(theta0 + hd));
        let slope = (fp - fm) / (2.0 * hd);
        let curv = (fp - 2.0 * f0 + fm) / (hd * hd);
        if curv > 0.0 {
            let step = (-slope / curv).clamp(-self.dtheta, self.dtheta);
            let refined = f(theta0 + step);
            if refined < d2 {
                d2 = refined;
            }
        }
        let d = libm::sqrt(d2);
        if inside(&self.samples, p) {
            -d
        } else {
            d
        }
    }
}

fn torus_distance(major: f64, minor: f64, x: [f64; 3]) -> f64 {
    let rho = libm::sqrt(x[0] * x[0] + x[1] * x[1]) - major;
    libm::sqrt(rho * rho + x[2] * x[2]) - minor
}

/// Signed distance from `point` to the boundary described by `spec`.
///
/// Builds the curve sampling on every call; use [`tanh_profile`] for
/// whole grids.
pub fn parametric_signed_distance(spec: &SignedDistanceSpec, point: [f64; 3]) -> Result<f64> {
    match spec.kind {
        ShapeKind::Cross => Ok(polygon_signed_distance(&CROSS, [point[0], point[1]])),
        ShapeKind::Parametric(c) => {
            Ok(SampledCurve::new(c, spec.sample_count).signed_distance([point[0], point[1]]))
        }
        ShapeKind::Torus { major, minor } => Ok(torus_distance(major, minor, point)),
        ShapeKind::Sinusoidal { .. } => Err(Error::Unsupported("sinusoidal field has no interface")),
    }
}

/// `amplitude · sin x · cos y` on a 2D grid.
pub fn sinusoidal_ic(grid: Grid, amplitude: f64) -> Result<RealField> {
    if grid.dim() != 2 {
        return Err(Error::Dimension { expected: 2, got: grid.dim() });
    }
    Ok(RealField::from_fn(grid, |x| amplitude * libm::sin(x[0]) * libm::cos(x[1])))
}

/// `tanh(d(x) / (√2 ε))` with `d` the signed distance of `spec`.
pub fn tanh_profile(grid: Grid, spec: &SignedDistanceSpec, eps: f64) -> Result<RealField> {
    if !(eps > 0.0) {
        return Err(Error::Config(alloc::format!("eps must be positive, got {eps}")));
    }
    if grid.dim() != spec.expected_dim() {
        return Err(Error::Dimension { expected: spec.expected_dim(), got: grid.dim() });
    }
    let scale = 1.0 / (SQRT_2 * eps);
    let profile = |d: f64| libm::tanh(d * scale);
    match spec.kind {
        ShapeKind::Sinusoidal { .. } => Err(Error::Unsupported("sinusoidal field has no interface")),
        ShapeKind::Cross => Ok(RealField::from_fn(grid, |x| {
            profile(polygon_signed_distance(&CROSS, [x[0], x[1]]))
        })),
        ShapeKind::Parametric(c) => {
            let sampled = SampledCurve::new(c, spec.sample_count);
            Ok(RealField::from_fn(grid, |x| profile(sampled.signed_distance([x[0], x[1]]))))
        }
        ShapeKind::Torus { major, minor } => {
            Ok(RealField::from_fn(grid, |x| profile(torus_distance(major, minor, x))))
        }
    }
}

/// Either the sinusoidal field or the interface profile of `spec`.
pub fn initial_field(grid: Grid, spec: &SignedDistanceSpec, eps: f64) -> Result<RealField> {
    match spec.kind {
        ShapeKind::Sinusoidal { amplitude } => sinusoidal_ic(grid, amplitude),
        _ => tanh_profile(grid, spec, eps),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sinusoid_values() {
        let g = Grid::square(8, 0.0, 2.0 * PI).unwrap();
        let f = sinusoidal_ic(g, 0.05).unwrap();
        assert_relative_eq!(f.values()[g.index([2, 0, 0])], 0.05, max_relative = 1e-15);
        assert_eq!(f.values()[g.index([0, 3, 0])], 0.0);
        assert!(f.integrate().abs() < 1e-15);
        assert!(sinusoidal_ic(Grid::cube(4, 0.0, 1.0).unwrap(), 0.05).is_err());
    }

    #[test]
    fn torus_origin() {
        let spec = SignedDistanceSpec::new(ShapeKind::Torus { major: 0.6, minor: 0.3 }).unwrap();
        let d = parametric_signed_distance(&spec, [0.0; 3]).unwrap();
        assert_relative_eq!(d, 0.3, max_relative = 1e-15);
        assert!(SignedDistanceSpec::new(ShapeKind::Torus { major: 0.3, minor: 0.6 }).is_err());
    }

    #[test]
    fn cross_distances() {
        let spec = SignedDistanceSpec::new(ShapeKind::Cross).unwrap();
        let d = |x: f64, y: f64| parametric_signed_distance(&spec, [x, y, 0.0]).unwrap();
        // the concave corners are the nearest boundary points from the centre
        assert_relative_eq!(d(0.0, 0.0), -libm::sqrt(0.125), max_relative = 1e-15);
        assert_relative_eq!(d(0.6, 0.0), -0.15, max_relative = 1e-14);
        assert_relative_eq!(d(1.0, 0.0), 0.25, max_relative = 1e-14);
        assert_relative_eq!(d(0.5, 0.5), 0.25, max_relative = 1e-14);
        assert_relative_eq!(d(0.75, 0.75), 0.5, max_relative = 1e-14);
        assert_eq!(d(0.75, 0.1), 0.0);
    }

    #[test]
    fn curve_signs() {
        for (c, y) in [(Curve::II, 0.0), (Curve::III, 0.0), (Curve::IV, 0.5)] {
            let spec = SignedDistanceSpec::new(ShapeKind::Parametric(c)).unwrap();
            assert!(parametric_signed_distance(&spec, [0.0, y, 0.0]).unwrap() < 0.0, "{c:?}");
            assert!(parametric_signed_distance(&spec, [1.9, 1.9, 0.0]).unwrap() > 0.0, "{c:?}");
        }
    }

    #[test]
    fn astroid_on_curve() {
        let sampled = SampledCurve::new(Curve::III, DEFAULT_SAMPLES);
        for &q in sampled.samples().iter().step_by(97) {
            assert!(sampled.signed_distance(q).abs() < 1e-6);
        }
        let p = Curve::III.point(0.3);
        assert_relative_eq!(p[0], libm::pow(libm::cos(0.3), 3.0), max_relative = 1e-14);
    }

    #[test]
    fn profile_bounds() {
        let g = Grid::square(16, -2.0, 2.0).unwrap();
        let spec = SignedDistanceSpec::new(ShapeKind::Parametric(Curve::II)).unwrap();
        let f = tanh_profile(g, &spec, 0.1).unwrap();
        assert!(f.values().iter().all(|v| v.abs() < 1.0));
        let torus = SignedDistanceSpec::new(ShapeKind::Torus { major: 0.6, minor: 0.3 }).unwrap();
        assert!(tanh_profile(g, &torus, 0.1).is_err());
    }
}

//! Periodic uniform grids and real grid functions.
//!
//! Values are stored row-major with axis 0 (`x`) slowest:
//! `index = (i0 * n1 + i1) * n2 + i2`. Unused axes of a 2D grid have size 1.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Uniform periodic grid on `[lo, hi)` per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: [usize; 3],
    lo: [f64; 3],
    hi: [f64; 3],
}

impl Grid {
    /// `sizes` and `extents` must have the same length, 2 or 3.
    pub fn new(sizes: &[usize], extents: &[(f64, f64)]) -> Result<Self> {
        let dim = sizes.len();
        if !(dim == 2 || dim == 3) {
            return Err(Error::Config(format!("grid dimension must be 2 or 3, got {dim}")));
        }
        if extents.len() != dim {
            return Err(Error::Config(format!(
                "{} extents given for a {dim}-dimensional grid",
                extents.len()
            )));
        }
        let mut n = [1usize; 3];
        let mut lo = [0.0; 3];
        let mut hi = [1.0; 3];
        for axis in 0..dim {
            let (a, b) = extents[axis];
            if sizes[axis] < 4 || !sizes[axis].is_multiple_of(2) {
                return Err(Error::Config(format!(
                    "axis {axis}: size must be even and >= 4, got {}",
                    sizes[axis]
                )));
            }
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(Error::Config(format!("axis {axis}: invalid extent [{a}, {b})")));
            }
            n[axis] = sizes[axis];
            lo[axis] = a;
            hi[axis] = b;
        }
        Ok(Self { dim, n, lo, hi })
    }

    /// `n × n` grid on `[lo, hi)²`.
    pub fn square(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(&[n, n], &[(lo, hi), (lo, hi)])
    }

    /// `n × n × n` grid on `[lo, hi)³`.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(&[n, n, n], &[(lo, hi), (lo, hi), (lo, hi)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sizes of all three storage axes (trailing axes are 1 in 2D).
    pub fn shape(&self) -> [usize; 3] {
        self.n
    }

    pub fn n(&self, axis: usize) -> usize {
        self.n[axis]
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.lo[axis]
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.hi[axis]
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn h(&self, axis: usize) -> f64 {
        self.length(axis) / self.n[axis] as f64
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of a single point, `∏ h`.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.h(a)).product()
    }

    /// Measure of the domain, `∏ (hi - lo)`.
    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|a| self.length(a)).product()
    }

    pub fn index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.n[1] + i[1]) * self.n[2] + i[2]
    }

    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let i2 = idx % self.n[2];
        let rest = idx / self.n[2];
        [rest / self.n[1], rest % self.n[1], i2]
    }

    /// Physical coordinates of a point; unused axes report 0.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let m = self.multi_index(idx);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.lo[a] + m[a] as f64 * self.h(a);
        }
        x
    }
}

/// Real-valued grid function.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Grid,
    values: Vec<f64>,
}

impl RealField {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid, values }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_values_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &RealField) -> Result<Self> {
        check_same(self, other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + s * b).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    pub fn integrate(&self) -> f64 {
        integrate(self)
    }
}

pub(crate) fn check_same(f: &RealField, g: &RealField) -> Result<()> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Trapezoidal rule on a periodic uniform grid: `(∏h) Σ f`.
pub fn integrate(f: &RealField) -> f64 {
    f.grid.cell_volume() * f.values.iter().sum::<f64>()
}

/// Discrete `L²` inner product `∫ f g`.
pub fn inner_product(f: &RealField, g: &RealField) -> Result<f64> {
    check_same(f, g)?;
    Ok(f.grid.cell_volume() * dot(&f.values, &g.values))
}

pub fn norm_l2(f: &RealField) -> f64 {
    libm::sqrt(f.grid.cell_volume() * dot(&f.values, &f.values))
}

pub fn norm_linf(f: &RealField) -> f64 {
    f.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

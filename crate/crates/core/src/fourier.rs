//! Multidimensional discrete Fourier transforms over row-major arrays.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

/// Complex DFT over every axis of a row-major `[n0, n1, n2]` array.
///
/// `forward` is unnormalized (`X_k = Σ_j x_j e^{-2πi jk/n}`) and `inverse`
/// carries the full `1/N` factor, so `inverse ∘ forward` is the identity.
/// Implementations must be usable from several threads at once.
pub trait FourierBackend: Send + Sync {
    fn shape(&self) -> [usize; 3];
    fn forward(&self, data: &mut [Complex64]);
    fn inverse(&self, data: &mut [Complex64]);
}

/// Separable direct DFT, `O(N Σ n_axis)` per transform.
///
/// Slow but exact to roundoff and free of dependencies; meant for small
/// grids and as an independent reference for faster backends.
#[derive(Debug, Clone)]
pub struct DirectDft {
    shape: [usize; 3],
    twiddles: [Vec<Complex64>; 3],
}

impl DirectDft {
    pub fn new(shape: [usize; 3]) -> Self {
        let table = |n: usize| {
            (0..n)
                .map(|k| {
                    let angle = -2.0 * PI * k as f64 / n as f64;
                    Complex64::new(libm::cos(angle), libm::sin(angle))
                })
                .collect::<Vec<_>>()
        };
        Self { shape, twiddles: [table(shape[0]), table(shape[1]), table(shape[2])] }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.shape.iter().product::<usize>());
        for axis in 0..3 {
            let n = self.shape[axis];
            if n == 1 {
                continue;
            }
            let stride: usize = self.shape[axis + 1..].iter().product();
            let tw = &self.twiddles[axis];
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            for_each_line(self.shape, axis, |start| {
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[start + j * stride];
                }
                for (k, o) in out.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, v) in line.iter().enumerate() {
                        let w = tw[(j * k) % n];
                        acc += v * if inverse { w.conj() } else { w };
                    }
                    *o = acc;
                }
                for (k, o) in out.iter().enumerate() {
                    data[start + k * stride] = *o;
                }
            });
        }
        if inverse {
            let scale = 1.0 / data.len() as f64;
            data.iter_mut().for_each(|v| *v *= scale);
        }
    }
}

impl FourierBackend for DirectDft {
    fn shape(&self) -> [usize; 3] {
        self.shape
    }

    fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, true);
    }
}

/// Calls `f` with the flat offset of the first element of every 1D line
/// running along `axis`.
pub fn for_each_line(shape: [usize; 3], axis: usize, mut f: impl FnMut(usize)) {
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let block = shape[axis] * stride;
    for o in 0..outer {
        for s in 0..stride {
            f(o * block + s);
        }
    }
}

/// Signed mode index for position `i` of an `n`-point transform:
/// `0, 1, …, n/2, -(n/2 - 1), …, -1`.
pub fn mode_index(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_indices() {
        let m: Vec<i64> = (0..6).map(|i| mode_index(i, 6)).collect();
        assert_eq!(m, vec![0, 1, 2, 3, -2, -1]);
    }

    #[test]
    fn single_mode_lands_in_one_bin() {
        let shape = [8, 4, 1];
        let dft = DirectDft::new(shape);
        let mut data: Vec<Complex64> = (0..32)
            .map(|idx| {
                let (i0, i1) = (idx / 4, idx % 4);
                let angle = 2.0 * PI * (i0 as f64 * 3.0 / 8.0 + i1 as f64 / 4.0);
                Complex64::new(libm::cos(angle), libm::sin(angle))
            })
            .collect();
        dft.forward(&mut data);
        for (idx, v) in data.iter().enumerate() {
            let expected = if idx == 3 * 4 + 1 { 32.0 } else { 0.0 };
            assert!((v.re - expected).abs() < 1e-12 && v.im.abs() < 1e-12, "{idx}: {v}");
        }
    }

    #[test]
    fn round_trip() {
        let shape = [4, 6, 8];
        let dft = DirectDft::new(shape);
        let orig: Vec<Complex64> = (0..192)
            .map(|i| Complex64::new(libm::sin(i as f64 * 0.37), libm::cos(i as f64 * 1.3)))
            .collect();
        let mut data = orig.clone();
        dft.forward(&mut data);
        dft.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm_sqr() < 1e-26);
        }
    }
}

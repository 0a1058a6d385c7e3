//! Periodic grids with the unitary transform convention.
//!
//! Samples live at x_j = -L + j dx on [-L, L) with dx = 2L/N; wavenumbers
//! are k_q = pi f_q / L with f_q the signed DFT frequency. Multiplying raw
//! DFT output by (dx / sqrt(2 pi)) (-1)^q gives the values of the continuum
//! unitary transform at k_q, which keeps Parseval exact on the grid.

use crate::error::{DiracError, Result};
use ndarray::{Array3, Axis, Zip};
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_5;

/// Uniform periodic grid on [-L, L).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    n: usize,
    half_length: f64,
}

impl Grid1D {
    pub fn new(n: usize, half_length: f64) -> Result<Self> {
        if !half_length.is_finite() || half_length <= 0.0 {
            return Err(DiracError::Grid(format!(
                "half-length must be positive and finite, got {half_length}"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(DiracError::Grid(format!(
                "1d grids need a power-of-two point count of at least 8, got {n}"
            )));
        }
        Ok(Grid1D { n, half_length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        debug_assert!(j < self.n);
        -self.half_length + j as f64 * self.dx()
    }

    /// Signed DFT frequency of slot q.
    pub fn freq(&self, q: usize) -> i64 {
        debug_assert!(q < self.n);
        if q < self.n / 2 {
            q as i64
        } else {
            q as i64 - self.n as i64
        }
    }

    pub fn wavenumber(&self, q: usize) -> f64 {
        std::f64::consts::PI * self.freq(q) as f64 / self.half_length
    }

    pub fn sample<F: Fn(f64) -> C64>(&self, f: F) -> Vec<C64> {
        (0..self.n).map(|j| f(self.x(j))).collect()
    }

    /// dx * sum |v|^2: the exact L2 mass of the band-limited interpolant.
    pub fn norm_sqr(&self, values: &[C64]) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        self.dx() * values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// Values of the continuum unitary transform at `wavenumber(q)`.
    pub fn spectral_coefficients(&self, values: &[C64]) -> Vec<C64> {
        assert_eq!(values.len(), self.n);
        let mut buf = values.to_vec();
        fft_in_place(&mut buf, false);
        let pref = self.dx() / SQRT_TWO_PI;
        for (q, v) in buf.iter_mut().enumerate() {
            let sign = if q % 2 == 0 { pref } else { -pref };
            *v *= sign;
        }
        buf
    }

    /// Inverse of [`Grid1D::spectral_coefficients`].
    pub fn field_from_spectral(&self, coeffs: &[C64]) -> Vec<C64> {
        assert_eq!(coeffs.len(), self.n);
        let mut buf = coeffs.to_vec();
        let pref = SQRT_TWO_PI / self.dx();
        for (q, v) in buf.iter_mut().enumerate() {
            let sign = if q % 2 == 0 { pref } else { -pref };
            *v *= sign;
        }
        fft_in_place(&mut buf, true);
        buf
    }
}

/// Cubic periodic grid on [-L, L)^3 with a common axis resolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid3D {
    n: usize,
    half_length: f64,
}

impl Grid3D {
    pub fn new(n: usize, half_length: f64) -> Result<Self> {
        if !half_length.is_finite() || half_length <= 0.0 {
            return Err(DiracError::Grid(format!(
                "half-length must be positive and finite, got {half_length}"
            )));
        }
        // Even N keeps the (-1)^q spectral shift exact; odd radices are fine
        // for the transform itself.
        if n < 8 || n % 2 != 0 {
            return Err(DiracError::Grid(format!(
                "3d grids need an even per-axis point count of at least 8, got {n}"
            )));
        }
        Ok(Grid3D { n, half_length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        debug_assert!(j < self.n);
        -self.half_length + j as f64 * self.dx()
    }

    pub fn point(&self, j: [usize; 3]) -> [f64; 3] {
        [self.x(j[0]), self.x(j[1]), self.x(j[2])]
    }

    pub fn freq(&self, q: usize) -> i64 {
        debug_assert!(q < self.n);
        if q < self.n / 2 {
            q as i64
        } else {
            q as i64 - self.n as i64
        }
    }

    pub fn wavenumber(&self, q: usize) -> f64 {
        std::f64::consts::PI * self.freq(q) as f64 / self.half_length
    }

    pub fn wavevector(&self, q: [usize; 3]) -> [f64; 3] {
        [
            self.wavenumber(q[0]),
            self.wavenumber(q[1]),
            self.wavenumber(q[2]),
        ]
    }

    pub fn sample<F: Fn([f64; 3]) -> C64>(&self, f: F) -> Array3<C64> {
        let n = self.n;
        Array3::from_shape_fn((n, n, n), |(a, b, c)| f(self.point([a, b, c])))
    }

    pub fn norm_sqr(&self, values: &Array3<C64>) -> f64 {
        self.dx().powi(3) * values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn spectral_coefficients(&self, values: &Array3<C64>) -> Array3<C64> {
        let mut buf = values.clone();
        fft3_in_place(&mut buf, false);
        let pref = (self.dx() / SQRT_TWO_PI).powi(3);
        for ((a, b, c), v) in buf.indexed_iter_mut() {
            let sign = if (a + b + c) % 2 == 0 { pref } else { -pref };
            *v *= sign;
        }
        buf
    }

    pub fn field_from_spectral(&self, coeffs: &Array3<C64>) -> Array3<C64> {
        let mut buf = coeffs.clone();
        let pref = (SQRT_TWO_PI / self.dx()).powi(3);
        for ((a, b, c), v) in buf.indexed_iter_mut() {
            let sign = if (a + b + c) % 2 == 0 { pref } else { -pref };
            *v *= sign;
        }
        fft3_in_place(&mut buf, true);
        buf
    }
}

/// In-place DFT; the inverse includes the 1/N scaling.
pub(crate) fn fft_in_place(buf: &mut [C64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(buf.len())
    } else {
        planner.plan_fft_forward(buf.len())
    };
    fft.process(buf);
    if inverse {
        let s = 1.0 / buf.len() as f64;
        for v in buf.iter_mut() {
            *v *= s;
        }
    }
}

/// In-place 3d DFT, one axis at a time; lanes transform independently.
pub(crate) fn fft3_in_place(a: &mut Array3<C64>, inverse: bool) {
    let n = a.shape()[0];
    debug_assert_eq!(a.shape(), [n, n, n]);
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    for axis in 0..3 {
        Zip::from(a.lanes_mut(Axis(axis))).par_for_each(|mut lane| {
            let mut buf: Vec<C64> = lane.iter().copied().collect();
            fft.process(&mut buf);
            for (dst, src) in lane.iter_mut().zip(buf.iter()) {
                *dst = *src;
            }
        });
    }
    if inverse {
        let s = 1.0 / (n as f64).powi(3);
        a.mapv_inplace(|v| v * s);
    }
}

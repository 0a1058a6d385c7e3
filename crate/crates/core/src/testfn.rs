//! Smooth observables used in distributional pairings: compactly supported
//! bumps and plateaus, Gaussians, and the constant function. Each carries a
//! closed-form or quadrature-backed Fourier transform where one exists.

use crate::error::{DiracError, Result};
use crate::quadrature::integrate_composite;
use num_complex::Complex64 as C64;

/// Radius beyond which a unit-height Gaussian of width w drops below 1e-12.
pub(crate) fn gaussian_decay_radius(width: f64) -> f64 {
    // e^{-r^2/(2w^2)} = 1e-12  =>  r = w sqrt(2 ln 1e12)
    width * (2.0 * 12.0 * std::f64::consts::LN_10).sqrt()
}

/// C-infinity step: 0 for t <= 0, 1 for t >= 1, strictly increasing between.
pub(crate) fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Smooth test function on the line.
#[derive(Clone, Debug)]
pub enum TestFunction1d {
    /// exp(-(x-center)^2 / (2 width^2)); peak value 1 at the center.
    Gaussian { center: f64, width: f64 },
    /// Compactly supported on [center-radius, center+radius], value 1 at the center.
    Bump { center: f64, radius: f64 },
    /// 1 on [center-inner, center+inner], 0 outside [center-outer, center+outer].
    Plateau { center: f64, inner: f64, outer: f64 },
    /// Constant 1 (pairs as total mass; has no pointwise transform).
    One,
}

impl TestFunction1d {
    pub fn gaussian(center: f64, width: f64) -> Result<Self> {
        if width <= 0.0 {
            return Err(DiracError::Config("test function width must be positive".into()));
        }
        Ok(TestFunction1d::Gaussian { center, width })
    }

    pub fn bump(center: f64, radius: f64) -> Result<Self> {
        if radius <= 0.0 {
            return Err(DiracError::Config("bump radius must be positive".into()));
        }
        Ok(TestFunction1d::Bump { center, radius })
    }

    pub fn plateau(center: f64, inner: f64, outer: f64) -> Result<Self> {
        if !(0.0 < inner && inner < outer) {
            return Err(DiracError::Config(
                "plateau radii must satisfy 0 < inner < outer".into(),
            ));
        }
        Ok(TestFunction1d::Plateau { center, inner, outer })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFunction1d::Gaussian { center, width } => {
                let u = (x - center) / width;
                (-0.5 * u * u).exp()
            }
            TestFunction1d::Bump { center, radius } => {
                let u = (x - center) / radius;
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - u * u)).exp()
                }
            }
            TestFunction1d::Plateau { center, inner, outer } => {
                smoothstep((outer - (x - center).abs()) / (outer - inner))
            }
            TestFunction1d::One => 1.0,
        }
    }

    /// Distance from the center beyond which the function is below 1e-12
    /// (exactly zero for the compactly supported variants); infinite for the
    /// constant.
    pub fn support_radius(&self) -> f64 {
        match *self {
            TestFunction1d::Gaussian { width, .. } => gaussian_decay_radius(width),
            TestFunction1d::Bump { radius, .. } => radius,
            TestFunction1d::Plateau { outer, .. } => outer,
            TestFunction1d::One => f64::INFINITY,
        }
    }

    pub fn center(&self) -> f64 {
        match *self {
            TestFunction1d::Gaussian { center, .. } => center,
            TestFunction1d::Bump { center, .. } => center,
            TestFunction1d::Plateau { center, .. } => center,
            TestFunction1d::One => 0.0,
        }
    }

    /// Unitary transform (2 pi)^{-1/2} int h(x) e^{-ikx} dx; closed form for
    /// the Gaussian, oscillation-resolving quadrature otherwise.
    pub fn fourier(&self, k: f64) -> Result<C64> {
        match *self {
            TestFunction1d::Gaussian { center, width } => {
                let amp = width * (-0.5 * width * width * k * k).exp();
                Ok(C64::from_polar(amp, -k * center))
            }
            TestFunction1d::Bump { .. } | TestFunction1d::Plateau { .. } => {
                let r = self.support_radius();
                let c = self.center();
                let panels = 8 + (r * k.abs() / 2.0).ceil() as usize;
                let re = integrate_composite(
                    &|x: f64| self.eval(x) * (k * x).cos(),
                    c - r,
                    c + r,
                    16,
                    panels,
                );
                let im = integrate_composite(
                    &|x: f64| -self.eval(x) * (k * x).sin(),
                    c - r,
                    c + r,
                    16,
                    panels,
                );
                let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
                Ok(C64::new(re * norm, im * norm))
            }
            TestFunction1d::One => Err(DiracError::Config(
                "the constant test function has no pointwise transform".into(),
            )),
        }
    }

    /// F^{-1}(h)(xi) = h-hat(-xi).
    pub fn inverse_fourier(&self, xi: f64) -> Result<C64> {
        self.fourier(-xi)
    }
}

/// Smooth test function on R^3; the non-constant variants are radial about
/// a center point.
#[derive(Clone, Debug)]
pub enum TestFunction3d {
    Gaussian { center: [f64; 3], width: f64 },
    Bump { center: [f64; 3], radius: f64 },
    Plateau { center: [f64; 3], inner: f64, outer: f64 },
    One,
}

impl TestFunction3d {
    pub fn gaussian(center: [f64; 3], width: f64) -> Result<Self> {
        if width <= 0.0 {
            return Err(DiracError::Config("test function width must be positive".into()));
        }
        Ok(TestFunction3d::Gaussian { center, width })
    }

    pub fn bump(center: [f64; 3], radius: f64) -> Result<Self> {
        if radius <= 0.0 {
            return Err(DiracError::Config("bump radius must be positive".into()));
        }
        Ok(TestFunction3d::Bump { center, radius })
    }

    pub fn plateau(center: [f64; 3], inner: f64, outer: f64) -> Result<Self> {
        if !(0.0 < inner && inner < outer) {
            return Err(DiracError::Config(
                "plateau radii must satisfy 0 < inner < outer".into(),
            ));
        }
        Ok(TestFunction3d::Plateau { center, inner, outer })
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        let c = self.center();
        let d = ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2)).sqrt();
        match *self {
            TestFunction3d::Gaussian { width, .. } => {
                let u = d / width;
                (-0.5 * u * u).exp()
            }
            TestFunction3d::Bump { radius, .. } => {
                let u = d / radius;
                if u >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - u * u)).exp()
                }
            }
            TestFunction3d::Plateau { inner, outer, .. } => {
                smoothstep((outer - d) / (outer - inner))
            }
            TestFunction3d::One => 1.0,
        }
    }

    pub fn support_radius(&self) -> f64 {
        match *self {
            TestFunction3d::Gaussian { width, .. } => gaussian_decay_radius(width),
            TestFunction3d::Bump { radius, .. } => radius,
            TestFunction3d::Plateau { outer, .. } => outer,
            TestFunction3d::One => f64::INFINITY,
        }
    }

    pub fn center(&self) -> [f64; 3] {
        match *self {
            TestFunction3d::Gaussian { center, .. } => center,
            TestFunction3d::Bump { center, .. } => center,
            TestFunction3d::Plateau { center, .. } => center,
            TestFunction3d::One => [0.0; 3],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_is_a_partition() {
        assert_eq!(smoothstep(-1.0), 0.0);
        assert_eq!(smoothstep(2.0), 1.0);
        for &t in &[0.1, 0.3, 0.5, 0.9] {
            let s = smoothstep(t);
            assert!(s > 0.0 && s < 1.0);
            // Complementary symmetry s(t) + s(1-t) = 1.
            assert!((s + smoothstep(1.0 - t) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn bump_support_and_peak() {
        let h = TestFunction1d::bump(1.0, 0.5).unwrap();
        assert_eq!(h.eval(1.0), 1.0);
        assert_eq!(h.eval(1.5), 0.0);
        assert_eq!(h.eval(0.4), 0.0);
        assert!(h.eval(1.2) > 0.0);
    }

    #[test]
    fn plateau_is_flat_inside() {
        let h = TestFunction1d::plateau(0.0, 0.7, 1.1).unwrap();
        assert_eq!(h.eval(0.0), 1.0);
        assert_eq!(h.eval(0.69), 1.0);
        assert_eq!(h.eval(-0.7), 1.0);
        assert_eq!(h.eval(1.2), 0.0);
        let mid = h.eval(0.9);
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn gaussian_fourier_closed_form() {
        // Centered unit-width Gaussian transform is w e^{-w^2 k^2/2}.
        let h = TestFunction1d::gaussian(0.0, 2.0).unwrap();
        let v = h.fourier(0.5).unwrap();
        assert!((v.re - 2.0 * (-0.5f64 * 4.0 * 0.25).exp()).abs() < 1e-14);
        assert!(v.im.abs() < 1e-14);
        // Shift produces the phase e^{-ikc}.
        let hc = TestFunction1d::gaussian(1.5, 2.0).unwrap();
        let vc = hc.fourier(0.5).unwrap();
        assert!((vc.norm() - v.norm()).abs() < 1e-14);
        assert!((vc.arg() + 0.5 * 1.5).abs() < 1e-12);
    }

    #[test]
    fn bump_fourier_matches_quadrature_oracle() {
        // Independent check at one frequency with a dense trapezoid sum.
        let h = TestFunction1d::bump(0.0, 1.0).unwrap();
        let k = 3.0;
        let n = 40_000;
        let dx = 2.0 / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            let x = -1.0 + (i as f64 + 0.5) * dx;
            s += h.eval(x) * (k * x).cos() * dx;
        }
        let expect = s / (2.0 * std::f64::consts::PI).sqrt();
        let got = h.fourier(k).unwrap();
        assert!((got.re - expect).abs() < 1e-10);
        assert!(got.im.abs() < 1e-12, "even bump has a real transform");
    }

    #[test]
    fn inverse_fourier_is_reflection() {
        let h = TestFunction1d::gaussian(0.7, 1.3).unwrap();
        let a = h.inverse_fourier(2.0).unwrap();
        let b = h.fourier(-2.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn constant_has_no_transform() {
        assert!(TestFunction1d::One.fourier(1.0).is_err());
    }

    #[test]
    fn radial_3d_evaluation() {
        let h = TestFunction3d::plateau([1.0, 0.0, 0.0], 0.5, 1.0).unwrap();
        assert_eq!(h.eval([1.0, 0.0, 0.0]), 1.0);
        assert_eq!(h.eval([1.0, 0.4, 0.0]), 1.0);
        assert_eq!(h.eval([1.0, 0.0, 1.05]), 0.0);
        let g = TestFunction3d::gaussian([0.0; 3], 0.5).unwrap();
        assert!((g.eval([0.5, 0.0, 0.0]) - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(TestFunction1d::gaussian(0.0, 0.0).is_err());
        assert!(TestFunction1d::bump(0.0, -1.0).is_err());
        assert!(TestFunction1d::plateau(0.0, 1.0, 0.5).is_err());
        assert!(TestFunction3d::plateau([0.0; 3], 0.0, 1.0).is_err());
    }
}

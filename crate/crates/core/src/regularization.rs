//! Concentrating families of initial data.
//!
//! A mother profile is a fixed unit-L2 spinor function; a family rescales it
//! with a parameter eps under one of two laws. The square-root law keeps the
//! L2 norm at 1 (its squared modulus concentrates to a point mass); the
//! plain law rescales like a mollifier (its modulus concentrates, its norm
//! diverges like eps^{-d/2} in L2).

use crate::error::{DiracError, Result};
use crate::matrix::{Spinor2, Spinor4};
use crate::quadrature::{integrate_adaptive, integrate_composite, sphere_rule_product};
use crate::testfn::{gaussian_decay_radius, TestFunction1d, TestFunction3d};
use num_complex::Complex64 as C64;

/// Real, even, unit-L2 scalar shape on the line.
#[derive(Clone, Debug)]
pub enum Shape1d {
    Gaussian { sigma: f64 },
    /// exp(-1/(1-(x/radius)^2)) on (-radius, radius), zero outside, scaled
    /// to unit L2 norm (`amp` holds the normalization).
    Bump { radius: f64, amp: f64 },
}

impl Shape1d {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if sigma <= 0.0 {
            return Err(DiracError::Config("shape width must be positive".into()));
        }
        Ok(Shape1d::Gaussian { sigma })
    }

    pub fn bump(radius: f64) -> Result<Self> {
        if radius <= 0.0 {
            return Err(DiracError::Config("shape radius must be positive".into()));
        }
        let raw = |x: f64| {
            let u = x / radius;
            if u.abs() >= 1.0 {
                0.0
            } else {
                (-1.0 / (1.0 - u * u)).exp()
            }
        };
        let mass2 = integrate_composite(&|x: f64| raw(x) * raw(x), -radius, radius, 16, 64);
        Ok(Shape1d::Bump { radius, amp: 1.0 / mass2.sqrt() })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Shape1d::Gaussian { sigma } => {
                (sigma * sigma * std::f64::consts::PI).powf(-0.25)
                    * (-x * x / (2.0 * sigma * sigma)).exp()
            }
            Shape1d::Bump { radius, amp } => {
                let u = x / radius;
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    amp * (-1.0 / (1.0 - u * u)).exp()
                }
            }
        }
    }

    /// Unitary Fourier transform; real because the shape is real and even.
    pub fn fourier(&self, k: f64) -> f64 {
        match *self {
            Shape1d::Gaussian { sigma } => {
                (sigma * sigma / std::f64::consts::PI).powf(0.25)
                    * (-0.5 * sigma * sigma * k * k).exp()
            }
            Shape1d::Bump { radius, .. } => {
                let panels = 16 + (radius * k.abs() / 2.0).ceil() as usize;
                integrate_composite(&|x: f64| self.eval(x) * (k * x).cos(), -radius, radius, 16, panels)
                    / (2.0 * std::f64::consts::PI).sqrt()
            }
        }
    }

    /// Radius outside which the shape is below 1e-12 of its peak (exact
    /// support for the bump).
    pub fn decay_radius(&self) -> f64 {
        match *self {
            Shape1d::Gaussian { sigma } => gaussian_decay_radius(sigma),
            Shape1d::Bump { radius, .. } => radius,
        }
    }

    /// L1 mass of the shape.
    pub fn l1_mass(&self) -> f64 {
        match *self {
            Shape1d::Gaussian { sigma } => {
                // int (sigma^2 pi)^{-1/4} e^{-x^2/(2 sigma^2)} dx
                (2.0 * sigma).sqrt() * std::f64::consts::PI.powf(0.25)
            }
            Shape1d::Bump { radius, .. } => {
                integrate_composite(&|x: f64| self.eval(x), -radius, radius, 16, 64)
            }
        }
    }

    /// Width of a Gaussian with both unit L2 and unit L1 mass; handy for
    /// checks that expect a plain delta limit for the modulus.
    pub fn unit_l1_gaussian_sigma() -> f64 {
        // sqrt(2 sigma) pi^{1/4} = 1  =>  sigma = 1/(2 sqrt(pi))
        0.5 / std::f64::consts::PI.sqrt()
    }
}

/// Real, radial, unit-L2 scalar shape on R^3.
#[derive(Clone, Debug)]
pub enum Shape3d {
    Gaussian { sigma: f64 },
    Bump { radius: f64, amp: f64 },
}

impl Shape3d {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if sigma <= 0.0 {
            return Err(DiracError::Config("shape width must be positive".into()));
        }
        Ok(Shape3d::Gaussian { sigma })
    }

    pub fn bump(radius: f64) -> Result<Self> {
        if radius <= 0.0 {
            return Err(DiracError::Config("shape radius must be positive".into()));
        }
        let raw = |r: f64| {
            let u = r / radius;
            if u >= 1.0 {
                0.0
            } else {
                (-1.0 / (1.0 - u * u)).exp()
            }
        };
        let mass2 = 4.0
            * std::f64::consts::PI
            * integrate_composite(&|r: f64| r * r * raw(r) * raw(r), 0.0, radius, 16, 64);
        Ok(Shape3d::Bump { radius, amp: 1.0 / mass2.sqrt() })
    }

    pub fn eval_radial(&self, r: f64) -> f64 {
        match *self {
            Shape3d::Gaussian { sigma } => {
                (sigma * sigma * std::f64::consts::PI).powf(-0.75)
                    * (-r * r / (2.0 * sigma * sigma)).exp()
            }
            Shape3d::Bump { radius, amp } => {
                let u = r / radius;
                if u >= 1.0 {
                    0.0
                } else {
                    amp * (-1.0 / (1.0 - u * u)).exp()
                }
            }
        }
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        self.eval_radial((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt())
    }

    /// Radial profile of the unitary transform:
    /// s-hat(k) = sqrt(2/pi) int_0^inf r^2 s(r) sinc(kr) dr.
    pub fn fourier_radial(&self, k: f64) -> f64 {
        match *self {
            Shape3d::Gaussian { sigma } => {
                (sigma * sigma / std::f64::consts::PI).powf(0.75)
                    * (-0.5 * sigma * sigma * k * k).exp()
            }
            Shape3d::Bump { radius, .. } => {
                let sinc = |z: f64| if z.abs() < 1e-4 { 1.0 - z * z / 6.0 } else { z.sin() / z };
                let panels = 16 + (radius * k.abs() / 2.0).ceil() as usize;
                let v = integrate_composite(
                    &|r: f64| r * r * self.eval_radial(r) * sinc(k * r),
                    0.0,
                    radius,
                    16,
                    panels,
                );
                (2.0 / std::f64::consts::PI).sqrt() * v
            }
        }
    }

    pub fn fourier(&self, k: [f64; 3]) -> f64 {
        self.fourier_radial((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt())
    }

    pub fn decay_radius(&self) -> f64 {
        match *self {
            Shape3d::Gaussian { sigma } => gaussian_decay_radius(sigma),
            Shape3d::Bump { radius, .. } => radius,
        }
    }

    /// L1 mass 4 pi int r^2 |s(r)| dr.
    pub fn l1_mass(&self) -> f64 {
        let rmax = self.decay_radius();
        4.0 * std::f64::consts::PI
            * integrate_composite(&|r: f64| r * r * self.eval_radial(r), 0.0, rmax, 16, 64)
    }
}

fn normalized_coeff<const N: usize>(coeff: [C64; N]) -> Result<[C64; N]> {
    let total: f64 = coeff.iter().map(|c| c.norm_sqr()).sum();
    if total < 1e-14 {
        return Err(DiracError::Config("profile coefficients are all zero".into()));
    }
    let s = 1.0 / total.sqrt();
    let mut out = coeff;
    for c in out.iter_mut() {
        *c *= s;
    }
    Ok(out)
}

/// Two-component mother profile: a shared unit-L2 scalar shape carried by a
/// unit complex coefficient vector, so the total L2 norm is exactly 1.
#[derive(Clone, Debug)]
pub struct Profile1d {
    coeff: [C64; 2],
    shape: Shape1d,
}

impl Profile1d {
    /// Coefficients are rescaled to unit square sum.
    pub fn new(coeff: [C64; 2], shape: Shape1d) -> Result<Self> {
        Ok(Profile1d { coeff: normalized_coeff(coeff)?, shape })
    }

    /// Both components equal: the density limit rides entirely to +t.
    pub fn aligned(shape: Shape1d) -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Profile1d {
            coeff: [C64::new(r, 0.0), C64::new(r, 0.0)],
            shape,
        }
    }

    /// Second component i times the first: the real cross term vanishes and
    /// the density limit splits evenly between +t and -t.
    pub fn orthogonal_pair(shape: Shape1d) -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Profile1d {
            coeff: [C64::new(r, 0.0), C64::new(0.0, r)],
            shape,
        }
    }

    /// Components cos(alpha), sin(alpha) of the shared shape.
    pub fn angle_pair(shape: Shape1d, alpha: f64) -> Self {
        Profile1d {
            coeff: [C64::new(alpha.cos(), 0.0), C64::new(alpha.sin(), 0.0)],
            shape,
        }
    }

    pub fn coeff(&self) -> [C64; 2] {
        self.coeff
    }

    pub fn shape(&self) -> &Shape1d {
        &self.shape
    }

    pub fn evaluate(&self, x: f64) -> Spinor2 {
        let s = self.shape.eval(x);
        Spinor2([self.coeff[0] * s, self.coeff[1] * s])
    }

    pub fn fourier(&self, k: f64) -> Spinor2 {
        let s = self.shape.fourier(k);
        Spinor2([self.coeff[0] * s, self.coeff[1] * s])
    }

    /// int conj(rho_1) rho_2 dx; the shared shape has unit norm, so this is
    /// just the coefficient product.
    pub fn cross_term(&self) -> C64 {
        self.coeff[0].conj() * self.coeff[1]
    }

    pub fn decay_radius(&self) -> f64 {
        self.shape.decay_radius()
    }
}

/// Four-component mother profile on R^3, radial shape times a unit
/// coefficient vector.
#[derive(Clone, Debug)]
pub struct Profile3d {
    coeff: [C64; 4],
    shape: Shape3d,
}

impl Profile3d {
    pub fn new(coeff: [C64; 4], shape: Shape3d) -> Result<Self> {
        Ok(Profile3d { coeff: normalized_coeff(coeff)?, shape })
    }

    /// All mass in the first spinor component.
    pub fn first_component(shape: Shape3d) -> Self {
        Profile3d {
            coeff: [
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
            ],
            shape,
        }
    }

    pub fn coeff(&self) -> [C64; 4] {
        self.coeff
    }

    pub fn shape(&self) -> &Shape3d {
        &self.shape
    }

    pub fn evaluate(&self, x: [f64; 3]) -> Spinor4 {
        let s = self.shape.eval(x);
        Spinor4([
            self.coeff[0] * s,
            self.coeff[1] * s,
            self.coeff[2] * s,
            self.coeff[3] * s,
        ])
    }

    pub fn fourier(&self, k: [f64; 3]) -> Spinor4 {
        let s = self.shape.fourier(k);
        Spinor4([
            self.coeff[0] * s,
            self.coeff[1] * s,
            self.coeff[2] * s,
            self.coeff[3] * s,
        ])
    }

    pub fn decay_radius(&self) -> f64 {
        self.shape.decay_radius()
    }
}

/// How the profile is rescaled as eps shrinks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingLaw {
    /// eps^{-d/2} phi(x/eps): unit L2 norm for every eps.
    SqrtDelta,
    /// eps^{-d} phi(x/eps): mollifier scaling, L2 norm eps^{-d/2} ||phi||.
    Delta,
}

/// A 1d profile at a concrete concentration parameter.
#[derive(Clone, Debug)]
pub struct Family1d {
    pub profile: Profile1d,
    pub law: ScalingLaw,
    pub epsilon: f64,
}

impl Family1d {
    pub fn new(profile: Profile1d, law: ScalingLaw, epsilon: f64) -> Result<Self> {
        if epsilon <= 0.0 {
            return Err(DiracError::Config(format!(
                "concentration parameter must be positive, got {epsilon}"
            )));
        }
        Ok(Family1d { profile, law, epsilon })
    }

    fn amplitude(&self) -> f64 {
        match self.law {
            ScalingLaw::SqrtDelta => self.epsilon.powf(-0.5),
            ScalingLaw::Delta => 1.0 / self.epsilon,
        }
    }

    pub fn evaluate(&self, x: f64) -> Spinor2 {
        self.profile
            .evaluate(x / self.epsilon)
            .scale(C64::new(self.amplitude(), 0.0))
    }

    /// Transform of the rescaled profile: the square-root law gives
    /// eps^{1/2} phi-hat(eps k), the plain law gives phi-hat(eps k).
    pub fn fourier(&self, k: f64) -> Spinor2 {
        let pref = match self.law {
            ScalingLaw::SqrtDelta => self.epsilon.sqrt(),
            ScalingLaw::Delta => 1.0,
        };
        self.profile
            .fourier(self.epsilon * k)
            .scale(C64::new(pref, 0.0))
    }

    /// Radius containing all but ~1e-24 of the scaled density.
    pub fn decay_radius(&self) -> f64 {
        self.epsilon * self.profile.decay_radius()
    }
}

/// A 3d profile at a concrete concentration parameter.
#[derive(Clone, Debug)]
pub struct Family3d {
    pub profile: Profile3d,
    pub law: ScalingLaw,
    pub epsilon: f64,
}

impl Family3d {
    pub fn new(profile: Profile3d, law: ScalingLaw, epsilon: f64) -> Result<Self> {
        if epsilon <= 0.0 {
            return Err(DiracError::Config(format!(
                "concentration parameter must be positive, got {epsilon}"
            )));
        }
        Ok(Family3d { profile, law, epsilon })
    }

    fn amplitude(&self) -> f64 {
        match self.law {
            ScalingLaw::SqrtDelta => self.epsilon.powf(-1.5),
            ScalingLaw::Delta => self.epsilon.powi(-3),
        }
    }

    pub fn evaluate(&self, x: [f64; 3]) -> Spinor4 {
        let e = self.epsilon;
        self.profile
            .evaluate([x[0] / e, x[1] / e, x[2] / e])
            .scale(C64::new(self.amplitude(), 0.0))
    }

    pub fn fourier(&self, k: [f64; 3]) -> Spinor4 {
        let e = self.epsilon;
        let pref = match self.law {
            ScalingLaw::SqrtDelta => e.powf(1.5),
            ScalingLaw::Delta => 1.0,
        };
        self.profile
            .fourier([e * k[0], e * k[1], e * k[2]])
            .scale(C64::new(pref, 0.0))
    }

    pub fn decay_radius(&self) -> f64 {
        self.epsilon * self.profile.decay_radius()
    }
}

/// One row of a concentration table.
#[derive(Clone, Copy, Debug)]
pub struct WeakDeltaRow {
    pub epsilon: f64,
    pub value: f64,
    pub deviation: f64,
}

/// Pairings of the squared modulus against h under the square-root law;
/// deviations are measured against h(0).
pub fn weak_delta_table_1d(
    profile: &Profile1d,
    h: &TestFunction1d,
    eps: &[f64],
) -> Result<Vec<WeakDeltaRow>> {
    let h0 = h.eval(0.0);
    eps.iter()
        .map(|&e| {
            let fam = Family1d::new(profile.clone(), ScalingLaw::SqrtDelta, e)?;
            let r = fam.decay_radius();
            let value =
                integrate_adaptive(&|x: f64| fam.evaluate(x).norm_sqr() * h.eval(x), -r, r, 1e-11)?;
            Ok(WeakDeltaRow { epsilon: e, value, deviation: (value - h0).abs() })
        })
        .collect()
}

/// Pairings of the modulus (not squared) against h under the plain law.
/// The limit is the profile's L1 mass times h(0); deviations are measured
/// against that.
pub fn weak_abs_table_1d(
    profile: &Profile1d,
    h: &TestFunction1d,
    eps: &[f64],
) -> Result<Vec<WeakDeltaRow>> {
    let coeff_norm: f64 = profile.coeff().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let limit = profile.shape().l1_mass() * coeff_norm * h.eval(0.0);
    eps.iter()
        .map(|&e| {
            let fam = Family1d::new(profile.clone(), ScalingLaw::Delta, e)?;
            let r = fam.decay_radius();
            let value =
                integrate_adaptive(&|x: f64| fam.evaluate(x).norm() * h.eval(x), -r, r, 1e-11)?;
            Ok(WeakDeltaRow { epsilon: e, value, deviation: (value - limit).abs() })
        })
        .collect()
}

/// 3d version of the squared-modulus table (square-root law, limit h(0)).
pub fn weak_delta_table_3d(
    profile: &Profile3d,
    h: &TestFunction3d,
    eps: &[f64],
) -> Result<Vec<WeakDeltaRow>> {
    let h0 = h.eval([0.0; 3]);
    let sphere = sphere_rule_product(24);
    eps.iter()
        .map(|&e| {
            let fam = Family3d::new(profile.clone(), ScalingLaw::SqrtDelta, e)?;
            let r = fam.decay_radius();
            let radial = |rr: f64| {
                let angular = sphere.integrate(|th| {
                    h.eval([rr * th[0], rr * th[1], rr * th[2]])
                });
                // |phi_eps|^2 is radial: amplitude^2 shape(r/eps)^2.
                let amp = fam.evaluate([rr, 0.0, 0.0]).norm_sqr();
                rr * rr * amp * angular
            };
            let value = integrate_adaptive(&radial, 0.0, r, 1e-10)?;
            Ok(WeakDeltaRow { epsilon: e, value, deviation: (value - h0).abs() })
        })
        .collect()
}

/// 3d modulus table under the plain law; limit is L1 mass times h(0).
pub fn weak_abs_table_3d(
    profile: &Profile3d,
    h: &TestFunction3d,
    eps: &[f64],
) -> Result<Vec<WeakDeltaRow>> {
    let coeff_norm: f64 = profile.coeff().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let limit = profile.shape().l1_mass() * coeff_norm * h.eval([0.0; 3]);
    let sphere = sphere_rule_product(24);
    eps.iter()
        .map(|&e| {
            let fam = Family3d::new(profile.clone(), ScalingLaw::Delta, e)?;
            let r = fam.decay_radius();
            let radial = |rr: f64| {
                let angular = sphere.integrate(|th| h.eval([rr * th[0], rr * th[1], rr * th[2]]));
                rr * rr * fam.evaluate([rr, 0.0, 0.0]).norm() * angular
            };
            let value = integrate_adaptive(&radial, 0.0, r, 1e-10)?;
            Ok(WeakDeltaRow { epsilon: e, value, deviation: (value - limit).abs() })
        })
        .collect()
}

/// Component-wise pairing of the field itself (not a density) with h.
/// Under the square-root law this decays like sqrt(eps).
pub fn weak_pairing_1d(family: &Family1d, h: &TestFunction1d) -> Result<[C64; 2]> {
    let r = family.decay_radius();
    let mut out = [C64::new(0.0, 0.0); 2];
    for (i, slot) in out.iter_mut().enumerate() {
        let re = integrate_adaptive(&|x: f64| family.evaluate(x).0[i].re * h.eval(x), -r, r, 1e-11)?;
        let im = integrate_adaptive(&|x: f64| family.evaluate(x).0[i].im * h.eval(x), -r, r, 1e-11)?;
        *slot = C64::new(re, im);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::fit_convergence_order;

    #[test]
    fn shapes_have_unit_l2_norm() {
        for shape in [Shape1d::gaussian(1.0).unwrap(), Shape1d::gaussian(0.3).unwrap(), Shape1d::bump(1.5).unwrap()] {
            let r = shape.decay_radius();
            let m = integrate_composite(&|x: f64| shape.eval(x).powi(2), -r, r, 16, 64);
            assert!((m - 1.0).abs() < 1e-10, "{shape:?} has mass {m}");
        }
        for shape in [Shape3d::gaussian(1.0).unwrap(), Shape3d::bump(1.0).unwrap()] {
            let r = shape.decay_radius();
            let m = 4.0
                * std::f64::consts::PI
                * integrate_composite(&|rr: f64| rr * rr * shape.eval_radial(rr).powi(2), 0.0, r, 16, 64);
            assert!((m - 1.0).abs() < 1e-10, "{shape:?} has mass {m}");
        }
    }

    #[test]
    fn gaussian_transform_is_unit_norm_too() {
        // Parseval: the closed-form transform must also have unit L2 mass.
        let shape = Shape1d::gaussian(0.7).unwrap();
        let m = integrate_composite(&|k: f64| shape.fourier(k).powi(2), -40.0, 40.0, 16, 128);
        assert!((m - 1.0).abs() < 1e-10);
        let shape3 = Shape3d::gaussian(1.3).unwrap();
        let m3 = 4.0
            * std::f64::consts::PI
            * integrate_composite(&|k: f64| k * k * shape3.fourier_radial(k).powi(2), 0.0, 30.0, 16, 128);
        assert!((m3 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bump_transform_parseval() {
        let shape = Shape3d::bump(1.0).unwrap();
        let m3 = 4.0
            * std::f64::consts::PI
            * integrate_composite(&|k: f64| k * k * shape.fourier_radial(k).powi(2), 0.0, 120.0, 16, 512);
        assert!((m3 - 1.0).abs() < 1e-6, "transform mass {m3}");
    }

    #[test]
    fn sqrt_law_preserves_norm() {
        let profile = Profile1d::aligned(Shape1d::gaussian(1.0).unwrap());
        for &eps in &[0.5, 0.1] {
            let fam = Family1d::new(profile.clone(), ScalingLaw::SqrtDelta, eps).unwrap();
            let r = fam.decay_radius();
            let m = integrate_composite(&|x: f64| fam.evaluate(x).norm_sqr(), -r, r, 16, 128);
            assert!((m - 1.0).abs() < 1e-10, "eps={eps}: mass {m}");
        }
    }

    #[test]
    fn plain_law_norm_diverges_cubically() {
        let profile = Profile3d::first_component(Shape3d::bump(1.0).unwrap());
        let fam = Family3d::new(profile, ScalingLaw::Delta, 0.1).unwrap();
        let r = fam.decay_radius();
        let m = 4.0
            * std::f64::consts::PI
            * integrate_composite(&|rr: f64| rr * rr * fam.evaluate([rr, 0.0, 0.0]).norm_sqr(), 0.0, r, 16, 256);
        assert!((m - 1000.0).abs() < 1e-6 * 1000.0, "eps=0.1 in 3d: {m}");
    }

    #[test]
    fn identity_scaling_at_eps_one() {
        let profile = Profile1d::aligned(Shape1d::gaussian(1.0).unwrap());
        let fam = Family1d::new(profile.clone(), ScalingLaw::SqrtDelta, 1.0).unwrap();
        for &x in &[0.0, 0.5, -1.7] {
            assert_eq!(fam.evaluate(x).0, profile.evaluate(x).0);
        }
        for &k in &[0.0, 2.0] {
            assert_eq!(fam.fourier(k).0, profile.fourier(k).0);
        }
    }

    #[test]
    fn fourier_scaling_matches_quadrature() {
        // Direct transform of the scaled family against the closed form.
        let profile = Profile1d::angle_pair(Shape1d::gaussian(1.0).unwrap(), 0.4);
        let fam = Family1d::new(profile, ScalingLaw::SqrtDelta, 0.25).unwrap();
        let k = 1.3;
        let r = fam.decay_radius().max(20.0);
        let re = integrate_composite(
            &|x: f64| fam.evaluate(x).0[0].re * (k * x).cos(),
            -r,
            r,
            16,
            256,
        );
        let expect = re / (2.0 * std::f64::consts::PI).sqrt();
        let got = fam.fourier(k).0[0].re;
        // cos-projection picks the even (real) part only.
        assert!((got - expect).abs() < 1e-9, "{got} vs {expect}");
    }

    #[test]
    fn coefficients_are_normalized() {
        let p = Profile1d::new(
            [C64::new(3.0, 0.0), C64::new(0.0, 4.0)],
            Shape1d::gaussian(1.0).unwrap(),
        )
        .unwrap();
        let total: f64 = p.coeff().iter().map(|c| c.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!(Profile1d::new([C64::new(0.0, 0.0); 2], Shape1d::gaussian(1.0).unwrap()).is_err());
    }

    #[test]
    fn nonpositive_eps_rejected() {
        let p = Profile1d::aligned(Shape1d::gaussian(1.0).unwrap());
        assert!(Family1d::new(p.clone(), ScalingLaw::SqrtDelta, 0.0).is_err());
        assert!(Family1d::new(p, ScalingLaw::SqrtDelta, -0.1).is_err());
    }

    #[test]
    fn squared_density_concentrates() {
        // Constant h near the origin gives exactly 1; a narrowing bump shows
        // monotone decreasing deviation.
        let profile = Profile1d::aligned(Shape1d::gaussian(1.0).unwrap());
        let h_flat = TestFunction1d::plateau(0.0, 5.0, 6.0).unwrap();
        let rows = weak_delta_table_1d(&profile, &h_flat, &[0.5, 0.25]).unwrap();
        for row in &rows {
            assert!((row.value - 1.0).abs() < 1e-9, "flat case: {row:?}");
        }
        let h = TestFunction1d::bump(0.0, 1.0).unwrap();
        let rows = weak_delta_table_1d(&profile, &h, &[0.4, 0.2, 0.1, 0.05]).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].deviation < w[0].deviation, "{rows:?}");
        }
    }

    #[test]
    fn modulus_concentrates_under_plain_law() {
        // With the width at which the Gaussian has unit L1 mass, the limit
        // is exactly h(0).
        let sigma = Shape1d::unit_l1_gaussian_sigma();
        let shape = Shape1d::gaussian(sigma).unwrap();
        assert!((shape.l1_mass() - 1.0).abs() < 1e-12);
        let profile = Profile1d::new([C64::new(1.0, 0.0), C64::new(0.0, 0.0)], shape).unwrap();
        let h = TestFunction1d::gaussian(0.0, 1.0).unwrap();
        let rows = weak_abs_table_1d(&profile, &h, &[0.2, 0.1, 0.05]).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].deviation < w[0].deviation);
        }
        assert!(rows.last().unwrap().deviation < 1e-3);

        // 3d analogue against the L1-mass limit.
        let p3 = Profile3d::first_component(Shape3d::bump(1.0).unwrap());
        let h3 = TestFunction3d::gaussian([0.0; 3], 1.0).unwrap();
        let rows = weak_abs_table_3d(&p3, &h3, &[0.2, 0.1, 0.05]).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].deviation < w[0].deviation);
        }
    }

    #[test]
    fn field_itself_vanishes_weakly_at_sqrt_rate() {
        let profile = Profile1d::aligned(Shape1d::gaussian(1.0).unwrap());
        let h = TestFunction1d::gaussian(0.0, 1.0).unwrap();
        let eps = [0.4, 0.2, 0.1, 0.05, 0.025];
        let mags: Vec<f64> = eps
            .iter()
            .map(|&e| {
                let fam = Family1d::new(profile.clone(), ScalingLaw::SqrtDelta, e).unwrap();
                let v = weak_pairing_1d(&fam, &h).unwrap();
                (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
            })
            .collect();
        let slope = fit_convergence_order(&eps, &mags).unwrap();
        assert!((slope - 0.5).abs() < 0.05, "slope {slope}");
    }
}

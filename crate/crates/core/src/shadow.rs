//! Weak-limit diagnostics for concentrated initial data.
//!
//! The probability density of an evolved concentrating family acts on test
//! functions; as the concentration parameter shrinks, these pairings settle
//! onto closed forms: a two-point convex combination on the line, a density
//! on the radius-t sphere in three dimensions. This module computes the
//! pairings from evolved grid fields, evaluates the closed forms through an
//! independent Fourier-side route, fits empirical convergence rates, and
//! carries the auxiliary diagnostics (phase gaps, branch overlaps, the
//! mollifier-law divergence check, and a double-integral oracle on the
//! line).

use crate::algebra::{eigenbasis_1d, eigenbasis_3d, eigenbasis_3d_homogeneous, Dispersion};
use crate::error::{DiracError, Result};
use crate::grid::{Grid1D, Grid3D};
use crate::matrix::Spinor4;
use crate::propagator1d::{evolve_1d, SpinorField1D};
use crate::propagator3d::{evolve_3d_spectral, SpinorField3D};
use crate::quadrature::{
    fit_convergence_order, gauss_legendre, integrate_radial, loglog_slope, sphere_rule_product,
};
use crate::regularization::{Family1d, Family3d, Profile1d, Profile3d, ScalingLaw};
use crate::testfn::{TestFunction1d, TestFunction3d};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;

const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_5;

/// One pairing of a density with a test function.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PairingResult {
    pub epsilon: f64,
    pub t: f64,
    pub value: f64,
    /// Gap against a stride-2 re-evaluation of the grid quadrature.
    pub quad_error: f64,
}

fn check_support_1d(h: &TestFunction1d, grid: Grid1D) -> Result<()> {
    let radius = h.support_radius();
    if radius.is_finite() && h.center().abs() + radius > grid.half_length() {
        return Err(DiracError::Check(format!(
            "test function reaches |x| = {:.3} but the domain ends at {:.3}",
            h.center().abs() + radius,
            grid.half_length()
        )));
    }
    Ok(())
}

fn check_support_3d(h: &TestFunction3d, grid: Grid3D) -> Result<()> {
    let radius = h.support_radius();
    if !radius.is_finite() {
        return Ok(());
    }
    let c = h.center();
    for axis in 0..3 {
        if c[axis].abs() + radius > grid.half_length() {
            return Err(DiracError::Check(format!(
                "test function reaches |x_{}| = {:.3} but the domain ends at {:.3}",
                axis + 1,
                c[axis].abs() + radius,
                grid.half_length()
            )));
        }
    }
    Ok(())
}

/// Grid quadrature of the density against h.
pub fn pairing_1d(field: &SpinorField1D, h: &TestFunction1d, epsilon: f64) -> Result<PairingResult> {
    let grid = field.grid;
    check_support_1d(h, grid)?;
    let dens = field.probability_density();
    let mut fine = 0.0;
    let mut coarse = 0.0;
    for (j, d) in dens.iter().enumerate() {
        let v = d * h.eval(grid.x(j));
        fine += v;
        if j % 2 == 0 {
            coarse += v;
        }
    }
    fine *= grid.dx();
    coarse *= 2.0 * grid.dx();
    Ok(PairingResult {
        epsilon,
        t: field.time,
        value: fine,
        quad_error: (fine - coarse).abs(),
    })
}

/// Grid quadrature of the density against h on the cube.
pub fn pairing_3d(field: &SpinorField3D, h: &TestFunction3d, epsilon: f64) -> Result<PairingResult> {
    let grid = field.grid;
    check_support_3d(h, grid)?;
    let dens = field.probability_density();
    let mut fine = 0.0;
    let mut coarse = 0.0;
    for ((a, b, c), d) in dens.indexed_iter() {
        let v = d * h.eval(grid.point([a, b, c]));
        fine += v;
        if a % 2 == 0 && b % 2 == 0 && c % 2 == 0 {
            coarse += v;
        }
    }
    let cell = grid.dx().powi(3);
    fine *= cell;
    coarse *= 8.0 * cell;
    Ok(PairingResult {
        epsilon,
        t: field.time,
        value: fine,
        quad_error: (fine - coarse).abs(),
    })
}

/// Limit of the line pairings: a convex combination of point masses at +t
/// and -t with weights set by the profile coefficients.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClosedFormLimit1d {
    pub c_plus: f64,
    pub c_minus: f64,
}

impl ClosedFormLimit1d {
    /// c_plus = |c1 + c2|^2 / 2, c_minus = |c1 - c2|^2 / 2 for unit
    /// coefficients; equivalently 1/2 +- Re(conj(c1) c2).
    pub fn new(profile: &Profile1d) -> Self {
        let cross = profile.cross_term().re;
        ClosedFormLimit1d { c_plus: 0.5 + cross, c_minus: 0.5 - cross }
    }

    pub fn evaluate(&self, t: f64, h: &TestFunction1d) -> f64 {
        self.c_plus * h.eval(t) + self.c_minus * h.eval(-t)
    }
}

/// Converged sphere-limit integral with its quadrature bookkeeping.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SphereLimit {
    pub value: f64,
    pub nodes: usize,
    pub refinement_gap: f64,
}

/// Limit of the cube pairings: a density on the radius-t sphere.
#[derive(Clone, Debug)]
pub struct ClosedFormLimit3d {
    profile: Profile3d,
    radial_mass: f64,
}

impl ClosedFormLimit3d {
    pub fn new(profile: &Profile3d) -> Result<Self> {
        let shape = profile.shape().clone();
        // int_0^inf r^2 s-hat(r)^2 dr = 1/(4 pi) for a unit-norm shape.
        let radial_mass =
            integrate_radial(&|r: f64| r * r * shape.fourier_radial(r).powi(2), 1e-12)?;
        Ok(ClosedFormLimit3d { profile: profile.clone(), radial_mass })
    }

    /// Squared projections of the coefficient vector on the two branches of
    /// the direction-homogeneous basis. Basis-change invariant within each
    /// branch, hence continuous across the chart seam on the k3 axis.
    fn branch_weights(&self, theta: [f64; 3]) -> (f64, f64) {
        let eb = eigenbasis_3d_homogeneous(theta);
        let c = Spinor4(self.profile.coeff());
        let wp = eb.pos[0].dot(&c).norm_sqr() + eb.pos[1].dot(&c).norm_sqr();
        let wn = eb.neg[0].dot(&c).norm_sqr() + eb.neg[1].dot(&c).norm_sqr();
        (wp, wn)
    }

    /// Sphere density at direction theta: positive-branch content with
    /// momenta along +theta arrives there, negative-branch content with
    /// momenta along -theta does too (its group velocity is reversed).
    pub fn density(&self, theta: [f64; 3]) -> f64 {
        let (wp, _) = self.branch_weights(theta);
        let (_, wn) = self.branch_weights([-theta[0], -theta[1], -theta[2]]);
        self.radial_mass * (wp + wn)
    }

    fn refine<F: Fn([f64; 3]) -> f64>(&self, f: F) -> Result<SphereLimit> {
        let mut order = 8;
        let mut prev = sphere_rule_product(order).integrate(&f);
        for _ in 0..4 {
            order *= 2;
            let rule = sphere_rule_product(order);
            let next = rule.integrate(&f);
            let gap = (next - prev).abs();
            if gap < 1e-4 * next.abs().max(1.0) {
                return Ok(SphereLimit { value: next, nodes: rule.len(), refinement_gap: gap });
            }
            prev = next;
        }
        Err(DiracError::Quadrature(format!(
            "sphere quadrature did not settle after {} nodes",
            2 * order * order
        )))
    }

    /// Total sphere mass of the density; 1 for normalized profiles.
    pub fn sphere_mass(&self) -> Result<SphereLimit> {
        self.refine(|theta| self.density(theta))
    }

    /// Smallest density value over a dense angular sample.
    pub fn min_density(&self, order: usize) -> f64 {
        let rule = sphere_rule_product(order);
        let min = std::cell::Cell::new(f64::INFINITY);
        rule.integrate(|theta| {
            min.set(min.get().min(self.density(theta)));
            0.0
        });
        min.get()
    }

    /// The limiting pairing: integral of density(theta) h(t theta) over the
    /// unit sphere, refined until the angular rule settles below 1e-4.
    pub fn limit(&self, t: f64, h: &TestFunction3d) -> Result<SphereLimit> {
        self.refine(|theta| self.density(theta) * h.eval([t * theta[0], t * theta[1], t * theta[2]]))
    }
}

/// Outcome classification of an epsilon sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Converged,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Converged => write!(f, "converged"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// Pairings over a decreasing epsilon list against the closed-form limit.
#[derive(Clone, Debug, Serialize)]
pub struct EpsilonSweep {
    pub t: f64,
    pub limit: f64,
    pub rows: Vec<PairingResult>,
    pub abs_errors: Vec<f64>,
    /// Fitted order of the error decay; None if the fit was degenerate.
    pub slope: Option<f64>,
    pub monotone: bool,
    pub rel_tol: f64,
    pub verdict: Verdict,
}

impl EpsilonSweep {
    /// CSV rows: epsilon,t,pairing,closed_form,abs_error.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,t,pairing,closed_form,abs_error\n");
        for (row, err) in self.rows.iter().zip(&self.abs_errors) {
            out.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                row.epsilon, row.t, row.value, self.limit, err
            ));
        }
        out
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "slope": self.slope,
            "verdict": self.verdict,
            "monotone": self.monotone,
            "limit": self.limit,
            "final_abs_error": self.abs_errors.last(),
            "tolerances": { "relative": self.rel_tol },
        }))
        .expect("plain numeric summary always serializes")
    }
}

fn validate_epsilons(eps: &[f64], min_len: usize) -> Result<()> {
    if eps.len() < min_len {
        return Err(DiracError::Config(format!(
            "need at least {min_len} epsilon values, got {}",
            eps.len()
        )));
    }
    if !eps.iter().all(|&e| e.is_finite() && e > 0.0) {
        return Err(DiracError::Config("epsilon values must be positive and finite".into()));
    }
    if !eps.windows(2).all(|w| w[1] < w[0]) {
        return Err(DiracError::Config("epsilon values must be strictly decreasing".into()));
    }
    Ok(())
}

/// A line sweep: profile, evolution parameters, test function, epsilon list.
#[derive(Clone, Debug)]
pub struct SweepCase1d {
    pub grid: Grid1D,
    pub profile: Profile1d,
    pub mass: f64,
    pub t: f64,
    pub h: TestFunction1d,
    pub epsilons: Vec<f64>,
    /// Relative error target at the smallest epsilon for a converged verdict.
    pub rel_tol: f64,
}

/// Evolves the square-root-scaled family at each epsilon, pairs against h,
/// and fits the error decay against the closed-form limit.
pub fn epsilon_sweep_1d(case: &SweepCase1d) -> Result<EpsilonSweep> {
    validate_epsilons(&case.epsilons, 4)?;
    let limit = ClosedFormLimit1d::new(&case.profile).evaluate(case.t, &case.h);
    let rows: Result<Vec<PairingResult>> = case
        .epsilons
        .par_iter()
        .map(|&eps| {
            let fam = Family1d::new(case.profile.clone(), ScalingLaw::SqrtDelta, eps)?;
            let field = SpinorField1D::from_family(case.grid, &fam);
            let evolved = evolve_1d(&field, case.t, case.mass);
            pairing_1d(&evolved, &case.h, eps)
        })
        .collect();
    let rows = rows?;
    let abs_errors: Vec<f64> = rows.iter().map(|r| (r.value - limit).abs()).collect();
    let slope = fit_convergence_order(&case.epsilons, &abs_errors).ok();
    let monotone = abs_errors.windows(2).all(|w| w[1] < w[0]);
    if !monotone {
        log::warn!("sweep errors are not monotone: {abs_errors:?}");
    }
    let scale = limit.abs().max(f64::MIN_POSITIVE);
    let converged = monotone && abs_errors.last().is_some_and(|&e| e <= case.rel_tol * scale);
    Ok(EpsilonSweep {
        t: case.t,
        limit,
        rows,
        abs_errors,
        slope,
        monotone,
        rel_tol: case.rel_tol,
        verdict: if converged { Verdict::Converged } else { Verdict::Inconclusive },
    })
}

/// One (epsilon, value) sample of a growth or decay law.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RateRow {
    pub epsilon: f64,
    pub value: f64,
}

/// Fitted power law over an epsilon list.
#[derive(Clone, Debug, Serialize)]
pub struct RateReport {
    pub rows: Vec<RateRow>,
    pub slope: f64,
}

impl RateReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,value\n");
        for row in &self.rows {
            out.push_str(&format!("{:.17e},{:.17e}\n", row.epsilon, row.value));
        }
        out
    }
}

/// Divergence study: mollifier-law data, compactly supported profile, h
/// identically one on the reachable region.
#[derive(Clone, Debug)]
pub struct DivergenceCase {
    pub grid: Grid3D,
    pub profile: Profile3d,
    pub law: ScalingLaw,
    pub mass: f64,
    pub t: f64,
    pub h: TestFunction3d,
    pub epsilons: Vec<f64>,
}

const PROBE_DIRECTIONS: [[f64; 3]; 14] = {
    let d = 0.577_350_269_189_625_7;
    [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
        [d, d, d],
        [d, d, -d],
        [d, -d, d],
        [d, -d, -d],
        [-d, d, d],
        [-d, d, -d],
        [-d, -d, d],
        [-d, -d, -d],
    ]
};

/// Measures the growth exponent of the pairing as epsilon shrinks. Under
/// the mollifier law with h = 1 on the reachable region the pairing equals
/// the squared norm, which grows like eps^{-3}; the square-root law stays
/// flat at 1.
pub fn divergence_check(case: &DivergenceCase) -> Result<RateReport> {
    validate_epsilons(&case.epsilons, 2)?;
    let reach = case.t.abs() + case.epsilons[0] * case.profile.decay_radius();
    for step in 0..=4 {
        let r = reach * step as f64 / 4.0;
        for dir in PROBE_DIRECTIONS {
            let x = [r * dir[0], r * dir[1], r * dir[2]];
            if (case.h.eval(x) - 1.0).abs() > 1e-12 {
                return Err(DiracError::Check(format!(
                    "test function must equal one on the reachable ball of radius {reach:.3}; \
                     found {} at radius {r:.3}",
                    case.h.eval(x)
                )));
            }
        }
    }
    let rows: Result<Vec<RateRow>> = case
        .epsilons
        .par_iter()
        .map(|&eps| {
            let fam = Family3d::new(case.profile.clone(), case.law, eps)?;
            let field = SpinorField3D::from_family(case.grid, &fam);
            let evolved = evolve_3d_spectral(&field, case.t, case.mass);
            let pairing = pairing_3d(&evolved, &case.h, eps)?;
            Ok(RateRow { epsilon: eps, value: pairing.value })
        })
        .collect();
    let rows = rows?;
    let inv: Vec<f64> = rows.iter().map(|r| 1.0 / r.epsilon).collect();
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let slope = loglog_slope(&inv, &values)?;
    Ok(RateReport { rows, slope })
}

/// Pairs the field itself (not its density) against h and fits the decay
/// of the magnitude; the square-root law drives it to zero like sqrt(eps).
pub fn weak_zero_sweep_1d(
    grid: Grid1D,
    profile: &Profile1d,
    mass: f64,
    t: f64,
    h: &TestFunction1d,
    epsilons: &[f64],
) -> Result<RateReport> {
    validate_epsilons(epsilons, 2)?;
    check_support_1d(h, grid)?;
    let rows: Result<Vec<RateRow>> = epsilons
        .par_iter()
        .map(|&eps| {
            let fam = Family1d::new(profile.clone(), ScalingLaw::SqrtDelta, eps)?;
            let field = SpinorField1D::from_family(grid, &fam);
            let evolved = evolve_1d(&field, t, mass);
            let mut p = [C64::new(0.0, 0.0); 2];
            for j in 0..grid.n() {
                let w = h.eval(grid.x(j));
                p[0] += evolved.component(0)[j] * w;
                p[1] += evolved.component(1)[j] * w;
            }
            let value = grid.dx() * (p[0].norm_sqr() + p[1].norm_sqr()).sqrt();
            Ok(RateRow { epsilon: eps, value })
        })
        .collect();
    let rows = rows?;
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let slope = fit_convergence_order(epsilons, &values)?;
    Ok(RateReport { rows, slope })
}

/// lambda(eta/eps + xi) - lambda(eta/eps); converges to sgn(eta) xi.
pub fn phase_gap_1d(eta: f64, xi: f64, eps: f64, m: f64) -> Result<f64> {
    if eta == 0.0 {
        return Err(DiracError::Check("phase gap is undefined at eta = 0".into()));
    }
    if eps <= 0.0 {
        return Err(DiracError::Config("epsilon must be positive".into()));
    }
    let d = Dispersion::new(m);
    Ok(d.lambda_1d(eta / eps + xi) - d.lambda_1d(eta / eps))
}

pub fn phase_gap_limit_1d(eta: f64, xi: f64) -> f64 {
    xi * eta.signum()
}

/// lambda(eta/eps + xi) - lambda(eta/eps); converges to <eta, xi>/|eta|.
pub fn phase_gap_3d(eta: [f64; 3], xi: [f64; 3], eps: f64, m: f64) -> Result<f64> {
    let en = (eta[0] * eta[0] + eta[1] * eta[1] + eta[2] * eta[2]).sqrt();
    if en == 0.0 {
        return Err(DiracError::Check("phase gap is undefined at eta = 0".into()));
    }
    if eps <= 0.0 {
        return Err(DiracError::Config("epsilon must be positive".into()));
    }
    let d = Dispersion::new(m);
    let shifted = [eta[0] / eps + xi[0], eta[1] / eps + xi[1], eta[2] / eps + xi[2]];
    let base = [eta[0] / eps, eta[1] / eps, eta[2] / eps];
    Ok(d.lambda_3d(shifted) - d.lambda_3d(base))
}

pub fn phase_gap_limit_3d(eta: [f64; 3], xi: [f64; 3]) -> f64 {
    let en = (eta[0] * eta[0] + eta[1] * eta[1] + eta[2] * eta[2]).sqrt();
    assert!(en > 0.0, "limit is undefined at eta = 0");
    (eta[0] * xi[0] + eta[1] * xi[1] + eta[2] * xi[2]) / en
}

/// Inner products between branch eigenvectors at shifted and unshifted
/// momenta. `mixed[s][s']` pairs pos_s(eta/eps + xi) with neg_s'(eta/eps);
/// `same[s][s']` pairs the two pos branches.
#[derive(Clone, Copy, Debug)]
pub struct OverlapTable {
    pub mixed: [[C64; 2]; 2],
    pub same: [[C64; 2]; 2],
}

/// As eps shrinks the mixed entries vanish linearly while `same` tends to
/// the identity: the positive and negative branches decouple.
pub fn mixed_overlap(eta: [f64; 3], xi: [f64; 3], eps: f64, m: f64) -> Result<OverlapTable> {
    if eps <= 0.0 {
        return Err(DiracError::Config("epsilon must be positive".into()));
    }
    let base = [eta[0] / eps, eta[1] / eps, eta[2] / eps];
    let shifted = [base[0] + xi[0], base[1] + xi[1], base[2] + xi[2]];
    let disp = Dispersion::new(m);
    for k in [base, shifted] {
        if disp.lambda_3d(k) == 0.0 {
            return Err(DiracError::Check(
                "overlap is undefined where the symbol degenerates (k = 0, m = 0)".into(),
            ));
        }
    }
    if base == [0.0; 3] || shifted == [0.0; 3] {
        return Err(DiracError::Check("overlap needs nonzero momenta on both sides".into()));
    }
    let a = eigenbasis_3d(shifted, disp);
    let b = eigenbasis_3d(base, disp);
    let mut mixed = [[C64::new(0.0, 0.0); 2]; 2];
    let mut same = [[C64::new(0.0, 0.0); 2]; 2];
    for s in 0..2 {
        for sp in 0..2 {
            mixed[s][sp] = a.pos[s].dot(&b.neg[sp]);
            same[s][sp] = a.pos[s].dot(&b.pos[sp]);
        }
    }
    Ok(OverlapTable { mixed, same })
}

/// Oracle result: the double-integral value and its internal sanity data.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OraclePairing {
    pub value: f64,
    /// |imaginary part| relative to the value; the true pairing is real.
    pub imag_residue: f64,
    /// max over quadrature nodes of |term| - g(eta, xi) for the dominating
    /// bound g = sup|phi-hat| |phi-hat(eta)| |h-hat(-xi)|; <= 0 when the
    /// bound holds everywhere.
    pub domination_margin: f64,
    pub eta_nodes: usize,
    pub xi_nodes: usize,
}

/// Expands a probe radius until the amplitude falls below `floor` (with a
/// backstop against functions that never decay).
fn probe_range<F: Fn(f64) -> Result<f64>>(amp: F, floor: f64) -> Result<f64> {
    let mut r = 1.0;
    while r < 1e4 {
        let outer = amp(r)?.max(amp(-r)?);
        let inner = amp(0.8 * r)?.max(amp(-0.8 * r)?);
        if outer < floor && inner < floor {
            return Ok(r);
        }
        r *= 1.4;
    }
    Err(DiracError::Quadrature(
        "transform amplitude does not decay below the probe floor".into(),
    ))
}

/// Computes the pairing directly as a double momentum integral, with no
/// grid and no evolution: the density in transform variables splits into
/// four branch products carrying phases
/// exp(i t (s lambda(eta/eps) - s' lambda(eta/eps + xi))), integrated
/// against the transform of h. Independent ground truth for the grid route.
pub fn pairing_oracle_1d(
    profile: &Profile1d,
    eps: f64,
    t: f64,
    m: f64,
    h: &TestFunction1d,
) -> Result<OraclePairing> {
    if eps <= 0.0 {
        return Err(DiracError::Config("epsilon must be positive".into()));
    }
    let shape = profile.shape().clone();
    let shape_sup = shape.fourier(0.0).abs();

    let h_peak = h.fourier(0.0)?.norm();
    let r_xi = probe_range(|k| h.fourier(k).map(|v| v.norm()), 1e-13 * h_peak.max(1e-300))?;
    let r_eta_core = probe_range(|k| Ok(shape.fourier(k).abs()), 1e-13 * shape_sup)?;
    let r_eta = r_eta_core + eps * r_xi;

    let (gl_nodes, gl_weights) = gauss_legendre(16);

    // xi panels resolve both h-hat and the xi-direction oscillation, whose
    // rate is at most t.
    let xi_width = (std::f64::consts::PI / (3.0 * t.abs().max(0.5))).min(0.6);
    let xi_panels = ((2.0 * r_xi / xi_width).ceil() as usize).max(2);
    let mut xi_samples = Vec::with_capacity(xi_panels * 16);
    for p in 0..xi_panels {
        let a = -r_xi + 2.0 * r_xi * p as f64 / xi_panels as f64;
        let b = -r_xi + 2.0 * r_xi * (p + 1) as f64 / xi_panels as f64;
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (node, weight) in gl_nodes.iter().zip(&gl_weights) {
            let xi = mid + half * node;
            xi_samples.push((xi, half * weight, h.fourier(-xi)?));
        }
    }

    // eta panels split at 0 (the limit phase has a kink there) and are
    // sized to the fast oscillation rate 2t/eps.
    let eta_width = (std::f64::consts::PI * eps / (3.0 * t.abs().max(1e-9))).min(0.5);
    let side_panels = ((r_eta / eta_width).ceil() as usize).max(2);
    let mut panels = Vec::with_capacity(2 * side_panels);
    for side in [-1.0f64, 1.0] {
        for p in 0..side_panels {
            let a = side * r_eta * p as f64 / side_panels as f64;
            let b = side * r_eta * (p + 1) as f64 / side_panels as f64;
            panels.push((a.min(b), a.max(b)));
        }
    }

    let disp = Dispersion::new(m);
    let partials: Vec<(C64, f64)> = panels
        .par_iter()
        .map(|&(a, b)| {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            let mut acc = C64::new(0.0, 0.0);
            let mut margin = f64::NEG_INFINITY;
            for (node, weight) in gl_nodes.iter().zip(&gl_weights) {
                let eta = mid + half * node;
                let w_eta = half * weight;
                let k = eta / eps;
                let ebk = eigenbasis_1d(k, disp);
                let phi = profile.fourier(eta);
                let bra = [phi.dot(&ebk.pos), phi.dot(&ebk.neg)];
                let g_eta = shape_sup * phi.norm();
                for &(xi, w_xi, h_hat) in &xi_samples {
                    let eb2 = eigenbasis_1d(k + xi, disp);
                    let phi2 = profile.fourier(eta + eps * xi);
                    let ket = [eb2.pos.dot(&phi2), eb2.neg.dot(&phi2)];
                    let overlap = [
                        [ebk.pos.dot(&eb2.pos), ebk.pos.dot(&eb2.neg)],
                        [ebk.neg.dot(&eb2.pos), ebk.neg.dot(&eb2.neg)],
                    ];
                    let g = g_eta * h_hat.norm();
                    for (s, s_sign) in [(0usize, 1.0f64), (1, -1.0)] {
                        for (sp, sp_sign) in [(0usize, 1.0f64), (1, -1.0)] {
                            let term = bra[s] * overlap[s][sp] * ket[sp] * h_hat;
                            margin = margin.max(term.norm() - g);
                            let phase = C64::from_polar(
                                1.0,
                                t * (s_sign * ebk.lambda - sp_sign * eb2.lambda),
                            );
                            acc += phase * term * (w_eta * w_xi);
                        }
                    }
                }
            }
            (acc, margin)
        })
        .collect();

    // Sequential fold in panel order keeps the sum deterministic.
    let mut total = C64::new(0.0, 0.0);
    let mut margin = f64::NEG_INFINITY;
    for (acc, m_panel) in partials {
        total += acc;
        margin = margin.max(m_panel);
    }
    total /= SQRT_TWO_PI;
    Ok(OraclePairing {
        value: total.re,
        imag_residue: total.im.abs() / (1.0 + total.re.abs()),
        domination_margin: margin,
        eta_nodes: panels.len() * 16,
        xi_nodes: xi_samples.len(),
    })
}

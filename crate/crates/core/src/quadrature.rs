//! Quadrature rules used by the limit diagnostics: Gauss-Legendre on
//! intervals, composite and adaptive variants, quadrature on the unit
//! sphere, and the log-log slope fit for convergence-rate estimates.

use crate::error::{DiracError, Result};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Recurrence for P_n(x) and P'_n(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Integrate f over [a, b] with an n-point Gauss-Legendre rule.
pub fn integrate_gl<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(weights.iter())
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Composite Gauss-Legendre: [a, b] split into `panels` equal pieces, an
/// n-point rule on each.
pub fn integrate_composite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| integrate_gl(f, a + p as f64 * h, a + (p + 1) as f64 * h, n))
        .sum()
}

/// Panel-doubling integration of f over [a, b] until successive composite
/// values agree to `tol` (absolute + relative mix), or the panel budget runs
/// out.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let mut panels = 4;
    let mut prev = integrate_composite(f, a, b, 16, panels);
    for _ in 0..12 {
        panels *= 2;
        let next = integrate_composite(f, a, b, 16, panels);
        if (next - prev).abs() <= tol * (1.0 + next.abs()) {
            return Ok(next);
        }
        prev = next;
    }
    Err(DiracError::Quadrature(format!(
        "panel doubling on [{a}, {b}] did not settle to tol {tol}"
    )))
}

/// Radial integral of f over [0, infinity): integrates on [0, r_max] where
/// r_max is grown until the last panel contributes below `tail_tol`.
pub fn integrate_radial<F: Fn(f64) -> f64>(f: &F, tail_tol: f64) -> Result<f64> {
    let mut r_max = 4.0;
    loop {
        let tail = integrate_composite(f, r_max, 2.0 * r_max, 16, 8).abs();
        if tail < tail_tol {
            break;
        }
        r_max *= 2.0;
        if r_max > 1e6 {
            return Err(DiracError::Quadrature(
                "radial integrand does not decay".into(),
            ));
        }
    }
    integrate_adaptive(f, 0.0, 2.0 * r_max, tail_tol)
}

/// A quadrature rule on the unit sphere: unit direction vectors and weights
/// summing to the sphere area 4 pi.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn integrate<F: Fn([f64; 3]) -> f64>(&self, f: F) -> f64 {
        self.points
            .iter()
            .zip(self.weights.iter())
            .map(|(&p, &w)| w * f(p))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Octahedrally symmetric rules, exact for spherical polynomials up to the
/// stated degree. Weights here are normalized to sum to 1 and then scaled
/// by 4 pi.
///
/// * 6 points (vertices), degree 3
/// * 14 points (vertices + cube corners), degree 5
/// * 26 points (vertices + edge midpoints + cube corners), degree 7
pub fn sphere_rule_octahedral(points: usize) -> SphereRule {
    let fourpi = 4.0 * std::f64::consts::PI;
    let vertices: Vec<[f64; 3]> = vec![
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    let c = 1.0 / 3.0_f64.sqrt();
    let corners: Vec<[f64; 3]> = (0..8)
        .map(|i| {
            [
                if i & 1 == 0 { c } else { -c },
                if i & 2 == 0 { c } else { -c },
                if i & 4 == 0 { c } else { -c },
            ]
        })
        .collect();
    let e = 1.0 / 2.0_f64.sqrt();
    let mut edges: Vec<[f64; 3]> = Vec::with_capacity(12);
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let mut p = [0.0; 3];
            p[i] = si * e;
            p[j] = sj * e;
            edges.push(p);
        }
    }

    let (pts, wts): (Vec<[f64; 3]>, Vec<f64>) = match points {
        6 => (vertices, vec![fourpi / 6.0; 6]),
        14 => {
            let mut p = vertices;
            p.extend(corners);
            let mut w = vec![fourpi / 15.0; 6];
            w.extend(vec![fourpi * 3.0 / 40.0; 8]);
            (p, w)
        }
        26 => {
            let mut p = vertices;
            p.extend(edges);
            p.extend(corners);
            let mut w = vec![fourpi / 21.0; 6];
            w.extend(vec![fourpi * 4.0 / 105.0; 12]);
            w.extend(vec![fourpi * 27.0 / 840.0; 8]);
            (p, w)
        }
        _ => panic!("octahedral rule sizes are 6, 14, 26"),
    };
    SphereRule { points: pts, weights: wts }
}

/// Product rule: n-point Gauss-Legendre in cos(theta) crossed with 2n
/// uniform azimuthal points. Exact for high spherical-harmonic degree and
/// refinable by increasing n.
pub fn sphere_rule_product(n: usize) -> SphereRule {
    let (nodes, weights) = gauss_legendre(n);
    let n_phi = 2 * n;
    let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
    let mut points = Vec::with_capacity(n * n_phi);
    let mut wts = Vec::with_capacity(n * n_phi);
    for (ct, w) in nodes.iter().zip(weights.iter()) {
        let st = (1.0 - ct * ct).sqrt();
        for q in 0..n_phi {
            let phi = q as f64 * dphi;
            points.push([st * phi.cos(), st * phi.sin(), *ct]);
            wts.push(w * dphi);
        }
    }
    SphereRule { points, weights: wts }
}

/// Integrate over the sphere with product rules of increasing order until
/// two successive refinements agree to `tol`.
pub fn sphere_integrate_adaptive<F: Fn([f64; 3]) -> f64>(f: &F, tol: f64) -> Result<f64> {
    let mut n = 8;
    let mut prev = sphere_rule_product(n).integrate(f);
    for _ in 0..6 {
        n *= 2;
        let next = sphere_rule_product(n).integrate(f);
        if (next - prev).abs() <= tol * (1.0 + next.abs()) {
            return Ok(next);
        }
        prev = next;
    }
    Err(DiracError::Quadrature(format!(
        "sphere refinement did not settle to tol {tol}"
    )))
}

/// Least-squares slope of log(err) against log(eps), using the smallest
/// `ceil(len/2)` eps values (the asymptotic half of the sweep). Pairs with
/// non-positive error are dropped; at least two usable pairs are required.
pub fn fit_convergence_order(eps: &[f64], err: &[f64]) -> Result<f64> {
    assert_eq!(eps.len(), err.len());
    let mut pairs: Vec<(f64, f64)> = eps
        .iter()
        .zip(err.iter())
        .filter(|(&e, &r)| e > 0.0 && r > 0.0)
        .map(|(&e, &r)| (e, r))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let keep = pairs.len().div_ceil(2).max(2);
    if pairs.len() < 2 {
        return Err(DiracError::Quadrature(
            "need at least two positive (eps, err) pairs to fit a slope".into(),
        ));
    }
    let pairs = &pairs[..keep.min(pairs.len())];
    let n = pairs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(e, r) in pairs {
        let x = e.ln();
        let y = r.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(DiracError::Quadrature("degenerate eps values".into()));
    }
    Ok((n * sxy - sx * sy) / denom)
}

/// Least-squares slope of log(y) against log(x) using every point. Unlike
/// [`fit_convergence_order`] this makes no asymptotic-tail selection, which
/// is what growth fits (y increasing in x) need.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    assert_eq!(x.len(), y.len());
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y.iter())
        .filter(|(&a, &b)| a > 0.0 && b > 0.0)
        .map(|(&a, &b)| (a.ln(), b.ln()))
        .collect();
    if pairs.len() < 2 {
        return Err(DiracError::Quadrature(
            "need at least two positive (x, y) pairs to fit a slope".into(),
        ));
    }
    let n = pairs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(a, b) in &pairs {
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(DiracError::Quadrature("degenerate x values".into()));
    }
    Ok((n * sxy - sx * sy) / denom)
}

//! Declarative experiment descriptions.
//!
//! Experiments are TOML files: profile, scaling law, mass, times, epsilon
//! list, test function, grid, optional external-field block. Validation
//! checks every cross-field constraint under a named rule and returns a
//! normalized copy with the grid filled in when it was left out; normalized
//! specs construct the domain objects directly. Run manifests tie outputs
//! to the exact spec text through a content hash.

use crate::error::{DiracError, Result};
use crate::extfield::{SpaceTimeScalar3d, SpaceTimeScalar1d};
use crate::grid::{Grid1D, Grid3D};
use crate::regularization::{Profile1d, Profile3d, ScalingLaw, Shape1d, Shape3d};
use crate::testfn::{TestFunction1d, TestFunction3d};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

const DOMAIN_MARGIN_1D: f64 = 0.5;
const DOMAIN_MARGIN_3D: f64 = 0.25;
const MAX_POINTS_1D: usize = 1 << 24;
const MAX_POINTS_3D: usize = 192;

/// Shape of the concentration profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Gaussian { sigma: f64 },
    Bump { radius: f64 },
}

/// Spinor coefficients attached to the profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoeffSpec {
    /// (1, 1)/sqrt(2); one spatial dimension.
    Aligned,
    /// (r, i r) with r = 1/sqrt(2); one spatial dimension.
    Orthogonal,
    /// (cos angle, sin angle); one spatial dimension.
    Angle { angle: f64 },
    /// (1, 0, 0, 0); three spatial dimensions.
    FirstComponent,
    /// Explicit [re, im] pairs, two or four of them; normalized on
    /// validation.
    Explicit { values: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub shape: ShapeSpec,
    pub coefficients: CoeffSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunctionSpec {
    Gaussian { center: Vec<f64>, width: f64 },
    Bump { center: Vec<f64>, radius: f64 },
    Plateau { center: Vec<f64>, inner: f64, outer: f64 },
    One,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub points: usize,
    pub half_length: f64,
}

/// External-field run attached to a 3d experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExternalFieldSpec {
    /// B carries only the mass block; cross-checks the free propagator.
    Free { t_span: f64, dt: f64 },
    /// Scalar Gaussian pulse potential; drives the refinement study.
    Pulse { amplitude: f64, t0: f64, tau: f64, width: f64, t_span: f64, dt: f64 },
    /// Log-scaled Coulomb potential swept over the epsilon list.
    Coulomb { q: f64, t_span: f64, dt: f64 },
}

fn default_rel_tol() -> f64 {
    0.05
}

fn default_output_dir() -> String {
    "out".to_owned()
}

/// One experiment: everything a run needs, deserialized from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub dimension: u8,
    pub mass: f64,
    pub times: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub scaling_law: ScalingLaw,
    #[serde(default)]
    pub seed: u64,
    /// Relative error target for sweep verdicts.
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    pub profile: ProfileSpec,
    pub test_function: TestFunctionSpec,
    /// Absent grids are derived from the resolution rules on validation.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub external_field: Option<ExternalFieldSpec>,
}

pub fn parse_spec(text: &str) -> Result<ExperimentSpec> {
    toml::from_str(text).map_err(|e| DiracError::Parse(e.to_string()))
}

pub fn load_spec(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_spec(&text)
}

fn rule(name: &str, detail: String) -> DiracError {
    DiracError::ConfigRule { rule: name.to_owned(), detail }
}

impl ShapeSpec {
    fn decay_radius(&self) -> Result<f64> {
        Ok(match self {
            ShapeSpec::Gaussian { sigma } => Shape1d::gaussian(*sigma)?.decay_radius(),
            ShapeSpec::Bump { radius } => *radius,
        })
    }
}

impl TestFunctionSpec {
    fn center(&self) -> &[f64] {
        match self {
            TestFunctionSpec::Gaussian { center, .. }
            | TestFunctionSpec::Bump { center, .. }
            | TestFunctionSpec::Plateau { center, .. } => center,
            TestFunctionSpec::One => &[],
        }
    }

    /// Extent of the support from the origin along the widest axis; None
    /// for the unbounded constant.
    fn reach(&self) -> Option<f64> {
        let radius = match self {
            TestFunctionSpec::Gaussian { width, .. } => {
                match TestFunction1d::gaussian(0.0, *width) {
                    Ok(h) => h.support_radius(),
                    Err(_) => return Some(f64::INFINITY),
                }
            }
            TestFunctionSpec::Bump { radius, .. } => *radius,
            TestFunctionSpec::Plateau { outer, .. } => *outer,
            TestFunctionSpec::One => return None,
        };
        let center = self.center().iter().fold(0.0f64, |a, c| a.max(c.abs()));
        Some(center + radius)
    }
}

impl ExperimentSpec {
    fn t_max(&self) -> f64 {
        self.times.iter().fold(0.0f64, |a, &t| a.max(t.abs()))
    }

    fn eps_min(&self) -> f64 {
        self.epsilons.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn eps_max(&self) -> f64 {
        self.epsilons.iter().copied().fold(0.0f64, f64::max)
    }

    /// Spatial step bound from the concentration scale.
    fn dx_limit(&self) -> f64 {
        if self.dimension == 1 {
            self.eps_min() / 8.0
        } else {
            self.eps_min()
        }
    }

    /// Domain bound: evolution reach plus profile tails with a safety
    /// margin, and never less than the test function needs.
    fn extent_limit(&self, profile_decay: f64) -> f64 {
        let h_reach = self.test_function.reach().unwrap_or(0.0);
        if self.dimension == 1 {
            (self.t_max() + profile_decay / self.eps_min() + DOMAIN_MARGIN_1D).max(h_reach)
        } else {
            (self.t_max() + self.eps_max() * profile_decay + DOMAIN_MARGIN_3D).max(h_reach)
        }
    }

    fn derive_grid(&self, profile_decay: f64) -> Result<GridSpec> {
        let half_length = self.extent_limit(profile_decay);
        if !half_length.is_finite() {
            return Err(rule(
                "grid_derivation",
                "cannot derive a grid for an unbounded test function reach".into(),
            ));
        }
        let dx_max = self.dx_limit();
        if self.dimension == 1 {
            let mut points = 8usize;
            while 2.0 * half_length / points as f64 > dx_max {
                points *= 2;
                if points > MAX_POINTS_1D {
                    return Err(rule(
                        "grid_derivation",
                        format!("resolving eps_min needs more than {MAX_POINTS_1D} points"),
                    ));
                }
            }
            Ok(GridSpec { points, half_length })
        } else {
            let mut points = (2.0 * half_length / dx_max).ceil() as usize;
            if points % 2 == 1 {
                points += 1;
            }
            points = points.max(16);
            if points > MAX_POINTS_3D {
                return Err(rule(
                    "grid_derivation",
                    format!("resolving eps_min needs more than {MAX_POINTS_3D} points per axis"),
                ));
            }
            Ok(GridSpec { points, half_length })
        }
    }

    /// Checks every cross-field constraint. On success the returned spec is
    /// normalized: grid filled in, explicit coefficients rescaled to unit
    /// norm. Violations are collected, not short-circuited, and each names
    /// its rule.
    pub fn validate(&self) -> std::result::Result<ExperimentSpec, Vec<DiracError>> {
        let mut errors = Vec::new();
        let mut normalized = self.clone();

        if self.dimension != 1 && self.dimension != 3 {
            errors.push(rule(
                "dimension_supported",
                format!("dimension must be 1 or 3, got {}", self.dimension),
            ));
            // Every later rule needs the dimension; stop here.
            return Err(errors);
        }
        let dim = self.dimension as usize;

        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            errors.push(rule("mass_nonnegative", format!("mass must be >= 0, got {}", self.mass)));
        }
        if self.times.is_empty() || !self.times.iter().all(|t| t.is_finite()) {
            errors.push(rule("times_finite", "need a nonempty list of finite times".into()));
        }
        if self.epsilons.is_empty() || !self.epsilons.iter().all(|&e| e.is_finite() && e > 0.0) {
            errors.push(rule(
                "epsilon_positive",
                format!("epsilon list must be nonempty and positive, got {:?}", self.epsilons),
            ));
        } else if !self.epsilons.windows(2).all(|w| w[1] < w[0]) {
            errors.push(rule(
                "epsilon_not_decreasing",
                format!("epsilon list must be strictly decreasing, got {:?}", self.epsilons),
            ));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            errors.push(rule("rel_tol_positive", format!("rel_tol must be > 0, got {}", self.rel_tol)));
        }

        // Shape parameters must build.
        let profile_decay = match self.profile.shape.decay_radius() {
            Ok(r) => Some(r),
            Err(e) => {
                errors.push(rule("profile_shape", e.to_string()));
                None
            }
        };

        // Coefficients must match the dimension and carry some weight.
        let spinor_len = 2 * dim.min(2);
        match &self.profile.coefficients {
            CoeffSpec::Aligned | CoeffSpec::Orthogonal | CoeffSpec::Angle { .. } if dim != 1 => {
                errors.push(rule(
                    "coefficients_dimension",
                    "aligned/orthogonal/angle coefficients are two-spinors; use dimension = 1"
                        .into(),
                ));
            }
            CoeffSpec::FirstComponent if dim != 3 => {
                errors.push(rule(
                    "coefficients_dimension",
                    "first_component coefficients are four-spinors; use dimension = 3".into(),
                ));
            }
            CoeffSpec::Explicit { values } => {
                if values.len() != spinor_len {
                    errors.push(rule(
                        "coefficients_dimension",
                        format!(
                            "dimension {} needs {} coefficient pairs, got {}",
                            self.dimension,
                            spinor_len,
                            values.len()
                        ),
                    ));
                } else {
                    let norm_sqr: f64 =
                        values.iter().map(|[re, im]| re * re + im * im).sum();
                    if !(norm_sqr.is_finite() && norm_sqr > 0.0) {
                        errors.push(rule(
                            "coefficients_nonzero",
                            "explicit coefficients must be finite and not all zero".into(),
                        ));
                    } else if (norm_sqr.sqrt() - 1.0).abs() > 1e-12 {
                        let inv = 1.0 / norm_sqr.sqrt();
                        normalized.profile.coefficients = CoeffSpec::Explicit {
                            values: values.iter().map(|[re, im]| [re * inv, im * inv]).collect(),
                        };
                    }
                }
            }
            _ => {}
        }

        // Test function shape and placement.
        let center_len = self.test_function.center().len();
        let center_ok = match self.test_function {
            TestFunctionSpec::One => true,
            _ => center_len == dim,
        };
        if !center_ok {
            errors.push(rule(
                "test_function_dimension",
                format!("test function center has {center_len} entries, dimension is {dim}"),
            ));
        }
        match &self.test_function {
            TestFunctionSpec::Gaussian { width, .. } if !(*width > 0.0) => {
                errors.push(rule("test_function_shape", format!("width must be > 0, got {width}")));
            }
            TestFunctionSpec::Bump { radius, .. } if !(*radius > 0.0) => {
                errors.push(rule("test_function_shape", format!("radius must be > 0, got {radius}")));
            }
            TestFunctionSpec::Plateau { inner, outer, .. } if !(*inner > 0.0 && outer > inner) => {
                errors.push(rule(
                    "test_function_shape",
                    format!("plateau needs 0 < inner < outer, got inner {inner}, outer {outer}"),
                ));
            }
            _ => {}
        }

        // Grid: derive when absent, then check resolution and extent.
        if errors.is_empty() {
            let decay = profile_decay.expect("shape errors already collected");
            let grid_spec = match self.grid {
                Some(g) => g,
                None => match self.derive_grid(decay) {
                    Ok(g) => g,
                    Err(e) => {
                        errors.push(e);
                        return Err(errors);
                    }
                },
            };
            let dx = 2.0 * grid_spec.half_length / grid_spec.points as f64;
            let build_result = if dim == 1 {
                Grid1D::new(grid_spec.points, grid_spec.half_length).map(|_| ())
            } else {
                Grid3D::new(grid_spec.points, grid_spec.half_length).map(|_| ())
            };
            if let Err(e) = build_result {
                errors.push(rule("grid_invalid", e.to_string()));
            } else {
                if grid_spec.points < 16 && dim == 3 {
                    errors.push(rule(
                        "grid_points_minimum",
                        format!("3d runs need at least 16 points per axis, got {}", grid_spec.points),
                    ));
                }
                if dx > self.dx_limit() * (1.0 + 1e-12) {
                    errors.push(rule(
                        "grid_resolution",
                        format!(
                            "dx = {dx:.6} exceeds the concentration bound {:.6} for eps_min = {}",
                            self.dx_limit(),
                            self.eps_min()
                        ),
                    ));
                }
                let needed = self.extent_limit(decay);
                if grid_spec.half_length + 1e-12 < needed {
                    errors.push(rule(
                        "grid_extent",
                        format!(
                            "half-length {} is below the required reach {needed:.3}",
                            grid_spec.half_length
                        ),
                    ));
                }
                if let Some(reach) = self.test_function.reach() {
                    if reach > grid_spec.half_length {
                        errors.push(rule(
                            "test_function_support",
                            format!(
                                "test function reaches {reach:.3} but the domain ends at {}",
                                grid_spec.half_length
                            ),
                        ));
                    }
                }
            }
            normalized.grid = Some(grid_spec);
        }

        if let Some(ext) = &self.external_field {
            if self.dimension != 3 {
                errors.push(rule(
                    "external_field_dimension",
                    "external-field runs use the 4-spinor system; set dimension = 3".into(),
                ));
            }
            let (t_span, dt) = match ext {
                ExternalFieldSpec::Free { t_span, dt }
                | ExternalFieldSpec::Pulse { t_span, dt, .. }
                | ExternalFieldSpec::Coulomb { t_span, dt, .. } => (*t_span, *dt),
            };
            if !(dt > 0.0 && t_span > 0.0 && (t_span / dt) <= 1e5) {
                errors.push(rule(
                    "external_field_steps",
                    format!("need dt > 0, t_span > 0 and at most 1e5 steps; got t_span {t_span}, dt {dt}"),
                ));
            } else if ((t_span / dt).round() * dt - t_span).abs() > 1e-9 * t_span.max(1.0) {
                errors.push(rule(
                    "external_field_steps",
                    format!("t_span {t_span} is not a whole number of steps of size {dt}"),
                ));
            }
            if let ExternalFieldSpec::Coulomb { .. } = ext {
                if self.epsilons.iter().any(|&e| e >= 1.0) {
                    errors.push(rule(
                        "external_field_epsilon",
                        "the logarithmic cutoff scaling needs every epsilon in (0, 1)".into(),
                    ));
                }
            }
        }

        if errors.is_empty() {
            Ok(normalized)
        } else {
            Err(errors)
        }
    }

    pub fn grid_1d(&self) -> Result<Grid1D> {
        let g = self
            .grid
            .ok_or_else(|| DiracError::Config("grid not set; validate the spec first".into()))?;
        Grid1D::new(g.points, g.half_length)
    }

    pub fn grid_3d(&self) -> Result<Grid3D> {
        let g = self
            .grid
            .ok_or_else(|| DiracError::Config("grid not set; validate the spec first".into()))?;
        Grid3D::new(g.points, g.half_length)
    }

    pub fn profile_1d(&self) -> Result<Profile1d> {
        let shape = match self.profile.shape {
            ShapeSpec::Gaussian { sigma } => Shape1d::gaussian(sigma)?,
            ShapeSpec::Bump { radius } => Shape1d::bump(radius)?,
        };
        match &self.profile.coefficients {
            CoeffSpec::Aligned => Ok(Profile1d::aligned(shape)),
            CoeffSpec::Orthogonal => Ok(Profile1d::orthogonal_pair(shape)),
            CoeffSpec::Angle { angle } => Ok(Profile1d::angle_pair(shape, *angle)),
            CoeffSpec::Explicit { values } if values.len() == 2 => {
                let c = [C64::new(values[0][0], values[0][1]), C64::new(values[1][0], values[1][1])];
                Profile1d::new(c, shape)
            }
            other => Err(DiracError::Config(format!(
                "coefficients {other:?} do not form a two-spinor"
            ))),
        }
    }

    pub fn profile_3d(&self) -> Result<Profile3d> {
        let shape = match self.profile.shape {
            ShapeSpec::Gaussian { sigma } => Shape3d::gaussian(sigma)?,
            ShapeSpec::Bump { radius } => Shape3d::bump(radius)?,
        };
        match &self.profile.coefficients {
            CoeffSpec::FirstComponent => Ok(Profile3d::first_component(shape)),
            CoeffSpec::Explicit { values } if values.len() == 4 => {
                let mut c = [C64::new(0.0, 0.0); 4];
                for (slot, [re, im]) in c.iter_mut().zip(values) {
                    *slot = C64::new(*re, *im);
                }
                Profile3d::new(c, shape)
            }
            other => Err(DiracError::Config(format!(
                "coefficients {other:?} do not form a four-spinor"
            ))),
        }
    }

    pub fn test_function_1d(&self) -> Result<TestFunction1d> {
        match &self.test_function {
            TestFunctionSpec::Gaussian { center, width } => {
                TestFunction1d::gaussian(center[0], *width)
            }
            TestFunctionSpec::Bump { center, radius } => TestFunction1d::bump(center[0], *radius),
            TestFunctionSpec::Plateau { center, inner, outer } => {
                TestFunction1d::plateau(center[0], *inner, *outer)
            }
            TestFunctionSpec::One => Ok(TestFunction1d::One),
        }
    }

    pub fn test_function_3d(&self) -> Result<TestFunction3d> {
        let c3 = |center: &[f64]| [center[0], center[1], center[2]];
        match &self.test_function {
            TestFunctionSpec::Gaussian { center, width } => {
                TestFunction3d::gaussian(c3(center), *width)
            }
            TestFunctionSpec::Bump { center, radius } => TestFunction3d::bump(c3(center), *radius),
            TestFunctionSpec::Plateau { center, inner, outer } => {
                TestFunction3d::plateau(c3(center), *inner, *outer)
            }
            TestFunctionSpec::One => Ok(TestFunction3d::One),
        }
    }
}

/// Pulse potentials used by external-field runs, pinned to the spec values.
pub fn pulse_scalar_3d(amplitude: f64, t0: f64, tau: f64, width: f64) -> SpaceTimeScalar3d {
    SpaceTimeScalar3d::GaussianPulse { amp: amplitude, t0, tau, center: [0.0; 3], width }
}

pub fn pulse_scalar_1d(amplitude: f64, t0: f64, tau: f64, width: f64) -> SpaceTimeScalar1d {
    SpaceTimeScalar1d::GaussianPulse { amp: amplitude, t0, tau, center: 0.0, width }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Outcome attached to a named check in the manifest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunVerdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct NamedVerdict {
    pub name: String,
    pub verdict: RunVerdict,
}

/// Deterministic record of one run: the spec content hash, the outputs
/// written, and the verdicts of the checks performed.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub spec_sha256: String,
    pub tool_version: String,
    pub wall_seconds: f64,
    pub outputs: Vec<String>,
    pub verdicts: Vec<NamedVerdict>,
}

impl RunManifest {
    pub fn new(spec_text: &str, tool_version: &str) -> Self {
        RunManifest {
            spec_sha256: sha256_hex(spec_text.as_bytes()),
            tool_version: tool_version.to_owned(),
            wall_seconds: 0.0,
            outputs: Vec::new(),
            verdicts: Vec::new(),
        }
    }

    pub fn record(&mut self, name: &str, verdict: RunVerdict) {
        self.verdicts.push(NamedVerdict { name: name.to_owned(), verdict });
    }

    pub fn add_output(&mut self, path: &str) {
        self.outputs.push(path.to_owned());
    }

    /// True when every recorded verdict passed.
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.verdict == RunVerdict::Pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest fields always serialize")
    }
}

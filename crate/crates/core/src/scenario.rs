//! Scenario files (schema `v1`) and the pipeline that runs them.
//!
//! A scenario is a JSON document:
//!
//! ```json
//! {
//!   "schema": "v1",
//!   "name": "kepler",
//!   "bodies": [
//!     {"id": "A", "mass": 1.0, "position": [1, 0, 0], "velocity": [0, 0.5, 0]},
//!     {"id": "B", "mass": 1.0, "properties": {"charge": 0.0}, "position": [0, 0, 0], "velocity": [0, 0, 0]}
//!   ],
//!   "laws": [{"preset": "gravity", "params": {"G": 1.0}}],
//!   "integrator": {"method": "rk4", "step": 0.001, "t_end": 10.0},
//!   "audits": ["momentum", "energy"]
//! }
//! ```
//!
//! Optional blocks: `singularity`, `frames`, `random_frames`,
//! `nonlinear`, `tolerances`, `seed`, `description`, `units`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::audit::{self, AuditId, AuditOutcome, RateIdentity, Verdict, VERLET_ENERGY_TOLERANCE};
use crate::dynamics::{integrate, Method, Trajectory};
use crate::forces::{presets, ForceLaw, Regularization};
use crate::frames::{random_vec, FrameTransform, Mat3};
use crate::nonlinear::{BoundedVelocity, GFunction};
use crate::types::{Body, Vec3};

pub const SCHEMA_VERSION: &str = "v1";
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema: String,
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub units: Option<String>,
    pub bodies: Vec<BodySpec>,
    #[serde(default)]
    pub laws: Vec<LawSpec>,
    #[serde(default)]
    pub singularity: Option<SingularitySpec>,
    #[serde(default)]
    pub frames: Vec<FrameSpec>,
    #[serde(default)]
    pub random_frames: Option<usize>,
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub nonlinear: Option<NonlinearSpec>,
    pub audits: Vec<String>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    pub id: String,
    pub mass: f64,
    #[serde(default)]
    pub properties: BTreeMap<String, f64>,
    pub position: [f64; 3],
    pub velocity: [f64; 3],
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LawSpec {
    pub preset: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Property name for charge-like presets (default `charge`).
    #[serde(default)]
    pub property: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SingularitySpec {
    /// `error` or `soften`
    pub mode: String,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSpec {
    #[serde(default)]
    pub rotation: Option<[[f64; 3]; 3]>,
    #[serde(default)]
    pub translation: [f64; 3],
    #[serde(default)]
    pub boost: [f64; 3],
    #[serde(default)]
    pub time_offset: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    pub method: String,
    pub step: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearSpec {
    /// `lorentz`, `rational` or `galilean`
    pub g: String,
    #[serde(default = "default_c")]
    pub c: f64,
    /// Explicit test velocities, used as light-clock frame boosts.
    #[serde(default)]
    pub velocities: Vec<[f64; 3]>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_baseline")]
    pub baseline: f64,
    /// Random frame boosts for the light-clock audit.
    #[serde(default = "default_boosts")]
    pub boosts: usize,
}

fn default_c() -> f64 {
    1.0
}
fn default_samples() -> usize {
    1000
}
fn default_baseline() -> f64 {
    1.0
}
fn default_boosts() -> usize {
    20
}

/// Input problem: the offending field (or file position) and what is wrong.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for ScenarioError {}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError {
        field: field.into(),
        message: message.into(),
    }
}

/// Velocity-addition settings of a scenario.
#[derive(Debug, Clone)]
pub struct VelocityGroupSettings {
    pub group: GFunction,
    pub velocities: Vec<BoundedVelocity>,
    pub samples: usize,
    pub baseline: f64,
    pub boosts: usize,
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub bodies: (Body, Body),
    pub laws: Vec<ForceLaw>,
    pub frames: Vec<FrameTransform>,
    pub random_frames: usize,
    pub method: Method,
    pub step: f64,
    pub t_end: f64,
    pub velocity_group: Option<VelocityGroupSettings>,
    pub audits: Vec<AuditId>,
    pub tolerances: BTreeMap<AuditId, f64>,
    pub seed: u64,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(path.display().to_string(), e.to_string()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let file: ScenarioFile = serde_json::from_str(text)
            .map_err(|e| invalid(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        Self::from_file(file)
    }

    pub fn from_file(file: ScenarioFile) -> Result<Scenario, ScenarioError> {
        if file.schema != SCHEMA_VERSION {
            return Err(invalid("schema", format!("expected \"{SCHEMA_VERSION}\", got \"{}\"", file.schema)));
        }
        if file.bodies.len() != 2 {
            return Err(invalid("bodies", format!("exactly two bodies are required, got {}", file.bodies.len())));
        }
        let a = build_body(&file.bodies[0], "bodies[0]")?;
        let b = build_body(&file.bodies[1], "bodies[1]")?;

        let regularization = match &file.singularity {
            None => Regularization::default(),
            Some(s) => {
                if !(s.epsilon > 0.0 && s.epsilon.is_finite()) {
                    return Err(invalid("singularity.epsilon", "must be positive"));
                }
                match s.mode.as_str() {
                    "error" => Regularization::Error { epsilon: s.epsilon },
                    "soften" => Regularization::Soften { epsilon: s.epsilon },
                    other => return Err(invalid("singularity.mode", format!("unknown mode `{other}` (expected error or soften)"))),
                }
            }
        };
        let laws = file
            .laws
            .iter()
            .enumerate()
            .map(|(i, l)| build_law(l, &format!("laws[{i}]")).map(|law| law.with_regularization(regularization)))
            .collect::<Result<Vec<_>, _>>()?;

        let frames = file
            .frames
            .iter()
            .enumerate()
            .map(|(i, f)| build_frame(f, &format!("frames[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;

        let method: Method = file
            .integrator
            .method
            .parse()
            .map_err(|e: crate::Error| invalid("integrator.method", e.to_string()))?;
        check_positive(file.integrator.step, "integrator.step")?;
        check_positive(file.integrator.t_end, "integrator.t_end")?;

        let velocity_group = file.nonlinear.as_ref().map(build_velocity_group).transpose()?;

        let mut audits = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, name) in file.audits.iter().enumerate() {
            let id = AuditId::from_name(name).ok_or_else(|| {
                invalid(format!("audits[{i}]"), format!("unknown audit `{name}` (see `galileo-lab audits`)"))
            })?;
            if !seen.insert(id) {
                return Err(invalid(format!("audits[{i}]"), format!("audit `{name}` is listed twice")));
            }
            if id.needs_velocity_group() && velocity_group.is_none() {
                return Err(invalid(format!("audits[{i}]"), format!("audit `{name}` needs a `nonlinear` block")));
            }
            audits.push(id);
        }
        audits.sort();

        let mut tolerances = BTreeMap::new();
        for (name, tol) in &file.tolerances {
            let id = AuditId::from_name(name)
                .ok_or_else(|| invalid(format!("tolerances.{name}"), "unknown audit"))?;
            check_positive(*tol, &format!("tolerances.{name}"))?;
            tolerances.insert(id, *tol);
        }

        Ok(Scenario {
            name: file.name,
            bodies: (a, b),
            laws,
            frames,
            random_frames: file.random_frames.unwrap_or(20),
            method,
            step: file.integrator.step,
            t_end: file.integrator.t_end,
            velocity_group,
            audits,
            tolerances,
            seed: file.seed.unwrap_or(DEFAULT_SEED),
        })
    }

    /// The merged law driving the integration.
    pub fn law(&self) -> ForceLaw {
        ForceLaw::sum(&self.laws)
    }

    pub fn tolerance(&self, id: AuditId) -> f64 {
        if let Some(t) = self.tolerances.get(&id) {
            return *t;
        }
        if id == AuditId::Energy && self.method == Method::Verlet {
            return VERLET_ENERGY_TOLERANCE;
        }
        id.spec().default_tolerance
    }
}

fn check_positive(x: f64, field: &str) -> Result<(), ScenarioError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {x}")))
    }
}

fn check_finite(v: &[f64], field: &str) -> Result<(), ScenarioError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(invalid(field, "components must be finite"))
    }
}

fn build_body(spec: &BodySpec, path: &str) -> Result<Body, ScenarioError> {
    check_positive(spec.mass, &format!("{path}.mass"))?;
    check_finite(&spec.position, &format!("{path}.position"))?;
    check_finite(&spec.velocity, &format!("{path}.velocity"))?;
    let mut body = Body::new(spec.id.clone(), spec.mass, Vec3::from(spec.position), Vec3::from(spec.velocity))
        .map_err(|e| invalid(path, e.to_string()))?;
    for (name, value) in &spec.properties {
        if name == crate::types::MASS {
            return Err(invalid(format!("{path}.properties.{name}"), "mass is set by the `mass` field"));
        }
        body.set_property(name, *value)
            .map_err(|e| invalid(format!("{path}.properties.{name}"), e.to_string()))?;
    }
    Ok(body)
}

fn take_params(spec: &LawSpec, path: &str, allowed: &[(&str, f64)]) -> Result<Vec<f64>, ScenarioError> {
    for key in spec.params.keys() {
        if !allowed.iter().any(|(k, _)| k == key) {
            let names: Vec<&str> = allowed.iter().map(|(k, _)| *k).collect();
            return Err(invalid(
                format!("{path}.params.{key}"),
                format!("unknown parameter for preset `{}` (expected one of: {})", spec.preset, names.join(", ")),
            ));
        }
    }
    allowed
        .iter()
        .map(|(k, default)| {
            let v = spec.params.get(*k).copied().unwrap_or(*default);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(invalid(format!("{path}.params.{k}"), "must be finite"))
            }
        })
        .collect()
}

/// Names accepted in `laws[].preset`.
pub const PRESETS: &[&str] = &["gravity", "coulomb", "spring", "drag", "perp", "quadratic-charge"];

fn build_law(spec: &LawSpec, path: &str) -> Result<ForceLaw, ScenarioError> {
    let property = spec.property.clone().unwrap_or_else(|| "charge".to_string());
    let charge_like = matches!(spec.preset.as_str(), "coulomb" | "quadratic-charge");
    if spec.property.is_some() && !charge_like {
        return Err(invalid(format!("{path}.property"), format!("preset `{}` takes no property", spec.preset)));
    }
    let law = match spec.preset.as_str() {
        "gravity" => presets::gravity(take_params(spec, path, &[("G", 1.0)])?[0]),
        "coulomb" => presets::coulomb(take_params(spec, path, &[("k", 1.0)])?[0], &property),
        "spring" => presets::spring(take_params(spec, path, &[("kappa", 1.0)])?[0]),
        "drag" => presets::drag(take_params(spec, path, &[("gamma", 1.0)])?[0]),
        "perp" => presets::perpendicular(take_params(spec, path, &[("c", 1.0)])?[0]),
        "quadratic-charge" => presets::quadratic_charge(take_params(spec, path, &[("k", 1.0)])?[0], &property),
        other => {
            return Err(invalid(
                format!("{path}.preset"),
                format!("unknown preset `{other}` (expected one of: {})", PRESETS.join(", ")),
            ))
        }
    };
    Ok(law)
}

fn build_frame(spec: &FrameSpec, path: &str) -> Result<FrameTransform, ScenarioError> {
    let rotation = match spec.rotation {
        None => Mat3::identity(),
        Some(rows) => {
            check_finite(rows.as_flattened(), &format!("{path}.rotation"))?;
            Mat3::from_row_slice(rows.as_flattened())
        }
    };
    check_finite(&spec.translation, &format!("{path}.translation"))?;
    check_finite(&spec.boost, &format!("{path}.boost"))?;
    FrameTransform::new(rotation, Vec3::from(spec.translation), Vec3::from(spec.boost), spec.time_offset)
        .map_err(|e| invalid(format!("{path}.rotation"), e.to_string()))
}

fn build_velocity_group(spec: &NonlinearSpec) -> Result<VelocityGroupSettings, ScenarioError> {
    let group = GFunction::from_name(&spec.g, spec.c).map_err(|e| invalid("nonlinear", e.to_string()))?;
    let velocities = spec
        .velocities
        .iter()
        .enumerate()
        .map(|(i, v)| {
            BoundedVelocity::new(Vec3::from(*v), group).map_err(|e| invalid(format!("nonlinear.velocities[{i}]"), e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if spec.samples == 0 {
        return Err(invalid("nonlinear.samples", "must be at least 1"));
    }
    check_positive(spec.baseline, "nonlinear.baseline")?;
    if let GFunction::Galilean { c } = group {
        if let Some((i, v)) = velocities.iter().enumerate().find(|(_, v)| v.speed() >= c) {
            return Err(invalid(
                format!("nonlinear.velocities[{i}]"),
                format!("speed {} must stay below the signal speed {c}", v.speed()),
            ));
        }
    }
    Ok(VelocityGroupSettings {
        group,
        velocities,
        samples: spec.samples,
        baseline: spec.baseline,
        boosts: spec.boosts,
    })
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub step: Option<f64>,
    pub method: Option<Method>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegratorInfo {
    pub method: String,
    pub step: f64,
    pub t_end: f64,
    pub law: String,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub schema: String,
    pub scenario: String,
    pub seed: u64,
    pub integrator: IntegratorInfo,
    pub audits: Vec<AuditOutcome>,
    pub verdict: Verdict,
    /// Set when the main integration failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integration_error: Option<String>,
}

impl AuditReport {
    pub fn all_passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub report: AuditReport,
    pub trajectory: Option<Trajectory>,
}

/// Each audit gets its own stream so results do not depend on which other
/// audits were requested.
fn audit_rng(seed: u64, id: AuditId) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(id as u64 + 1)))
}

/// Runs the scenario's integration and every requested audit.
pub fn run_scenario(scenario: &Scenario, options: &RunOptions) -> Result<RunOutput, ScenarioError> {
    let seed = options.seed.unwrap_or(scenario.seed);
    let step = options.step.unwrap_or(scenario.step);
    check_positive(step, "--step")?;
    let method = options.method.unwrap_or(scenario.method);
    let law = scenario.law();
    if method == Method::Verlet && !law.is_velocity_independent() {
        return Err(invalid(
            "integrator.method",
            format!("verlet needs a velocity-independent law, `{}` depends on velocity", law.name()),
        ));
    }
    let mut scenario = scenario.clone();
    scenario.method = method;
    scenario.step = step;
    let (a, b) = &scenario.bodies;

    let traj = integrate(a, b, &law, scenario.t_end, step, method);
    let integration_error = traj.as_ref().err().map(|e| e.to_string());
    let traj = traj.ok();

    let mut outcomes = Vec::with_capacity(scenario.audits.len());
    for &id in &scenario.audits {
        let tol = scenario.tolerance(id);
        let mut rng = audit_rng(seed, id);
        let needs_traj = || match &traj {
            Some(t) => Ok(t),
            None => Err(AuditOutcome::error(
                id,
                tol,
                format!("integration failed: {}", integration_error.as_deref().unwrap_or("unknown")),
            )),
        };
        let outcome = match id {
            AuditId::FrameGroup => audit::frame_group_audit(&mut rng, 1000, tol),
            AuditId::ObjectivitySweep => {
                let mut frames = scenario.frames.clone();
                frames.extend((0..scenario.random_frames).map(|_| FrameTransform::random(&mut rng, 10.0, 3.0, 5.0)));
                let initial = audit::objectivity_sweep(a, b, 0.0, &law, &frames, tol);
                match &traj {
                    Some(t) => {
                        let (fa, fb) = t.states.last().expect("trajectory has samples");
                        let last = audit::objectivity_sweep(fa, fb, scenario.t_end, &law, &frames, tol);
                        worse(initial, last)
                    }
                    None => initial,
                }
            }
            AuditId::TimeOrder => match needs_traj() {
                Ok(t) => audit::time_order_audit(t, tol),
                Err(o) => o,
            },
            AuditId::Inertia => audit::inertia_audit(a, b, scenario.t_end, step, method, tol),
            AuditId::Momentum => match needs_traj() {
                Ok(t) => audit::momentum_audit(t, tol),
                Err(o) => o,
            },
            AuditId::AngularMomentum => match needs_traj() {
                Ok(t) => audit::angular_momentum_audit(t, tol),
                Err(o) => o,
            },
            AuditId::Energy => match needs_traj() {
                Ok(t) => audit::energy_audit(t, tol),
                Err(o) => o,
            },
            AuditId::MomentumRate => audit::rate_audit(RateIdentity::Momentum, a, b, &law, scenario.t_end, step, method, tol),
            AuditId::Torque => audit::rate_audit(RateIdentity::AngularMomentum, a, b, &law, scenario.t_end, step, method, tol),
            AuditId::BoostCovariance => match needs_traj() {
                Ok(t) => {
                    let boosts: Vec<Vec3> = (0..10).map(|_| random_vec(&mut rng, 1.0)).collect();
                    audit::boost_covariance_audit(t, &boosts, tol)
                }
                Err(o) => o,
            },
            AuditId::PropertyAdditivity => audit::property_additivity_audit(&scenario.laws, a, b, tol),
            AuditId::OplusGroup => {
                let g = scenario.velocity_group.as_ref().expect("validated");
                audit::oplus_group_audit(&mut rng, g.group, g.samples, tol)
            }
            AuditId::InvarianceTheorem => {
                let g = scenario.velocity_group.as_ref().expect("validated");
                audit::invariance_theorem_audit(&mut rng, g.group, g.samples, tol)
            }
            AuditId::LightQuotient => {
                let g = scenario.velocity_group.as_ref().expect("validated");
                let mut boosts = g.velocities.clone();
                boosts.extend((0..g.boosts).map(|_| audit::random_velocity(&mut rng, g.group, 0.99)));
                audit::light_quotient_audit(g.group, g.baseline, &boosts, tol)
            }
        };
        outcomes.push(outcome);
    }

    let verdict = if outcomes.iter().all(|o| o.passed()) {
        Verdict::Pass
    } else if outcomes.iter().any(|o| o.verdict == Verdict::Error) {
        Verdict::Error
    } else {
        Verdict::Fail
    };
    let report = AuditReport {
        schema: SCHEMA_VERSION.to_string(),
        scenario: scenario.name.clone(),
        seed,
        integrator: IntegratorInfo {
            method: method.to_string(),
            step,
            t_end: scenario.t_end,
            law: law.name().to_string(),
            samples: traj.as_ref().map_or(0, |t| t.len()),
        },
        audits: outcomes,
        verdict,
        integration_error,
    };
    Ok(RunOutput { report, trajectory: traj })
}

fn worse(a: AuditOutcome, b: AuditOutcome) -> AuditOutcome {
    let rank = |o: &AuditOutcome| match o.verdict {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
        Verdict::Error => 2,
    };
    match rank(&a).cmp(&rank(&b)) {
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Equal => {
            if b.residual.unwrap_or(0.0) > a.residual.unwrap_or(0.0) {
                b
            } else {
                a
            }
        }
    }
}

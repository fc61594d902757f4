//! Declarative scenario configs. Targets are Euclidean (points, three-point
//! circles and planes, point-direction lines) and converted to CGA when the
//! problem is built.

use std::path::Path;

use cdts_core::cga::{primitives, Multivector};
use cdts_core::kinematics::{DualArmSystem, Pose};
use cdts_core::solvers::{GnOptions, IlqrOptions, MpcOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{SimError, SimResult};
use crate::robot::{self, RobotFile};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub seed: u64,
    /// Amplitude (rad) of uniform noise drawn from `seed` and added to the
    /// initial joints.
    #[serde(default)]
    pub initial_noise: f64,
    pub arms: [ArmConfig; 2],
    pub task: TaskConfig,
    #[serde(default)]
    pub gauss_newton: GnOptions,
    #[serde(default)]
    pub mpc: MpcSettings,
    #[serde(default)]
    pub acceptance: Acceptance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmConfig {
    /// Bundled robot name or a description file relative to the scenario.
    pub robot: String,
    #[serde(default)]
    pub base: Pose,
    /// Initial joints; the robot's home pose when absent.
    #[serde(default)]
    pub initial: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSpec {
    pub point: [f64; 3],
    pub direction: [f64; 3],
}

impl LineSpec {
    pub fn to_line(&self) -> SimResult<Multivector> {
        primitives::line(self.point, self.direction).map_err(|e| SimError::Validation(e.to_string()))
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskConfig {
    /// Either end-effector reaches the point.
    ReachPoint { target: [f64; 3] },
    /// Both end-effectors on the circle through `points`, keeping the
    /// initial relative pose as closely as possible.
    ReachCircle {
        points: [[f64; 3]; 3],
        #[serde(default = "one")]
        objective_weight: f64,
    },
    /// Both end-effectors on the plane through `points`.
    ReachPlane { points: [[f64; 3]; 3] },
    /// End-effector lines (in each end-effector frame) made collinear and
    /// the world `axis` kept fixed by the absolute motor's rotation.
    AlignAxis {
        line1: LineSpec,
        line2: LineSpec,
        axis: LineSpec,
        #[serde(default = "one")]
        alignment_weight: f64,
        #[serde(default = "one")]
        axis_weight: f64,
        /// End-effector separation held by a constraint.
        #[serde(default)]
        grasp_width: Option<f64>,
    },
    /// Receding-horizon control holding a plate between the end-effectors.
    BalancePlate {
        line1: LineSpec,
        line2: LineSpec,
        axis: LineSpec,
        /// Defaults to the initial end-effector separation.
        #[serde(default)]
        grasp_width: Option<f64>,
        #[serde(default)]
        weights: BalanceWeights,
        #[serde(default)]
        perturbations: Vec<Perturbation>,
    },
}

impl TaskConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            TaskConfig::ReachPoint { .. } => "reach_point",
            TaskConfig::ReachCircle { .. } => "reach_circle",
            TaskConfig::ReachPlane { .. } => "reach_plane",
            TaskConfig::AlignAxis { .. } => "align_axis",
            TaskConfig::BalancePlate { .. } => "balance_plate",
        }
    }

    pub fn is_mpc(&self) -> bool {
        matches!(self, TaskConfig::BalancePlate { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BalanceWeights {
    pub alignment: f64,
    pub axis: f64,
    pub distance: f64,
}

impl Default for BalanceWeights {
    fn default() -> Self {
        Self { alignment: 1.0, axis: 1.0, distance: 1.0 }
    }
}

/// Step change of joint positions applied to the plant before `tick`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub tick: usize,
    /// 1 or 2.
    pub arm: usize,
    /// 1-based joint indices within the arm.
    pub joints: Vec<usize>,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpcSettings {
    pub horizon: usize,
    /// Planner step (s).
    pub dt: f64,
    /// Diagonal of R.
    pub control_weight: f64,
    pub velocity_damping: f64,
    pub plant_dt: f64,
    /// Plant ticks between replans.
    pub replan_every: usize,
    /// Plant ticks to simulate.
    pub steps: usize,
    pub ilqr: IlqrOptions,
}

impl Default for MpcSettings {
    fn default() -> Self {
        let mpc = MpcOptions::default();
        Self {
            horizon: 10,
            dt: 0.01,
            control_weight: 1e-2,
            velocity_damping: 0.0,
            plant_dt: mpc.plant_dt,
            replan_every: mpc.replan_every,
            steps: mpc.steps,
            ilqr: mpc.ilqr,
        }
    }
}

impl MpcSettings {
    pub fn options(&self) -> MpcOptions {
        MpcOptions { plant_dt: self.plant_dt, replan_every: self.replan_every, steps: self.steps, ilqr: self.ilqr.clone() }
    }
}

/// Thresholds a run must meet for exit status 0. Absent entries are not
/// checked.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Acceptance {
    pub max_residual: Option<f64>,
    pub max_iterations: Option<usize>,
    pub max_constraint: Option<f64>,
    pub max_circle_distance: Option<f64>,
    pub max_projected_gradient: Option<f64>,
    pub max_direction_error: Option<f64>,
    pub max_moment_error: Option<f64>,
    pub max_plane_incidence: Option<f64>,
    pub nearer_arm_moves_more: bool,
    pub min_configuration_difference: Option<f64>,
    pub max_equilibrium_residual: Option<f64>,
    pub max_equilibrium_control: Option<f64>,
    /// Alignment residual level that counts as recovered.
    pub recovery_alignment: Option<f64>,
    pub max_recovery_time: Option<f64>,
    pub max_distance_deviation: Option<f64>,
    pub max_planner_failures: Option<usize>,
}

/// A parsed and validated scenario with its resolved robots.
#[derive(Debug)]
pub struct Setup {
    pub scenario: Scenario,
    pub robots: [RobotFile; 2],
    pub system: DualArmSystem,
    pub hash: String,
}

fn invalid(msg: impl Into<String>) -> SimError {
    SimError::Validation(msg.into())
}

fn finite(values: &[f64], what: &str) -> SimResult<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(invalid(format!("{what} must be finite")))
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn three_points(points: &[[f64; 3]; 3], what: &str) -> SimResult<()> {
    finite(points.as_flattened(), what)?;
    let span = norm(cross(sub(points[1], points[0]), sub(points[2], points[0])));
    let scale = points.iter().map(|p| norm(sub(*p, points[0]))).fold(0.0, f64::max);
    if scale == 0.0 || span <= 1e-9 * scale * scale {
        return Err(invalid(format!("{what}: the three points are collinear")));
    }
    Ok(())
}

fn line(spec: &LineSpec, what: &str) -> SimResult<()> {
    finite(&spec.point, what)?;
    finite(&spec.direction, what)?;
    if norm(spec.direction) <= 1e-12 {
        return Err(invalid(format!("{what}: zero-length direction")));
    }
    Ok(())
}

fn positive(v: f64, what: &str) -> SimResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{what} must be positive, got {v}")))
    }
}

impl Scenario {
    pub fn parse(text: &str) -> SimResult<Self> {
        serde_json::from_str(text).map_err(|e| invalid(format!("scenario: {e}")))
    }

    fn validate(&self, system: &DualArmSystem, robots: &[RobotFile; 2]) -> SimResult<()> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(invalid(format!("scenario name {:?} must be non-empty [A-Za-z0-9_-]", self.name)));
        }
        if !(self.initial_noise >= 0.0 && self.initial_noise.is_finite()) {
            return Err(invalid("initial_noise must be finite and non-negative"));
        }
        for (i, (arm, chain)) in self.arms.iter().zip([&system.arm1, &system.arm2]).enumerate() {
            let q = arm.initial.as_ref().unwrap_or(&robots[i].home);
            if q.len() != chain.dof() {
                return Err(invalid(format!("arm {}: initial has {} values for {} joints", i + 1, q.len(), chain.dof())));
            }
            finite(q, &format!("arm {} initial", i + 1))?;
            for (j, (v, l)) in q.iter().zip(chain.limits()).enumerate() {
                if *v < l[0] || *v > l[1] {
                    return Err(invalid(format!("arm {} joint {}: initial {v} outside [{}, {}]", i + 1, j + 1, l[0], l[1])));
                }
            }
        }
        match &self.task {
            TaskConfig::ReachPoint { target } => finite(target, "target")?,
            TaskConfig::ReachCircle { points, objective_weight } => {
                three_points(points, "circle")?;
                positive(*objective_weight, "objective_weight")?;
            }
            TaskConfig::ReachPlane { points } => three_points(points, "plane")?,
            TaskConfig::AlignAxis { line1, line2, axis, alignment_weight, axis_weight, grasp_width } => {
                line(line1, "line1")?;
                line(line2, "line2")?;
                line(axis, "axis")?;
                positive(*alignment_weight, "alignment_weight")?;
                positive(*axis_weight, "axis_weight")?;
                if let Some(w) = grasp_width {
                    positive(*w, "grasp_width")?;
                }
            }
            TaskConfig::BalancePlate { line1, line2, axis, grasp_width, weights, perturbations } => {
                line(line1, "line1")?;
                line(line2, "line2")?;
                line(axis, "axis")?;
                if let Some(w) = grasp_width {
                    positive(*w, "grasp_width")?;
                }
                positive(weights.alignment, "weights.alignment")?;
                positive(weights.axis, "weights.axis")?;
                positive(weights.distance, "weights.distance")?;
                let m = &self.mpc;
                if m.horizon < 1 {
                    return Err(invalid("mpc.horizon must be at least 1"));
                }
                positive(m.dt, "mpc.dt")?;
                positive(m.plant_dt, "mpc.plant_dt")?;
                positive(m.control_weight, "mpc.control_weight")?;
                if !(m.velocity_damping >= 0.0 && m.velocity_damping.is_finite()) {
                    return Err(invalid("mpc.velocity_damping must be finite and non-negative"));
                }
                if m.replan_every < 1 {
                    return Err(invalid("mpc.replan_every must be at least 1"));
                }
                cdts_core::solvers::substeps(m.plant_dt, m.dt).map_err(|e| invalid(e.to_string()))?;
                for p in perturbations {
                    let chain = match p.arm {
                        1 => &system.arm1,
                        2 => &system.arm2,
                        a => return Err(invalid(format!("perturbation arm {a} must be 1 or 2"))),
                    };
                    if p.joints.is_empty() || p.joints.iter().any(|&j| j < 1 || j > chain.dof()) {
                        return Err(invalid(format!("perturbation joints {:?} outside 1..={}", p.joints, chain.dof())));
                    }
                    if p.tick >= m.steps {
                        return Err(invalid(format!("perturbation tick {} beyond {} steps", p.tick, m.steps)));
                    }
                    finite(&[p.delta], "perturbation delta")?;
                }
            }
        }
        Ok(())
    }
}

impl Setup {
    pub fn load(path: &Path) -> SimResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_text(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Robot references are resolved against `base_dir`.
    pub fn from_text(text: &str, base_dir: &Path) -> SimResult<Self> {
        Self::new(Scenario::parse(text)?, base_dir)
    }

    pub fn new(scenario: Scenario, base_dir: &Path) -> SimResult<Self> {
        let robots = [robot::resolve(&scenario.arms[0].robot, base_dir)?, robot::resolve(&scenario.arms[1].robot, base_dir)?];
        let chain = |i: usize| -> SimResult<_> {
            let base = scenario.arms[i].base.to_motor().map_err(|e| invalid(format!("arm {} base: {e}", i + 1)))?;
            robots[i].chain()?.with_base(base).map_err(|e| invalid(e.to_string()))
        };
        let system = DualArmSystem::new(chain(0)?, chain(1)?).map_err(|e| invalid(e.to_string()))?;
        scenario.validate(&system, &robots)?;
        let hash = scenario_hash(&scenario, &robots);
        Ok(Self { scenario, robots, system, hash })
    }

    /// Initial joints of both arms with the seeded noise applied and the
    /// result clamped to the limits.
    pub fn initial_configuration(&self, seed: u64) -> Vec<f64> {
        let mut q: Vec<f64> = (0..2)
            .flat_map(|i| self.scenario.arms[i].initial.clone().unwrap_or_else(|| self.robots[i].home.clone()))
            .collect();
        let noise = self.scenario.initial_noise;
        if noise > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for v in &mut q {
                *v += rng.random_range(-noise..=noise);
            }
            self.system.clamp(&mut q);
        }
        q
    }
}

/// SHA-256 of the canonical JSON of the parsed scenario and its robots:
/// formatting, key order and spelled-out defaults do not change it.
pub fn scenario_hash(scenario: &Scenario, robots: &[RobotFile; 2]) -> String {
    let value = serde_json::json!({ "scenario": scenario, "robots": robots });
    let canonical = serde_json::to_string(&value).expect("scenario serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

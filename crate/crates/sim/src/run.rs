//! Builds the solver problem for a scenario, solves it and evaluates the
//! scenario's acceptance thresholds.

use std::path::Path;

use cdts_core::cdts::{CdtsState, Frame, ResidualBuilder, Task};
use cdts_core::cga::{primitives, Motor, Multivector};
use cdts_core::kinematics::DualArmSystem;
use cdts_core::solvers::{
    gauss_newton, mpc_loop, CdtsCost, GnIterate, GnReport, GnStatus, IkProblem, MpcLog, OcProblem, SingularityGuard,
    SINGULARITY_SEPARATION,
};
use nalgebra::{DMatrix, DVector};

use crate::error::{SimError, SimResult};
use crate::log::{Check, IkRecord, MpcRecord, Records, RunLog};
use crate::scenario::{LineSpec, Setup, TaskConfig};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the scenario seed.
    pub seed: Option<u64>,
    /// Overrides the Gauss-Newton (or per-replan iLQR) iteration budget.
    pub max_iter: Option<usize>,
}

/// Which residuals express a two-point task.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formulation {
    /// One residual on the cooperative pointpair.
    Cooperative,
    /// One residual per end-effector point, stacked.
    Stacked,
}

fn invalid(e: impl std::fmt::Display) -> SimError {
    SimError::Validation(e.to_string())
}

fn state(system: &DualArmSystem, q: &[f64]) -> SimResult<CdtsState> {
    CdtsState::from_stacked(system, q).map_err(|e| SimError::Solver(e.to_string()))
}

pub fn run_path(path: &Path, opts: &RunOptions) -> SimResult<RunLog> {
    run_scenario(&Setup::load(path)?, opts)
}

/// Solves the scenario. Solver failures are reported in the log status;
/// errors are returned only for invalid scenarios.
pub fn run_scenario(setup: &Setup, opts: &RunOptions) -> SimResult<RunLog> {
    let seed = opts.seed.unwrap_or(setup.scenario.seed);
    let q0 = setup.initial_configuration(seed);
    if setup.scenario.task.is_mpc() {
        run_balance(setup, seed, &q0, opts)
    } else {
        run_ik(setup, seed, &q0, opts, Formulation::Cooperative)
    }
}

fn guard(distance_constrained: bool) -> SingularityGuard {
    SingularityGuard { epsilon: SINGULARITY_SEPARATION, distance_constrained }
}

fn plane_of(points: &[[f64; 3]; 3]) -> Multivector {
    primitives::plane(points[0], points[1], points[2])
}

pub fn ik_problem<'a>(setup: &'a Setup, q0: &[f64], formulation: Formulation) -> SimResult<IkProblem<'a>> {
    let system = &setup.system;
    let p = IkProblem::new(system, q0.to_vec());
    Ok(match &setup.scenario.task {
        TaskConfig::ReachPoint { target } => match formulation {
            Formulation::Cooperative => p.objective(Task::PointPairPoint { target: *target }, 1.0).with_guard(guard(false)),
            Formulation::Stacked => return Err(invalid("reach_point has no stacked formulation")),
        },
        TaskConfig::ReachCircle { points, objective_weight } => {
            let start = state(system, q0)?;
            let circle = primitives::circle(points[0], points[1], points[2]);
            p.objective(Task::TargetMotor { target: start.relative_motor(), frame: Frame::Relative }, *objective_weight)
                .constraint(Task::Containment { target: circle })
                .with_guard(guard(false))
        }
        TaskConfig::ReachPlane { points } => {
            let plane = plane_of(points);
            match formulation {
                Formulation::Cooperative => p.objective(Task::Containment { target: plane }, 1.0).with_guard(guard(false)),
                Formulation::Stacked => p
                    .objective(Task::ReachPrimitive { target: plane, primitive: Multivector::e0(), frame: Frame::Arm1 }, 1.0)
                    .objective(Task::ReachPrimitive { target: plane, primitive: Multivector::e0(), frame: Frame::Arm2 }, 1.0),
            }
        }
        TaskConfig::AlignAxis { line1, line2, axis, alignment_weight, axis_weight, grasp_width } => {
            let mut p = p
                .objective(Task::line_alignment(&line1.to_line()?, &line2.to_line()?).map_err(invalid)?, *alignment_weight)
                .objective(Task::absolute_axis(&axis.to_line()?).map_err(invalid)?, *axis_weight);
            if let Some(w) = grasp_width {
                p = p.constraint(Task::distance(*w).map_err(invalid)?);
            }
            p.with_guard(guard(grasp_width.is_some()))
        }
        TaskConfig::BalancePlate { .. } => return Err(invalid("balance_plate is a receding-horizon scenario")),
    })
}

fn status_name(status: &GnStatus) -> String {
    match status {
        GnStatus::Converged => "converged".into(),
        GnStatus::MaxIterations => "max_iterations".into(),
        GnStatus::DampingCap => "damping_cap".into(),
        GnStatus::ConstraintViolation => "constraint_violation".into(),
        GnStatus::Singularity { separation } => format!("singularity (separation {separation:e} m)"),
    }
}

/// Gauss-Newton history as CSV records; each outer loop restarts from the
/// previous iterate, which is logged once.
fn ik_records(system: &DualArmSystem, history: &[GnIterate]) -> SimResult<Vec<IkRecord>> {
    let mut out: Vec<IkRecord> = Vec::with_capacity(history.len());
    for it in history {
        if out.last().is_some_and(|r| r.iter == it.iteration) {
            continue;
        }
        let (ee1, ee2) = state(system, &it.q)?.positions();
        out.push(IkRecord { iter: it.iteration, cost: it.cost, constraint_norm: it.constraint_norm, q: it.q.clone(), ee1, ee2 });
    }
    Ok(out)
}

fn base_log(setup: &Setup, seed: u64, options: serde_json::Value) -> RunLog {
    RunLog {
        scenario: setup.scenario.name.clone(),
        kind: setup.scenario.task.kind().into(),
        hash: setup.hash.clone(),
        seed,
        options,
        dof: [setup.system.arm1.dof(), setup.system.arm2.dof()],
        status: String::new(),
        solver_ok: false,
        checks: Vec::new(),
        records: Records::Ik(Vec::new()),
    }
}

/// Solves an inverse-kinematics scenario in the given formulation.
pub fn run_ik(setup: &Setup, seed: u64, q0: &[f64], opts: &RunOptions, formulation: Formulation) -> SimResult<RunLog> {
    let mut gn = setup.scenario.gauss_newton.clone();
    if let Some(m) = opts.max_iter {
        gn.max_iter = m;
    }
    let mut log = base_log(setup, seed, serde_json::to_value(&gn).expect("options serialize"));
    let problem = ik_problem(setup, q0, formulation)?;
    let (q, report) = match gauss_newton(&problem, &gn) {
        Ok(r) => r,
        Err(e) => {
            log.status = format!("error: {e}");
            return Ok(log);
        }
    };
    log.records = Records::Ik(ik_records(&setup.system, &report.history)?);
    log.status = status_name(&report.status);
    log.solver_ok = report.converged();
    log.checks = ik_checks(setup, &problem, q0, &q, &report)?;
    Ok(log)
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Largest distance of the points from the circle through `c`, measured as
/// the worse of plane height and radial error.
pub fn circle_distance(c: &[[f64; 3]; 3], points: &[[f64; 3]]) -> f64 {
    let (u, w) = (sub(c[1], c[0]), sub(c[2], c[0]));
    let n = cross(u, w);
    let nn = dot(n, n);
    let offset = scale(
        [
            dot(w, w) * cross(n, u)[0] + dot(u, u) * cross(w, n)[0],
            dot(w, w) * cross(n, u)[1] + dot(u, u) * cross(w, n)[1],
            dot(w, w) * cross(n, u)[2] + dot(u, u) * cross(w, n)[2],
        ],
        0.5 / nn,
    );
    let center = [c[0][0] + offset[0], c[0][1] + offset[1], c[0][2] + offset[2]];
    let radius = norm(offset);
    let normal = scale(n, 1.0 / nn.sqrt());
    points
        .iter()
        .map(|x| {
            let d = sub(*x, center);
            dot(d, normal).abs().max((norm(d) - radius).abs())
        })
        .fold(0.0, f64::max)
}

/// Largest distance of the points from the plane through `c`.
pub fn plane_distance(c: &[[f64; 3]; 3], points: &[[f64; 3]]) -> f64 {
    let n = cross(sub(c[1], c[0]), sub(c[2], c[0]));
    let n = scale(n, 1.0 / norm(n));
    points.iter().map(|x| dot(sub(*x, c[0]), n).abs()).fold(0.0, f64::max)
}

/// World point and unit direction of a line given in a motor's frame.
fn world_line(m: &Motor, spec: &LineSpec) -> ([f64; 3], [f64; 3]) {
    let r = m.rotation_matrix();
    let rotate = |v: [f64; 3]| [dot(r[0], v), dot(r[1], v), dot(r[2], v)];
    let o = m.origin();
    let p = rotate(spec.point);
    let d = rotate(spec.direction);
    ([o[0] + p[0], o[1] + p[1], o[2] + p[2]], scale(d, 1.0 / norm(d)))
}

/// Collinearity of two lines: `(|d1 × d2|, |m1 - s m2|)` with moments
/// `m = p × d` and `s` the sign of `d1 · d2`.
pub fn collinearity(a: ([f64; 3], [f64; 3]), b: ([f64; 3], [f64; 3])) -> (f64, f64) {
    let direction = norm(cross(a.1, b.1));
    let s = if dot(a.1, b.1) >= 0.0 { 1.0 } else { -1.0 };
    let (ma, mb) = (cross(a.0, a.1), cross(b.0, b.1));
    (direction, norm(sub(ma, scale(mb, s))))
}

/// Objective gradient projected onto the null space of the constraint
/// Jacobian.
fn projected_gradient(problem: &IkProblem, q: &[f64]) -> SimResult<f64> {
    let s = state(problem.system, q)?;
    let n = q.len();
    let mut g = DVector::zeros(n);
    for o in &problem.objectives {
        let r = o.residual.evaluate(&s).map_err(|e| SimError::Solver(e.to_string()))?;
        g += r.jacobian_matrix().transpose() * r.values() * (2.0 * o.weight);
    }
    let rows: Vec<DMatrix<f64>> = problem
        .constraints
        .iter()
        .map(|c| c.evaluate(&s).map(|r| r.jacobian_matrix()))
        .collect::<Result<_, _>>()
        .map_err(|e| SimError::Solver(e.to_string()))?;
    let m: usize = rows.iter().map(|r| r.nrows()).sum();
    if m == 0 {
        return Ok(g.norm());
    }
    let mut jc = DMatrix::zeros(m, n);
    let mut at = 0;
    for r in rows {
        jc.rows_mut(at, r.nrows()).copy_from(&r);
        at += r.nrows();
    }
    let svd = jc.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let top = svd.singular_values.max();
    let mut projected = g.clone();
    for (i, sigma) in svd.singular_values.iter().enumerate() {
        if *sigma > 1e-9 * top {
            let v = vt.row(i).transpose();
            projected -= &v * v.dot(&g);
        }
    }
    Ok(projected.norm())
}

fn ik_checks(setup: &Setup, problem: &IkProblem, q0: &[f64], q: &[f64], report: &GnReport) -> SimResult<Vec<Check>> {
    let a = &setup.scenario.acceptance;
    let system = &setup.system;
    let end = state(system, q)?;
    let (e1, e2) = end.positions();
    let mut checks = Vec::new();
    let eval = |t: Task| -> SimResult<f64> { Ok(t.evaluate(&end).map_err(|e| SimError::Solver(e.to_string()))?.norm()) };
    let residual = match &setup.scenario.task {
        TaskConfig::ReachPoint { target } => eval(Task::PointPairPoint { target: *target })?,
        TaskConfig::ReachCircle { .. } => report.constraint_norm,
        _ => report.cost.sqrt(),
    };
    if let Some(t) = a.max_residual {
        checks.push(Check::less_than("residual", residual, t));
    }
    if let Some(t) = a.max_iterations {
        checks.push(Check::at_most("iterations", report.iterations as f64, t as f64));
    }
    if let Some(t) = a.max_constraint {
        checks.push(Check::less_than("constraint_norm", report.constraint_norm, t));
    }
    match &setup.scenario.task {
        TaskConfig::ReachPoint { target } => {
            if a.nearer_arm_moves_more {
                let (s1, s2) = state(system, q0)?.positions();
                let (d1, d2) = (norm(sub(e1, s1)), norm(sub(e2, s2)));
                let margin = if norm(sub(*target, s1)) <= norm(sub(*target, s2)) { d1 - d2 } else { d2 - d1 };
                checks.push(Check::greater_than("nearer_arm_displacement_margin", margin, 0.0));
            }
        }
        TaskConfig::ReachCircle { points, .. } => {
            if let Some(t) = a.max_circle_distance {
                checks.push(Check::at_most("circle_distance", circle_distance(points, &[e1, e2]), t));
            }
            if let Some(t) = a.max_projected_gradient {
                checks.push(Check::at_most("projected_gradient", projected_gradient(problem, q)?, t));
            }
        }
        TaskConfig::ReachPlane { points } => {
            if let Some(t) = a.max_plane_incidence {
                checks.push(Check::at_most("plane_incidence", plane_distance(points, &[e1, e2]), t));
            }
        }
        TaskConfig::AlignAxis { line1, line2, .. } => {
            let (direction, moment) = collinearity(world_line(end.m1(), line1), world_line(end.m2(), line2));
            if let Some(t) = a.max_direction_error {
                checks.push(Check::at_most("direction_error", direction, t));
            }
            if let Some(t) = a.max_moment_error {
                checks.push(Check::at_most("moment_error", moment, t));
            }
        }
        TaskConfig::BalancePlate { .. } => {}
    }
    Ok(checks)
}

/// Result of solving a plane scenario in both formulations.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ComparisonReport {
    pub cooperative: RunLog,
    pub stacked: RunLog,
    pub q_cooperative: Vec<f64>,
    pub q_stacked: Vec<f64>,
    /// Euclidean norm of the joint-configuration difference.
    pub difference: f64,
    pub checks: Vec<Check>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.cooperative.passed() && self.stacked.passed() && self.checks.iter().all(|c| c.passed)
    }

    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "scenario": self.cooperative.scenario,
            "scenario_hash": self.cooperative.hash,
            "cooperative_status": self.cooperative.status,
            "stacked_status": self.stacked.status,
            "q_cooperative": self.q_cooperative,
            "q_stacked": self.q_stacked,
            "difference": self.difference,
            "checks": self.checks,
            "passed": self.passed(),
        })
    }
}

fn final_q(log: &RunLog, q0: &[f64]) -> Vec<f64> {
    match &log.records {
        Records::Ik(r) => r.last().map(|r| r.q.clone()).unwrap_or_else(|| q0.to_vec()),
        Records::Mpc(_) => q0.to_vec(),
    }
}

/// Solves a `reach_plane` scenario with the cooperative containment
/// residual and with two stacked point residuals.
pub fn compare_stacked_vs_cooperative(setup: &Setup, opts: &RunOptions) -> SimResult<ComparisonReport> {
    let TaskConfig::ReachPlane { points } = &setup.scenario.task else {
        return Err(invalid(format!("compare needs a reach_plane scenario, got {}", setup.scenario.task.kind())));
    };
    let seed = opts.seed.unwrap_or(setup.scenario.seed);
    let q0 = setup.initial_configuration(seed);
    let cooperative = run_ik(setup, seed, &q0, opts, Formulation::Cooperative)?;
    let mut stacked = run_ik(setup, seed, &q0, opts, Formulation::Stacked)?;
    stacked.scenario = format!("{}_stacked", setup.scenario.name);
    let (qc, qs) = (final_q(&cooperative, &q0), final_q(&stacked, &q0));
    let difference = qc.iter().zip(&qs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let a = &setup.scenario.acceptance;
    let mut checks = Vec::new();
    if let Some(t) = a.max_plane_incidence {
        for (name, q) in [("cooperative_plane_incidence", &qc), ("stacked_plane_incidence", &qs)] {
            let (e1, e2) = state(&setup.system, q)?.positions();
            checks.push(Check::at_most(name, plane_distance(points, &[e1, e2]), t));
        }
    }
    if let Some(t) = a.min_configuration_difference {
        checks.push(Check::greater_than("configuration_difference", difference, t));
    }
    Ok(ComparisonReport { cooperative, stacked, q_cooperative: qc, q_stacked: qs, difference, checks })
}

fn run_balance(setup: &Setup, seed: u64, q0: &[f64], opts: &RunOptions) -> SimResult<RunLog> {
    let TaskConfig::BalancePlate { line1, line2, axis, grasp_width, weights, perturbations } = &setup.scenario.task else {
        unreachable!("checked by the caller");
    };
    let system = &setup.system;
    let mut settings = setup.scenario.mpc.clone();
    if let Some(m) = opts.max_iter {
        settings.ilqr.max_iter = m;
    }
    let mut log = base_log(setup, seed, serde_json::to_value(&settings).expect("options serialize"));
    log.records = Records::Mpc(Vec::new());
    let width = match grasp_width {
        Some(w) => *w,
        None => state(system, q0)?.separation(),
    };
    let cost = CdtsCost::new(system)
        .residual(Task::line_alignment(&line1.to_line()?, &line2.to_line()?).map_err(invalid)?, weights.alignment)
        .residual(Task::absolute_axis(&axis.to_line()?).map_err(invalid)?, weights.axis)
        .residual(Task::distance(width).map_err(invalid)?, weights.distance)
        .velocity_damping(settings.velocity_damping);
    let n = system.dof();
    let ocp = OcProblem::new(n, settings.horizon, settings.dt, vec![settings.control_weight; n], cost).map_err(invalid)?;
    let x0 = DVector::from_iterator(2 * n, q0.iter().copied().chain(std::iter::repeat_n(0.0, n)));
    let offsets = [0, system.arm1.dof()];
    let perturb = |tick: usize, x: &mut DVector<f64>| {
        for p in perturbations.iter().filter(|p| p.tick == tick) {
            for j in &p.joints {
                x[offsets[p.arm - 1] + j - 1] += p.delta;
            }
        }
    };
    let mpc = match mpc_loop(&ocp, &x0, perturb, &settings.options()) {
        Ok(l) => l,
        Err(e) => {
            log.status = format!("error: {e}");
            return Ok(log);
        }
    };
    let failures = mpc.failures();
    log.status = if failures == 0 { "completed".into() } else { format!("planner failed at {failures} ticks") };
    log.solver_ok = failures == 0;
    log.checks = balance_checks(setup, &mpc, width, settings.plant_dt)?;
    log.records = Records::Mpc(
        mpc.ticks
            .iter()
            .map(|t| MpcRecord {
                tick: t.tick,
                time: t.time,
                cost: t.cost,
                res_align: t.residuals[0],
                res_axis: t.residuals[1],
                res_dist: t.residuals[2],
                q: t.state.as_slice()[..n].to_vec(),
                dq: t.state.as_slice()[n..].to_vec(),
                u: t.control.as_slice().to_vec(),
            })
            .collect(),
    );
    Ok(log)
}

fn balance_checks(setup: &Setup, mpc: &MpcLog, width: f64, plant_dt: f64) -> SimResult<Vec<Check>> {
    let a = &setup.scenario.acceptance;
    let TaskConfig::BalancePlate { perturbations, .. } = &setup.scenario.task else {
        unreachable!("balance scenario");
    };
    let n = setup.system.dof();
    let first = perturbations.iter().map(|p| p.tick).min().unwrap_or(mpc.ticks.len());
    let (quiet, disturbed) = mpc.ticks.split_at(first.min(mpc.ticks.len()));
    let mut checks = Vec::new();
    if let Some(t) = a.max_equilibrium_residual {
        let worst = quiet.iter().flat_map(|t| t.residuals.iter().copied()).fold(0.0, f64::max);
        checks.push(Check::less_than("equilibrium_residual", worst, t));
    }
    if let Some(t) = a.max_equilibrium_control {
        let worst = quiet.iter().map(|t| t.control.amax()).fold(0.0, f64::max);
        checks.push(Check::less_than("equilibrium_control", worst, t));
    }
    if let (Some(level), Some(t)) = (a.recovery_alignment, a.max_recovery_time) {
        // time from the perturbation until the alignment residual stays below `level`
        let time = match disturbed.iter().rposition(|t| t.residuals[0] >= level) {
            None => 0.0,
            Some(i) if i + 1 == disturbed.len() => f64::INFINITY,
            Some(i) => (i + 1) as f64 * plant_dt,
        };
        checks.push(Check::at_most("recovery_time", time, t));
    }
    if let Some(t) = a.max_distance_deviation {
        let mut worst: f64 = 0.0;
        for tick in &mpc.ticks {
            let s = state(&setup.system, &tick.state.as_slice()[..n])?;
            let (p1, p2) = s.positions();
            worst = worst.max((norm(sub(p1, p2)) - width).abs());
        }
        checks.push(Check::at_most("distance_deviation", worst, t));
    }
    if let Some(t) = a.max_planner_failures {
        checks.push(Check::at_most("planner_failures", mpc.failures() as f64, t as f64));
    }
    Ok(checks)
}

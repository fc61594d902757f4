//! Levenberg-damped Gauss-Newton over the stacked joint vector.
//!
//! Objectives enter as `Σ w_i |r_i|²`. Equality constraints enter as the
//! shifted penalty `μ Σ |c_j + ν_j|²`; after each outer loop the shifts take
//! the multiplier estimate (`ν ← (ν + c) μ / μ'`) and `μ` grows geometrically.

use alloc::boxed::Box;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::cdts::{pointpair_singularity_guard, CdtsState, Residual, ResidualBuilder};
use crate::error::{Error, Result};
use crate::kinematics::DualArmSystem;

pub type Builder<'a> = Box<dyn ResidualBuilder + Send + Sync + 'a>;

pub struct Objective<'a> {
    pub residual: Builder<'a>,
    pub weight: f64,
}

/// Guard against a degenerate cooperative pointpair during the solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularityGuard {
    pub epsilon: f64,
    /// A distance constraint keeps the end-effectors apart, so the guard
    /// only reports.
    pub distance_constrained: bool,
}

pub struct IkProblem<'a> {
    pub system: &'a DualArmSystem,
    pub objectives: Vec<Objective<'a>>,
    pub constraints: Vec<Builder<'a>>,
    pub q0: Vec<f64>,
    pub guard: Option<SingularityGuard>,
}

impl<'a> IkProblem<'a> {
    pub fn new(system: &'a DualArmSystem, q0: Vec<f64>) -> Self {
        Self { system, objectives: Vec::new(), constraints: Vec::new(), q0, guard: None }
    }

    pub fn objective(mut self, residual: impl ResidualBuilder + Send + Sync + 'a, weight: f64) -> Self {
        self.objectives.push(Objective { residual: Box::new(residual), weight });
        self
    }

    pub fn constraint(mut self, residual: impl ResidualBuilder + Send + Sync + 'a) -> Self {
        self.constraints.push(Box::new(residual));
        self
    }

    pub fn with_guard(mut self, guard: SingularityGuard) -> Self {
        self.guard = Some(guard);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.objectives.is_empty() && self.constraints.is_empty() {
            return Err(Error::Invalid("problem has neither objectives nor constraints".into()));
        }
        if let Some(o) = self.objectives.iter().find(|o| !(o.weight > 0.0 && o.weight.is_finite())) {
            return Err(Error::Invalid(alloc::format!("objective weight {} must be positive", o.weight)));
        }
        if self.q0.len() != self.system.dof() {
            return Err(Error::DimensionMismatch { expected: self.system.dof(), found: self.q0.len() });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct GnOptions {
    /// Linear solves across all outer loops.
    pub max_iter: usize,
    /// Stop when the square root of the penalized merit falls below this.
    pub objective_tol: f64,
    pub constraint_tol: f64,
    /// Infinity norm of the merit gradient.
    pub grad_tol: f64,
    /// Relative step length `|δ| / (1 + |q|)`.
    pub step_tol: f64,
    pub initial_damping: f64,
    pub damping_increase: f64,
    pub damping_decrease: f64,
    pub max_damping: f64,
    pub penalty_initial: f64,
    pub penalty_factor: f64,
    pub outer_loops: usize,
    /// Carry multiplier estimates between outer loops.
    pub multiplier_update: bool,
    pub clamp_limits: bool,
}

impl Default for GnOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            objective_tol: 1e-12,
            constraint_tol: 1e-6,
            grad_tol: 1e-12,
            step_tol: 1e-14,
            initial_damping: 1e-3,
            damping_increase: 2.0,
            damping_decrease: 3.0,
            max_damping: 1e12,
            penalty_initial: 1e2,
            penalty_factor: 10.0,
            outer_loops: 5,
            multiplier_update: true,
            clamp_limits: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GnStatus {
    Converged,
    MaxIterations,
    /// Damping passed its cap without a descent step.
    DampingCap,
    /// All outer loops finished with constraints above tolerance.
    ConstraintViolation,
    /// The cooperative pointpair degenerated without a distance constraint.
    Singularity { separation: f64 },
}

/// One accepted iterate (index 0 is the start of each outer loop).
#[derive(Clone, Debug, PartialEq)]
pub struct GnIterate {
    pub iteration: usize,
    pub outer: usize,
    pub q: Vec<f64>,
    /// `Σ w |r|²` over the objectives.
    pub cost: f64,
    /// `sqrt(Σ |c|²)` over the constraints.
    pub constraint_norm: f64,
    /// Penalized merit minimized by the current outer loop.
    pub merit: f64,
    pub damping: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GnReport {
    pub status: GnStatus,
    pub iterations: usize,
    pub outer_loops: usize,
    pub cost: f64,
    pub constraint_norm: f64,
    pub history: Vec<GnIterate>,
}

impl GnReport {
    pub fn converged(&self) -> bool {
        self.status == GnStatus::Converged
    }
}

struct Evaluation {
    objectives: Vec<Residual>,
    constraints: Vec<Residual>,
    state: CdtsState,
}

impl Evaluation {
    fn cost(&self, p: &IkProblem) -> f64 {
        self.objectives.iter().zip(&p.objectives).map(|(r, o)| o.weight * r.norm() * r.norm()).sum()
    }

    fn constraint_norm(&self) -> f64 {
        crate::math::sqrt(self.constraints.iter().map(|c| c.norm() * c.norm()).sum())
    }
}

fn evaluate(p: &IkProblem, q: &[f64]) -> Result<Evaluation> {
    let state = CdtsState::from_stacked(p.system, q)?;
    let objectives = p.objectives.iter().map(|o| o.residual.evaluate(&state)).collect::<Result<Vec<_>>>()?;
    let constraints = p.constraints.iter().map(|c| c.evaluate(&state)).collect::<Result<Vec<_>>>()?;
    Ok(Evaluation { objectives, constraints, state })
}

/// Penalty state of one outer loop.
struct Penalty {
    mu: f64,
    shifts: Vec<DVector<f64>>,
}

/// Stacked weighted residual vector and Jacobian of the merit.
fn stack(p: &IkProblem, e: &Evaluation, penalty: &Penalty) -> (DVector<f64>, DMatrix<f64>) {
    let n = p.system.dof();
    let rows: usize = e.objectives.iter().chain(&e.constraints).map(|r| r.rows().len()).sum();
    let mut r = DVector::zeros(rows);
    let mut j = DMatrix::zeros(rows, n);
    let mut at = 0;
    let mut push = |res: &Residual, scale: f64, shift: Option<&DVector<f64>>| {
        let mut v = res.values();
        if let Some(s) = shift {
            v += s;
        }
        let m = v.len();
        r.rows_mut(at, m).copy_from(&(v * scale));
        j.rows_mut(at, m).copy_from(&(res.jacobian_matrix() * scale));
        at += m;
    };
    for (res, o) in e.objectives.iter().zip(&p.objectives) {
        push(res, crate::math::sqrt(o.weight), None);
    }
    let s = crate::math::sqrt(penalty.mu);
    for (res, shift) in e.constraints.iter().zip(&penalty.shifts) {
        push(res, s, Some(shift));
    }
    (r, j)
}

fn merit(p: &IkProblem, e: &Evaluation, penalty: &Penalty) -> f64 {
    stack(p, e, penalty).0.norm_squared()
}

fn norm(v: &[f64]) -> f64 {
    crate::math::sqrt(v.iter().map(|x| x * x).sum())
}

fn check_guard(p: &IkProblem, s: &CdtsState) -> Option<GnStatus> {
    let g = p.guard?;
    match pointpair_singularity_guard(s, g.epsilon, g.distance_constrained) {
        Err(Error::PointPairSingularity { separation }) => Some(GnStatus::Singularity { separation }),
        _ => None,
    }
}

enum Inner {
    Converged,
    Stopped(GnStatus),
}

/// Solves the problem from `p.q0`. Evaluation errors at `q0` are returned as
/// errors; later failures end the solve with a status in the report and
/// the last accepted iterate.
pub fn gauss_newton(p: &IkProblem, opts: &GnOptions) -> Result<(Vec<f64>, GnReport)> {
    p.validate()?;
    let mut q = p.q0.clone();
    if opts.clamp_limits {
        p.system.clamp(&mut q);
    }
    let mut e = evaluate(p, &q)?;
    let mut penalty = Penalty {
        mu: opts.penalty_initial,
        shifts: e.constraints.iter().map(|c| DVector::zeros(c.rows().len())).collect(),
    };
    let outer_loops = if p.constraints.is_empty() { 1 } else { opts.outer_loops.max(1) };
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut status = GnStatus::ConstraintViolation;
    let mut outer_done = 0;

    for outer in 0..outer_loops {
        outer_done = outer + 1;
        let inner = minimize(p, opts, &mut q, &mut e, &penalty, outer, &mut iterations, &mut history);
        if let Inner::Stopped(s) = inner {
            status = s;
            break;
        }
        if e.constraint_norm() < opts.constraint_tol {
            status = GnStatus::Converged;
            break;
        }
        let next = penalty.mu * opts.penalty_factor;
        for (shift, c) in penalty.shifts.iter_mut().zip(&e.constraints) {
            *shift = if opts.multiplier_update { (&*shift + c.values()) * (penalty.mu / next) } else { DVector::zeros(shift.len()) };
        }
        penalty.mu = next;
    }

    let report = GnReport {
        status,
        iterations,
        outer_loops: outer_done,
        cost: e.cost(p),
        constraint_norm: e.constraint_norm(),
        history,
    };
    Ok((q, report))
}

#[allow(clippy::too_many_arguments)]
fn minimize(
    p: &IkProblem,
    opts: &GnOptions,
    q: &mut Vec<f64>,
    e: &mut Evaluation,
    penalty: &Penalty,
    outer: usize,
    iterations: &mut usize,
    history: &mut Vec<GnIterate>,
) -> Inner {
    let mut damping = opts.initial_damping;
    let (mut r, mut j) = stack(p, e, penalty);
    let mut current = r.norm_squared();
    let record = |history: &mut Vec<GnIterate>, q: &[f64], e: &Evaluation, merit: f64, damping: f64, iteration: usize| {
        history.push(GnIterate {
            iteration,
            outer,
            q: q.to_vec(),
            cost: e.cost(p),
            constraint_norm: e.constraint_norm(),
            merit,
            damping,
        });
    };
    record(history, q, e, current, damping, *iterations);
    if let Some(s) = check_guard(p, &e.state) {
        return Inner::Stopped(s);
    }
    loop {
        if crate::math::sqrt(current) <= opts.objective_tol {
            return Inner::Converged;
        }
        let g = j.transpose() * &r;
        if g.amax() <= opts.grad_tol {
            return Inner::Converged;
        }
        if *iterations >= opts.max_iter {
            return Inner::Stopped(GnStatus::MaxIterations);
        }
        *iterations += 1;
        let jtj = j.transpose() * &j;
        let h = &jtj + DMatrix::identity(jtj.nrows(), jtj.ncols()) * damping;
        let Some(chol) = h.cholesky() else {
            damping *= opts.damping_increase;
            if damping > opts.max_damping {
                return Inner::Stopped(GnStatus::DampingCap);
            }
            continue;
        };
        let delta = chol.solve(&(-g));
        let mut trial: Vec<f64> = q.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
        if opts.clamp_limits {
            p.system.clamp(&mut trial);
        }
        let taken: Vec<f64> = trial.iter().zip(q.iter()).map(|(a, b)| a - b).collect();
        let small = norm(&taken) <= opts.step_tol * (1.0 + norm(q));
        let candidate = evaluate(p, &trial).ok().map(|ev| {
            let m = merit(p, &ev, penalty);
            (ev, m)
        });
        match candidate {
            Some((ev, m)) if m < current => {
                *q = trial;
                *e = ev;
                (r, j) = stack(p, e, penalty);
                current = m;
                damping = (damping / opts.damping_decrease).max(f64::MIN_POSITIVE);
                record(history, q, e, current, damping, *iterations);
                if let Some(s) = check_guard(p, &e.state) {
                    return Inner::Stopped(s);
                }
                if small {
                    return Inner::Converged;
                }
            }
            _ => {
                if small {
                    return Inner::Converged;
                }
                damping *= opts.damping_increase;
                if damping > opts.max_damping {
                    return Inner::Stopped(GnStatus::DampingCap);
                }
            }
        }
    }
}

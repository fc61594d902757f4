//! iLQR over double-integrator joint dynamics.
//!
//! State `x = (q, q̇)` of dimension `2n`, control `u = q̈`. The dynamics are
//! semi-implicit Euler, `q̇⁺ = q̇ + Δt u`, `q⁺ = q + Δt q̇⁺`, and the cost is
//!
//! ```text
//! Σ_k |E_k(x_k)|² + u_kᵀ R u_k  +  |E_N(x_N)|²
//! ```
//!
//! with residual Hessians approximated by `2 JᵀJ`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Residual stacks of an optimal control problem.
pub trait OcCost {
    /// Running residual `E_k(x)` (already weighted) and its Jacobian `∂E/∂x`.
    fn running(&self, k: usize, x: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)>;
    fn terminal(&self, x: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)>;

    /// Unweighted norms of the individual task residuals at `x`, for logs.
    fn monitor(&self, _x: &DVector<f64>) -> Result<Vec<f64>> {
        Ok(Vec::new())
    }
}

impl<T: OcCost + ?Sized> OcCost for &T {
    fn running(&self, k: usize, x: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        (**self).running(k, x)
    }

    fn terminal(&self, x: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        (**self).terminal(x)
    }

    fn monitor(&self, x: &DVector<f64>) -> Result<Vec<f64>> {
        (**self).monitor(x)
    }
}

pub struct OcProblem<C> {
    /// Joint count `n`; states have `2n` entries.
    pub dof: usize,
    pub horizon: usize,
    pub dt: f64,
    /// Diagonal of `R`.
    pub control_weight: Vec<f64>,
    pub cost: C,
}

impl<C: OcCost> OcProblem<C> {
    pub fn new(dof: usize, horizon: usize, dt: f64, control_weight: Vec<f64>, cost: C) -> Result<Self> {
        if horizon < 1 {
            return Err(Error::Invalid("horizon must be at least 1".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Invalid(alloc::format!("time step {dt} must be positive")));
        }
        if control_weight.len() != dof {
            return Err(Error::DimensionMismatch { expected: dof, found: control_weight.len() });
        }
        if !control_weight.iter().all(|r| *r > 0.0 && r.is_finite()) {
            return Err(Error::Invalid("control weights must be positive".into()));
        }
        Ok(Self { dof, horizon, dt, control_weight, cost })
    }

    pub fn state_dim(&self) -> usize {
        2 * self.dof
    }

    /// One semi-implicit Euler step.
    pub fn step(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        step(self.dof, self.dt, x, u)
    }

    fn control_cost(&self, u: &DVector<f64>) -> f64 {
        u.iter().zip(&self.control_weight).map(|(v, r)| r * v * v).sum()
    }

    /// `A = ∂f/∂x`, `B = ∂f/∂u` (constant for the double integrator).
    pub fn linearization(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let (n, dt) = (self.dof, self.dt);
        let mut a = DMatrix::identity(2 * n, 2 * n);
        let mut b = DMatrix::zeros(2 * n, n);
        for i in 0..n {
            a[(i, n + i)] = dt;
            b[(i, i)] = dt * dt;
            b[(n + i, i)] = dt;
        }
        (a, b)
    }
}

/// Semi-implicit Euler step of the double integrator with `n` joints.
pub fn step(n: usize, dt: f64, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
    let mut out = x.clone();
    for i in 0..n {
        out[n + i] = x[n + i] + dt * u[i];
        out[i] = x[i] + dt * out[n + i];
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub states: Vec<DVector<f64>>,
    pub controls: Vec<DVector<f64>>,
    /// `|E_k(x_k)|` for k = 0..N (the last entry is the terminal residual).
    pub residual_norms: Vec<f64>,
    pub cost: f64,
}

/// Integrates `controls` from `x0` and evaluates the cost.
pub fn rollout<C: OcCost>(ocp: &OcProblem<C>, x0: &DVector<f64>, controls: &[DVector<f64>]) -> Result<Trajectory> {
    if controls.len() != ocp.horizon {
        return Err(Error::DimensionMismatch { expected: ocp.horizon, found: controls.len() });
    }
    if x0.len() != ocp.state_dim() {
        return Err(Error::DimensionMismatch { expected: ocp.state_dim(), found: x0.len() });
    }
    let mut states = Vec::with_capacity(ocp.horizon + 1);
    states.push(x0.clone());
    for u in controls {
        if u.len() != ocp.dof {
            return Err(Error::DimensionMismatch { expected: ocp.dof, found: u.len() });
        }
        let next = ocp.step(states.last().unwrap(), u);
        states.push(next);
    }
    let mut cost = 0.0;
    let mut residual_norms = Vec::with_capacity(ocp.horizon + 1);
    for (k, (x, u)) in states.iter().zip(controls).enumerate() {
        let (e, _) = ocp.cost.running(k, x)?;
        residual_norms.push(e.norm());
        cost += e.norm_squared() + ocp.control_cost(u);
    }
    let (e, _) = ocp.cost.terminal(&states[ocp.horizon])?;
    residual_norms.push(e.norm());
    cost += e.norm_squared();
    if !cost.is_finite() {
        return Err(Error::NonFiniteCost);
    }
    Ok(Trajectory { states, controls: controls.to_vec(), residual_norms, cost })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct IlqrOptions {
    pub max_iter: usize,
    /// Infinity norm of the cost gradient with respect to the controls.
    pub grad_tol: f64,
    pub initial_regularization: f64,
    pub regularization_increase: f64,
    pub regularization_decrease: f64,
    pub max_regularization: f64,
    pub min_step: f64,
}

impl Default for IlqrOptions {
    fn default() -> Self {
        Self {
            max_iter: 50,
            grad_tol: 1e-9,
            initial_regularization: 0.0,
            regularization_increase: 10.0,
            regularization_decrease: 10.0,
            max_regularization: 1e10,
            min_step: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IlqrStatus {
    Converged,
    MaxIterations,
    /// No step length down to the minimum decreased the cost, even with the
    /// largest regularization.
    LineSearchFailed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IlqrReport {
    pub status: IlqrStatus,
    pub iterations: usize,
    /// Cost after every accepted iteration, starting with the initial rollout.
    pub costs: Vec<f64>,
    pub gradient_norm: f64,
    /// Feedback gains `K_k` of the last backward pass.
    pub gains: Vec<DMatrix<f64>>,
}

impl IlqrReport {
    pub fn converged(&self) -> bool {
        self.status == IlqrStatus::Converged
    }
}

struct Derivatives {
    lx: Vec<DVector<f64>>,
    lxx: Vec<DMatrix<f64>>,
}

fn derivatives<C: OcCost>(ocp: &OcProblem<C>, traj: &Trajectory) -> Result<Derivatives> {
    let mut lx = Vec::with_capacity(ocp.horizon + 1);
    let mut lxx = Vec::with_capacity(ocp.horizon + 1);
    for k in 0..=ocp.horizon {
        let (e, j) = if k < ocp.horizon { ocp.cost.running(k, &traj.states[k])? } else { ocp.cost.terminal(&traj.states[k])? };
        lx.push(j.transpose() * &e * 2.0);
        lxx.push(j.transpose() * &j * 2.0);
    }
    Ok(Derivatives { lx, lxx })
}

/// Exact gradient of the cost with respect to every control (adjoint pass).
fn control_gradient<C: OcCost>(ocp: &OcProblem<C>, traj: &Trajectory, d: &Derivatives, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let mut lambda = d.lx[ocp.horizon].clone();
    let mut worst: f64 = 0.0;
    for k in (0..ocp.horizon).rev() {
        let lu = DVector::from_iterator(ocp.dof, traj.controls[k].iter().zip(&ocp.control_weight).map(|(u, r)| 2.0 * r * u));
        let g = lu + b.transpose() * &lambda;
        worst = worst.max(g.amax());
        lambda = &d.lx[k] + a.transpose() * lambda;
    }
    worst
}

struct Policy {
    k: Vec<DVector<f64>>,
    gains: Vec<DMatrix<f64>>,
}

fn backward<C: OcCost>(ocp: &OcProblem<C>, traj: &Trajectory, d: &Derivatives, a: &DMatrix<f64>, b: &DMatrix<f64>, reg: f64) -> Option<Policy> {
    let n = ocp.dof;
    let mut vx = d.lx[ocp.horizon].clone();
    let mut vxx = d.lxx[ocp.horizon].clone();
    let mut ks = alloc::vec![DVector::zeros(n); ocp.horizon];
    let mut gains = alloc::vec![DMatrix::zeros(n, 2 * n); ocp.horizon];
    for k in (0..ocp.horizon).rev() {
        let lu = DVector::from_iterator(n, traj.controls[k].iter().zip(&ocp.control_weight).map(|(u, r)| 2.0 * r * u));
        let luu = DMatrix::from_diagonal(&DVector::from_iterator(n, ocp.control_weight.iter().map(|r| 2.0 * r)));
        let qx = &d.lx[k] + a.transpose() * &vx;
        let qu = lu + b.transpose() * &vx;
        let qxx = &d.lxx[k] + a.transpose() * &vxx * a;
        let quu = luu + b.transpose() * &vxx * b;
        let qux = b.transpose() * &vxx * a;
        let reg_quu = &quu + DMatrix::identity(n, n) * reg;
        let chol = reg_quu.cholesky()?;
        let kff = -chol.solve(&qu);
        let kfb = -chol.solve(&qux);
        vx = &qx + kfb.transpose() * &quu * &kff + kfb.transpose() * &qu + qux.transpose() * &kff;
        vxx = &qxx + kfb.transpose() * &quu * &kfb + kfb.transpose() * &qux + qux.transpose() * &kfb;
        vxx = (&vxx + vxx.transpose()) * 0.5;
        ks[k] = kff;
        gains[k] = kfb;
    }
    Some(Policy { k: ks, gains })
}

fn forward<C: OcCost>(ocp: &OcProblem<C>, nominal: &Trajectory, policy: &Policy, alpha: f64) -> Result<Trajectory> {
    let mut x = nominal.states[0].clone();
    let mut controls = Vec::with_capacity(ocp.horizon);
    for k in 0..ocp.horizon {
        let u = &nominal.controls[k] + &policy.k[k] * alpha + &policy.gains[k] * (&x - &nominal.states[k]);
        x = ocp.step(&x, &u);
        controls.push(u);
    }
    rollout(ocp, &nominal.states[0], &controls)
}

fn escalate(reg: f64, opts: &IlqrOptions) -> f64 {
    (reg * opts.regularization_increase).max(MIN_REGULARIZATION)
}

/// Smallest nonzero regularization tried after a failed iteration.
const MIN_REGULARIZATION: f64 = 1e-8;

/// Optimizes the control sequence starting from `u_init`.
pub fn ilqr<C: OcCost>(ocp: &OcProblem<C>, x0: &DVector<f64>, u_init: &[DVector<f64>], opts: &IlqrOptions) -> Result<(Trajectory, IlqrReport)> {
    let mut traj = rollout(ocp, x0, u_init)?;
    let (a, b) = ocp.linearization();
    let mut reg = opts.initial_regularization;
    let mut costs = alloc::vec![traj.cost];
    let mut gains = Vec::new();
    let mut iterations = 0;
    let mut d = derivatives(ocp, &traj)?;
    let mut gradient_norm = control_gradient(ocp, &traj, &d, &a, &b);
    let status = loop {
        if gradient_norm <= opts.grad_tol {
            break IlqrStatus::Converged;
        }
        if iterations >= opts.max_iter {
            break IlqrStatus::MaxIterations;
        }
        iterations += 1;
        let Some(policy) = backward(ocp, &traj, &d, &a, &b, reg) else {
            reg = escalate(reg, opts);
            if reg > opts.max_regularization {
                break IlqrStatus::LineSearchFailed;
            }
            continue;
        };
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha >= opts.min_step {
            match forward(ocp, &traj, &policy, alpha) {
                Ok(candidate) if candidate.cost < traj.cost => {
                    accepted = Some(candidate);
                    break;
                }
                Err(Error::NonFiniteCost) | Ok(_) => alpha *= 0.5,
                Err(e) => return Err(e),
            }
        }
        match accepted {
            Some(next) => {
                traj = next;
                costs.push(traj.cost);
                gains = policy.gains;
                reg = (reg / opts.regularization_decrease).max(opts.initial_regularization);
                d = derivatives(ocp, &traj)?;
                gradient_norm = control_gradient(ocp, &traj, &d, &a, &b);
            }
            None => {
                reg = escalate(reg, opts);
                if reg > opts.max_regularization {
                    break IlqrStatus::LineSearchFailed;
                }
            }
        }
    };
    Ok((traj, IlqrReport { status, iterations, costs, gradient_norm, gains }))
}

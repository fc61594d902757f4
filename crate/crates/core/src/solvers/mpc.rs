//! Receding-horizon loop around [`ilqr`] with a simulated plant.
//!
//! The plant integrates the double integrator at `plant_dt`; the planner
//! uses the problem's `dt`, which must be a whole multiple of `plant_dt`.
//! Every `replan_every` plant ticks the planner is warm-started from the
//! previous plan shifted by the elapsed planner steps and padded with zeros.

use alloc::vec::Vec;

use nalgebra::DVector;

use super::ilqr::{ilqr, step, IlqrOptions, OcCost, OcProblem};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct MpcOptions {
    pub plant_dt: f64,
    /// Plant ticks between replans.
    pub replan_every: usize,
    /// Plant ticks to simulate.
    pub steps: usize,
    pub ilqr: IlqrOptions,
}

impl Default for MpcOptions {
    fn default() -> Self {
        Self { plant_dt: 0.001, replan_every: 10, steps: 1000, ilqr: IlqrOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MpcTick {
    pub tick: usize,
    /// Simulated time after the tick.
    pub time: f64,
    /// Cost of the most recent plan.
    pub cost: f64,
    /// Task residual norms after the tick, see [`OcCost::monitor`].
    pub residuals: Vec<f64>,
    pub state: DVector<f64>,
    pub control: DVector<f64>,
    pub replanned: bool,
    /// The planner failed at this tick and the previous plan was kept.
    pub planner_failed: bool,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct MpcLog {
    pub ticks: Vec<MpcTick>,
}

impl MpcLog {
    pub fn failures(&self) -> usize {
        self.ticks.iter().filter(|t| t.planner_failed).count()
    }
}

/// Plant ticks per planner step.
pub fn substeps(plant_dt: f64, planner_dt: f64) -> Result<usize> {
    if !(plant_dt > 0.0 && plant_dt.is_finite()) {
        return Err(Error::Invalid(alloc::format!("plant time step {plant_dt} must be positive")));
    }
    let ratio = planner_dt / plant_dt;
    let whole = libm::round(ratio);
    if !(whole >= 1.0 && (ratio - whole).abs() < 1e-9 * whole) {
        return Err(Error::Invalid(alloc::format!(
            "planner step {planner_dt} is not a whole multiple of the plant step {plant_dt}"
        )));
    }
    Ok(whole as usize)
}

/// Runs the loop from `x0`. `perturb(tick, x)` may modify the plant state
/// before each tick.
pub fn mpc_loop<C: OcCost>(
    ocp: &OcProblem<C>,
    x0: &DVector<f64>,
    mut perturb: impl FnMut(usize, &mut DVector<f64>),
    opts: &MpcOptions,
) -> Result<MpcLog> {
    if opts.replan_every < 1 {
        return Err(Error::Invalid("replan_every must be at least 1".into()));
    }
    if x0.len() != ocp.state_dim() {
        return Err(Error::DimensionMismatch { expected: ocp.state_dim(), found: x0.len() });
    }
    let sub = substeps(opts.plant_dt, ocp.dt)?;
    let n = ocp.dof;
    let mut x = x0.clone();
    let mut plan: Vec<DVector<f64>> = alloc::vec![DVector::zeros(n); ocp.horizon];
    let mut plan_tick = 0;
    let mut plan_cost = f64::NAN;
    let mut applied = DVector::zeros(n);
    let mut log = MpcLog { ticks: Vec::with_capacity(opts.steps) };
    for tick in 0..opts.steps {
        perturb(tick, &mut x);
        let mut planner_failed = false;
        let replanned = tick % opts.replan_every == 0;
        if replanned {
            let shift = if tick == 0 { 0 } else { (tick - plan_tick) / sub };
            let warm: Vec<DVector<f64>> =
                (0..ocp.horizon).map(|k| plan.get(k + shift).cloned().unwrap_or_else(|| DVector::zeros(n))).collect();
            match ilqr(ocp, &x, &warm, &opts.ilqr) {
                Ok((traj, _)) => {
                    plan = traj.controls;
                    plan_cost = traj.cost;
                    plan_tick = tick;
                }
                Err(_) => planner_failed = true,
            }
        }
        let k = (tick - plan_tick) / sub;
        if let Some(u) = plan.get(k) {
            if !planner_failed {
                applied = u.clone();
            }
        }
        x = step(n, opts.plant_dt, &x, &applied);
        log.ticks.push(MpcTick {
            tick,
            time: (tick + 1) as f64 * opts.plant_dt,
            cost: plan_cost,
            residuals: ocp.cost.monitor(&x)?,
            state: x.clone(),
            control: applied.clone(),
            replanned,
            planner_failed,
        });
    }
    Ok(log)
}

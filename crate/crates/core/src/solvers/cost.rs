//! Dual-arm residual costs for the optimal control problem.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::gauss_newton::Objective;
use super::ilqr::OcCost;
use crate::cdts::{CdtsState, ResidualBuilder};
use crate::error::{Error, Result};
use crate::kinematics::DualArmSystem;

/// Weighted CDTS residuals of the joint positions, plus an optional
/// joint-velocity damping residual `sqrt(w_v) q̇`.
pub struct CdtsCost<'a> {
    pub system: &'a DualArmSystem,
    pub running: Vec<Objective<'a>>,
    pub terminal: Vec<Objective<'a>>,
    pub velocity_weight: f64,
}

impl<'a> CdtsCost<'a> {
    pub fn new(system: &'a DualArmSystem) -> Self {
        Self { system, running: Vec::new(), terminal: Vec::new(), velocity_weight: 0.0 }
    }

    /// Adds the residual to both the running and the terminal cost.
    pub fn residual<B>(mut self, residual: B, weight: f64) -> Self
    where
        B: ResidualBuilder + Clone + Send + Sync + 'a,
    {
        self.running.push(Objective { residual: alloc::boxed::Box::new(residual.clone()), weight });
        self.terminal.push(Objective { residual: alloc::boxed::Box::new(residual), weight });
        self
    }

    pub fn velocity_damping(mut self, weight: f64) -> Self {
        self.velocity_weight = weight;
        self
    }

    fn stack(&self, objectives: &[Objective], x: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let n = self.system.dof();
        if x.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, found: x.len() });
        }
        let state = CdtsState::from_stacked(self.system, &x.as_slice()[..n])?;
        let residuals = objectives.iter().map(|o| o.residual.evaluate(&state)).collect::<Result<Vec<_>>>()?;
        let velocity_rows = if self.velocity_weight > 0.0 { n } else { 0 };
        let rows = residuals.iter().map(|r| r.rows().len()).sum::<usize>() + velocity_rows;
        let mut e = DVector::zeros(rows);
        let mut j = DMatrix::zeros(rows, 2 * n);
        let mut at = 0;
        for (r, o) in residuals.iter().zip(objectives) {
            let s = crate::math::sqrt(o.weight);
            let m = r.rows().len();
            e.rows_mut(at, m).copy_from(&(r.values() * s));
            j.view_mut((at, 0), (m, n)).copy_from(&(r.jacobian_matrix() * s));
            at += m;
        }
        if velocity_rows > 0 {
            let s = crate::math::sqrt(self.velocity_weight);
            for i in 0..n {
                e[at + i] = s * x[n + i];
                j[(at + i, n + i)] = s;
            }
        }
        Ok((e, j))
    }
}

impl OcCost for CdtsCost<'_> {
    fn running(&self, _k: usize, x: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        self.stack(&self.running, x)
    }

    fn terminal(&self, x: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        self.stack(&self.terminal, x)
    }

    fn monitor(&self, x: &DVector<f64>) -> Result<Vec<f64>> {
        let n = self.system.dof();
        let state = CdtsState::from_stacked(self.system, &x.as_slice()[..n])?;
        self.running.iter().map(|o| Ok(o.residual.evaluate(&state)?.norm())).collect()
    }
}

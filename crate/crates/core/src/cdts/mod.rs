//! Cooperative dual-task space of a two-arm system.
//!
//! With end-effector motors `M1(q1)`, `M2(q2)`:
//!
//! * relative motor `M_r = reverse(M2) M1`,
//! * absolute motor `M_a = M2 exp(½ log M_r)`,
//! * cooperative pointpair `P_cdts = P1 ∧ P2` with `P_i = M_i e0 reverse(M_i)`.
//!
//! All Jacobians have one column per joint of the stacked vector `(q1, q2)`.

mod residuals;

pub use self::residuals::{Frame, Residual, ResidualBuilder, Task};

use alloc::vec::Vec;

use crate::cga::{Motor, Multivector};
use crate::error::{Error, Result};
use crate::jacobian::{MotorJacobian, MultivectorJacobian};
use crate::kinematics::DualArmSystem;

/// Joint configuration of both arms with cached kinematics.
#[derive(Clone, Debug, PartialEq)]
pub struct CdtsState {
    q1: Vec<f64>,
    q2: Vec<f64>,
    m1: Motor,
    m2: Motor,
    j1: MotorJacobian,
    j2: MotorJacobian,
    p1: Multivector,
    p2: Multivector,
}

impl CdtsState {
    pub fn new(system: &DualArmSystem, q1: &[f64], q2: &[f64]) -> Result<Self> {
        let (m1, j1) = system.arm1.kinematics(q1)?;
        let (m2, j2) = system.arm2.kinematics(q2)?;
        let mut s = Self::from_kinematics(m1, j1, m2, j2);
        s.q1 = q1.to_vec();
        s.q2 = q2.to_vec();
        Ok(s)
    }

    /// State from the stacked joint vector `(q1, q2)`.
    pub fn from_stacked(system: &DualArmSystem, q: &[f64]) -> Result<Self> {
        let (q1, q2) = system.split(q)?;
        Self::new(system, q1, q2)
    }

    /// State from end-effector motors and their Jacobians, without joint
    /// angles.
    pub fn from_kinematics(m1: Motor, j1: MotorJacobian, m2: Motor, j2: MotorJacobian) -> Self {
        let e0 = Multivector::e0();
        Self { q1: Vec::new(), q2: Vec::new(), p1: m1.apply(&e0), p2: m2.apply(&e0), m1, m2, j1, j2 }
    }

    /// Recomputes the caches for a new stacked configuration.
    pub fn update(&mut self, system: &DualArmSystem, q: &[f64]) -> Result<()> {
        *self = Self::from_stacked(system, q)?;
        Ok(())
    }

    pub fn q1(&self) -> &[f64] {
        &self.q1
    }

    pub fn q2(&self) -> &[f64] {
        &self.q2
    }

    pub fn m1(&self) -> &Motor {
        &self.m1
    }

    pub fn m2(&self) -> &Motor {
        &self.m2
    }

    pub fn j1(&self) -> &MotorJacobian {
        &self.j1
    }

    pub fn j2(&self) -> &MotorJacobian {
        &self.j2
    }

    /// End-effector point of arm 1, `M1 e0 reverse(M1)`.
    pub fn p1(&self) -> &Multivector {
        &self.p1
    }

    pub fn p2(&self) -> &Multivector {
        &self.p2
    }

    pub fn n1(&self) -> usize {
        self.j1.len()
    }

    pub fn n2(&self) -> usize {
        self.j2.len()
    }

    pub fn dof(&self) -> usize {
        self.n1() + self.n2()
    }

    /// Euclidean end-effector positions.
    pub fn positions(&self) -> ([f64; 3], [f64; 3]) {
        (self.m1.origin(), self.m2.origin())
    }

    /// Arm-1 Jacobian padded with zero columns for arm 2.
    pub fn j1_stacked(&self) -> MotorJacobian {
        self.j1.hstack(&MotorJacobian::zeros(self.n2()))
    }

    pub fn j2_stacked(&self) -> MotorJacobian {
        MotorJacobian::zeros(self.n1()).hstack(&self.j2)
    }

    pub fn relative_motor(&self) -> Motor {
        self.m2.reverse() * self.m1
    }

    /// `[reverse(M2) J1 | reverse(J2) M1]`.
    pub fn relative_jacobian(&self) -> MotorJacobian {
        self.j1.left_mul(&self.m2.reverse()).hstack(&self.j2.reverse().right_mul(&self.m1))
    }

    pub fn absolute_motor(&self) -> Result<Motor> {
        let half = self.relative_motor().log()?.scale(0.5);
        Ok(self.m2 * half.exp())
    }

    pub fn absolute_jacobian(&self) -> Result<MotorJacobian> {
        Ok(self.absolute_motor_and_jacobian()?.1)
    }

    /// `M_a` and `M2 J_half + [0 | J2 M_half]`, where
    /// `J_half = J_exp(½ log M_r) ½ J_log(M_r) J_r`.
    pub fn absolute_motor_and_jacobian(&self) -> Result<(Motor, MotorJacobian)> {
        let mr = self.relative_motor();
        let jlog = mr.log_jacobian()?;
        let half = mr.log()?.scale(0.5);
        let h = half.exp();
        let chain = half.exp_jacobian() * (jlog * 0.5);
        let jr = self.relative_jacobian();
        let mut columns: Vec<Motor> =
            jr.columns.iter().map(|c| self.m2 * Motor::from_vector(&(chain * c.as_vector()))).collect();
        for (k, c) in self.j2.columns.iter().enumerate() {
            let col = &mut columns[self.n1() + k];
            *col = *col + *c * h;
        }
        Ok((self.m2 * h, MotorJacobian::new(columns)))
    }

    /// `P1 ∧ P2`.
    pub fn pointpair(&self) -> Multivector {
        self.p1 ^ self.p2
    }

    /// `∂P_i/∂q` for one arm, zero on the other arm's columns.
    pub fn point_jacobian(&self, arm: Arm) -> MultivectorJacobian {
        let e0 = Multivector::e0();
        let (m, j) = match arm {
            Arm::One => (&self.m1, self.j1_stacked()),
            Arm::Two => (&self.m2, self.j2_stacked()),
        };
        MultivectorJacobian::new(j.columns.iter().map(|c| sandwich_derivative(m, c, &e0)).collect())
    }

    /// `[∂P1 ∧ P2 | P1 ∧ ∂P2]`.
    pub fn pointpair_jacobian(&self) -> MultivectorJacobian {
        let e0 = Multivector::e0();
        let a = self.j1.columns.iter().map(|c| sandwich_derivative(&self.m1, c, &e0) ^ self.p2);
        let b = self.j2.columns.iter().map(|c| self.p1 ^ sandwich_derivative(&self.m2, c, &e0));
        MultivectorJacobian::new(a.chain(b).collect())
    }

    /// Motor and stacked Jacobian of the chosen frame.
    pub fn frame(&self, frame: Frame) -> Result<(Motor, MotorJacobian)> {
        Ok(match frame {
            Frame::Arm1 => (self.m1, self.j1_stacked()),
            Frame::Arm2 => (self.m2, self.j2_stacked()),
            Frame::Relative => (self.relative_motor(), self.relative_jacobian()),
            Frame::Absolute => self.absolute_motor_and_jacobian()?,
        })
    }

    /// End-effector separation from the pointpair, `sqrt(-2 P1·P2)`.
    pub fn separation(&self) -> f64 {
        crate::math::sqrt((-2.0 * (self.p1 | self.p2).scalar_part()).max(0.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arm {
    One,
    Two,
}

/// `∂(M X reverse(M))` along a motor direction `dM`.
pub fn sandwich_derivative(m: &Motor, dm: &Motor, x: &Multivector) -> Multivector {
    dm.apply_pair(x, m) + m.apply_pair(x, dm)
}

/// Default end-effector separation below which the pointpair is treated as
/// singular (meters).
pub const SINGULARITY_SEPARATION: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GuardStatus {
    Clear,
    /// Separation at or below the threshold, covered by a distance constraint.
    DistanceConstrained,
}

/// Trips when the end-effector separation encoded by `P1 ∧ P2` is at or
/// below `epsilon` (closed threshold), unless a distance constraint is
/// active.
pub fn pointpair_singularity_guard(s: &CdtsState, epsilon: f64, distance_constraint: bool) -> Result<GuardStatus> {
    let separation = s.separation();
    if separation > epsilon {
        Ok(GuardStatus::Clear)
    } else if distance_constraint {
        Ok(GuardStatus::DistanceConstrained)
    } else {
        Err(Error::PointPairSingularity { separation })
    }
}

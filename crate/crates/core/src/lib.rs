//! Cooperative dual-task space (CDTS) for two-arm systems, formulated in 3D
//! conformal geometric algebra.
//!
//! The crate is `no_std` (it needs `alloc`) and split into four layers:
//!
//! * [`cga`]: multivectors over the 32 blades of CGA, motors, the motor
//!   exponential and logarithm with their Jacobians, and geometric primitives.
//! * [`kinematics`]: serial chains of revolute joints, forward kinematics as
//!   a motor product, and the analytic multivector Jacobian.
//! * [`cdts`]: relative and absolute motors, the cooperative pointpair and
//!   the residual multivectors used as objectives and constraints.
//! * [`solvers`]: damped Gauss-Newton with penalty constraints, iLQR over
//!   double-integrator dynamics and a receding-horizon loop.
//!
//! Blade ordering and sign conventions are listed in `CONVENTIONS.md`.
#![no_std]
// `!(x <= tol)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod cdts;
pub mod cga;
mod error;
pub mod jacobian;
pub mod kinematics;
mod math;
pub mod solvers;

pub use crate::cga::{Bivector, Motor, Multivector};
pub use crate::error::{Error, Result};
pub use crate::jacobian::{MotorJacobian, MultivectorJacobian};

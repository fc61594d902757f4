//! Optimization over joint configurations and trajectories.

mod cost;
mod gauss_newton;
mod ilqr;
mod mpc;

pub use self::cost::CdtsCost;
pub use self::gauss_newton::{
    gauss_newton, Builder, GnIterate, GnOptions, GnReport, GnStatus, IkProblem, Objective, SingularityGuard,
};
pub use self::ilqr::{ilqr, rollout, step, IlqrOptions, IlqrReport, IlqrStatus, OcCost, OcProblem, Trajectory};
pub use self::mpc::{mpc_loop, substeps, MpcLog, MpcOptions, MpcTick};
pub use crate::cdts::{pointpair_singularity_guard, GuardStatus, SINGULARITY_SEPARATION};

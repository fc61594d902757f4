//! Conformal geometric algebra kernel.

pub mod blade;
mod motor;
mod multivector;
pub mod primitives;

pub use self::motor::{Bivector, ExpJacobian, LogJacobian, Motor, BRANCH_MARGIN, UNIT_TOLERANCE};
pub use self::multivector::Multivector;
pub use self::primitives::{embed_point, extract_point};

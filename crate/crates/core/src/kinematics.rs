//! Serial chains of revolute joints.
//!
//! Joint `i` contributes `M_i(q_i) = exp(-½ q_i L_i) O_i`, where `L_i` is the
//! unit line bivector of the joint axis (in the frame of the previous joint)
//! and `O_i` the fixed offset to the next frame. Forward kinematics is
//! `M_b M_1(q_1) ⋯ M_N(q_N)`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::cga::{Bivector, Motor, UNIT_TOLERANCE};
use crate::error::{Error, Result};
use crate::jacobian::MotorJacobian;
use crate::math::sqrt;

/// Tolerance on the magnitude of configured axis directions.
pub const AXIS_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct JointDescription {
    axis: Bivector,
    offset: Motor,
    limits: [f64; 2],
}

impl JointDescription {
    /// Joint from a line bivector with unit rotation part.
    pub fn new(axis: Bivector, offset: Motor, limits: [f64; 2]) -> Result<Self> {
        let magnitude = axis.rotation_magnitude();
        if !((magnitude - 1.0).abs() <= AXIS_TOLERANCE) {
            return Err(Error::Invalid(format!("joint axis has rotational magnitude {magnitude}, expected 1")));
        }
        let deviation = offset.unit_deviation();
        if !(deviation <= UNIT_TOLERANCE) {
            return Err(Error::NonUnitMotor { deviation });
        }
        if !(limits[0] <= limits[1]) {
            return Err(Error::Invalid(format!("joint limits [{}, {}] are not ordered", limits[0], limits[1])));
        }
        Ok(Self { axis, offset, limits })
    }

    /// Revolute joint about the line through `point` along the unit `direction`.
    pub fn revolute(direction: [f64; 3], point: [f64; 3], offset: Motor, limits: [f64; 2]) -> Result<Self> {
        Self::new(axis_line(direction, point), offset, limits)
    }

    pub fn axis(&self) -> &Bivector {
        &self.axis
    }

    pub fn offset(&self) -> &Motor {
        &self.offset
    }

    pub fn limits(&self) -> [f64; 2] {
        self.limits
    }

    pub fn within_limits(&self, q: f64) -> bool {
        q >= self.limits[0] && q <= self.limits[1]
    }

    /// `exp(-½ q L) O`. Out-of-limit angles are evaluated as well.
    pub fn motor(&self, q: f64) -> Motor {
        self.axis.scale(-0.5 * q).exp() * self.offset
    }

    /// `∂/∂q` of [`Self::motor`]: `-½ L M(q)`.
    pub fn motor_derivative(&self, q: f64) -> Motor {
        self.axis.scale(-0.5).to_motor() * self.motor(q)
    }
}

/// Line bivector `T_p B_n reverse(T_p)` for the axis through `point` along `direction`.
/// The direction is used as given; callers validate its length.
pub fn axis_line(direction: [f64; 3], point: [f64; 3]) -> Bivector {
    let t = Motor::translator(point);
    let line = t * Bivector::rotation_plane(direction).to_motor() * t.reverse();
    let c = line.coeffs();
    Bivector::from_coeffs([c[1], c[2], c[3], c[4], c[5], c[6]])
}

#[derive(Clone, Debug, PartialEq)]
pub struct KinematicChain {
    name: String,
    base: Motor,
    joints: Vec<JointDescription>,
}

impl KinematicChain {
    pub fn new(name: impl Into<String>, base: Motor, joints: Vec<JointDescription>) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::Invalid("kinematic chain needs at least one joint".into()));
        }
        let deviation = base.unit_deviation();
        if !(deviation <= UNIT_TOLERANCE) {
            return Err(Error::NonUnitMotor { deviation });
        }
        Ok(Self { name: name.into(), base, joints })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn base(&self) -> &Motor {
        &self.base
    }

    pub fn joints(&self) -> &[JointDescription] {
        &self.joints
    }

    /// Same chain with `base` prepended to the current base motor.
    pub fn with_base(&self, base: Motor) -> Result<Self> {
        Self::new(self.name.clone(), base * self.base, self.joints.clone())
    }

    pub fn limits(&self) -> Vec<[f64; 2]> {
        self.joints.iter().map(JointDescription::limits).collect()
    }

    /// Projects `q` onto the joint limits.
    pub fn clamp(&self, q: &mut [f64]) {
        for (v, j) in q.iter_mut().zip(&self.joints) {
            *v = v.clamp(j.limits[0], j.limits[1]);
        }
    }

    fn check_len(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dof() {
            return Err(Error::DimensionMismatch { expected: self.dof(), found: q.len() });
        }
        Ok(())
    }

    pub fn forward_kinematics(&self, q: &[f64]) -> Result<Motor> {
        self.check_len(q)?;
        Ok(self.joints.iter().zip(q).fold(self.base, |m, (j, &qi)| m * j.motor(qi)))
    }

    /// Column `i` is `∂M/∂q_i = P_{i-1} (-½ L_i) M_i S_{i+1}` with prefix
    /// `P` (including the base) and suffix `S` products.
    pub fn analytic_jacobian(&self, q: &[f64]) -> Result<MotorJacobian> {
        Ok(self.kinematics(q)?.1)
    }

    /// Forward kinematics and its Jacobian from one pass.
    pub fn kinematics(&self, q: &[f64]) -> Result<(Motor, MotorJacobian)> {
        self.check_len(q)?;
        let n = self.dof();
        let motors: Vec<Motor> = self.joints.iter().zip(q).map(|(j, &qi)| j.motor(qi)).collect();
        let mut suffix = alloc::vec![Motor::IDENTITY; n + 1];
        for i in (0..n).rev() {
            suffix[i] = motors[i] * suffix[i + 1];
        }
        let mut prefix = self.base;
        let mut columns = Vec::with_capacity(n);
        for i in 0..n {
            let d = self.joints[i].axis.scale(-0.5).to_motor() * motors[i];
            columns.push(prefix * d * suffix[i + 1]);
            prefix = prefix * motors[i];
        }
        Ok((prefix, MotorJacobian::new(columns)))
    }
}

/// Two chains whose end-effectors form the cooperative task space.
#[derive(Clone, Debug, PartialEq)]
pub struct DualArmSystem {
    pub arm1: KinematicChain,
    pub arm2: KinematicChain,
}

impl DualArmSystem {
    pub fn new(arm1: KinematicChain, arm2: KinematicChain) -> Result<Self> {
        let difference = (arm1.base - arm2.base).norm().min((arm1.base + arm2.base).norm());
        if difference < 1e-12 {
            return Err(Error::Invalid("both arms share the same base frame".into()));
        }
        Ok(Self { arm1, arm2 })
    }

    pub fn dof(&self) -> usize {
        self.arm1.dof() + self.arm2.dof()
    }

    /// Splits a stacked `(q1, q2)` vector.
    pub fn split<'a>(&self, q: &'a [f64]) -> Result<(&'a [f64], &'a [f64])> {
        if q.len() != self.dof() {
            return Err(Error::DimensionMismatch { expected: self.dof(), found: q.len() });
        }
        Ok(q.split_at(self.arm1.dof()))
    }

    pub fn clamp(&self, q: &mut [f64]) {
        let (a, b) = q.split_at_mut(self.arm1.dof().min(q.len()));
        self.arm1.clamp(a);
        self.arm2.clamp(b);
    }

    pub fn limits(&self) -> Vec<[f64; 2]> {
        let mut out = self.arm1.limits();
        out.extend(self.arm2.limits());
        out
    }
}

/// Pose as translation plus unit quaternion (w, x, y, z).
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Pose {
    pub translation: [f64; 3],
    pub quaternion: [f64; 4],
}

impl Default for Pose {
    fn default() -> Self {
        Self { translation: [0.0; 3], quaternion: [1.0, 0.0, 0.0, 0.0] }
    }
}

impl Pose {
    pub fn to_motor(&self) -> Result<Motor> {
        let q = self.quaternion;
        let n = sqrt(q.iter().map(|v| v * v).sum());
        if !((n - 1.0).abs() <= UNIT_TOLERANCE) {
            return Err(Error::Invalid(format!("quaternion {q:?} has norm {n}, expected 1")));
        }
        if !self.translation.iter().all(|v| v.is_finite()) {
            return Err(Error::Invalid("translation is not finite".into()));
        }
        Ok(Motor::from_translation_quaternion(self.translation, q))
    }
}

/// Joint in axis-point form: the axis passes through `point` along `axis`
/// (both in the previous frame), and the child frame sits at the offset pose.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct JointSpec {
    pub axis: [f64; 3],
    pub point: [f64; 3],
    pub offset_translation: [f64; 3],
    pub offset_quaternion: [f64; 4],
    pub limits: [f64; 2],
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct RobotDescription {
    pub name: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub base_pose: Pose,
    pub joints: Vec<JointSpec>,
}

impl RobotDescription {
    /// Validates the description and builds the chain.
    pub fn to_chain(&self) -> Result<KinematicChain> {
        let base = self.base_pose.to_motor().map_err(|e| Error::Invalid(format!("{}: base_pose: {e}", self.name)))?;
        let joints = self
            .joints
            .iter()
            .enumerate()
            .map(|(i, j)| j.to_joint().map_err(|e| Error::Invalid(format!("{}: joint {}: {e}", self.name, i + 1))))
            .collect::<Result<Vec<_>>>()?;
        KinematicChain::new(self.name.clone(), base, joints)
    }
}

impl JointSpec {
    pub fn to_joint(&self) -> Result<JointDescription> {
        let a = self.axis;
        let n = sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
        if !((n - 1.0).abs() <= AXIS_TOLERANCE) {
            return Err(Error::Invalid(format!("axis {a:?} has length {n}, expected 1")));
        }
        if !self.point.iter().chain(&self.limits).all(|v| v.is_finite()) {
            return Err(Error::Invalid("non-finite axis point or limits".into()));
        }
        let offset = Pose { translation: self.offset_translation, quaternion: self.offset_quaternion }.to_motor()?;
        JointDescription::revolute(a, self.point, offset, self.limits)
    }
}

/// Builds the chain described by `description`.
pub fn load_robot(description: &RobotDescription) -> Result<KinematicChain> {
    description.to_chain()
}

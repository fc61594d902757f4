//! Residual multivectors: zero exactly when a task condition holds.

use alloc::boxed::Box;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::{sandwich_derivative, CdtsState};
use crate::cga::{blade, embed_point, primitives, Motor, Multivector};
use crate::error::{Error, Result};
use crate::jacobian::{blade_rows, MotorJacobian, MultivectorJacobian};
use crate::math::sqrt;

/// Which motor of the dual-arm system a residual is expressed through.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Frame {
    Arm1,
    Arm2,
    Relative,
    Absolute,
}

/// A residual value with its Jacobian with respect to `(q1, q2)`.
///
/// `grades` selects the blades that can be nonzero for this residual type;
/// norms and real expansions use only those rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    pub value: Multivector,
    pub jacobian: MultivectorJacobian,
    pub grades: u8,
}

impl Residual {
    pub fn rows(&self) -> Vec<usize> {
        blade_rows(self.grades)
    }

    pub fn norm(&self) -> f64 {
        sqrt(self.rows().iter().map(|&r| self.value[r] * self.value[r]).sum())
    }

    pub fn values(&self) -> DVector<f64> {
        let rows = self.rows();
        DVector::from_iterator(rows.len(), rows.iter().map(|&r| self.value[r]))
    }

    pub fn jacobian_matrix(&self) -> DMatrix<f64> {
        self.jacobian.to_matrix_masked(self.grades)
    }
}

/// Anything that evaluates a residual at a dual-arm state.
pub trait ResidualBuilder {
    fn evaluate(&self, state: &CdtsState) -> Result<Residual>;
}

impl<F: Fn(&CdtsState) -> Result<Residual>> ResidualBuilder for F {
    fn evaluate(&self, state: &CdtsState) -> Result<Residual> {
        self(state)
    }
}

impl ResidualBuilder for Box<dyn ResidualBuilder + '_> {
    fn evaluate(&self, state: &CdtsState) -> Result<Residual> {
        (**self).evaluate(state)
    }
}

/// The residuals of the cooperative dual-task space.
#[derive(Clone, Debug, PartialEq)]
pub enum Task {
    /// `log(reverse(M_target) M)`.
    TargetMotor { target: Motor, frame: Frame },
    /// `X_d ∧ (M X reverse(M))`.
    ReachPrimitive { target: Multivector, primitive: Multivector, frame: Frame },
    /// `P_target ∧ P_cdts`.
    PointPairPoint { target: [f64; 3] },
    /// `X_d × P_cdts`.
    Containment { target: Multivector },
    /// `-2 P1·P2 - d²`.
    Distance { distance: f64 },
    /// `(M1 L1 reverse(M1)) × (M2 L2 reverse(M2))`.
    LineAlignment { line1: Multivector, line2: Multivector },
    /// `(T_a L reverse(T_a)) × (M_a L reverse(M_a))`.
    AbsoluteAxis { line: Multivector },
}

impl Task {
    /// Line alignment with both lines rescaled to unit direction.
    pub fn line_alignment(line1: &Multivector, line2: &Multivector) -> Result<Self> {
        Ok(Task::LineAlignment { line1: primitives::normalize_line(line1)?, line2: primitives::normalize_line(line2)? })
    }

    pub fn absolute_axis(line: &Multivector) -> Result<Self> {
        Ok(Task::AbsoluteAxis { line: primitives::normalize_line(line)? })
    }

    pub fn distance(distance: f64) -> Result<Self> {
        if !(distance >= 0.0 && distance.is_finite()) {
            return Err(Error::Invalid(alloc::format!("distance {distance} must be finite and non-negative")));
        }
        Ok(Task::Distance { distance })
    }
}

impl ResidualBuilder for Task {
    fn evaluate(&self, s: &CdtsState) -> Result<Residual> {
        match self {
            Task::TargetMotor { target, frame } => residual_target_motor(s, target, *frame),
            Task::ReachPrimitive { target, primitive, frame } => residual_reach_primitive(s, target, primitive, *frame),
            Task::PointPairPoint { target } => Ok(residual_pointpair_point(s, *target)),
            Task::Containment { target } => Ok(residual_containment(s, target)),
            Task::Distance { distance } => Ok(residual_distance(s, *distance)),
            Task::LineAlignment { line1, line2 } => Ok(residual_line_alignment(s, line1, line2)),
            Task::AbsoluteAxis { line } => residual_absolute_axis(s, line),
        }
    }
}

const GRADE_0: u8 = 1;
const GRADE_2: u8 = 1 << 2;
const GRADE_3: u8 = 1 << 3;

/// Grades reachable by `A ∧ B` for homogeneous parts of the given grades.
fn outer_grades(a: u8, b: u8) -> u8 {
    let mut out = 0;
    for r in 0..6 {
        for t in 0..6 {
            if a & (1 << r) != 0 && b & (1 << t) != 0 && r + t <= 5 {
                out |= 1 << (r + t);
            }
        }
    }
    out
}

fn bivector_multivector(b: &crate::cga::Bivector) -> Multivector {
    b.to_multivector()
}

/// `log(reverse(M_target) M)` through the log Jacobian.
pub fn residual_target_motor(s: &CdtsState, target: &Motor, frame: Frame) -> Result<Residual> {
    let (m, j) = s.frame(frame)?;
    let inv = target.reverse();
    let error = inv * m;
    let value = error.log()?;
    let jlog = error.log_jacobian()?;
    let columns = j
        .columns
        .iter()
        .map(|c| {
            let d = jlog * (inv * *c).as_vector();
            bivector_multivector(&crate::cga::Bivector::from_vector(&d))
        })
        .collect();
    Ok(Residual { value: bivector_multivector(&value), jacobian: MultivectorJacobian::new(columns), grades: GRADE_2 })
}

fn moved_with_jacobian(m: &Motor, j: &MotorJacobian, x: &Multivector) -> (Multivector, MultivectorJacobian) {
    (m.apply(x), MultivectorJacobian::new(j.columns.iter().map(|c| sandwich_derivative(m, c, x)).collect()))
}

/// `X_d ∧ (M X reverse(M))` for the motor of `frame`.
pub fn residual_reach_primitive(s: &CdtsState, target: &Multivector, primitive: &Multivector, frame: Frame) -> Result<Residual> {
    let (m, j) = s.frame(frame)?;
    let (moved, dmoved) = moved_with_jacobian(&m, &j, primitive);
    Ok(Residual {
        value: *target ^ moved,
        jacobian: dmoved.map(|c| *target ^ *c),
        grades: outer_grades(target.grades_present(), primitive.grades_present()),
    })
}

/// `P_target ∧ P_cdts`.
pub fn residual_pointpair_point(s: &CdtsState, target: [f64; 3]) -> Residual {
    let p = embed_point(target);
    Residual { value: p ^ s.pointpair(), jacobian: s.pointpair_jacobian().map(|c| p ^ *c), grades: GRADE_3 }
}

/// `X_d × P_cdts`.
pub fn residual_containment(s: &CdtsState, target: &Multivector) -> Residual {
    Residual {
        value: target.commutator(&s.pointpair()),
        jacobian: s.pointpair_jacobian().map(|c| target.commutator(c)),
        // the commutator with a bivector preserves grade
        grades: target.grades_present(),
    }
}

/// `-2 P1·P2 - d²`, equal to `|x1 - x2|² - d²`.
pub fn residual_distance(s: &CdtsState, distance: f64) -> Residual {
    let value = -2.0 * (*s.p1() | *s.p2()).scalar_part() - distance * distance;
    let d1 = s.point_jacobian(super::Arm::One);
    let d2 = s.point_jacobian(super::Arm::Two);
    let columns = d1
        .columns
        .iter()
        .zip(&d2.columns)
        .map(|(a, b)| Multivector::scalar(-2.0 * ((*a | *s.p2()).scalar_part() + (*s.p1() | *b).scalar_part())))
        .collect();
    Residual { value: Multivector::scalar(value), jacobian: MultivectorJacobian::new(columns), grades: GRADE_0 }
}

/// `(M1 L1 reverse(M1)) × (M2 L2 reverse(M2))`.
pub fn residual_line_alignment(s: &CdtsState, line1: &Multivector, line2: &Multivector) -> Residual {
    let (a, da) = moved_with_jacobian(s.m1(), s.j1(), line1);
    let (b, db) = moved_with_jacobian(s.m2(), s.j2(), line2);
    let columns = da.columns.iter().map(|c| c.commutator(&b)).chain(db.columns.iter().map(|c| a.commutator(c))).collect();
    Residual { value: a.commutator(&b), jacobian: MultivectorJacobian::new(columns), grades: GRADE_2 }
}

/// Translator part of `m` (moving the origin to `m`'s origin) and its
/// derivative along each column of `j`.
fn translator_with_jacobian(m: &Motor, j: &MotorJacobian) -> (Motor, MotorJacobian) {
    let e0 = Multivector::e0();
    let p = m.apply(&e0);
    let weight = |x: &Multivector| -(Multivector::einf() | *x).scalar_part();
    let position = |x: &Multivector| [x[blade::index(blade::E1)], x[blade::index(blade::E2)], x[blade::index(blade::E3)]];
    let w = weight(&p);
    let x = position(&p);
    let t = [x[0] / w, x[1] / w, x[2] / w];
    let columns = j
        .columns
        .iter()
        .map(|c| {
            let dp = sandwich_derivative(m, c, &e0);
            let (dw, dx) = (weight(&dp), position(&dp));
            let dt = [0, 1, 2].map(|i| dx[i] / w - x[i] * dw / (w * w));
            Motor::from_coeffs([0.0, 0.0, 0.0, 0.0, -0.5 * dt[0], -0.5 * dt[1], -0.5 * dt[2], 0.0])
        })
        .collect();
    (Motor::translator(t), MotorJacobian::new(columns))
}

/// `(T_a L reverse(T_a)) × (M_a L reverse(M_a))`: zero when the rotation of
/// the absolute motor leaves the direction of `L` unchanged.
pub fn residual_absolute_axis(s: &CdtsState, line: &Multivector) -> Result<Residual> {
    let (ma, ja) = s.absolute_motor_and_jacobian()?;
    let (ta, jt) = translator_with_jacobian(&ma, &ja);
    let (a, da) = moved_with_jacobian(&ta, &jt, line);
    let (b, db) = moved_with_jacobian(&ma, &ja, line);
    let columns = da.columns.iter().zip(&db.columns).map(|(x, y)| x.commutator(&b) + a.commutator(y)).collect();
    Ok(Residual { value: a.commutator(&b), jacobian: MultivectorJacobian::new(columns), grades: GRADE_2 })
}

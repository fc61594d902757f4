//! Motors (rigid transforms), their bivector logarithms and the derivatives
//! of the exponential and logarithmic maps.
//!
//! A bivector B = B_R + B_T splits into a Euclidean rotation part B_R (with
//! B_R² = -θ²) and a translation part B_T = t∧e∞. Its square is
//! B² = -θ² + 2βI with I = e123∞ and β I = B_R∧B_T, so B behaves like a
//! scalar "dual angle" θ - (β/θ) I and
//!
//! ```text
//! exp(B) = cos θ + β sinc θ I + sinc θ B + β c(θ) I B_R,   c(θ) = (sin θ - θ cos θ) / θ³
//! ```
//!
//! The logarithm inverts this relation on the branch θ ∈ [0, π).

use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use nalgebra::{SMatrix, SVector};

use super::blade::{self, MOTOR_BLADES, MOTOR_TERMS};
use super::multivector::Multivector;
use crate::error::{Error, Result};
use crate::math::{atan2, cos, sinc, sinc_cubic, sinc_cubic_slope, sqrt};

/// `|M reverse(M) - 1|` above which a motor is rejected as a transform.
pub const UNIT_TOLERANCE: f64 = 1e-6;
/// Rotation magnitudes within this distance of π have no unique logarithm.
pub const BRANCH_MARGIN: f64 = 1e-9;
/// Below this rotation magnitude the logarithm uses the two-term series.
const LOG_SERIES_BELOW: f64 = 1e-6;

/// Derivative of a motor with respect to the six bivector coefficients.
pub type ExpJacobian = SMatrix<f64, 8, 6>;
/// Derivative of a bivector with respect to the eight motor coefficients.
pub type LogJacobian = SMatrix<f64, 6, 8>;

/// Element of the motor subalgebra, coefficients on
/// `[1, e12, e13, e23, e1∞, e2∞, e3∞, e123∞]`.
///
/// Unit motors are rigid transforms. Non-unit elements appear as Jacobian
/// columns and are represented by the same type.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct Motor {
    coeffs: [f64; 8],
}

/// Motor logarithm, coefficients on `[e12, e13, e23, e1∞, e2∞, e3∞]`.
///
/// The first three coefficients carry the rotation (radians, half the
/// physical rotation angle in magnitude), the last three the translation
/// (meters).
#[derive(Clone, Copy, PartialEq, Default, Debug)]
pub struct Bivector {
    coeffs: [f64; 6],
}

impl Motor {
    pub const IDENTITY: Motor = Motor { coeffs: [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0] };

    pub const fn from_coeffs(coeffs: [f64; 8]) -> Self {
        Self { coeffs }
    }

    pub const fn zero() -> Self {
        Self { coeffs: [0.0; 8] }
    }

    pub const fn coeffs(&self) -> &[f64; 8] {
        &self.coeffs
    }

    pub fn as_vector(&self) -> SVector<f64, 8> {
        SVector::from(self.coeffs)
    }

    pub fn from_vector(v: &SVector<f64, 8>) -> Self {
        let mut coeffs = [0.0; 8];
        coeffs.copy_from_slice(v.as_slice());
        Self { coeffs }
    }

    /// Projects a multivector onto the motor blades, dropping everything else.
    pub fn from_multivector(m: &Multivector) -> Self {
        let mut coeffs = [0.0; 8];
        for (slot, &idx) in MOTOR_BLADES.iter().enumerate() {
            coeffs[slot] = m[idx as usize];
        }
        Self { coeffs }
    }

    pub fn to_multivector(&self) -> Multivector {
        let mut m = Multivector::zero();
        for (slot, &idx) in MOTOR_BLADES.iter().enumerate() {
            m[idx as usize] = self.coeffs[slot];
        }
        m
    }

    /// Translator moving points by `t`: `1 - ½ t e∞`.
    pub fn translator(t: [f64; 3]) -> Self {
        Self { coeffs: [1.0, 0.0, 0.0, 0.0, -0.5 * t[0], -0.5 * t[1], -0.5 * t[2], 0.0] }
    }

    /// Rotor for a unit quaternion given as (w, x, y, z).
    pub fn rotor_from_quaternion(q: [f64; 4]) -> Self {
        let [w, x, y, z] = q;
        Self { coeffs: [w, -z, y, -x, 0.0, 0.0, 0.0, 0.0] }
    }

    /// Counterclockwise rotation by `angle` about the unit direction `axis`
    /// through the origin.
    pub fn rotor(axis: [f64; 3], angle: f64) -> Self {
        Bivector::rotation_plane(axis).scale(-0.5 * angle).exp()
    }

    /// Rotation by the quaternion followed by translation by `t`.
    pub fn from_translation_quaternion(t: [f64; 3], q: [f64; 4]) -> Self {
        Self::translator(t) * Self::rotor_from_quaternion(q)
    }

    pub fn reverse(&self) -> Self {
        let c = &self.coeffs;
        Self { coeffs: [c[0], -c[1], -c[2], -c[3], -c[4], -c[5], -c[6], c[7]] }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut coeffs = self.coeffs;
        coeffs.iter_mut().for_each(|c| *c *= s);
        Self { coeffs }
    }

    pub fn norm(&self) -> f64 {
        sqrt(self.coeffs.iter().map(|c| c * c).sum())
    }

    /// `|M reverse(M) - 1|`, zero for unit motors.
    pub fn unit_deviation(&self) -> f64 {
        (*self * self.reverse() - Motor::IDENTITY).norm()
    }

    /// Rescales so that `M reverse(M) = 1`.
    ///
    /// `M M~ = a + b I` for any motor, and `(a + bI)^(-1/2) = a^(-1/2) (1 - b/(2a) I)`.
    pub fn normalized(&self) -> Self {
        let n = *self * self.reverse();
        let (a, b) = (n.coeffs[0], n.coeffs[7]);
        let inv_sqrt = 1.0 / sqrt(a);
        let correction = Motor::from_coeffs([inv_sqrt, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -0.5 * b / a * inv_sqrt]);
        *self * correction
    }

    /// `M X reverse(M)` for a unit motor.
    pub fn sandwich(&self, x: &Multivector) -> Result<Multivector> {
        let deviation = self.unit_deviation();
        if !(deviation <= UNIT_TOLERANCE) {
            return Err(Error::NonUnitMotor { deviation });
        }
        Ok(self.apply(x))
    }

    /// `M X reverse(M)` without the unit check; also the building block of
    /// sandwich derivatives where one factor is a Jacobian column.
    pub fn apply(&self, x: &Multivector) -> Multivector {
        self.to_multivector() * *x * self.reverse().to_multivector()
    }

    /// `A X reverse(B)`, the product-rule term of a sandwich derivative.
    pub fn apply_pair(&self, x: &Multivector, right: &Motor) -> Multivector {
        self.to_multivector() * *x * right.reverse().to_multivector()
    }

    /// Euclidean position the motor moves the origin to.
    pub fn origin(&self) -> [f64; 3] {
        let p = self.apply(&Multivector::e0());
        let w = -(Multivector::einf() | p).scalar_part();
        [
            p[blade::index(blade::E1)] / w,
            p[blade::index(blade::E2)] / w,
            p[blade::index(blade::E3)] / w,
        ]
    }

    /// Splits a unit motor as `T R` where `T` is a translator and `R` a
    /// rotor fixing the origin.
    pub fn translator_part(&self) -> Motor {
        Motor::translator(self.origin())
    }

    /// Rotation part as a 3×3 matrix (columns are the images of e1, e2, e3).
    pub fn rotation_matrix(&self) -> [[f64; 3]; 3] {
        let r = Motor::from_coeffs([self.coeffs[0], self.coeffs[1], self.coeffs[2], self.coeffs[3], 0.0, 0.0, 0.0, 0.0]);
        let basis = [Multivector::e1(), Multivector::e2(), Multivector::e3()];
        let mut out = [[0.0; 3]; 3];
        for (col, e) in basis.iter().enumerate() {
            let img = r.apply(e);
            let s = r.coeffs[0] * r.coeffs[0] + r.coeffs[1] * r.coeffs[1] + r.coeffs[2] * r.coeffs[2] + r.coeffs[3] * r.coeffs[3];
            out[0][col] = img[blade::index(blade::E1)] / s;
            out[1][col] = img[blade::index(blade::E2)] / s;
            out[2][col] = img[blade::index(blade::E3)] / s;
        }
        out
    }

    /// Principal logarithm, see [`Bivector::exp`].
    pub fn log(&self) -> Result<Bivector> {
        let p = LogParts::new(self)?;
        let [.., t1, t2, t3, pseudo] = self.coeffs;
        let w = p.axis_translation;
        let k3cp = p.k * p.k * p.k * p.c * pseudo;
        Ok(Bivector {
            coeffs: [
                p.k * self.coeffs[1],
                p.k * self.coeffs[2],
                p.k * self.coeffs[3],
                p.k * t1 - k3cp * w[0],
                p.k * t2 - k3cp * w[1],
                p.k * t3 - k3cp * w[2],
            ],
        })
    }

    /// Derivative of [`Motor::log`] with respect to the eight coefficients.
    pub fn log_jacobian(&self) -> Result<LogJacobian> {
        let p = LogParts::new(self)?;
        let c = &self.coeffs;
        let rb = [c[1], c[2], c[3]];
        let tb = [c[4], c[5], c[6]];
        let pseudo = c[7];
        let (k, g, rho2, r) = (p.k, p.g, p.rho2, p.r);
        let w = p.axis_translation;
        let jmat = pseudoscalar_map();
        let (k2, k3) = (k * k, k * k * k);

        let mut jac = LogJacobian::zeros();
        for a in 0..3 {
            jac[(a, 0)] = -rb[a] / rho2;
            for b in 0..3 {
                jac[(a, 1 + b)] = g * rb[a] * rb[b] + if a == b { k } else { 0.0 };
            }
        }
        // d(k³ c) with respect to s0 and to the rotation coefficients
        let dk3c_ds0 = -(3.0 * k2 * p.c + k2 * k2 * p.h * r * r) / rho2;
        let dk3c_drb_scale = 3.0 * k2 * p.c * g + k3 * p.h * k * p.s0 / rho2;
        for a in 0..3 {
            let row = 3 + a;
            jac[(row, 0)] = -tb[a] / rho2 - pseudo * w[a] * dk3c_ds0;
            for b in 0..3 {
                jac[(row, 1 + b)] = tb[a] * g * rb[b]
                    - pseudo * w[a] * dk3c_drb_scale * rb[b]
                    - k3 * p.c * pseudo * jmat[a][b];
                jac[(row, 4 + b)] = if a == b { k } else { 0.0 };
            }
            jac[(row, 7)] = -k3 * p.c * w[a];
        }
        Ok(jac)
    }
}

/// Scalar factors of the logarithm shared by value and Jacobian.
struct LogParts {
    s0: f64,
    r: f64,
    rho2: f64,
    /// θ / r
    k: f64,
    /// (dk/dr) / r
    g: f64,
    /// c(θ)
    c: f64,
    /// c'(θ) / θ
    h: f64,
    /// Translation coefficients of I·R_b, with R_b the rotation coefficients.
    axis_translation: [f64; 3],
}

impl LogParts {
    fn new(m: &Motor) -> Result<Self> {
        let c = &m.coeffs;
        let s0 = c[0];
        let r = sqrt(c[1] * c[1] + c[2] * c[2] + c[3] * c[3]);
        let theta = atan2(r, s0);
        if theta > core::f64::consts::PI - BRANCH_MARGIN {
            return Err(Error::LogBranch { angle: theta });
        }
        let rho2 = r * r + s0 * s0;
        let (k, g) = if theta < LOG_SERIES_BELOW {
            let x2 = (r / s0) * (r / s0);
            (
                (1.0 - x2 / 3.0) / s0,
                (-2.0 / 3.0 + 0.8 * x2 - 6.0 / 7.0 * x2 * x2) / (s0 * s0 * s0),
            )
        } else {
            (theta / r, (s0 * r / rho2 - theta) / (r * r * r))
        };
        let jmat = pseudoscalar_map();
        let mut axis_translation = [0.0; 3];
        for (a, out) in axis_translation.iter_mut().enumerate() {
            *out = (0..3).map(|b| jmat[a][b] * c[1 + b]).sum();
        }
        Ok(Self {
            s0,
            r,
            rho2,
            k,
            g,
            c: sinc_cubic(theta),
            h: sinc_cubic_slope(theta),
            axis_translation,
        })
    }
}

/// Matrix of `X -> I X` from rotation coefficients to translation
/// coefficients, I = e123∞.
fn pseudoscalar_map() -> [[f64; 3]; 3] {
    let pseudo = Motor::from_coeffs([0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let mut out = [[0.0; 3]; 3];
    for b in 0..3 {
        let mut e = [0.0; 8];
        e[1 + b] = 1.0;
        let img = pseudo * Motor::from_coeffs(e);
        for (a, row) in out.iter_mut().enumerate() {
            row[b] = img.coeffs[4 + a];
        }
    }
    out
}

impl Mul for Motor {
    type Output = Motor;

    fn mul(self, rhs: Motor) -> Motor {
        let mut out = [0.0; 8];
        for &(a, b, d, c) in MOTOR_TERMS.iter() {
            out[d as usize] += c * self.coeffs[a as usize] * rhs.coeffs[b as usize];
        }
        Motor { coeffs: out }
    }
}

impl Mul<f64> for Motor {
    type Output = Motor;

    fn mul(self, rhs: f64) -> Motor {
        self.scale(rhs)
    }
}

impl Add for Motor {
    type Output = Motor;

    fn add(self, rhs: Motor) -> Motor {
        let mut out = self.coeffs;
        out.iter_mut().zip(rhs.coeffs.iter()).for_each(|(a, b)| *a += b);
        Motor { coeffs: out }
    }
}

impl Sub for Motor {
    type Output = Motor;

    fn sub(self, rhs: Motor) -> Motor {
        self + rhs.scale(-1.0)
    }
}

impl Neg for Motor {
    type Output = Motor;

    fn neg(self) -> Motor {
        self.scale(-1.0)
    }
}

impl fmt::Debug for Motor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Motor{:?}", self.coeffs)
    }
}

impl fmt::Display for Motor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_multivector(), f)
    }
}

impl Bivector {
    pub const fn from_coeffs(coeffs: [f64; 6]) -> Self {
        Self { coeffs }
    }

    pub const fn zero() -> Self {
        Self { coeffs: [0.0; 6] }
    }

    pub fn from_parts(rotation: [f64; 3], translation: [f64; 3]) -> Self {
        let [a, b, c] = rotation;
        let [d, e, f] = translation;
        Self { coeffs: [a, b, c, d, e, f] }
    }

    /// Unit rotation plane of a direction through the origin:
    /// `n1 e23 - n2 e13 + n3 e12`.
    pub fn rotation_plane(axis: [f64; 3]) -> Self {
        Self { coeffs: [axis[2], -axis[1], axis[0], 0.0, 0.0, 0.0] }
    }

    pub const fn coeffs(&self) -> &[f64; 6] {
        &self.coeffs
    }

    pub fn as_vector(&self) -> SVector<f64, 6> {
        SVector::from(self.coeffs)
    }

    pub fn from_vector(v: &SVector<f64, 6>) -> Self {
        let mut coeffs = [0.0; 6];
        coeffs.copy_from_slice(v.as_slice());
        Self { coeffs }
    }

    pub fn rotation(&self) -> Bivector {
        Self { coeffs: [self.coeffs[0], self.coeffs[1], self.coeffs[2], 0.0, 0.0, 0.0] }
    }

    pub fn translation(&self) -> Bivector {
        Self { coeffs: [0.0, 0.0, 0.0, self.coeffs[3], self.coeffs[4], self.coeffs[5]] }
    }

    /// θ = |B_R|.
    pub fn rotation_magnitude(&self) -> f64 {
        sqrt(self.coeffs[..3].iter().map(|c| c * c).sum())
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut coeffs = self.coeffs;
        coeffs.iter_mut().for_each(|c| *c *= s);
        Self { coeffs }
    }

    pub fn norm(&self) -> f64 {
        sqrt(self.coeffs.iter().map(|c| c * c).sum())
    }

    /// The bivector as a (non-unit) element of the motor subalgebra.
    pub fn to_motor(&self) -> Motor {
        let c = &self.coeffs;
        Motor::from_coeffs([0.0, c[0], c[1], c[2], c[3], c[4], c[5], 0.0])
    }

    pub fn to_multivector(&self) -> Multivector {
        self.to_motor().to_multivector()
    }

    /// β in `B_R ∧ B_T = β e123∞`.
    fn screw_coupling(&self) -> f64 {
        (self.rotation().to_motor() * self.translation().to_motor()).coeffs[7]
    }

    pub fn exp(&self) -> Motor {
        let theta = self.rotation_magnitude();
        let beta = self.screw_coupling();
        let s = sinc(theta);
        let c = sinc_cubic(theta);
        let pseudo = Motor::from_coeffs([0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let i_br = pseudo * self.rotation().to_motor();
        let mut out = self.to_motor() * s + i_br * (beta * c);
        out.coeffs[0] += cos(theta);
        out.coeffs[7] += beta * s;
        out
    }

    /// Derivative of [`Bivector::exp`] with respect to the six coefficients.
    pub fn exp_jacobian(&self) -> ExpJacobian {
        let theta = self.rotation_magnitude();
        let beta = self.screw_coupling();
        let s = sinc(theta);
        let c = sinc_cubic(theta);
        let h = sinc_cubic_slope(theta);
        let pseudo = Motor::from_coeffs([0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let b = self.to_motor();
        let br = self.rotation().to_motor();
        let bt = self.translation().to_motor();
        let i_br = pseudo * br;
        // derivative of the terms multiplying β
        let beta_terms = pseudo * s + i_br * c;

        let mut jac = ExpJacobian::zeros();
        for k in 0..6 {
            let mut unit = [0.0; 6];
            unit[k] = 1.0;
            let ek = Bivector::from_coeffs(unit).to_motor();
            let col = if k < 3 {
                let bk = self.coeffs[k];
                let dbeta = (ek * bt).coeffs[7];
                let mut col = beta_terms * dbeta
                    + pseudo * (-beta * c * bk)
                    + i_br * (beta * h * bk)
                    + b * (-c * bk)
                    + ek * s
                    + pseudo * ek * (beta * c);
                col.coeffs[0] -= s * bk;
                col
            } else {
                let dbeta = (br * ek).coeffs[7];
                beta_terms * dbeta + ek * s
            };
            for row in 0..8 {
                jac[(row, k)] = col.coeffs[row];
            }
        }
        jac
    }
}

impl Add for Bivector {
    type Output = Bivector;

    fn add(self, rhs: Bivector) -> Bivector {
        let mut out = self.coeffs;
        out.iter_mut().zip(rhs.coeffs.iter()).for_each(|(a, b)| *a += b);
        Bivector { coeffs: out }
    }
}

impl Sub for Bivector {
    type Output = Bivector;

    fn sub(self, rhs: Bivector) -> Bivector {
        self + rhs.scale(-1.0)
    }
}

impl Mul<f64> for Bivector {
    type Output = Bivector;

    fn mul(self, rhs: f64) -> Bivector {
        self.scale(rhs)
    }
}

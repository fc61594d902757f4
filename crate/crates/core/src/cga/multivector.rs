use core::fmt;
use core::ops::{Add, AddAssign, BitOr, BitXor, Index, IndexMut, Mul, MulAssign, Neg, Sub, SubAssign};

use super::blade::{self, COUNT};
use crate::math::sqrt;

/// Dense element of 3D conformal geometric algebra.
///
/// Coefficients follow the blade order of [`blade`]. The metric is
/// ei·ej = δij for the Euclidean generators, e0·e0 = e∞·e∞ = 0 and
/// e0·e∞ = -1.
#[derive(Clone, Copy, PartialEq)]
pub struct Multivector {
    coeffs: [f64; COUNT],
}

impl Default for Multivector {
    fn default() -> Self {
        Self::zero()
    }
}

impl Multivector {
    pub const fn zero() -> Self {
        Self { coeffs: [0.0; COUNT] }
    }

    pub const fn from_coeffs(coeffs: [f64; COUNT]) -> Self {
        Self { coeffs }
    }

    pub const fn scalar(value: f64) -> Self {
        let mut coeffs = [0.0; COUNT];
        coeffs[0] = value;
        Self { coeffs }
    }

    /// Unit blade for a generator mask, see [`blade`].
    pub const fn blade(mask: u8) -> Self {
        let mut coeffs = [0.0; COUNT];
        coeffs[blade::index(mask)] = 1.0;
        Self { coeffs }
    }

    pub const fn e1() -> Self {
        Self::blade(blade::E1)
    }

    pub const fn e2() -> Self {
        Self::blade(blade::E2)
    }

    pub const fn e3() -> Self {
        Self::blade(blade::E3)
    }

    pub const fn e0() -> Self {
        Self::blade(blade::E0)
    }

    pub const fn einf() -> Self {
        Self::blade(blade::EINF)
    }

    /// Grade-1 element from Euclidean, e0 and e∞ coordinates.
    pub fn vector(x: [f64; 3], e0: f64, einf: f64) -> Self {
        let mut m = Self::zero();
        m[blade::index(blade::E1)] = x[0];
        m[blade::index(blade::E2)] = x[1];
        m[blade::index(blade::E3)] = x[2];
        m[blade::index(blade::E0)] = e0;
        m[blade::index(blade::EINF)] = einf;
        m
    }

    pub const fn coeffs(&self) -> &[f64; COUNT] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64; COUNT] {
        &mut self.coeffs
    }

    pub fn get(&self, mask: u8) -> f64 {
        self.coeffs[blade::index(mask)]
    }

    pub fn scalar_part(&self) -> f64 {
        self.coeffs[0]
    }

    fn product(&self, other: &Self, starts: &[u16; 33], terms: &[(u8, u8, f64)]) -> Self {
        let mut out = [0.0; COUNT];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for &(j, k, c) in &terms[starts[i] as usize..starts[i + 1] as usize] {
                let b = other.coeffs[j as usize];
                if b != 0.0 {
                    out[k as usize] += c * a * b;
                }
            }
        }
        Self { coeffs: out }
    }

    pub fn geometric(&self, other: &Self) -> Self {
        self.product(other, &blade::GEOMETRIC_STARTS, &blade::GEOMETRIC_TERMS)
    }

    /// Grade-raising part: sum over grade pairs of ⟨A_r B_s⟩_(r+s).
    pub fn outer(&self, other: &Self) -> Self {
        self.product(other, &blade::OUTER_STARTS, &blade::OUTER_TERMS)
    }

    /// Grade-lowering part: sum over grade pairs of ⟨A_r B_s⟩_|r-s|.
    pub fn inner(&self, other: &Self) -> Self {
        self.product(other, &blade::INNER_STARTS, &blade::INNER_TERMS)
    }

    /// Commutator product ½(AB - BA).
    pub fn commutator(&self, other: &Self) -> Self {
        (self.geometric(other) - other.geometric(self)) * 0.5
    }

    pub fn reverse(&self) -> Self {
        let mut out = self.coeffs;
        for (i, c) in out.iter_mut().enumerate() {
            // (-1)^(k(k-1)/2) flips grades 2 and 3
            if matches!(blade::grade(i), 2 | 3) {
                *c = -*c;
            }
        }
        Self { coeffs: out }
    }

    pub fn grade(&self, k: usize) -> Self {
        let mut out = [0.0; COUNT];
        for (i, c) in self.coeffs.iter().enumerate() {
            if blade::grade(i) == k {
                out[i] = *c;
            }
        }
        Self { coeffs: out }
    }

    /// Bit `k` set when the grade-`k` part has a nonzero coefficient.
    pub fn grades_present(&self) -> u8 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .fold(0, |acc, (i, _)| acc | 1 << blade::grade(i))
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        sqrt(self.norm_squared())
    }

    pub fn norm_squared(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

impl Index<usize> for Multivector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.coeffs[i]
    }
}

impl IndexMut<usize> for Multivector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.coeffs[i]
    }
}

impl Add for Multivector {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for Multivector {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *a += b;
        }
    }
}

impl Sub for Multivector {
    type Output = Self;

    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl SubAssign for Multivector {
    fn sub_assign(&mut self, rhs: Self) {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *a -= b;
        }
    }
}

impl Neg for Multivector {
    type Output = Self;

    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Mul<f64> for Multivector {
    type Output = Self;

    fn mul(mut self, rhs: f64) -> Self {
        self *= rhs;
        self
    }
}

impl MulAssign<f64> for Multivector {
    fn mul_assign(&mut self, rhs: f64) {
        for c in self.coeffs.iter_mut() {
            *c *= rhs;
        }
    }
}

impl Mul<Multivector> for f64 {
    type Output = Multivector;

    fn mul(self, rhs: Multivector) -> Multivector {
        rhs * self
    }
}

/// Geometric product.
impl Mul for Multivector {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        self.geometric(&rhs)
    }
}

/// Outer product.
impl BitXor for Multivector {
    type Output = Self;

    fn bitxor(self, rhs: Self) -> Self {
        self.outer(&rhs)
    }
}

/// Inner product.
impl BitOr for Multivector {
    type Output = Self;

    fn bitor(self, rhs: Self) -> Self {
        self.inner(&rhs)
    }
}

impl fmt::Debug for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            if i != 0 {
                f.write_str("*")?;
                blade::write_name(f, i)?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

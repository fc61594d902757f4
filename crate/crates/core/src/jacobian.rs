//! 1×N matrices of multivectors and their real expansions.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::cga::{blade, Motor, Multivector};

/// One motor-algebra column per joint, e.g. `∂M/∂q_i`. Expands to 8×N.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct MotorJacobian {
    pub columns: Vec<Motor>,
}

/// One multivector column per joint. Expands to 32×N.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct MultivectorJacobian {
    pub columns: Vec<Multivector>,
}

impl MotorJacobian {
    pub fn new(columns: Vec<Motor>) -> Self {
        Self { columns }
    }

    pub fn zeros(n: usize) -> Self {
        Self { columns: alloc::vec![Motor::zero(); n] }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// `A J_i` for every column.
    pub fn left_mul(&self, a: &Motor) -> Self {
        Self { columns: self.columns.iter().map(|c| *a * *c).collect() }
    }

    /// `J_i B` for every column.
    pub fn right_mul(&self, b: &Motor) -> Self {
        Self { columns: self.columns.iter().map(|c| *c * *b).collect() }
    }

    pub fn reverse(&self) -> Self {
        Self { columns: self.columns.iter().map(Motor::reverse).collect() }
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Self {
        let mut columns = self.columns.clone();
        columns.extend_from_slice(&other.columns);
        Self { columns }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        Self { columns: self.columns.iter().zip(&other.columns).map(|(a, b)| *a + *b).collect() }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(8, self.len(), |r, c| self.columns[c].coeffs()[r])
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), 8);
        let columns = (0..m.ncols())
            .map(|c| {
                let mut coeffs = [0.0; 8];
                for (r, v) in coeffs.iter_mut().enumerate() {
                    *v = m[(r, c)];
                }
                Motor::from_coeffs(coeffs)
            })
            .collect();
        Self { columns }
    }

    pub fn to_multivector_jacobian(&self) -> MultivectorJacobian {
        MultivectorJacobian { columns: self.columns.iter().map(Motor::to_multivector).collect() }
    }
}

impl MultivectorJacobian {
    pub fn new(columns: Vec<Multivector>) -> Self {
        Self { columns }
    }

    pub fn zeros(n: usize) -> Self {
        Self { columns: alloc::vec![Multivector::zero(); n] }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn map(&self, f: impl Fn(&Multivector) -> Multivector) -> Self {
        Self { columns: self.columns.iter().map(f).collect() }
    }

    pub fn hstack(&self, other: &Self) -> Self {
        let mut columns = self.columns.clone();
        columns.extend_from_slice(&other.columns);
        Self { columns }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(blade::COUNT, self.len(), |r, c| self.columns[c][r])
    }

    /// Rows restricted to the blades whose grade bit is set in `grades`.
    pub fn to_matrix_masked(&self, grades: u8) -> DMatrix<f64> {
        let rows = blade_rows(grades);
        DMatrix::from_fn(rows.len(), self.len(), |r, c| self.columns[c][rows[r]])
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), blade::COUNT);
        let columns = (0..m.ncols())
            .map(|c| {
                let mut mv = Multivector::zero();
                for r in 0..blade::COUNT {
                    mv[r] = m[(r, c)];
                }
                mv
            })
            .collect();
        Self { columns }
    }
}

/// Blade indices whose grade is selected by the bit mask.
pub fn blade_rows(grades: u8) -> Vec<usize> {
    (0..blade::COUNT).filter(|&i| grades & (1 << blade::grade(i)) != 0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cga::Bivector;

    #[test]
    fn expansion_roundtrip() {
        let cols: Vec<Motor> = (0..5)
            .map(|i| Bivector::from_parts([0.1 * i as f64, 0.2, -0.3], [0.4, 0.0, i as f64]).exp())
            .collect();
        let j = MotorJacobian::new(cols);
        let m = j.to_matrix();
        assert_eq!((m.nrows(), m.ncols()), (8, 5));
        assert_eq!(MotorJacobian::from_matrix(&m), j);
        let mv = j.to_multivector_jacobian();
        assert_eq!(MultivectorJacobian::from_matrix(&mv.to_matrix()), mv);
        assert_eq!(mv.to_matrix_masked(0b1).nrows(), 1);
        assert_eq!(mv.to_matrix_masked(0b100).nrows(), 10);
    }
}

//! Operation accounting.
//!
//! Every matrix product made by the refinement maps goes through an
//! [`OpCounter`], which is how the cost figures in traces are produced and
//! how the "no factorizations" guarantee is checked.

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounter {
    pub matrix_mults: u64,
    pub matrix_adds: u64,
    /// Complex scalar multiplications inside counted matrix products.
    pub scalar_mults: u64,
    pub scalar_adds: u64,
    /// Eigen-, singular value- or QR-type decompositions. Refinement code
    /// never increments this; only the initial SVD does.
    pub factorizations: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mul<T: Real>(&mut self, a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
        self.note_mul(a.rows(), a.cols(), b.cols());
        a.matmul(b)
    }

    /// Product whose result is known to be Hermitian.
    pub fn mul_hermitian<T: Real>(&mut self, a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
        self.note_mul(a.rows(), a.cols(), b.cols());
        a.matmul_hermitian(b)
    }

    /// `a^* b`.
    pub fn adjoint_mul<T: Real>(&mut self, a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
        self.note_mul(a.cols(), a.rows(), b.cols());
        a.adjoint_matmul(b)
    }

    /// `W^* W - I`.
    pub fn gram<T: Real>(&mut self, w: &Matrix<T>) -> Matrix<T> {
        self.note_mul(w.cols(), w.rows(), w.cols());
        w.gram_minus_identity()
    }

    pub fn add<T: Real>(&mut self, a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
        self.note_add(a.rows() * a.cols());
        a.add(b)
    }

    pub fn sub<T: Real>(&mut self, a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
        self.note_add(a.rows() * a.cols());
        a.sub(b)
    }

    fn note_mul(&mut self, m: usize, k: usize, n: usize) {
        self.matrix_mults += 1;
        self.scalar_mults += (m * k * n) as u64;
        self.scalar_adds += (m * k.saturating_sub(1) * n) as u64;
    }

    fn note_add(&mut self, entries: usize) {
        self.matrix_adds += 1;
        self.scalar_adds += entries as u64;
    }

    /// Scalar work done outside matrix products (e.g. entrywise solves).
    pub fn note_scalar(&mut self, mults: u64, adds: u64) {
        self.scalar_mults += mults;
        self.scalar_adds += adds;
    }

    pub fn note_factorization(&mut self) {
        self.factorizations += 1;
    }

    /// Counts accumulated since `earlier`.
    pub fn since(&self, earlier: &OpCounter) -> OpCounter {
        OpCounter {
            matrix_mults: self.matrix_mults - earlier.matrix_mults,
            matrix_adds: self.matrix_adds - earlier.matrix_adds,
            scalar_mults: self.scalar_mults - earlier.scalar_mults,
            scalar_adds: self.scalar_adds - earlier.scalar_adds,
            factorizations: self.factorizations - earlier.factorizations,
        }
    }

    pub fn merge(&mut self, other: &OpCounter) {
        self.matrix_mults += other.matrix_mults;
        self.matrix_adds += other.matrix_adds;
        self.scalar_mults += other.scalar_mults;
        self.scalar_adds += other.scalar_adds;
        self.factorizations += other.factorizations;
    }
}

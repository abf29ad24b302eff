//! Dense complex matrices over a [`Real`] backend.

use std::fmt;
use std::ops::{Index, IndexMut, Range};

use crate::complex::Complex;
use crate::scalar::Real;

/// Row-major dense complex matrix. `prec` is the precision used for newly
/// created entries and accumulators.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    prec: u32,
    data: Vec<Complex<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize, bits: u32) -> Self {
        Matrix {
            rows,
            cols,
            prec: bits,
            data: vec![Complex::zero_at(bits); rows * cols],
        }
    }

    /// Rectangular identity: ones on the main diagonal.
    pub fn eye(rows: usize, cols: usize, bits: u32) -> Self {
        let mut m = Self::zeros(rows, cols, bits);
        for i in 0..rows.min(cols) {
            m[(i, i)] = Complex::one_at(bits);
        }
        m
    }

    pub fn identity(n: usize, bits: u32) -> Self {
        Self::eye(n, n, bits)
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        bits: u32,
        mut f: impl FnMut(usize, usize) -> Complex<T>,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix {
            rows,
            cols,
            prec: bits,
            data,
        }
    }

    /// `rows x cols` matrix with the given real values on its diagonal.
    pub fn from_real_diag(diag: &[T], rows: usize, cols: usize) -> Self {
        let bits = diag.iter().map(Real::precision).max().unwrap_or(53);
        let mut m = Self::zeros(rows, cols, bits);
        for (i, d) in diag.iter().enumerate().take(rows.min(cols)) {
            m[(i, i)] = Complex::from_real(d.clone());
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, bits: u32, data: Vec<Complex<T>>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Matrix {
            rows,
            cols,
            prec: bits,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Round every entry to `bits` (or widen exactly).
    pub fn with_precision(&self, bits: u32) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            prec: bits,
            data: self.data.iter().map(|z| z.with_precision(bits)).collect(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im.is_zero())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.prec, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.prec, |i, j| self[(j, i)].clone())
    }

    pub fn diag(&self) -> Vec<Complex<T>> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)].clone())
            .collect()
    }

    /// Real parts of the diagonal.
    pub fn real_diag(&self) -> Vec<T> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)].re.clone())
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[Complex<T>]) {
        for (i, z) in col.iter().enumerate() {
            self[(i, j)] = z.clone();
        }
    }

    /// Columns in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), self.prec, |i, j| {
            self[(i, idx[j])].clone()
        })
    }

    pub fn block(&self, rows: Range<usize>, cols: Range<usize>) -> Self {
        Self::from_fn(rows.len(), cols.len(), self.prec, |i, j| {
            self[(rows.start + i, cols.start + j)].clone()
        })
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Matrix<T>) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)].clone();
            }
        }
    }

    /// Copy into a `rows x cols` matrix, truncating or zero-padding.
    pub fn resized(&self, rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols, self.prec);
        for i in 0..rows.min(self.rows) {
            for j in 0..cols.min(self.cols) {
                m[(i, j)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn map(&self, f: impl Fn(&Complex<T>) -> Complex<T>) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            prec: self.prec,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|z| z.scale(s))
    }

    pub fn neg(&self) -> Self {
        self.map(|z| -z.clone())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.zip(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.zip(rhs, |a, b| a - b)
    }

    fn zip(&self, rhs: &Self, f: impl Fn(&Complex<T>, &Complex<T>) -> Complex<T>) -> Self {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            prec: self.prec.max(rhs.prec),
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn add_assign(&mut self, rhs: &Self) {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch");
        self.prec = self.prec.max(rhs.prec);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }

    /// `I + self` for square `self`.
    pub fn plus_identity(&self) -> Self {
        assert!(self.is_square(), "plus_identity needs a square matrix");
        let mut m = self.clone();
        let one = T::from_i64_at(1, self.prec);
        for i in 0..self.rows {
            m[(i, i)].re += &one;
        }
        m
    }

    /// `self + c I` for square `self`.
    pub fn add_diag(&self, c: &T) -> Self {
        assert!(self.is_square(), "add_diag needs a square matrix");
        let mut m = self.clone();
        for i in 0..self.rows {
            m[(i, i)].re += c;
        }
        m
    }

    /// Matrix product, accumulated with fused multiply-add.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let prec = self.prec.max(rhs.prec);
        let mut out = Self::zeros(self.rows, rhs.cols, prec);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (c, b) in dst.iter_mut().zip(row) {
                    c.add_mul(a, b);
                }
            }
        }
        out
    }

    /// Product known to be Hermitian (e.g. two commuting Hermitian factors):
    /// only the upper triangle is computed, the rest is mirrored.
    pub fn matmul_hermitian(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        assert_eq!(self.rows, rhs.cols, "Hermitian product must be square");
        let n = self.rows;
        let prec = self.prec.max(rhs.prec);
        let mut out = Self::zeros(n, n, prec);
        for i in 0..n {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let row = &rhs.data[k * n + i..(k + 1) * n];
                let dst = &mut out.data[i * n + i..(i + 1) * n];
                for (c, b) in dst.iter_mut().zip(row) {
                    c.add_mul(a, b);
                }
            }
            out[(i, i)].im = T::zero_at(prec);
            for j in i + 1..n {
                out.data[j * n + i] = out.data[i * n + j].conj();
            }
        }
        out
    }

    /// `self^* rhs` without forming the adjoint.
    pub fn adjoint_matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows, "row counts differ");
        let prec = self.prec.max(rhs.prec);
        let mut out = Self::zeros(self.cols, rhs.cols, prec);
        for k in 0..self.rows {
            let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
            for i in 0..self.cols {
                let a = &self[(k, i)];
                if a.is_zero() {
                    continue;
                }
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (c, b) in dst.iter_mut().zip(row) {
                    c.add_conj_mul(a, b);
                }
            }
        }
        out
    }

    /// `self^* self - I`, computed on the upper triangle and mirrored so the
    /// result is exactly Hermitian.
    pub fn gram_minus_identity(&self) -> Self {
        let n = self.cols;
        let mut out = Self::zeros(n, n, self.prec);
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex::zero_at(self.prec);
                for k in 0..self.rows {
                    acc.add_conj_mul(&self[(k, i)], &self[(k, j)]);
                }
                if i == j {
                    acc.re -= &T::from_i64_at(1, self.prec);
                    acc.im = T::zero_at(self.prec);
                } else {
                    out[(j, i)] = acc.conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// `(A + A^*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square());
        let half = T::from_f64_at(0.5, self.prec);
        Self::from_fn(self.rows, self.cols, self.prec, |i, j| {
            (&self[(i, j)] + &self[(j, i)].conj()).scale(&half)
        })
    }

    /// The norm used throughout the refinement analysis:
    /// `max(max row sum of |a_ij|, max column sum of |a_ij|)`, i.e. the larger
    /// of the infinity norms of `A` and `A^*`.
    pub fn paper_norm(&self) -> T {
        let mut rows = vec![T::zero_at(self.prec); self.rows];
        let mut cols = vec![T::zero_at(self.prec); self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)].abs();
                rows[i] += &a;
                cols[j] += &a;
            }
        }
        rows.into_iter()
            .chain(cols)
            .fold(T::zero_at(self.prec), |m, x| if x > m { x } else { m })
    }

    pub fn frobenius_norm(&self) -> T {
        let mut s = T::zero_at(self.prec);
        for z in &self.data {
            s += &z.norm_sqr();
        }
        s.sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(Complex::abs)
            .fold(T::zero_at(self.prec), |m, x| if x > m { x } else { m })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Complex::is_zero)
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Matrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("prec", &self.prec)
            .field("data", &self.data)
            .finish()
    }
}

/// Six significant digits per entry, one row per line.
impl<T: Real> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} @ {} bits", self.rows, self.cols, self.prec)?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = &self[(i, j)];
                write!(f, " ({:.6e}, {:.6e})", z.re.to_f64(), z.im.to_f64())?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

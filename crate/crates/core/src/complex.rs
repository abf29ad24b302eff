//! Complex numbers over a [`Real`] backend.
//!
//! `num_complex::Complex` requires `Num`, which our precision-carrying
//! scalars cannot honestly implement, so a small dedicated type is used.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::scalar::Real;

#[derive(Clone, PartialEq)]
pub struct Complex<T> {
    pub re: T,
    pub im: T,
}

impl<T: Real> Complex<T> {
    pub fn new(re: T, im: T) -> Self {
        Complex { re, im }
    }

    pub fn zero_at(bits: u32) -> Self {
        Complex::new(T::zero_at(bits), T::zero_at(bits))
    }

    pub fn one_at(bits: u32) -> Self {
        Complex::new(T::from_i64_at(1, bits), T::zero_at(bits))
    }

    pub fn from_real(re: T) -> Self {
        let im = T::zero_at(re.precision());
        Complex { re, im }
    }

    pub fn precision(&self) -> u32 {
        self.re.precision().max(self.im.precision())
    }

    pub fn with_precision(&self, bits: u32) -> Self {
        Complex::new(self.re.with_precision(bits), self.im.with_precision(bits))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> T {
        let mut s = self.re.clone() * &self.re;
        s.add_mul(&self.im, &self.im);
        s
    }

    /// Modulus.
    pub fn abs(&self) -> T {
        if self.im.is_zero() {
            return self.re.abs();
        }
        if self.re.is_zero() {
            return self.im.abs();
        }
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: &T) -> Self {
        Complex::new(self.re.clone() * s, self.im.clone() * s)
    }

    /// Multiply by the imaginary unit.
    pub fn mul_i(&self) -> Self {
        Complex::new(-self.im.clone(), self.re.clone())
    }

    /// `self += a * b`.
    ///
    /// Products with a zero imaginary part are skipped; adding an exact zero
    /// does not change the sum, and real data is common.
    pub fn add_mul(&mut self, a: &Self, b: &Self) {
        let (ar, br) = (a.im.is_zero(), b.im.is_zero());
        self.re.add_mul(&a.re, &b.re);
        if !ar && !br {
            self.re.sub_mul(&a.im, &b.im);
        }
        if !br {
            self.im.add_mul(&a.re, &b.im);
        }
        if !ar {
            self.im.add_mul(&a.im, &b.re);
        }
    }

    /// `self += conj(a) * b`.
    pub fn add_conj_mul(&mut self, a: &Self, b: &Self) {
        let (ar, br) = (a.im.is_zero(), b.im.is_zero());
        self.re.add_mul(&a.re, &b.re);
        if !ar && !br {
            self.re.add_mul(&a.im, &b.im);
        }
        if !br {
            self.im.add_mul(&a.re, &b.im);
        }
        if !ar {
            self.im.sub_mul(&a.im, &b.re);
        }
    }

    pub fn div(&self, rhs: &Self) -> Self {
        let d = rhs.norm_sqr();
        let mut re = self.re.clone() * &rhs.re;
        re.add_mul(&self.im, &rhs.im);
        let mut im = self.im.clone() * &rhs.re;
        im.sub_mul(&self.re, &rhs.im);
        Complex::new(re / &d, im / &d)
    }

    pub fn div_real(&self, d: &T) -> Self {
        Complex::new(self.re.clone() / d, self.im.clone() / d)
    }
}

impl<T: fmt::Debug> fmt::Debug for Complex<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} + {:?}i)", self.re, self.im)
    }
}

impl<T: Real> fmt::Display for Complex<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.re, self.im)
    }
}

impl<'a, T: Real> Add<&'a Complex<T>> for &'a Complex<T> {
    type Output = Complex<T>;
    fn add(self, rhs: &'a Complex<T>) -> Complex<T> {
        Complex::new(self.re.clone() + &rhs.re, self.im.clone() + &rhs.im)
    }
}

impl<'a, T: Real> Sub<&'a Complex<T>> for &'a Complex<T> {
    type Output = Complex<T>;
    fn sub(self, rhs: &'a Complex<T>) -> Complex<T> {
        Complex::new(self.re.clone() - &rhs.re, self.im.clone() - &rhs.im)
    }
}

impl<'a, T: Real> Mul<&'a Complex<T>> for &'a Complex<T> {
    type Output = Complex<T>;
    fn mul(self, rhs: &'a Complex<T>) -> Complex<T> {
        let mut re = self.re.clone() * &rhs.re;
        re.sub_mul(&self.im, &rhs.im);
        let mut im = self.re.clone() * &rhs.im;
        im.add_mul(&self.im, &rhs.re);
        Complex::new(re, im)
    }
}

impl<T: Real> Neg for Complex<T> {
    type Output = Complex<T>;
    fn neg(self) -> Complex<T> {
        Complex::new(-self.re, -self.im)
    }
}

impl<'a, T: Real> AddAssign<&'a Complex<T>> for Complex<T> {
    fn add_assign(&mut self, rhs: &'a Complex<T>) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl<'a, T: Real> SubAssign<&'a Complex<T>> for Complex<T> {
    fn sub_assign(&mut self, rhs: &'a Complex<T>) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn arithmetic() {
        let a = c(1.0, 2.0);
        let b = c(3.0, -1.0);
        assert_eq!(&a * &b, c(5.0, 5.0));
        assert_eq!(a.conj(), c(1.0, -2.0));
        assert_eq!(a.mul_i(), c(-2.0, 1.0));
        assert_eq!((&a * &b).div(&b), a);
        let mut acc = c(0.0, 0.0);
        acc.add_conj_mul(&a, &b);
        assert_eq!(acc, &a.conj() * &b);
        assert_eq!(c(3.0, 4.0).abs(), 5.0);
    }
}

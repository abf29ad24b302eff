//! Truncated series used by the refinement maps.
//!
//! `s_p` truncates `-1 + (1 + u)^(-1/2)`; applied to `E(U) = U^*U - I` it
//! moves `U` towards the Stiefel manifold. `c_p` truncates
//! `u + sqrt(1 + u^2) - 1`; applied to a skew-Hermitian `X` it gives
//! `I + c_p(X)` that is unitary up to order `p`.

use rug::{Integer, Rational};

use crate::counter::OpCounter;
use crate::matrix::Matrix;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    S,
    C,
}

/// Exact coefficients of a polynomial without constant term.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    pub kind: SeriesKind,
    pub degree: usize,
    /// `coeffs[k]` multiplies `u^k`; `coeffs[0]` is always zero.
    pub coeffs: Vec<Rational>,
}

fn central_binomial(k: u32) -> Integer {
    Integer::from(Integer::binomial_u(2 * k, k))
}

/// `[t_1, ..., t_p]` with `t_k = (-1)^k binom(2k, k) / 4^k`.
pub fn sp_coefficients(p: usize) -> Vec<Rational> {
    assert!(p >= 1, "series degree must be at least 1");
    (1..=p as u32)
        .map(|k| {
            let r = Rational::from((central_binomial(k), Integer::from(1) << (2 * k)));
            if k % 2 == 1 {
                -r
            } else {
                r
            }
        })
        .collect()
}

/// `c_k = (-1)^(k+1) (2k)! / (4^k (k!)^2 (2k - 1))`, the coefficient of
/// `u^(2k)` in `sqrt(1 + u^2)`.
pub fn c_coefficient(k: u32) -> Rational {
    let den = (Integer::from(1) << (2 * k)) * Integer::from(2 * k - 1);
    let r = Rational::from((central_binomial(k), den));
    if k % 2 == 1 {
        r
    } else {
        -r
    }
}

/// Coefficients of `c_p` indexed by power: `1` at `u`, `c_k` at `u^(2k)` for
/// `2k <= p`, zero elsewhere.
pub fn cp_coefficients(p: usize) -> Vec<Rational> {
    assert!(p >= 1, "series degree must be at least 1");
    let mut c = vec![Rational::new(); p + 1];
    c[1] = Rational::from(1);
    for k in 1..=(p / 2) as u32 {
        c[2 * k as usize] = c_coefficient(k);
    }
    c
}

impl TruncatedSeries {
    pub fn s(p: usize) -> Self {
        let mut coeffs = vec![Rational::new()];
        coeffs.extend(sp_coefficients(p));
        TruncatedSeries {
            kind: SeriesKind::S,
            degree: p,
            coeffs,
        }
    }

    pub fn c(p: usize) -> Self {
        TruncatedSeries {
            kind: SeriesKind::C,
            degree: p,
            coeffs: cp_coefficients(p),
        }
    }

    /// `e_p(u) = c_p(u) - u`.
    pub fn e_part(&self) -> Vec<Rational> {
        let mut c = self.coeffs.clone();
        if c.len() > 1 {
            c[1] = Rational::new();
        }
        c
    }

    /// `d_p(u) = e_p(u) - u^2 / 2`.
    pub fn d_part(&self) -> Vec<Rational> {
        let mut c = self.e_part();
        if c.len() > 2 {
            c[2] -= Rational::from((1, 2));
        }
        c
    }

    pub fn eval_scalar<T: Real>(&self, u: &T) -> T {
        eval_scalar(&self.coeffs, u)
    }

    /// Evaluate at a square matrix, counting products in `ops`.
    pub fn eval<T: Real>(&self, a: &Matrix<T>, ops: &mut OpCounter) -> Matrix<T> {
        match self.kind {
            SeriesKind::S => eval_poly(&self.coeffs[1..], a, ops),
            SeriesKind::C => eval_cp(self.degree, a, ops),
        }
    }
}

/// Horner evaluation of a coefficient list indexed by power.
pub fn eval_scalar<T: Real>(coeffs: &[Rational], u: &T) -> T {
    let bits = u.precision();
    let mut acc = T::zero_at(bits);
    for c in coeffs.iter().rev() {
        acc = acc * u + &T::from_rational_at(c, bits);
    }
    acc
}

fn eval_poly_impl<T: Real>(
    coeffs: &[Rational],
    a: &Matrix<T>,
    ops: &mut OpCounter,
    hermitian: bool,
) -> Matrix<T> {
    assert!(a.is_square(), "polynomial evaluation needs a square matrix");
    let bits = a.precision();
    let d = coeffs.iter().rposition(|c| *c != 0).map_or(0, |i| i + 1);
    if d == 0 {
        return Matrix::zeros(a.rows(), a.cols(), bits);
    }
    let mut p = a.scale(&T::from_rational_at(&coeffs[d - 1], bits));
    for c in coeffs[..d - 1].iter().rev() {
        let shifted = p.add_diag(&T::from_rational_at(c, bits));
        p = if hermitian {
            ops.mul_hermitian(a, &shifted)
        } else {
            ops.mul(a, &shifted)
        };
    }
    p
}

/// `sum_k coeffs[k-1] A^k` for `k = 1..=d` by Horner's rule.
///
/// The innermost term `a_d A` is a scaling, so a degree-`d` polynomial costs
/// `d - 1` matrix products.
pub fn eval_poly<T: Real>(coeffs: &[Rational], a: &Matrix<T>, ops: &mut OpCounter) -> Matrix<T> {
    eval_poly_impl(coeffs, a, ops, false)
}

/// As [`eval_poly`] for Hermitian `A`; the result is exactly Hermitian and
/// each product computes only one triangle.
pub fn eval_poly_hermitian<T: Real>(
    coeffs: &[Rational],
    a: &Matrix<T>,
    ops: &mut OpCounter,
) -> Matrix<T> {
    eval_poly_impl(coeffs, a, ops, true)
}

/// `s_p(E)` for Hermitian `E`.
pub fn eval_sp<T: Real>(p: usize, e: &Matrix<T>, ops: &mut OpCounter) -> Matrix<T> {
    eval_poly_hermitian(&sp_coefficients(p), e, ops)
}

/// `c_p(X) = X + sum_{2k <= p} c_k (X^2)^k` for skew-Hermitian `X`, costing
/// `floor(p/2)` products.
pub fn eval_cp<T: Real>(p: usize, x: &Matrix<T>, ops: &mut OpCounter) -> Matrix<T> {
    if p < 2 {
        return x.clone();
    }
    let x2 = ops.mul_hermitian(x, x);
    let even: Vec<Rational> = (1..=(p / 2) as u32).map(c_coefficient).collect();
    x.add(&eval_poly_hermitian(&even, &x2, ops))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::Complex;
    use crate::scalar::MpFloat;
    use num_traits::Zero;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn sp_coefficients_examples() {
        assert_eq!(sp_coefficients(1), vec![q(-1, 2)]);
        assert_eq!(sp_coefficients(2), vec![q(-1, 2), q(3, 8)]);
        assert_eq!(sp_coefficients(4), vec![q(-1, 2), q(3, 8), q(-5, 16), q(35, 128)]);
    }

    #[test]
    fn cp_coefficients_examples() {
        assert_eq!(cp_coefficients(2), vec![q(0, 1), q(1, 1), q(1, 2)]);
        assert_eq!(cp_coefficients(3), vec![q(0, 1), q(1, 1), q(1, 2), q(0, 1)]);
        assert_eq!(
            cp_coefficients(4),
            vec![q(0, 1), q(1, 1), q(1, 2), q(0, 1), q(-1, 8)]
        );
        let c = TruncatedSeries::c(4);
        assert_eq!(c.d_part(), vec![q(0, 1), q(0, 1), q(0, 1), q(0, 1), q(-1, 8)]);
    }

    /// Oracle: Taylor coefficients of (1+u)^(-1/2) from the generalized
    /// binomial recurrence, independent of the closed form.
    #[test]
    fn sp_matches_binomial_recurrence() {
        let mut c = Rational::from(1);
        for (k, t) in sp_coefficients(12).iter().enumerate() {
            let k = k as i64 + 1;
            // binom(-1/2, k) = binom(-1/2, k-1) * (-1/2 - (k-1)) / k
            c = c * Rational::from((-(2 * k - 1), 2 * k));
            assert_eq!(*t, c);
        }
    }

    #[test]
    fn s_tail_bound() {
        for p in 1..=8 {
            let s = TruncatedSeries::s(p);
            for i in -50..=50 {
                let u = i as f64 * 0.005;
                let exact = -1.0 + (1.0 + u).powf(-0.5);
                let err = (s.eval_scalar(&u) - exact).abs();
                let bound =
                    u.abs().powi(p as i32 + 1) * (1.0 - u.abs()).powf(-0.5 - (p as f64 + 1.0));
                assert!(err <= bound * (1.0 + 1e-12) + 1e-16, "p={p} u={u}");
            }
            for i in 0..=90 {
                let e = i as f64 * 0.01;
                assert!(s.eval_scalar(&e).abs() <= -1.0 + (1.0 - e).powf(-0.5) + 1e-15);
            }
        }
    }

    #[test]
    fn c_unitarity_defect_bound() {
        for p in 1..=8usize {
            let c = TruncatedSeries::c(p);
            let delta = if p % 2 == 1 { 1 } else { 2 };
            for i in -60..=60 {
                let u = i as f64 * 0.005;
                // The defect is far below f64 resolution for large p.
                let um = MpFloat::from_f64_at(u, 256);
                let one = MpFloat::from_i64_at(1, 256);
                let lhs = ((one.clone() + &c.eval_scalar(&-um.clone()))
                    * &(one.clone() + &c.eval_scalar(&um))
                    - &one)
                    .abs()
                    .to_f64();
                let a1 = 1.0 / (1.0 + (1.0 - u * u).sqrt());
                let rhs = (2.0 * (1.0 + u * u).sqrt() + a1 * u.abs().powi(p as i32 + 1))
                    * a1
                    * u.abs().powi(p as i32 + delta);
                assert!(lhs <= rhs * (1.0 + 1e-9), "p={p} u={u}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn eval_counts_and_examples() {
        let a = Matrix::from_real_diag(&[0.1f64, 0.2], 2, 2);
        let mut ops = OpCounter::new();
        let s1 = TruncatedSeries::s(1).eval(&a, &mut ops);
        assert_eq!(ops.matrix_mults, 0);
        assert_eq!(s1, a.scale(&-0.5));
        let s2 = TruncatedSeries::s(2).eval(&a, &mut ops);
        assert_eq!(ops.matrix_mults, 1);
        assert!((s2[(0, 0)].re + 0.04625).abs() < 1e-16);
        assert!((s2[(1, 1)].re + 0.085).abs() < 1e-16);
        let z = Matrix::<f64>::zeros(3, 3, 53);
        assert!(TruncatedSeries::s(5).eval(&z, &mut ops).is_zero());
        let mut ops = OpCounter::new();
        TruncatedSeries::c(6).eval(&z, &mut ops);
        assert_eq!(ops.matrix_mults, 3);
    }

    #[test]
    fn eval_on_diagonal_is_entrywise() {
        let bits = 200;
        let d: Vec<MpFloat> = (1..=4)
            .map(|i| MpFloat::from_rational_at(&q(i, 17), bits))
            .collect();
        let a = Matrix::from_real_diag(&d, 4, 4);
        for p in 1..=7 {
            let mut ops = OpCounter::new();
            for s in [TruncatedSeries::s(p), TruncatedSeries::c(p)] {
                let m = s.eval(&a, &mut ops);
                for (i, di) in d.iter().enumerate() {
                    let want = s.eval_scalar(di);
                    let got = &m[(i, i)];
                    let err = (got.re.clone() - &want).abs().log2();
                    assert!(err < -190.0, "p={p} kind={:?} err=2^{err}", s.kind);
                    assert!(got.im.is_zero());
                }
            }
        }
    }

    #[test]
    fn cp_of_skew_is_nearly_unitary() {
        // X = [[0, -t], [t, 0]]: I + c_p(X) has unitarity defect O(t^(p+1)).
        let t = 0.01f64;
        let x = Matrix::from_rows(
            2,
            2,
            53,
            vec![
                Complex::new(0.0, 0.0),
                Complex::new(-t, 0.0),
                Complex::new(t, 0.0),
                Complex::new(0.0, 0.0),
            ],
        );
        let mut ops = OpCounter::new();
        let d1 = eval_cp(1, &x, &mut ops).plus_identity().gram_minus_identity().max_abs();
        let d2 = eval_cp(2, &x, &mut ops).plus_identity().gram_minus_identity().max_abs();
        assert!(d1 > 0.5 * t * t);
        assert!(d2 < 1e-7);
    }
}

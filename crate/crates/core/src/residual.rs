//! Residuals and conditioning quantities of an approximate SVD.

use crate::error::{shape, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::spectra::ClusterPartition;
use crate::triplet::SvdTriplet;

/// `W^* W - I`, exactly Hermitian as stored.
pub fn residual_e<T: Real>(w: &Matrix<T>) -> Matrix<T> {
    w.gram_minus_identity()
}

/// `U^* M V - Sigma`.
pub fn svd_residual<T: Real>(m: &Matrix<T>, t: &SvdTriplet<T>) -> Result<Matrix<T>> {
    svd_residual_parts(m, &t.u, &t.v, &t.sigma)
}

pub fn svd_residual_parts<T: Real>(
    m: &Matrix<T>,
    u: &Matrix<T>,
    v: &Matrix<T>,
    sigma: &Matrix<T>,
) -> Result<Matrix<T>> {
    if m.rows() != u.rows() || m.cols() != v.rows() || sigma.shape() != (u.cols(), v.cols()) {
        return Err(shape(
            "svd_residual",
            format!(
                "M {:?}, U {:?}, V {:?}, Sigma {:?}",
                m.shape(),
                u.shape(),
                v.shape(),
                sigma.shape()
            ),
        ));
    }
    let mv = m.matmul(v);
    Ok(u.adjoint_matmul(&mv).sub(sigma))
}

fn pair_term<T: Real>(a: &T, b: &T) -> T {
    let d = (a.clone() - b).abs();
    let s = (a.clone() + b).abs();
    if d.is_zero() || s.is_zero() {
        return T::infinity_at(a.precision());
    }
    T::from_i64_at(1, a.precision()) / d + &(T::from_i64_at(1, a.precision()) / s)
}

fn max_into<T: Real>(acc: &mut T, x: T) {
    if x > *acc {
        *acc = x;
    }
}

fn bits_of<T: Real>(sigma: &[T]) -> u32 {
    sigma.iter().map(Real::precision).max().unwrap_or(53)
}

/// Max of the pair terms `1/|s_i - s_j| + 1/|s_i + s_j|` over pairs accepted
/// by `keep`.
///
/// For a strictly decreasing positive sequence, `2a / (a^2 - b^2)` grows as
/// `b` approaches `a` from below and shrinks as `a` grows, so the maximum over
/// any "interval" family of pairs is attained on neighbours; we exploit that
/// when the input is sorted and fall back to all pairs otherwise.
fn max_pair_term<T: Real>(sigma: &[T], keep: impl Fn(usize, usize) -> bool) -> T {
    let mut best = T::zero_at(bits_of(sigma));
    let sorted = sigma.windows(2).all(|w| w[0] > w[1]) && sigma.last().is_none_or(|s| *s > T::zero());
    if sorted {
        // For each i, the nearest later index that `keep` accepts.
        for i in 0..sigma.len() {
            if let Some(j) = (i + 1..sigma.len()).find(|&j| keep(i, j)) {
                max_into(&mut best, pair_term(&sigma[i], &sigma[j]));
            }
        }
    } else {
        for i in 0..sigma.len() {
            for j in i + 1..sigma.len() {
                if keep(i, j) {
                    max_into(&mut best, pair_term(&sigma[i], &sigma[j]));
                }
            }
        }
    }
    best
}

fn max_inverse<T: Real>(sigma: &[T]) -> T {
    let bits = bits_of(sigma);
    let mut best = T::zero_at(bits);
    for s in sigma {
        if s.is_zero() {
            return T::infinity_at(bits);
        }
        max_into(&mut best, T::from_i64_at(1, bits) / &s.abs());
    }
    best
}

/// `max(1, max 1/|s_i|, max_{i != j} 1/|s_i - s_j| + 1/|s_i + s_j|)`.
/// Returns infinity when any denominator vanishes.
pub fn kappa<T: Real>(sigma: &[T]) -> T {
    let mut k = T::from_i64_at(1, bits_of(sigma));
    max_into(&mut k, max_inverse(sigma));
    max_into(&mut k, max_pair_term(sigma, |_, _| true));
    k
}

/// The square-case condition number: pair terms only, no `1/s_i` term.
pub fn kappa_square<T: Real>(sigma: &[T]) -> T {
    let mut k = T::from_i64_at(1, bits_of(sigma));
    max_into(&mut k, max_pair_term(sigma, |_, _| true));
    k
}

/// As [`kappa`] but pair terms only range over indices in distinct clusters.
pub fn kappa_cluster<T: Real>(sigma: &[T], p: &ClusterPartition) -> T {
    let block = p.block_index();
    let mut k = T::from_i64_at(1, bits_of(sigma));
    max_into(&mut k, max_inverse(sigma));
    max_into(&mut k, max_pair_term(sigma, |i, j| block[i] != block[j]));
    k
}

/// As [`kappa_cluster`] without the `1/s_i` terms.
pub fn kappa_cluster_pairs<T: Real>(sigma: &[T], p: &ClusterPartition) -> T {
    let block = p.block_index();
    let mut k = T::from_i64_at(1, bits_of(sigma));
    max_into(&mut k, max_pair_term(sigma, |i, j| block[i] != block[j]));
    k
}

/// `max(1, max s_i)`.
pub fn big_k<T: Real>(sigma: &[T]) -> T {
    let mut k = T::from_i64_at(1, bits_of(sigma));
    for s in sigma {
        max_into(&mut k, s.abs());
    }
    k
}

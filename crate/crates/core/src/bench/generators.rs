//! Test matrix families.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bench::svd_init::householder_q;
use crate::complex::Complex;
use crate::matrix::Matrix;
use crate::scalar::Real;

/// `M_ij = 1 / (i + j)` for `1 <= i, j <= n`, each entry correctly rounded.
pub fn gen_cauchy<T: Real>(n: usize, bits: u32) -> Matrix<T> {
    assert!(n >= 1, "Cauchy matrix needs n >= 1");
    Matrix::from_fn(n, n, bits, |i, j| {
        let one = T::from_i64_at(1, bits);
        Complex::from_real(one / &T::from_i64_at((i + j + 2) as i64, bits))
    })
}

fn gaussian<T: Real>(rows: usize, cols: usize, bits: u32, rng: &mut ChaCha8Rng) -> Matrix<T> {
    Matrix::from_fn(rows, cols, bits, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(T::from_f64_at(re, bits), T::from_f64_at(im, bits))
    })
}

/// Entries with independent standard normal real and imaginary parts, so
/// `E|m_ij|^2 = 2`. Entries are `f64` samples and therefore exact at any
/// precision.
pub fn gen_random<T: Real>(m: usize, n: usize, bits: u32, seed: u64) -> Matrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gaussian(m, n, bits, &mut rng)
}

/// A unitary `n x n` matrix: the `Q` factor of a Gaussian matrix.
pub fn random_unitary<T: Real>(n: usize, bits: u32, rng: &mut ChaCha8Rng) -> Matrix<T> {
    householder_q(&gaussian(n, n, bits, rng))
}

/// Spectrum of the prescribed family in decreasing order: `2^n, ..., 2`
/// each three times, then `1/2, ..., 2^-n`.
pub fn prescribed_spectrum<T: Real>(n: usize, bits: u32) -> Vec<T> {
    let one = T::from_i64_at(1, bits);
    let mut s = Vec::with_capacity(4 * n);
    for i in (1..=n as i32).rev() {
        for _ in 0..3 {
            s.push(one.mul_pow2(i));
        }
    }
    for i in 1..=n as i32 {
        s.push(one.mul_pow2(-i));
    }
    s
}

/// `M = U Sigma V^*` of size `4n` with random unitary `U`, `V` and the
/// prescribed spectrum. Returns `M` and the spectrum.
pub fn gen_prescribed<T: Real>(n: usize, bits: u32, seed: u64) -> (Matrix<T>, Vec<T>) {
    assert!(n >= 1, "prescribed family needs n >= 1");
    let size = 4 * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_unitary(size, bits, &mut rng);
    let v = random_unitary(size, bits, &mut rng);
    let s = prescribed_spectrum(n, bits);
    let sigma = Matrix::from_real_diag(&s, size, size);
    let m = u.matmul(&sigma).matmul(&v.adjoint());
    (m, s)
}

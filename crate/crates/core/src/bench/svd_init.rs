//! Baseline SVD used to start the refinement: one-sided Jacobi followed by a
//! Householder re-orthonormalization of both factors.

use crate::complex::Complex;
use crate::counter::OpCounter;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{MpFloat, Real};
use crate::triplet::SvdTriplet;

pub const MAX_SWEEPS: usize = 30;

type Col<T> = Vec<Complex<T>>;

fn columns<T: Real>(a: &Matrix<T>) -> Vec<Col<T>> {
    (0..a.cols()).map(|j| a.column(j)).collect()
}

fn from_columns<T: Real>(rows: usize, bits: u32, cols: &[Col<T>]) -> Matrix<T> {
    Matrix::from_fn(rows, cols.len(), bits, |i, j| cols[j][i].clone())
}

/// `a^* b`.
fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>], bits: u32) -> Complex<T> {
    let mut acc = Complex::zero_at(bits);
    for (x, y) in a.iter().zip(b) {
        acc.add_conj_mul(x, y);
    }
    acc
}

fn norm_sqr<T: Real>(a: &[Complex<T>], bits: u32) -> T {
    let mut acc = T::zero_at(bits);
    for x in a {
        acc.add_mul(&x.re, &x.re);
        acc.add_mul(&x.im, &x.im);
    }
    acc
}

/// `y -= c x`.
fn axpy_neg<T: Real>(y: &mut [Complex<T>], c: &Complex<T>, x: &[Complex<T>]) {
    let c = -c.clone();
    for (yi, xi) in y.iter_mut().zip(x) {
        yi.add_mul(&c, xi);
    }
}

/// Unit-modulus phase of `z`, or one for zero.
fn phase<T: Real>(z: &Complex<T>, bits: u32) -> Complex<T> {
    let r = z.abs();
    if r.is_zero() {
        Complex::one_at(bits)
    } else {
        z.div_real(&r)
    }
}

/// Thin `Q` of a Householder QR of `a` (`m x k`, `m >= k`), with the
/// diagonal of `R` made real and nonnegative. For a matrix with orthonormal
/// columns up to rounding this returns a nearby orthonormal one.
pub fn householder_q<T: Real>(a: &Matrix<T>) -> Matrix<T> {
    let (m, k) = a.shape();
    assert!(m >= k, "householder_q needs rows >= cols");
    let bits = a.precision();
    let two = T::from_i64_at(2, bits);
    let mut cols = columns(a);
    let mut reflectors: Vec<(Col<T>, T)> = Vec::with_capacity(k);
    let mut phases = Vec::with_capacity(k);
    for j in 0..k {
        let x = &cols[j][j..];
        let nx = norm_sqr(x, bits).sqrt();
        let ph = phase(&x[0], bits);
        // alpha = -phase * |x| keeps v = x - alpha e1 free of cancellation.
        let alpha = ph.scale(&nx).scale(&-T::from_i64_at(1, bits));
        let mut v: Col<T> = x.to_vec();
        v[0] -= &alpha;
        let vv = norm_sqr(&v, bits);
        if vv.is_zero() {
            reflectors.push((Vec::new(), T::zero_at(bits)));
            phases.push(Complex::one_at(bits));
            continue;
        }
        // H = I - tau v v^* with tau = 2 / |v|^2; not normalizing v keeps H
        // orthogonal to working precision.
        let tau = two.clone() / &vv;
        for c in cols.iter_mut().skip(j) {
            let w = dot(&v, &c[j..], bits).scale(&tau);
            axpy_neg(&mut c[j..], &w, &v);
        }
        phases.push(phase(&alpha, bits));
        reflectors.push((v, tau));
    }
    // Q e_j = H_0 H_1 ... H_(k-1) e_j.
    let mut q: Vec<Col<T>> = (0..k)
        .map(|j| {
            let mut e = vec![Complex::zero_at(bits); m];
            e[j] = Complex::one_at(bits);
            e
        })
        .collect();
    for (j, (v, tau)) in reflectors.iter().enumerate().rev() {
        if v.is_empty() {
            continue;
        }
        for c in q.iter_mut() {
            let w = dot(v, &c[j..], bits).scale(tau);
            axpy_neg(&mut c[j..], &w, v);
        }
    }
    // R_jj = alpha_j; absorbing its phase makes the diagonal positive.
    for (c, ph) in q.iter_mut().zip(&phases) {
        for z in c.iter_mut() {
            *z = &*z * ph;
        }
    }
    from_columns(m, bits, &q)
}

/// One-sided Jacobi on the columns of `a` (`m >= n`). Returns `(U, s, V)`
/// with `s` sorted decreasingly; columns of `U` for negligible singular
/// values are completed by Gram-Schmidt against the previous ones.
fn one_sided_jacobi<T: Real>(a: &Matrix<T>, tol: &T) -> Result<(Vec<Col<T>>, Vec<T>, Vec<Col<T>>)> {
    let (m, n) = a.shape();
    let bits = a.precision();
    let mut w = columns(a);
    let mut v: Vec<Col<T>> = columns(&Matrix::identity(n, bits));
    let fro = a.frobenius_norm();
    let eta = tol.clone() * &fro;
    let eta2 = eta.clone() * &eta;
    let one = T::from_i64_at(1, bits);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotations = 0usize;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let a2 = norm_sqr(&w[p], bits);
                let b2 = norm_sqr(&w[q], bits);
                if a2 <= eta2 && b2 <= eta2 {
                    continue;
                }
                let c = dot(&w[p], &w[q], bits);
                let cabs = c.abs();
                if cabs.is_zero() || cabs <= tol.clone() * &(a2.clone() * &b2).sqrt() {
                    continue;
                }
                rotations += 1;
                // Rotate (w_p, e^{-i phi} w_q) by a real Jacobi rotation.
                let ph = c.div_real(&cabs).conj();
                let z = (b2 - &a2) / &(cabs.clone() * &T::from_i64_at(2, bits));
                let t = if z.is_zero() {
                    one.clone()
                } else {
                    let r = (one.clone() + &(z.clone() * &z)).sqrt();
                    let t = one.clone() / &(z.abs() + &r);
                    if z.is_sign_negative() {
                        -t
                    } else {
                        t
                    }
                };
                let cs = one.clone() / &(one.clone() + &(t.clone() * &t)).sqrt();
                let sn = cs.clone() * &t;
                for cols in [&mut w, &mut v] {
                    let (lo, hi) = cols.split_at_mut(q);
                    for (xp, xq) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                        let yq = &*xq * &ph;
                        let np = &xp.scale(&cs) - &yq.scale(&sn);
                        let nq = &xp.scale(&sn) + &yq.scale(&cs);
                        *xp = np;
                        *xq = nq;
                    }
                }
            }
        }
        if rotations == 0 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "one-sided Jacobi",
            iterations: MAX_SWEEPS,
            residual: f64::NAN,
        });
    }

    let mut s: Vec<T> = w.iter().map(|c| norm_sqr(c, bits).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[j].partial_cmp(&s[i]).unwrap_or(std::cmp::Ordering::Equal));
    let w: Vec<Col<T>> = order.iter().map(|&i| w[i].clone()).collect();
    let v: Vec<Col<T>> = order.iter().map(|&i| v[i].clone()).collect();
    s = order.iter().map(|&i| s[i].clone()).collect();

    let mut u: Vec<Col<T>> = Vec::with_capacity(n);
    for i in 0..n {
        let col = if s[i] > eta {
            w[i].iter().map(|z| z.div_real(&s[i])).collect()
        } else {
            complete(&u, m, bits)
        };
        u.push(col);
    }
    Ok((u, s, v))
}

/// A unit vector orthogonal to `basis`: the coordinate vector with the
/// largest component outside its span, orthogonalized twice.
fn complete<T: Real>(basis: &[Col<T>], m: usize, bits: u32) -> Col<T> {
    // |P e_k|^2 = 1 - sum_b |b_k|^2 for an orthonormal basis.
    let mut best = 0;
    let mut best_r = T::infinity_at(bits);
    for k in 0..m {
        let mut r = T::zero_at(bits);
        for b in basis {
            r.add_mul(&b[k].re, &b[k].re);
            r.add_mul(&b[k].im, &b[k].im);
        }
        if r < best_r {
            best_r = r;
            best = k;
        }
    }
    let mut x = vec![Complex::zero_at(bits); m];
    x[best] = Complex::one_at(bits);
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, &x, bits);
            axpy_neg(&mut x, &c, b);
        }
    }
    let nx = norm_sqr(&x, bits).sqrt();
    x.iter().map(|z| z.div_real(&nx)).collect()
}

/// [`householder_q`] at twice the working precision, rounded back, so the
/// result is orthonormal to the rounding level of the working format.
fn reorthonormalize<T: Real>(a: &Matrix<T>) -> Matrix<T> {
    let bits = a.precision();
    let wide = (2 * bits).max(128);
    let x: Matrix<MpFloat> = Matrix::from_fn(a.rows(), a.cols(), wide, |i, j| {
        let z = &a[(i, j)];
        Complex::new(
            MpFloat::from_rational_at(&z.re.to_rational(), wide),
            MpFloat::from_rational_at(&z.im.to_rational(), wide),
        )
    });
    let q = householder_q(&x);
    Matrix::from_fn(a.rows(), a.cols(), bits, |i, j| {
        let z = &q[(i, j)];
        Complex::new(
            T::from_rational_at(&z.re.with_precision(bits).to_rational(), bits),
            T::from_rational_at(&z.im.with_precision(bits).to_rational(), bits),
        )
    })
}

/// Thin SVD of `a` with `m >= n` via Jacobi at the precision of `a`.
fn thin_svd_tall<T: Real>(a: &Matrix<T>) -> Result<(Matrix<T>, Vec<T>, Matrix<T>)> {
    let (m, n) = a.shape();
    let bits = a.precision();
    let tol = T::from_i64_at(1, bits).mul_pow2(1 - bits as i32);
    let (u, s, v) = one_sided_jacobi(a, &tol)?;
    let mut u = reorthonormalize(&from_columns(m, bits, &u));
    let mut v = reorthonormalize(&from_columns(n, bits, &v));
    // First nonzero entry of each U column real positive; V follows so that
    // U Sigma V^* is unchanged. Entries at rounding level count as zero.
    for j in 0..n {
        let col = u.column(j);
        let big = col.iter().map(|z| z.abs()).fold(T::zero_at(bits), |a, b| if b > a { b } else { a });
        let floor = big.mul_pow2(-(bits as i32) / 2);
        let Some(z) = col.into_iter().find(|z| z.abs() > floor) else {
            continue;
        };
        let ph = phase(&z, bits).conj();
        for i in 0..m {
            u[(i, j)] = &u[(i, j)] * &ph;
        }
        for i in 0..n {
            v[(i, j)] = &v[(i, j)] * &ph;
        }
    }
    Ok((u, s, v))
}

fn to_f64_matrix<T: Real>(a: &Matrix<T>) -> Matrix<f64> {
    Matrix::from_fn(a.rows(), a.cols(), 53, |i, j| {
        let z = &a[(i, j)];
        Complex::new(z.re.to_f64(), z.im.to_f64())
    })
}

fn from_f64_matrix<T: Real>(a: &Matrix<f64>, bits: u32) -> Matrix<T> {
    Matrix::from_fn(a.rows(), a.cols(), bits, |i, j| {
        let z = &a[(i, j)];
        Complex::new(T::from_f64_at(z.re, bits), T::from_f64_at(z.im, bits))
    })
}

/// Thin SVD of `m` computed with `bits` of precision, as a regular-mode
/// triplet with `l = q = min(rows, cols)`.
///
/// Up to 64 bits the computation runs in `f64`, which is what a standard
/// double-precision SVD delivers. Above that it runs in `T` at `bits`.
pub fn init_svd<T: Real>(m: &Matrix<T>, bits: u32) -> Result<SvdTriplet<T>> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument("init_svd of an empty matrix".into()));
    }
    let (u, s, v) = if bits <= 64 {
        let a = to_f64_matrix(m);
        let (u, s, v) = svd_any_shape(&a)?;
        let s: Vec<T> = s.iter().map(|&x| T::from_f64_at(x, bits)).collect();
        (from_f64_matrix(&u, bits), s, from_f64_matrix(&v, bits))
    } else {
        svd_any_shape(&m.with_precision(bits))?
    };
    SvdTriplet::new(u, v, &s)
}

/// [`init_svd`], recorded as one factorization in `ops`.
pub fn init_svd_counted<T: Real>(m: &Matrix<T>, bits: u32, ops: &mut OpCounter) -> Result<SvdTriplet<T>> {
    ops.note_factorization();
    init_svd(m, bits)
}

fn svd_any_shape<T: Real>(a: &Matrix<T>) -> Result<(Matrix<T>, Vec<T>, Matrix<T>)> {
    if a.rows() >= a.cols() {
        thin_svd_tall(a)
    } else {
        // a^* = U' S V'^*  =>  a = V' S U'^*.
        let (u, s, v) = thin_svd_tall(&a.adjoint())?;
        Ok((v, s, u))
    }
}

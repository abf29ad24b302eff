//! The certification test for a starting triplet.

use rug::Rational;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::residual::{big_k, kappa, kappa_cluster};
use crate::scalar::Real;
use crate::spectra::residual_norms;
use crate::triplet::{Mode, SvdTriplet};

/// Constants of the convergence theorem for a given order.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderConstants {
    /// Exponent `a` as the fraction `(numerator, denominator)`.
    pub a: (u32, u32),
    pub u0: Rational,
    pub gamma1: f64,
    pub sigma_const: f64,
}

impl OrderConstants {
    pub fn for_order(p: usize) -> Self {
        assert!(p >= 1, "order must be at least 1");
        match p {
            1 => OrderConstants {
                a: (2, 1),
                u0: Rational::from((289, 10000)),
                gamma1: 6.1,
                sigma_const: 1.67,
            },
            2 => OrderConstants {
                a: (4, 3),
                u0: Rational::from((46, 1000)),
                gamma1: 9.41,
                sigma_const: 2.1,
            },
            _ => OrderConstants {
                a: (4, 3),
                u0: Rational::from((297, 10000)),
                gamma1: 10.2,
                sigma_const: 2.62,
            },
        }
    }

    pub fn a_f64(&self) -> f64 {
        self.a.0 as f64 / self.a.1 as f64
    }

    pub fn u0_f64(&self) -> f64 {
        self.u0.to_f64()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate<T> {
    pub p: usize,
    pub constants: OrderConstants,
    pub epsilon: T,
    pub kappa: T,
    pub k: T,
    pub delta_norm: T,
    pub eu_norm: T,
    pub ev_norm: T,
    pub pass: bool,
}

impl<T: Real> Certificate<T> {
    /// `-floor(log2(epsilon / u0))`, or `None` when epsilon is zero.
    pub fn e_index(&self) -> Option<i64> {
        e_index(&self.epsilon, &self.constants.u0)
    }
}

pub fn e_index<T: Real>(epsilon: &T, u0: &Rational) -> Option<i64> {
    let bits = epsilon.precision().max(64);
    let r = epsilon.clone() / &T::from_rational_at(u0, bits);
    r.floor_log2().map(|f| -f)
}

/// Condition number appropriate to the triplet's mode. In regular mode a
/// repeated or vanishing singular value is an error naming the pair.
pub fn mode_kappa<T: Real>(t: &SvdTriplet<T>) -> Result<T> {
    let s = t.spectrum();
    let k = match &t.mode {
        Mode::Regular => kappa(&s),
        Mode::Cluster(p) => kappa_cluster(&s, p),
    };
    if k.is_finite() {
        return Ok(k);
    }
    let block = t.partition().map(|p| p.block_index());
    for i in 0..s.len() {
        if s[i].is_zero() {
            return Err(Error::DegenerateSpectrum { i, j: i });
        }
        for j in i + 1..s.len() {
            let cross = block.as_ref().is_none_or(|b| b[i] != b[j]);
            if cross && (s[i] == s[j] || s[i] == -s[j].clone()) {
                return Err(Error::DegenerateSpectrum { i, j });
            }
        }
    }
    Err(Error::DegenerateSpectrum { i: 0, j: 0 })
}

/// `eps = max((kK)^a ||E(U)||, (kK)^a ||E(V)||, k^a K^(a-1) ||Delta||)`.
pub fn certify<T: Real>(t: &SvdTriplet<T>, m: &Matrix<T>, p: usize) -> Result<Certificate<T>> {
    let kap = mode_kappa(t)?;
    let k = big_k(&t.spectrum());
    let (d, eu, ev) = residual_norms(t, m)?;
    Ok(certify_from_norms(d, eu, ev, kap, k, p))
}

pub fn certify_from_norms<T: Real>(d: T, eu: T, ev: T, kap: T, k: T, p: usize) -> Certificate<T> {
    let c = OrderConstants::for_order(p);
    let (an, ad) = c.a;
    let kk = (kap.clone() * &k).pow_frac(an as i32, ad);
    let db = kap.pow_frac(an as i32, ad) * &k.pow_frac(an as i32 - ad as i32, ad);
    let mut eps = db * &d;
    for x in [kk.clone() * &eu, kk * &ev] {
        if x > eps {
            eps = x;
        }
    }
    let u0 = T::from_rational_at(&c.u0, eps.precision().max(64));
    let pass = eps <= u0;
    Certificate {
        p,
        constants: c,
        epsilon: eps,
        kappa: kap,
        k,
        delta_norm: d,
        eu_norm: eu,
        ev_norm: ev,
        pass,
    }
}

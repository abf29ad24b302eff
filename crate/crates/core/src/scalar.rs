//! Real scalars with an explicit working precision.
//!
//! Everything above this module is generic over [`Real`]. Two backends are
//! provided: `f64` (fixed 53-bit significand) and [`MpFloat`], a thin wrapper
//! around an MPFR float whose precision travels with the value.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{One, Zero};
use rug::float::Round;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse {0:?} as a real number")]
pub struct ParseRealError(pub String);

/// A real scalar that knows its own precision in bits.
///
/// Binary operators return a value whose precision is the larger of the two
/// operand precisions. `Zero`/`One` give precision-neutral constants; use
/// [`Real::zero_at`] when the result must carry a specific precision.
pub trait Real:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
{
    /// `Some(bits)` when the type cannot represent more precision than `bits`.
    const MAX_PRECISION: Option<u32>;

    fn precision(&self) -> u32;
    fn zero_at(bits: u32) -> Self;
    fn from_f64_at(x: f64, bits: u32) -> Self;
    fn from_i64_at(x: i64, bits: u32) -> Self;
    /// Correctly rounded conversion of an exact rational.
    fn from_rational_at(r: &Rational, bits: u32) -> Self;
    fn infinity_at(bits: u32) -> Self;
    /// Round (or widen) to `bits` of precision.
    fn with_precision(&self, bits: u32) -> Self;

    fn to_f64(&self) -> f64;
    /// Exact value as a rational. Panics on non-finite input.
    fn to_rational(&self) -> Rational;
    fn sqrt(&self) -> Self;
    fn abs(&self) -> Self;
    /// `k`-th root of a non-negative value.
    fn root(&self, k: u32) -> Self;
    fn powi(&self, n: i32) -> Self;
    /// `self * 2^k`, exact.
    fn mul_pow2(&self, k: i32) -> Self;
    /// Base-2 logarithm as `f64`; `-inf` at zero. Accurate even when the
    /// value is far outside the `f64` exponent range.
    fn log2(&self) -> f64;
    fn is_finite(&self) -> bool;
    /// `floor(log2 |self|)`, exact; `None` for zero and non-finite values.
    fn floor_log2(&self) -> Option<i64>;
    fn is_sign_negative(&self) -> bool;

    /// `self += a * b` with a single rounding where the backend supports it.
    fn add_mul(&mut self, a: &Self, b: &Self);
    /// `self -= a * b` with a single rounding where the backend supports it.
    fn sub_mul(&mut self, a: &Self, b: &Self);

    /// Scientific notation with `digits` significant decimal digits.
    fn to_decimal(&self, digits: usize) -> String;
    fn parse_decimal(s: &str, bits: u32) -> Result<Self, ParseRealError>;

    /// `self^(num/den)` for non-negative `self`.
    fn pow_frac(&self, num: i32, den: u32) -> Self {
        if den == 1 {
            self.powi(num)
        } else {
            self.root(den).powi(num)
        }
    }

    /// Unit roundoff `2^(1-bits)` at this value's precision.
    fn epsilon(&self) -> Self {
        let p = self.precision();
        Self::from_i64_at(1, p).mul_pow2(1 - p as i32)
    }

    fn max_ref<'a>(&'a self, other: &'a Self) -> &'a Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

/// Number of significant decimal digits used when writing a value of the
/// given binary precision: `ceil(bits * 0.302) + 2`.
pub fn decimal_digits(bits: u32) -> usize {
    (bits as f64 * 0.302).ceil() as usize + 2
}

impl Real for f64 {
    const MAX_PRECISION: Option<u32> = Some(53);

    fn precision(&self) -> u32 {
        53
    }
    fn zero_at(_: u32) -> Self {
        0.0
    }
    fn from_f64_at(x: f64, _: u32) -> Self {
        x
    }
    fn from_i64_at(x: i64, _: u32) -> Self {
        x as f64
    }
    fn from_rational_at(r: &Rational, _: u32) -> Self {
        r.to_f64()
    }
    fn infinity_at(_: u32) -> Self {
        f64::INFINITY
    }
    fn with_precision(&self, _: u32) -> Self {
        *self
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_rational(&self) -> Rational {
        Rational::from_f64(*self).expect("non-finite f64 has no rational value")
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn root(&self, k: u32) -> Self {
        match k {
            1 => *self,
            2 => f64::sqrt(*self),
            3 => f64::cbrt(*self),
            _ => self.powf(1.0 / k as f64),
        }
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
    fn mul_pow2(&self, k: i32) -> Self {
        // Two steps so that k near the exponent limits does not overflow 2^k.
        let h = k / 2;
        self * 2f64.powi(h) * 2f64.powi(k - h)
    }
    fn log2(&self) -> f64 {
        f64::log2(f64::abs(*self))
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn floor_log2(&self) -> Option<i64> {
        if *self == 0.0 || !f64::is_finite(*self) {
            return None;
        }
        let bits = self.abs().to_bits();
        let exp = (bits >> 52) as i64;
        if exp == 0 {
            let mant = bits & ((1u64 << 52) - 1);
            Some(-1074 + 63 - mant.leading_zeros() as i64)
        } else {
            Some(exp - 1023)
        }
    }
    fn is_sign_negative(&self) -> bool {
        f64::is_sign_negative(*self)
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self = a.mul_add(*b, *self);
    }
    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self = (-a).mul_add(*b, *self);
    }
    fn to_decimal(&self, digits: usize) -> String {
        format!("{:.*e}", digits.max(1) - 1, self)
    }
    fn parse_decimal(s: &str, _: u32) -> Result<Self, ParseRealError> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| ParseRealError(s.to_string()))
    }
}

/// Multiprecision binary float. Precision is carried per value.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct MpFloat(pub Float);

impl MpFloat {
    pub fn new(bits: u32) -> Self {
        MpFloat(Float::new(clamp_prec(bits)))
    }

    pub fn inner(&self) -> &Float {
        &self.0
    }

    pub fn into_inner(self) -> Float {
        self.0
    }

    fn widen_to(&mut self, bits: u32) {
        if self.0.prec() < bits {
            // Increasing precision is exact.
            self.0.set_prec(bits);
        }
    }
}

fn clamp_prec(bits: u32) -> u32 {
    bits.clamp(rug::float::prec_min(), rug::float::prec_max())
}

impl fmt::Debug for MpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MpFloat({}, {} bits)", self.to_decimal(20), self.0.prec())
    }
}

impl fmt::Display for MpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or_else(|| decimal_digits(self.0.prec()));
        f.write_str(&self.to_decimal(digits))
    }
}

impl Zero for MpFloat {
    fn zero() -> Self {
        MpFloat(Float::new(rug::float::prec_min()))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for MpFloat {
    fn one() -> Self {
        MpFloat(Float::with_val(rug::float::prec_min(), 1))
    }
}

impl Neg for MpFloat {
    type Output = MpFloat;
    fn neg(self) -> MpFloat {
        MpFloat(-self.0)
    }
}

macro_rules! mp_binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident) => {
        impl<'a> $tr<&'a MpFloat> for MpFloat {
            type Output = MpFloat;
            fn $m(mut self, rhs: &'a MpFloat) -> MpFloat {
                self.widen_to(rhs.0.prec());
                self.0.$am(&rhs.0);
                self
            }
        }
        impl $tr<MpFloat> for MpFloat {
            type Output = MpFloat;
            fn $m(self, rhs: MpFloat) -> MpFloat {
                self.$m(&rhs)
            }
        }
        impl<'a> $atr<&'a MpFloat> for MpFloat {
            fn $am(&mut self, rhs: &'a MpFloat) {
                self.widen_to(rhs.0.prec());
                self.0.$am(&rhs.0);
            }
        }
    };
}

mp_binop!(Add, add, AddAssign, add_assign);
mp_binop!(Sub, sub, SubAssign, sub_assign);
mp_binop!(Mul, mul, MulAssign, mul_assign);

impl<'a> Div<&'a MpFloat> for MpFloat {
    type Output = MpFloat;
    fn div(mut self, rhs: &'a MpFloat) -> MpFloat {
        self.widen_to(rhs.0.prec());
        self.0 /= &rhs.0;
        self
    }
}

impl Div<MpFloat> for MpFloat {
    type Output = MpFloat;
    fn div(self, rhs: MpFloat) -> MpFloat {
        self / &rhs
    }
}

impl Real for MpFloat {
    const MAX_PRECISION: Option<u32> = None;

    fn precision(&self) -> u32 {
        self.0.prec()
    }
    fn zero_at(bits: u32) -> Self {
        MpFloat::new(bits)
    }
    fn from_f64_at(x: f64, bits: u32) -> Self {
        MpFloat(Float::with_val(clamp_prec(bits), x))
    }
    fn from_i64_at(x: i64, bits: u32) -> Self {
        MpFloat(Float::with_val(clamp_prec(bits), x))
    }
    fn from_rational_at(r: &Rational, bits: u32) -> Self {
        MpFloat(Float::with_val(clamp_prec(bits), r))
    }
    fn infinity_at(bits: u32) -> Self {
        MpFloat(Float::with_val(clamp_prec(bits), rug::float::Special::Infinity))
    }
    fn with_precision(&self, bits: u32) -> Self {
        let mut x = self.0.clone();
        x.set_prec_round(clamp_prec(bits), Round::Nearest);
        MpFloat(x)
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
    fn to_rational(&self) -> Rational {
        self.0
            .to_rational()
            .expect("non-finite float has no rational value")
    }
    fn sqrt(&self) -> Self {
        MpFloat(self.0.clone().sqrt())
    }
    fn abs(&self) -> Self {
        MpFloat(self.0.clone().abs())
    }
    fn root(&self, k: u32) -> Self {
        MpFloat(self.0.clone().root(k))
    }
    fn powi(&self, n: i32) -> Self {
        MpFloat(self.0.clone().pow(n))
    }
    fn mul_pow2(&self, k: i32) -> Self {
        let mut x = self.0.clone();
        x <<= k;
        MpFloat(x)
    }
    fn log2(&self) -> f64 {
        if self.0.is_zero() {
            return f64::NEG_INFINITY;
        }
        if !self.0.is_finite() {
            return if self.0.is_nan() { f64::NAN } else { f64::INFINITY };
        }
        let (m, e) = self.0.to_f64_exp();
        m.abs().log2() + e as f64
    }
    fn is_finite(&self) -> bool {
        self.0.is_finite()
    }
    fn floor_log2(&self) -> Option<i64> {
        // MPFR exponents put the significand in [1/2, 1).
        self.0.get_exp().map(|e| e as i64 - 1)
    }
    fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative()
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        let p = a.0.prec().max(b.0.prec());
        self.widen_to(p);
        self.0 += &a.0 * &b.0;
    }
    fn sub_mul(&mut self, a: &Self, b: &Self) {
        let p = a.0.prec().max(b.0.prec());
        self.widen_to(p);
        self.0 -= &a.0 * &b.0;
    }
    fn to_decimal(&self, digits: usize) -> String {
        self.0.to_string_radix(10, Some(digits.max(1)))
    }
    fn parse_decimal(s: &str, bits: u32) -> Result<Self, ParseRealError> {
        let parsed = Float::parse(s.trim()).map_err(|_| ParseRealError(s.to_string()))?;
        Ok(MpFloat(Float::with_val(clamp_prec(bits), parsed)))
    }
}

impl Ord for MpFloat {
    /// Total order for sorting; NaN sorts last.
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Eq for MpFloat {}

/// `n choose k` as an exact integer.
pub fn binomial(n: u32, k: u32) -> Integer {
    Integer::from(Integer::binomial_u(n, k))
}

//! Cluster detection and deflation of nearly repeated singular values.

use std::ops::Range;

use rug::Rational;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::refiner::certify::OrderConstants;
use crate::residual::{big_k, kappa_square, residual_e, svd_residual};
use crate::scalar::{MpFloat, Real};
use crate::triplet::SvdTriplet;

/// Multiplicities `(q_1, ..., q_e)` of consecutive clusters of singular
/// values, optionally with the gap `delta` that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterPartition {
    sizes: Vec<usize>,
    delta: Option<f64>,
}

impl ClusterPartition {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidPartition(format!(
                "multiplicities must be positive, got {sizes:?}"
            )));
        }
        Ok(ClusterPartition { sizes, delta: None })
    }

    pub fn singletons(q: usize) -> Self {
        ClusterPartition {
            sizes: vec![1; q],
            delta: None,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    /// Parse `"3,3,1,1"`.
    pub fn parse(s: &str) -> Result<Self> {
        let sizes = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidPartition(format!("bad multiplicity {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sizes)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn delta(&self) -> Option<f64> {
        self.delta
    }

    /// Number of clusters.
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Zero-based start of each block.
    pub fn offsets(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .scan(0, |acc, &s| {
                let o = *acc;
                *acc += s;
                Some(o)
            })
            .collect()
    }

    pub fn ranges(&self) -> Vec<Range<usize>> {
        self.offsets()
            .into_iter()
            .zip(&self.sizes)
            .map(|(o, &s)| o..o + s)
            .collect()
    }

    /// Block number of every index.
    pub fn block_index(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
            .collect()
    }

    /// Render as `"3,3,1,1"`.
    pub fn to_spec(&self) -> String {
        self.sizes
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Group a decreasing spectrum into clusters of width at most `delta`,
/// separated from each other by more than `delta`.
///
/// Such a partition is unique when it exists, so a greedy left-to-right scan
/// finds it; when the scan's result violates the separation condition no
/// valid partition exists.
pub fn partition<T: Real>(sigma: &[T], delta: &T) -> Result<ClusterPartition> {
    if let Some(i) = sigma.windows(2).position(|w| w[0] < w[1]) {
        return Err(Error::Unsorted(i + 1));
    }
    let mut sizes = Vec::new();
    let mut start = 0;
    while start < sigma.len() {
        let mut end = start + 1;
        while end < sigma.len() && sigma[start].clone() - &sigma[end] <= *delta {
            end += 1;
        }
        if end < sigma.len() && sigma[end - 1].clone() - &sigma[end] <= *delta {
            return Err(Error::NoValidPartition(format!(
                "sigma[{}] - sigma[{}] <= delta but sigma[{}] - sigma[{}] > delta",
                end - 1,
                end,
                start,
                end
            )));
        }
        sizes.push(end - start);
        start = end;
    }
    Ok(ClusterPartition::new(sizes)?.with_delta(delta.to_f64()))
}

/// Output of [`deflate`].
#[derive(Clone, Debug)]
pub struct DeflationResult<T> {
    /// Zero-based, increasing.
    pub indices: Vec<usize>,
    pub triplet: SvdTriplet<T>,
    pub e: T,
    /// Square-case condition number of the selected singular values.
    pub kappa: T,
}

impl<T> DeflationResult<T> {
    /// Index of deflation.
    pub fn q(&self) -> usize {
        self.indices.len()
    }
}

/// Residual norms `(||Delta||, ||E(U)||, ||E(V)||)` of a triplet.
pub fn residual_norms<T: Real>(t: &SvdTriplet<T>, m: &Matrix<T>) -> Result<(T, T, T)> {
    Ok((
        svd_residual(m, t)?.paper_norm(),
        residual_e(&t.u).paper_norm(),
        residual_e(&t.v).paper_norm(),
    ))
}

/// `e = max(K^(a-1) ||Delta|| / u0, K^a ||E(U)|| / u0, K^a ||E(V)|| / u0)^(1/a)`
/// for the square case.
pub fn deflation_quantity<T: Real>(t: &SvdTriplet<T>, m: &Matrix<T>, p: usize) -> Result<T> {
    if !t.is_square() {
        return Err(Error::RectangularDeflation);
    }
    let (d, eu, ev) = residual_norms(t, m)?;
    Ok(deflation_quantity_from_norms(&d, &eu, &ev, &big_k(&t.spectrum()), p))
}

pub fn deflation_quantity_from_norms<T: Real>(d: &T, eu: &T, ev: &T, k: &T, p: usize) -> T {
    let c = OrderConstants::for_order(p);
    let (an, ad) = c.a;
    let bits = d.precision().max(k.precision());
    let u0 = T::from_rational_at(&c.u0, bits);
    let ka = k.pow_frac(an as i32, ad);
    let ka1 = k.pow_frac(an as i32 - ad as i32, ad);
    let mut x = ka1 * d;
    let tu = ka.clone() * eu;
    let tv = ka * ev;
    if tu > x {
        x = tu;
    }
    if tv > x {
        x = tv;
    }
    (x / &u0).pow_frac(ad as i32, an)
}

/// `max(1, 1/|a - b| + 1/|a + b|)`.
fn kappa_pair<T: Real>(a: &T, b: &T) -> T {
    kappa_square(&[a.clone(), b.clone()])
}

fn pair_passes<T: Real>(a: &T, b: &T, e: &T) -> bool {
    e.is_zero() || kappa_pair(a, b) * e <= T::from_i64_at(1, e.precision())
}

/// Greedy scan choosing one representative per well separated group:
/// starting from the first value, jump to the next index whose pair
/// condition number times `e` is at most one. Returns zero-based indices.
pub fn deflation_indices<T: Real>(sigma: &[T], e: &T) -> Vec<usize> {
    let n = sigma.len();
    if n == 0 {
        return Vec::new();
    }
    let mut k = vec![0];
    let mut i = 0;
    while i < n {
        let mut j = 1;
        while i + j < n && !pair_passes(&sigma[i], &sigma[i + j], e) {
            j += 1;
        }
        if i + j < n {
            k.push(i + j);
        }
        i += j;
    }
    k
}

/// Select a sub-triplet whose square-case condition number satisfies
/// `kappa * e <= 1`, so that it can be refined with a certified start.
pub fn deflate<T: Real>(t: &SvdTriplet<T>, m: &Matrix<T>, p: usize) -> Result<DeflationResult<T>> {
    let e = deflation_quantity(t, m, p)?;
    deflate_with_quantity(t, e)
}

pub fn deflate_with_quantity<T: Real>(t: &SvdTriplet<T>, e: T) -> Result<DeflationResult<T>> {
    if !t.is_square() {
        return Err(Error::RectangularDeflation);
    }
    if e > T::from_i64_at(1, e.precision()) || !e.is_finite() {
        return Err(Error::DeflationPrecondition(e.to_f64()));
    }
    let sigma = t.spectrum();
    let indices = deflation_indices(&sigma, &e);
    let selected: Vec<T> = indices.iter().map(|&i| sigma[i].clone()).collect();
    let kappa = kappa_square(&selected);
    Ok(DeflationResult {
        triplet: t.select(&indices)?,
        indices,
        e,
        kappa,
    })
}

/// Number of bits `-floor(log2(3^a u0 / (4^a 2^(size a))))` the initial
/// residual must reach for deflation of the prescribed-spectrum family of
/// the given matrix size.
///
/// For `p >= 2` the published thresholds use the constants of the `p >= 3`
/// row (`a = 4/3`, `u0 = 0.0297`); the `p = 2` value `u0 = 0.046` would give
/// different cells.
pub fn prescribed_deflation_threshold(size: usize, p: usize) -> i64 {
    let c = OrderConstants::for_order(if p >= 2 { 3 } else { 1 });
    let bits = 256;
    let (an, ad) = c.a;
    let a = MpFloat::from_rational_at(&Rational::from((an, ad)), bits);
    let log3 = MpFloat::from_i64_at(3, bits).0.log2();
    let mut x = MpFloat(log3) * &a;
    x += &MpFloat(MpFloat::from_rational_at(&c.u0, bits).0.log2());
    x -= &(a.clone() * &MpFloat::from_i64_at(2 + size as i64, bits));
    -x.0.floor().to_f64() as i64
}

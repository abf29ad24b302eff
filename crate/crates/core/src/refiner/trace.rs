use std::fmt::Write as _;

use rug::Rational;

use crate::counter::OpCounter;
use crate::refiner::certify::e_index;
use crate::refiner::hp::StepReport;
use crate::scalar::Real;

/// Everything measured at one iterate.
#[derive(Clone, Debug)]
pub struct TraceRecord<T> {
    pub iteration: usize,
    pub epsilon: T,
    /// `None` when `epsilon` is exactly zero.
    pub e: Option<i64>,
    pub delta_norm: T,
    pub eu_norm: T,
    pub ev_norm: T,
    pub kappa: T,
    /// Precision the iterate was measured at.
    pub bits: u32,
    pub spectrum: Vec<T>,
    /// Work spent producing and measuring this iterate.
    pub ops: OpCounter,
    /// Report of the step that produced this iterate; absent for the start.
    pub step: Option<StepReport<T>>,
}

#[derive(Clone, Debug)]
pub struct RefinementTrace<T> {
    pub p: usize,
    pub u0: Rational,
    pub records: Vec<TraceRecord<T>>,
}

impl<T: Real> RefinementTrace<T> {
    pub fn new(p: usize, u0: Rational) -> Self {
        RefinementTrace { p, u0, records: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord<T>> {
        self.records.last()
    }

    pub fn e_sequence(&self) -> Vec<Option<i64>> {
        self.records.iter().map(|r| r.e).collect()
    }

    /// Recompute `e_i` from the stored `epsilon_i`.
    pub fn recompute_e(&self, i: usize) -> Option<i64> {
        e_index(&self.records[i].epsilon, &self.u0)
    }

    /// `-log2(eps_(i+1)) / -log2(eps_i)` for consecutive nonzero epsilons.
    pub fn growth_ratios(&self) -> Vec<f64> {
        self.records
            .windows(2)
            .filter(|w| !w[0].epsilon.is_zero() && !w[1].epsilon.is_zero())
            .map(|w| w[1].epsilon.log2() / w[0].epsilon.log2())
            .collect()
    }

    pub fn total_ops(&self) -> OpCounter {
        let mut c = OpCounter::new();
        for r in &self.records {
            c.merge(&r.ops);
        }
        c
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            writeln!(
                s,
                "{},{},{},{},{},{}",
                r.iteration,
                self.p,
                fmt_e(r.e),
                short_sci(&r.epsilon),
                r.bits,
                r.ops.matrix_mults
            )
            .unwrap();
        }
        s
    }

    /// Human-readable table, one row per iterate.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "{:>9} {:>8} {:>12} {:>12} {:>12} {:>12} {:>8} {:>7}",
            "iteration", "e_i", "epsilon_i", "|Delta|", "|E(U)|", "|E(V)|", "bits", "mults"
        )
        .unwrap();
        for r in &self.records {
            writeln!(
                s,
                "{:>9} {:>8} {:>12} {:>12} {:>12} {:>12} {:>8} {:>7}",
                r.iteration,
                fmt_e(r.e),
                short_sci(&r.epsilon),
                short_sci(&r.delta_norm),
                short_sci(&r.eu_norm),
                short_sci(&r.ev_norm),
                r.bits,
                r.ops.matrix_mults
            )
            .unwrap();
        }
        s
    }
}

pub const CSV_HEADER: &str = "iteration,order,e_i,epsilon_i,bits,mults";

fn fmt_e(e: Option<i64>) -> String {
    e.map_or_else(|| "inf".to_string(), |v| v.to_string())
}

/// Four significant digits in scientific notation, valid far outside the
/// `f64` exponent range.
pub fn short_sci<T: Real>(x: &T) -> String {
    if x.is_zero() {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_sign_negative() { "-inf".into() } else { "inf".into() };
    }
    let l10 = x.abs().log2() * std::f64::consts::LOG10_2;
    let mut exp = l10.floor();
    let mut mant = 10f64.powf(l10 - exp);
    if mant >= 9.9995 {
        mant /= 10.0;
        exp += 1.0;
    }
    let sign = if x.is_sign_negative() { "-" } else { "" };
    format!("{sign}{mant:.3}e{exp}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::MpFloat;

    #[test]
    fn sci_formatting() {
        assert_eq!(short_sci(&0.0f64), "0");
        assert_eq!(short_sci(&1234.0f64), "1.234e3");
        assert_eq!(short_sci(&-0.001f64), "-1.000e-3");
        let tiny = MpFloat::from_i64_at(1, 64).mul_pow2(-10000);
        assert_eq!(short_sci(&tiny), "5.012e-3011");
    }
}

//! Iterating the refinement map with a growing working precision.

use std::fmt;

use crate::counter::OpCounter;
use crate::error::Error;
use crate::matrix::Matrix;
use crate::refiner::certify::{certify_from_norms, e_index, mode_kappa, Certificate, OrderConstants};
use crate::refiner::hp::{hp_step_prepared, Prepared, StepReport};
use crate::refiner::trace::{RefinementTrace, TraceRecord};
use crate::residual::{big_k, kappa_cluster_pairs, kappa_square};
use crate::scalar::Real;
use crate::triplet::{Mode, SvdTriplet};

/// Upper limit for scheduled precision of unbounded scalar types.
pub const MAX_BITS: u32 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecisionSchedule {
    /// Iterate `i` is computed with `base_bits * (p+1)^i` bits.
    Geometric { base_bits: u32 },
    Fixed { bits: u32 },
}

impl PrecisionSchedule {
    /// Precision of iterate `i` for order `p`, capped at `max`.
    pub fn bits(&self, i: usize, p: usize, max: u32) -> u32 {
        match *self {
            PrecisionSchedule::Fixed { bits } => bits.min(max),
            PrecisionSchedule::Geometric { base_bits } => {
                let mut b = base_bits as u64;
                for _ in 0..i {
                    b = b.saturating_mul(p as u64 + 1);
                    if b >= max as u64 {
                        return max;
                    }
                }
                (b as u32).min(max)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StopRule {
    /// Number of refinement steps; the trace then holds `max_iter + 1` records.
    pub max_iter: usize,
    /// Stop early once `epsilon <= 2^-target_bits`.
    pub target_bits: Option<u64>,
}

impl StopRule {
    pub fn iterations(max_iter: usize) -> Self {
        StopRule { max_iter, target_bits: None }
    }
}

/// Which condition number enters epsilon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CertKappa {
    /// The mode's condition number, including the `1/sigma_i` terms.
    #[default]
    Full,
    /// Pair terms only, as used to select a deflation. Meant for refining a
    /// deflated triplet whose smallest kept value may be tiny.
    PairTerms,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefineOptions {
    pub p: usize,
    pub kappa: CertKappa,
    pub schedule: PrecisionSchedule,
    pub stop: StopRule,
    pub keep_iterates: bool,
    /// Abort when epsilon fails to halve on two consecutive steps.
    pub divergence_guard: bool,
}

impl RefineOptions {
    pub fn new(p: usize, base_bits: u32, max_iter: usize) -> Self {
        RefineOptions {
            p,
            kappa: CertKappa::Full,
            schedule: PrecisionSchedule::Geometric { base_bits },
            stop: StopRule::iterations(max_iter),
            keep_iterates: false,
            divergence_guard: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RefineOutcome<T> {
    pub triplet: SvdTriplet<T>,
    pub certificate: Certificate<T>,
    pub trace: RefinementTrace<T>,
    /// All iterates, starting with the input, when requested.
    pub iterates: Vec<SvdTriplet<T>>,
}

/// A failed refinement together with whatever was recorded before it.
#[derive(Clone, Debug)]
pub struct RefineError<T> {
    pub error: Error,
    pub trace: RefinementTrace<T>,
    pub certificate: Option<Certificate<T>>,
}

impl<T: Real> fmt::Display for RefineError<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (after {} recorded iterates)", self.error, self.trace.len())
    }
}

impl<T: Real> std::error::Error for RefineError<T> {}

/// Run the iteration from a certified start.
///
/// Iterate `i` is measured at the precision of iterate `i+1`, since the same
/// products feed the step that produces it; the last iterate is measured at
/// its own precision.
pub fn refine<T: Real>(
    m: &Matrix<T>,
    t0: &SvdTriplet<T>,
    opts: &RefineOptions,
) -> Result<RefineOutcome<T>, RefineError<T>> {
    let p = opts.p;
    let consts = OrderConstants::for_order(p);
    let mut trace = RefinementTrace::new(p, consts.u0.clone());
    let fail = |error: Error, trace: RefinementTrace<T>, certificate: Option<Certificate<T>>| RefineError {
        error,
        trace,
        certificate,
    };
    if let Err(e) = t0.validate() {
        return Err(fail(e, trace, None));
    }
    let max_iter = opts.stop.max_iter;
    let bits_at = |i: usize| opts.schedule.bits(i, p, T::MAX_PRECISION.unwrap_or(MAX_BITS));

    let mut cur = t0.with_precision(bits_at(0));
    let mut iterates = Vec::new();
    let mut first_cert = None;
    let mut pending_step: Option<StepReport<T>> = None;
    let mut carried_ops = OpCounter::new();
    let mut slow_steps = 0;

    for i in 0..=max_iter {
        let mut ops = std::mem::take(&mut carried_ops);
        let bits = bits_at((i + 1).min(max_iter));
        let t = cur.with_precision(bits);
        let mb = m.with_precision(bits);
        let prep = match Prepared::new(&t, &mb, &mut ops) {
            Ok(x) => x,
            Err(e) => return Err(fail(e, trace, first_cert)),
        };
        let kap = match opts.kappa {
            CertKappa::Full => mode_kappa(&t),
            CertKappa::PairTerms => pair_kappa(&t),
        };
        let kap = match kap {
            Ok(k) => k,
            Err(e) => return Err(fail(e, trace, first_cert)),
        };
        let cert = certify_from_norms(
            prep.delta(&t).paper_norm(),
            prep.eu.paper_norm(),
            prep.ev.paper_norm(),
            kap,
            big_k(&t.spectrum()),
            p,
        );
        let eps = cert.epsilon.clone();
        trace.records.push(TraceRecord {
            iteration: i,
            e: e_index(&eps, &consts.u0),
            epsilon: eps.clone(),
            delta_norm: cert.delta_norm.clone(),
            eu_norm: cert.eu_norm.clone(),
            ev_norm: cert.ev_norm.clone(),
            kappa: cert.kappa.clone(),
            bits,
            spectrum: t.spectrum(),
            ops: ops.clone(),
            step: pending_step.take(),
        });
        if opts.keep_iterates {
            iterates.push(t.clone());
        }
        if i == 0 {
            if !cert.pass {
                let err = Error::CertificationFailed {
                    epsilon: eps.to_f64(),
                    u0: consts.u0_f64(),
                };
                return Err(fail(err, trace, Some(cert)));
            }
            first_cert = Some(cert);
        } else if opts.divergence_guard {
            let prev = &trace.records[i - 1].epsilon;
            if eps > prev.mul_pow2(-1) {
                slow_steps += 1;
                if slow_steps >= 2 {
                    return Err(fail(Error::Divergence { iteration: i }, trace, first_cert));
                }
            } else {
                slow_steps = 0;
            }
        }

        let reached = eps.is_zero()
            || opts.stop.target_bits.is_some_and(|b| {
                eps.floor_log2().is_some_and(|f| f < -(b as i64))
            });
        if i == max_iter || reached {
            let certificate = first_cert.expect("start certified");
            return Ok(RefineOutcome { triplet: t, certificate, trace, iterates });
        }

        let mut step_ops = OpCounter::new();
        match hp_step_prepared(&t, &prep, p, false, &mut step_ops) {
            Ok((next, report)) => {
                cur = next;
                pending_step = Some(report);
                carried_ops = step_ops;
            }
            Err(e) => return Err(fail(e, trace, first_cert)),
        }
    }
    unreachable!("loop returns at max_iter")
}

fn pair_kappa<T: Real>(t: &SvdTriplet<T>) -> crate::error::Result<T> {
    let s = t.spectrum();
    let k = match &t.mode {
        Mode::Regular => kappa_square(&s),
        Mode::Cluster(p) => kappa_cluster_pairs(&s, p),
    };
    if k.is_finite() {
        Ok(k)
    } else {
        // Same diagnosis as the full condition number.
        mode_kappa(t)
    }
}

//! High-order iteration towards the polar (Stiefel) factor of a matrix.
//!
//! `U <- U (I + s_p(U^*U - I))` multiplies the Stiefel defect by roughly
//! its `p`-th power at every step.

use crate::counter::OpCounter;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::series::eval_sp;

/// Which guarantee applies to the limit of [`polar_project`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolarRegime {
    /// Initial defect below 1/4: the limit is the polar factor of `U0`.
    PolarFactor,
    /// Initial defect in [1/4, 1/2): the limit is a Stiefel matrix, but not
    /// necessarily the polar factor.
    StiefelOnly,
}

#[derive(Clone, Debug)]
pub struct PolarResult<T> {
    pub projected: Matrix<T>,
    pub iterations: usize,
    pub final_defect: T,
    pub regime: PolarRegime,
    /// `U_0, U_1, ...` including the result.
    pub iterates: Vec<Matrix<T>>,
    /// Defect of every iterate.
    pub defects: Vec<T>,
}

/// `paper_norm(U^*U - I)`.
pub fn stiefel_defect<T: Real>(u: &Matrix<T>, ops: &mut OpCounter) -> T {
    ops.gram(u).paper_norm()
}

/// One step `U (I + s_p(E(U)))`. Refuses when the defect is at least 1,
/// where the series no longer converges.
pub fn polar_step<T: Real>(u: &Matrix<T>, p: usize, ops: &mut OpCounter) -> Result<Matrix<T>> {
    let e = ops.gram(u);
    let defect = e.paper_norm();
    if defect >= T::from_i64_at(1, defect.precision()) {
        return Err(Error::SeriesDivergence {
            defect: defect.to_f64(),
        });
    }
    let omega = eval_sp(p, &e, ops);
    Ok(ops.mul(u, &omega.plus_identity()))
}

/// Default stopping tolerance: eight guard bits above roundoff.
pub fn default_tolerance<T: Real>(bits: u32) -> T {
    T::from_i64_at(1, bits).mul_pow2(-(bits as i32 - 8))
}

/// Iterate [`polar_step`] until the defect is at most `tol`.
pub fn polar_project<T: Real>(
    u0: &Matrix<T>,
    p: usize,
    tol: Option<T>,
    max_iter: usize,
) -> Result<PolarResult<T>> {
    let bits = u0.precision();
    let tol = tol.unwrap_or_else(|| default_tolerance(bits));
    let mut ops = OpCounter::new();
    let eps = stiefel_defect(u0, &mut ops);
    if eps >= T::from_f64_at(0.5, bits) {
        return Err(Error::SeriesDivergence {
            defect: eps.to_f64(),
        });
    }
    let regime = if eps < T::from_f64_at(0.25, bits) {
        PolarRegime::PolarFactor
    } else {
        PolarRegime::StiefelOnly
    };
    let mut iterates = vec![u0.clone()];
    let mut defects = vec![eps];
    let mut u = u0.clone();
    while *defects.last().unwrap() > tol {
        if iterates.len() > max_iter {
            return Err(Error::NoConvergence {
                what: "polar projection",
                iterations: max_iter,
                residual: defects.last().unwrap().to_f64(),
            });
        }
        u = polar_step(&u, p, &mut ops)?;
        defects.push(stiefel_defect(&u, &mut ops));
        iterates.push(u.clone());
    }
    Ok(PolarResult {
        projected: u,
        iterations: iterates.len() - 1,
        final_defect: defects.last().unwrap().clone(),
        regime,
        iterates,
        defects,
    })
}

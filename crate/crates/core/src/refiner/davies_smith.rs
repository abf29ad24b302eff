//! Third-order maps built from two solves of the coupling equation: the
//! Davies-Smith update and its variant that completes `X` with `c_2`.

use crate::coupler::{solve_regular, CouplingSolution};
use crate::counter::OpCounter;
use crate::error::{shape, Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::triplet::{Mode, SvdTriplet};

/// The two solves shared by both maps.
#[derive(Clone, Debug)]
pub struct DsCorrections<T> {
    /// `Delta = U^* M V - Sigma`.
    pub delta: Matrix<T>,
    pub first: CouplingSolution<T>,
    pub second: CouplingSolution<T>,
}

/// Norms of the quantities of one Davies-Smith step.
#[derive(Clone, Debug)]
pub struct DsReport<T> {
    pub delta_norm: T,
    /// `||S1 + S2||`.
    pub s_norm: T,
    pub x1_norm: T,
    pub x2_norm: T,
    pub y1_norm: T,
    pub y2_norm: T,
}

impl<T: Real> DsCorrections<T> {
    pub fn report(&self) -> DsReport<T> {
        DsReport {
            delta_norm: self.delta.paper_norm(),
            s_norm: self.first.s.add(&self.second.s).paper_norm(),
            x1_norm: self.first.x.paper_norm(),
            x2_norm: self.second.x.paper_norm(),
            y1_norm: self.first.y.paper_norm(),
            y2_norm: self.second.y.paper_norm(),
        }
    }
}

/// Solve `X1 Sigma - Sigma Y1 + S1 = Delta` and
/// `X2 Sigma - Sigma Y2 + S2 = -X1 (Delta + S1) / 2 + (Delta + S1) Y1 / 2`.
///
/// Both are the coupling equation `D - S - X Sigma + Sigma Y = 0` with
/// right-hand sides `Delta` and the quadratic term.
pub fn ds_corrections<T: Real>(
    t: &SvdTriplet<T>,
    m: &Matrix<T>,
    ops: &mut OpCounter,
) -> Result<DsCorrections<T>> {
    if !matches!(t.mode, Mode::Regular) {
        return Err(Error::InvalidArgument(
            "Davies-Smith maps are defined in regular mode only".into(),
        ));
    }
    if m.rows() != t.u.rows() || m.cols() != t.v.rows() {
        return Err(shape(
            "Davies-Smith step",
            format!("M is {:?}, U {:?}, V {:?}", m.shape(), t.u.shape(), t.v.shape()),
        ));
    }
    let sigma = t.spectrum();
    let mv = ops.mul(m, &t.v);
    let delta = ops.adjoint_mul(&t.u, &mv).sub(&t.sigma);
    let first = solve_regular(&delta, &sigma, ops)?;
    let ds = delta.add(&first.s);
    let half = T::from_f64_at(0.5, t.precision());
    let rhs = ops
        .mul(&ds, &first.y)
        .sub(&ops.mul(&first.x, &ds))
        .scale(&half);
    let second = solve_regular(&rhs, &sigma, ops)?;
    Ok(DsCorrections { delta, first, second })
}

fn apply<T: Real>(
    t: &SvdTriplet<T>,
    c: &DsCorrections<T>,
    xq: &Matrix<T>,
    yq: &Matrix<T>,
    ops: &mut OpCounter,
) -> SvdTriplet<T> {
    let half = T::from_f64_at(0.5, t.precision());
    let x = c.first.x.add(&c.second.x);
    let y = c.first.y.add(&c.second.y);
    let wu = x.add(&ops.mul_hermitian(xq, xq).scale(&half)).plus_identity();
    let wv = y.add(&ops.mul_hermitian(yq, yq).scale(&half)).plus_identity();
    SvdTriplet {
        u: ops.mul(&t.u, &wu),
        v: ops.mul(&t.v, &wv),
        sigma: t.sigma.add(&c.first.s).add(&c.second.s),
        mode: Mode::Regular,
    }
}

/// `(U (I + X + X1^2/2), V (I + Y + Y1^2/2), Sigma + S1 + S2)` with
/// `X = X1 + X2`, `Y = Y1 + Y2`.
pub fn ds_step<T: Real>(
    t: &SvdTriplet<T>,
    m: &Matrix<T>,
    ops: &mut OpCounter,
) -> Result<(SvdTriplet<T>, DsReport<T>)> {
    let c = ds_corrections(t, m, ops)?;
    let (x1, y1) = (c.first.x.clone(), c.first.y.clone());
    Ok((apply(t, &c, &x1, &y1, ops), c.report()))
}

/// `(U (I + c_2(X)), V (I + c_2(Y)), Sigma + S1 + S2)`, i.e. the square term
/// uses the full `X` rather than `X1`.
pub fn ds_revisited_step<T: Real>(
    t: &SvdTriplet<T>,
    m: &Matrix<T>,
    ops: &mut OpCounter,
) -> Result<(SvdTriplet<T>, DsReport<T>)> {
    let c = ds_corrections(t, m, ops)?;
    let x = c.first.x.add(&c.second.x);
    let y = c.first.y.add(&c.second.y);
    Ok((apply(t, &c, &x, &y, ops), c.report()))
}

//! The order-`(p+1)` refinement map.

use crate::coupler;
use crate::counter::OpCounter;
use crate::error::{shape, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::series::{eval_cp, eval_sp};
use crate::triplet::SvdTriplet;

/// `E(U)`, `E(V)` and `U^* M V` for a triplet; shared by certification and
/// the next step so they are computed once per iteration.
#[derive(Clone, Debug)]
pub struct Prepared<T> {
    pub eu: Matrix<T>,
    pub ev: Matrix<T>,
    /// `U^* M V = Delta + Sigma`.
    pub umv: Matrix<T>,
}

impl<T: Real> Prepared<T> {
    pub fn new(t: &SvdTriplet<T>, m: &Matrix<T>, ops: &mut OpCounter) -> Result<Self> {
        if m.rows() != t.u.rows() || m.cols() != t.v.rows() {
            return Err(shape(
                "refinement",
                format!("M is {:?}, U {:?}, V {:?}", m.shape(), t.u.shape(), t.v.shape()),
            ));
        }
        let mv = ops.mul(m, &t.v);
        Ok(Prepared {
            eu: ops.gram(&t.u),
            ev: ops.gram(&t.v),
            umv: ops.adjoint_mul(&t.u, &mv),
        })
    }

    pub fn delta(&self, t: &SvdTriplet<T>) -> Matrix<T> {
        self.umv.sub(&t.sigma)
    }
}

/// Norms of the intermediate quantities of one step.
#[derive(Clone, Debug)]
pub struct StepReport<T> {
    pub omega_norm: T,
    pub lambda_norm: T,
    pub theta_norm: T,
    pub psi_norm: T,
    pub s_norm: T,
    /// `||Delta_k||` for `k = 1..=p`.
    pub sub_residual_norms: Vec<T>,
    /// `||Delta_(p+1)||` when requested.
    pub final_residual_norm: Option<T>,
}

/// One application of the map, with `Delta_(p+1)` in the report.
pub fn hp_step<T: Real>(
    t: &SvdTriplet<T>,
    m: &Matrix<T>,
    p: usize,
    ops: &mut OpCounter,
) -> Result<(SvdTriplet<T>, StepReport<T>)> {
    let prep = Prepared::new(t, m, ops)?;
    hp_step_prepared(t, &prep, p, true, ops)
}

/// As [`hp_step`] from precomputed products. `want_final` additionally
/// computes `Delta_(p+1)` for the report at the cost of two products.

pub fn hp_step_prepared<T: Real>(
    t: &SvdTriplet<T>,
    prep: &Prepared<T>,
    p: usize,
    want_final: bool,
    ops: &mut OpCounter,
) -> Result<(SvdTriplet<T>, StepReport<T>)> {
    assert!(p >= 1, "order must be at least 1");
    let (_, l, _, q) = t.dims();
    let bits = t.precision();
    let sigma = t.spectrum();

    let omega = eval_sp(p, &prep.eu, ops);
    let lambda = eval_sp(p, &prep.ev, ops);
    let i_omega = omega.plus_identity();
    let i_lambda = lambda.plus_identity();
    // A = Delta_1 + Sigma, the common middle factor of every Delta_k.
    let left = ops.mul(&i_omega, &prep.umv);
    let a = ops.mul(&left, &i_lambda);

    let mut dk = a.sub(&t.sigma);
    let mut s_sum = Matrix::zeros(l, q, bits);
    let mut x_sum = Matrix::zeros(l, l, bits);
    let mut y_sum = Matrix::zeros(q, q, bits);
    let mut theta = Matrix::zeros(l, l, bits);
    let mut psi = Matrix::zeros(q, q, bits);
    let mut sub_norms = Vec::with_capacity(p);
    let mut final_norm = None;

    for k in 1..=p {
        sub_norms.push(dk.paper_norm());
        let sol = coupler::solve(&dk, &sigma, &t.mode, ops)?;
        s_sum.add_assign(&sol.s);
        x_sum.add_assign(&sol.x);
        y_sum.add_assign(&sol.y);
        theta = eval_cp(p, &x_sum, ops);
        psi = eval_cp(p, &y_sum, ops);
        if k < p || want_final {
            let left = ops.adjoint_mul(&theta.plus_identity(), &a);
            dk = ops
                .mul(&left, &psi.plus_identity())
                .sub(&t.sigma)
                .sub(&s_sum);
            if k == p {
                final_norm = Some(dk.paper_norm());
            }
        }
    }

    let wu = ops.mul(&i_omega, &theta.plus_identity());
    let wv = ops.mul(&i_lambda, &psi.plus_identity());
    let next = SvdTriplet {
        u: ops.mul(&t.u, &wu),
        v: ops.mul(&t.v, &wv),
        sigma: t.sigma.add(&s_sum),
        mode: t.mode.clone(),
    };
    let report = StepReport {
        omega_norm: omega.paper_norm(),
        lambda_norm: lambda.paper_norm(),
        theta_norm: theta.paper_norm(),
        psi_norm: psi.paper_norm(),
        s_norm: s_sum.paper_norm(),
        sub_residual_norms: sub_norms,
        final_residual_norm: final_norm,
    };
    Ok((next, report))
}

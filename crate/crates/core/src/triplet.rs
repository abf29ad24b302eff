//! Approximate singular value decompositions `(U, V, Sigma)`.

use crate::error::{shape, Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::spectra::ClusterPartition;

/// How the diagonal factor is interpreted.
#[derive(Clone, Debug, PartialEq)]
pub enum Mode {
    /// `Sigma` is diagonal with distinct entries.
    Regular,
    /// `Sigma` is block diagonal with blocks given by the partition.
    Cluster(ClusterPartition),
}

impl Mode {
    /// `regular` or `cluster:q1,q2,...`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "regular" {
            return Ok(Mode::Regular);
        }
        match s.strip_prefix("cluster:") {
            Some(sizes) => Ok(Mode::Cluster(ClusterPartition::parse(sizes)?)),
            None => Err(Error::InvalidArgument(format!(
                "mode must be `regular` or `cluster:q1,q2,...`, got {s:?}"
            ))),
        }
    }

    pub fn to_spec(&self) -> String {
        match self {
            Mode::Regular => "regular".into(),
            Mode::Cluster(p) => format!("cluster:{}", p.to_spec()),
        }
    }
}

/// `U` is `m x l`, `V` is `n x q`, `Sigma` is `l x q` with `l >= q`, and
/// `M ~ U Sigma V^*`.
///
/// `Sigma` is stored densely so that cluster mode can carry full diagonal
/// blocks; in regular mode only its diagonal is nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct SvdTriplet<T> {
    pub u: Matrix<T>,
    pub v: Matrix<T>,
    pub sigma: Matrix<T>,
    pub mode: Mode,
}

impl<T: Real> SvdTriplet<T> {
    /// Regular-mode triplet with `Sigma = (diag(sigma); 0)`.
    pub fn new(u: Matrix<T>, v: Matrix<T>, sigma: &[T]) -> Result<Self> {
        let s = Matrix::from_real_diag(sigma, u.cols(), v.cols()).with_precision(u.precision());
        let t = SvdTriplet {
            u,
            v,
            sigma: s,
            mode: Mode::Regular,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn from_parts(u: Matrix<T>, v: Matrix<T>, sigma: Matrix<T>, mode: Mode) -> Result<Self> {
        let t = SvdTriplet { u, v, sigma, mode };
        t.validate()?;
        Ok(t)
    }

    /// Checks shapes, `m >= l >= q`, `n >= q` and the partition size.
    pub fn validate(&self) -> Result<()> {
        let (m, l) = self.u.shape();
        let (n, q) = self.v.shape();
        if self.sigma.shape() != (l, q) {
            return Err(shape(
                "triplet",
                format!("Sigma is {:?}, expected {l}x{q}", self.sigma.shape()),
            ));
        }
        if !(m >= l && l >= q && n >= q) {
            return Err(shape(
                "triplet",
                format!("need m >= l >= q and n >= q, got m={m} l={l} n={n} q={q}"),
            ));
        }
        if let Mode::Cluster(p) = &self.mode {
            if p.total() != q {
                return Err(Error::InvalidPartition(format!(
                    "multiplicities sum to {}, Sigma has {q} columns",
                    p.total()
                )));
            }
        }
        Ok(())
    }

    /// `(m, l, n, q)`.
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.u.rows(), self.u.cols(), self.v.rows(), self.v.cols())
    }

    pub fn is_square(&self) -> bool {
        let (m, l, n, q) = self.dims();
        m == n && n == l && l == q
    }

    pub fn precision(&self) -> u32 {
        self.u.precision()
    }

    pub fn with_precision(&self, bits: u32) -> Self {
        SvdTriplet {
            u: self.u.with_precision(bits),
            v: self.v.with_precision(bits),
            sigma: self.sigma.with_precision(bits),
            mode: self.mode.clone(),
        }
    }

    /// Real parts of the diagonal of `Sigma`.
    pub fn spectrum(&self) -> Vec<T> {
        self.sigma.real_diag()
    }

    pub fn partition(&self) -> Option<&ClusterPartition> {
        match &self.mode {
            Mode::Regular => None,
            Mode::Cluster(p) => Some(p),
        }
    }

    /// Keep only the columns `idx` of `U` and `V` and the matching singular
    /// values. The result is in regular mode.
    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        let s = self.spectrum();
        let sel: Vec<T> = idx.iter().map(|&i| s[i].clone()).collect();
        SvdTriplet::new(
            self.u.select_columns(idx),
            self.v.select_columns(idx),
            &sel,
        )
    }
}

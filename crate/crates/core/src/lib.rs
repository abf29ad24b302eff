//! Iterative refinement of singular value decompositions.
//!
//! Starting from an approximate thin SVD `(U, V, Sigma)` of a complex matrix
//! `M`, the refinement map of order `p+1` produces a new triplet whose residual
//! is roughly the `(p+1)`-th power of the old one, using only matrix products
//! and additions. A certification test decides from computable quantities
//! whether the iteration is guaranteed to converge to an exact SVD.
//!
//! Everything is generic over [`Real`], implemented for `f64` and for the
//! MPFR-backed [`MpFloat`]. The aliases below fix the scalar to `MpFloat`.

pub mod bench;
pub mod complex;
pub mod counter;
pub mod coupler;
pub mod error;
pub mod matrix;
pub mod mmio;
pub mod refiner;
pub mod residual;
pub mod scalar;
pub mod series;
pub mod spectra;
pub mod stiefel;
pub mod triplet;

pub use complex::Complex;
pub use counter::OpCounter;
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::{MpFloat, Real};
pub use spectra::ClusterPartition;
pub use triplet::{Mode, SvdTriplet};

pub type MpComplex = Complex<MpFloat>;
pub type MpMatrix = Matrix<MpFloat>;
pub type MpTriplet = SvdTriplet<MpFloat>;
pub type F64Matrix = Matrix<f64>;
pub type F64Triplet = SvdTriplet<f64>;

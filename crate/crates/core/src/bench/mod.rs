//! Test matrices, a baseline SVD and the experiment harness.

pub mod experiment;
pub mod generators;
pub mod svd_init;
pub mod triplet_io;

pub use experiment::{run_experiment, ExperimentConfig, ExperimentRun, ExperimentTable, Family};
pub use generators::{gen_cauchy, gen_prescribed, gen_random, prescribed_spectrum, random_unitary};
pub use svd_init::{householder_q, init_svd, init_svd_counted};
pub use triplet_io::{load_triplet, save_triplet, Manifest};

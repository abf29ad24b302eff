//! Certification, the refinement maps and the iteration driver.

pub mod certify;
pub mod davies_smith;
pub mod driver;
pub mod hp;
pub mod trace;

pub use certify::{certify, certify_from_norms, e_index, mode_kappa, Certificate, OrderConstants};
pub use davies_smith::{ds_corrections, ds_revisited_step, ds_step, DsCorrections, DsReport};
pub use driver::{refine, CertKappa, PrecisionSchedule, RefineError, RefineOptions, RefineOutcome, StopRule};
pub use hp::{hp_step, hp_step_prepared, Prepared, StepReport};
pub use trace::{short_sci, RefinementTrace, TraceRecord, CSV_HEADER};

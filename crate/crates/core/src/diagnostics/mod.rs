//! Verification harness: run audits, convergence studies, the truncation
//! probe, the property suite and their CSV output.

pub mod audit;
pub mod convergence;
pub mod manufactured;
pub mod report;
pub mod truncation;
pub mod verify;

pub use audit::{audit_run, AuditSummary};
pub use convergence::{
    error_norms, fit_slope, spatial_convergence, temporal_convergence, ConvergenceReport, Reference, SlopeFit,
    StudySetup,
};
pub use manufactured::Manufactured;
pub use truncation::{truncation_probe, TruncationReport, TruncationRow};
pub use verify::{verify_all, PropertyOutcome};

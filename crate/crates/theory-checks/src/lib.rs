//! Numerical checks of the identification theory behind the masked-outcome
//! design: positivity of the conditional query second-moment matrix, its
//! closed-form eigenvalue bound, the excess-risk identity, the Gaussian
//! posterior oracle for the sign-flip world, and the orthogonal-shift
//! degeneracy that masking removes.

mod bayes_oracle;
mod excess_risk;
mod q_matrix;
mod report;
mod shift_demo;

pub use bayes_oracle::SignFlipOracle;
pub use excess_risk::{excess_risk_check, ExcessRisk};
pub use q_matrix::{lambda_min_and_bound, q_matrix, QMatrix};
pub use report::CheckResult;
pub use shift_demo::{dcml_shift_demo, dcmoml_shift_demo, ShiftLosses};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TheoryError {
    /// The closed-form posterior oracle exists only for the jointly
    /// Gaussian near-optimal pricing world.
    #[error("no closed-form posterior oracle for this world: {reason}")]
    OracleUnavailable { reason: String },
    #[error("panel {task_id}: {reason}")]
    BadPanel { task_id: u64, reason: String },
}

//! Non-meta baselines: per-task least squares, pooled least squares and
//! empirical-Bayes shrinkage under a heteroskedastic GLS likelihood.

mod empirical_bayes;
mod io;
mod ols;

pub use empirical_bayes::{eb_fit_prior, eb_posterior, EbPrior, PriorShape};
pub use io::{read_estimates_csv, write_estimates_csv, EstimateRow};
pub use ols::{shared_gls, shared_ols, task_gls, task_ols, OlsFit};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EstimatorError {
    /// Fewer than two distinct prices: the 2x2 normal matrix is singular.
    #[error("singular design: fewer than two distinct prices")]
    SingularDesign,
    #[error("need at least {needed} usable tasks, got {got}")]
    InsufficientTasks { needed: usize, got: usize },
}

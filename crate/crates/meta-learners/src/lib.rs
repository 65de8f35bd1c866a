//! Meta-learners mapping masked information sets to demand coefficients.
//!
//! Two model families:
//! - closed-form affine predictors (including the symmetric-linear model
//!   for price-pair inputs), solved by weighted normal equations;
//! - a from-scratch two-output MLP trained with Adam, minibatches over
//!   tasks and validation-loss early stopping.
//!
//! Both are trained on [`info_design::supervision_targets`]: the loss for
//! a task is `sum_t w_t (D_t - (theta0_hat + p_t * theta1_hat))^2`, i.e.
//! supervision arrives only through demand at the design's query prices,
//! never through the coefficients themselves.

mod checkpoint;
mod linear;
mod mlp;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use linear::{affine_fit, symmetric_linear_fit, AffineModel, SymmetricLinearModel};
pub use mlp::{mlp_backward, mlp_forward, AdamState, DenseLayer, MlpModel};
pub use train::{
    prepare_examples, train, train_on_examples, EarlyStopper, EpochStats, Standardizer,
    TaskExample, TrainConfig, TrainedMlp,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetaError {
    #[error("input has {got} features, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("info set was built for {got}, model was trained for {expected}")]
    DesignMismatch { expected: String, got: String },
    #[error("normal equations are singular")]
    SingularDesign,
    #[error("no usable training tasks (all dropped or empty input)")]
    EmptyTrainSet,
    #[error("panel {task_id}: {reason}")]
    BadPanel { task_id: u64, reason: String },
}

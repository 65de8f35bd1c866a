//! Information-set design for decision-conditioned meta-learning.
//!
//! The learner's input for a task is deliberately constructed: it always
//! conditions on the full endogenous price path (prices carry signal about
//! latent demand parameters), while demand outcomes are masked so that the
//! supervised query point cannot be recovered from the inputs.
//!
//! The four designs compared by the benchmark:
//! - `DCMOML` masks the demands at the last two distinct price points and
//!   randomizes (or averages) supervision across them.
//! - `DCUOML` masks the last two demands but leaks the non-query value
//!   without its index.
//! - `DCML` reveals everything except the query demand, including the
//!   query price itself.
//! - `META` is the classic support/query split: the final observation is
//!   the query and its price is not part of the inputs.

mod assignment;
mod info_set;
mod targets;

pub use assignment::{assign_query, find_penultimate_index, QueryAssignment};
pub use info_set::{build_info_set, feature_len, Design, MaskedInfoSet};
pub use targets::{supervision_targets, LossMode, SupervisionTarget};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum InfoDesignError {
    /// Every price in the panel is identical, so no distinct penultimate
    /// price point exists; such tasks must be dropped upstream.
    #[error("all prices equal; no distinct penultimate price point")]
    AllPricesEqual,
    #[error("panel too short: need at least {needed} observations, got {got}")]
    PanelTooShort { needed: usize, got: usize },
}

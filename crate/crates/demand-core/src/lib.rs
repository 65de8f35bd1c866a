//! Structural linear demand model and synthetic data generators.
//!
//! Each task is a store/product with its own linear demand curve
//! `D = theta0 + theta1 * p + noise`. Prices in the generated worlds are
//! chosen endogenously (managers target the revenue-maximizing price using
//! private knowledge of the demand curve), which is what makes naive pooled
//! regression on this data misleading and the benchmark interesting.
//!
//! Three worlds are provided:
//! - [`World::NearOptimal`]: heterogeneous intercepts, common slope, prices
//!   tightly clustered around each task's revenue optimum.
//! - [`World::Manager`]: both coefficients heterogeneous, a manager prices
//!   off a noisy signal of the optimum; the signal noise `sigma_c` is the
//!   confounding-strength knob.
//! - [`World::TwoPointProbe`]: an adaptive two-price experimentation policy
//!   whose final probe pair is chosen without looking at demand inside the
//!   block.

mod config;
mod generate;
mod io;
mod panel;
mod params;
mod rng;

pub use config::{GenConfig, World};
pub use generate::{generate, generate_manager, generate_near_optimal, generate_two_point_probe};
pub use io::{
    read_panels_csv, read_panels_jsonl, write_panels_csv, write_panels_jsonl, PanelIoError,
};
pub use panel::TaskPanel;
pub use params::{mean_demand, optimal_price, DemandParams};
pub use rng::{task_rng, StreamDomain};

use thiserror::Error;

/// Errors from the demand model and its generators.
#[derive(Debug, Error, PartialEq)]
pub enum DemandError {
    /// Revenue `p * (theta0 + theta1 * p)` is unbounded when the slope is
    /// not negative, so there is no optimal price.
    #[error("demand slope must be negative for an optimal price, got {theta1}")]
    NonNegativeSlope { theta1: f64 },
    #[error("invalid generator config: {reason}")]
    InvalidConfig { reason: String },
    #[error("invalid panel: {reason}")]
    InvalidPanel { reason: String },
}

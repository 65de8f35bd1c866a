//! Ingestion of retail transaction logs and construction of per-product
//! demand estimation tasks.
//!
//! Two task definitions over the same cleaned transactions:
//! - static top-3: average daily demand at the three most frequently
//!   observed prices; train on the top two, hold out the third;
//! - exposure sequence: run-length encode the daily posted-price series
//!   into (price, exposure days, average daily demand) runs; train on the
//!   first K runs, hold out run K+1.
//!
//! Prices are handled as exact scaled integers end to end, so run
//! boundaries and price identity never depend on float rounding.

mod features;
mod metrics;
mod records;
mod tasks;

pub use features::{hash_description, load_embeddings_csv, FeatureSource};
pub use metrics::exposure_weighted_rmse;
pub use records::{parse_transactions, ParseStats, TransactionRecord, PRICE_TICKS_PER_UNIT};
pub use tasks::{
    build_exposure_sequence, build_static_top3, corpus_stats, encode_exposure_runs,
    retail_task_to_panel, write_features_csv, BuildStats, CorpusStats, ExposureRun, RetailTask,
    TaskKind,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RetailError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("missing required column {0:?}")]
    MissingColumn(&'static str),
    #[error("empty input")]
    EmptyInput,
    #[error("prediction/holdout length mismatch: {predictions} vs {actuals}")]
    LengthMismatch { predictions: usize, actuals: usize },
    #[error("embedding file row {row}: {reason}")]
    BadEmbedding { row: usize, reason: String },
}

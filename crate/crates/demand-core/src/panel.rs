use serde::{Deserialize, Serialize};

use crate::{DemandError, DemandParams};

/// One task's observed history: context features, a price path and the
/// realized demands, plus optional per-observation exposure lengths
/// (number of days a price was in effect) and, for synthetic data, the
/// true generating coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskPanel {
    pub task_id: u64,
    /// Observable context `Z`; empty when the context is constant.
    pub context: Vec<f64>,
    pub prices: Vec<f64>,
    pub demands: Vec<f64>,
    /// Exposure lengths, all >= 1 when present.
    pub exposures: Option<Vec<u32>>,
    /// Present for synthetic panels only.
    pub true_params: Option<DemandParams>,
}

impl TaskPanel {
    pub fn new(
        task_id: u64,
        context: Vec<f64>,
        prices: Vec<f64>,
        demands: Vec<f64>,
    ) -> Result<Self, DemandError> {
        let panel = Self {
            task_id,
            context,
            prices,
            demands,
            exposures: None,
            true_params: None,
        };
        panel.validate()?;
        Ok(panel)
    }

    pub fn with_exposures(mut self, exposures: Vec<u32>) -> Result<Self, DemandError> {
        self.exposures = Some(exposures);
        self.validate()?;
        Ok(self)
    }

    pub fn with_true_params(mut self, params: DemandParams) -> Self {
        self.true_params = Some(params);
        self
    }

    /// Number of observations `K`.
    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn validate(&self) -> Result<(), DemandError> {
        if self.prices.len() < 2 {
            return Err(DemandError::InvalidPanel {
                reason: format!("need at least 2 observations, got {}", self.prices.len()),
            });
        }
        if self.prices.len() != self.demands.len() {
            return Err(DemandError::InvalidPanel {
                reason: format!(
                    "prices ({}) and demands ({}) differ in length",
                    self.prices.len(),
                    self.demands.len()
                ),
            });
        }
        if let Some(exp) = &self.exposures {
            if exp.len() != self.prices.len() {
                return Err(DemandError::InvalidPanel {
                    reason: format!(
                        "exposures ({}) and prices ({}) differ in length",
                        exp.len(),
                        self.prices.len()
                    ),
                });
            }
            if exp.iter().any(|&e| e < 1) {
                return Err(DemandError::InvalidPanel {
                    reason: "exposures must all be >= 1".to_string(),
                });
            }
        }
        if self.prices.iter().chain(self.demands.iter()).any(|v| !v.is_finite()) {
            return Err(DemandError::InvalidPanel {
                reason: "prices and demands must be finite".to_string(),
            });
        }
        Ok(())
    }
}

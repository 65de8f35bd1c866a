use serde::{Deserialize, Serialize};

use crate::DemandError;

/// Task-specific demand curve coefficients: intercept and slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandParams {
    /// Demand at price zero.
    pub theta0: f64,
    /// Demand change per unit price (negative in every generated world).
    pub theta1: f64,
}

impl DemandParams {
    pub fn new(theta0: f64, theta1: f64) -> Self {
        Self { theta0, theta1 }
    }
}

/// Expected demand `theta0 + theta1 * price`.
pub fn mean_demand(params: DemandParams, price: f64) -> f64 {
    params.theta0 + params.theta1 * price
}

/// Revenue-maximizing price `-theta0 / (2 * theta1)`.
///
/// Requires a strictly negative slope; otherwise revenue grows without
/// bound and the maximizer does not exist.
pub fn optimal_price(params: DemandParams) -> Result<f64, DemandError> {
    if params.theta1 >= 0.0 {
        return Err(DemandError::NonNegativeSlope {
            theta1: params.theta1,
        });
    }
    Ok(-params.theta0 / (2.0 * params.theta1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimal_price_direct_evaluation() {
        assert_eq!(optimal_price(DemandParams::new(10.0, -1.0)).unwrap(), 5.0);
        assert_eq!(optimal_price(DemandParams::new(0.0, -1.0)).unwrap(), 0.0);
    }

    #[test]
    fn optimal_price_rejects_nonnegative_slope() {
        let err = optimal_price(DemandParams::new(1.0, 0.5)).unwrap_err();
        assert_eq!(err, DemandError::NonNegativeSlope { theta1: 0.5 });
        assert!(optimal_price(DemandParams::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn mean_demand_linear_evaluation() {
        assert_eq!(mean_demand(DemandParams::new(10.0, -1.0), 5.0), 5.0);
        assert_eq!(mean_demand(DemandParams::new(1.0, -1.0), 0.0), 1.0);
        // At the optimum of (1, -1) the expected demand is half the intercept.
        assert_eq!(mean_demand(DemandParams::new(1.0, -1.0), 0.5), 0.5);
    }
}

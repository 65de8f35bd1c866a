use crate::RetailError;

/// Exposure-weighted root-mean-square error:
/// `sqrt(sum_i e_i (y_i - yhat_i)^2 / sum_i e_i)`.
pub fn exposure_weighted_rmse(
    predictions: &[f64],
    actuals: &[f64],
    exposures: &[f64],
) -> Result<f64, RetailError> {
    if predictions.is_empty() {
        return Err(RetailError::EmptyInput);
    }
    if predictions.len() != actuals.len() || predictions.len() != exposures.len() {
        return Err(RetailError::LengthMismatch {
            predictions: predictions.len(),
            actuals: actuals.len(),
        });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&p, &y), &e) in predictions.iter().zip(actuals).zip(exposures) {
        num += e * (y - p) * (y - p);
        den += e;
    }
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions_score_zero() {
        let y = [2.0, 3.0, 4.0];
        assert_eq!(exposure_weighted_rmse(&y, &y, &[1.0, 2.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn hand_evaluated_cases() {
        // errors (1, 2) with unit exposures: sqrt((1 + 4) / 2).
        let rmse = exposure_weighted_rmse(&[1.0, 1.0], &[2.0, 3.0], &[1.0, 1.0]).unwrap();
        assert!((rmse - 2.5f64.sqrt()).abs() < 1e-12);
        // errors (1, 2) with exposures (3, 1): sqrt((3 + 4) / 4).
        let rmse = exposure_weighted_rmse(&[1.0, 1.0], &[2.0, 3.0], &[3.0, 1.0]).unwrap();
        assert!((rmse - (7.0f64 / 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            exposure_weighted_rmse(&[], &[], &[]),
            Err(RetailError::EmptyInput)
        ));
    }
}

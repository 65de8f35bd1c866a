use demand_core::{task_rng, DemandParams, StreamDomain, TaskPanel};
use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use info_design::{
    assign_query, build_info_set, supervision_targets, Design, LossMode, MaskedInfoSet,
    QueryAssignment,
};

use crate::MetaError;

/// Price-pair-symmetric affine predictor:
/// `theta_j = a_j * (p1 + p2) + c_j`. Swapping the two prices leaves the
/// prediction unchanged by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricLinearModel {
    pub a: [f64; 2],
    pub c: [f64; 2],
}

impl SymmetricLinearModel {
    pub fn predict(&self, p1: f64, p2: f64) -> DemandParams {
        let s = p1 + p2;
        DemandParams::new(self.a[0] * s + self.c[0], self.a[1] * s + self.c[1])
    }
}

fn dcmoml_assignment(panel: &TaskPanel, seed: u64) -> Result<QueryAssignment, MetaError> {
    assign_query(
        &panel.prices,
        &mut task_rng(seed, StreamDomain::QueryAssignment, panel.task_id),
    )
    .map_err(|e| MetaError::BadPanel {
        task_id: panel.task_id,
        reason: e.to_string(),
    })
}

/// Fit the symmetric-linear model by minimizing the two-point masked loss
/// in closed form (normal equations in the 4 unknowns a0, c0, a1, c1).
/// Requires K=2 panels with distinct prices.
pub fn symmetric_linear_fit(
    panels: &[TaskPanel],
    mode: LossMode,
    seed: u64,
) -> Result<SymmetricLinearModel, MetaError> {
    let mut xtx = Matrix4::zeros();
    let mut xty = Vector4::zeros();
    let mut used = 0usize;
    for panel in panels {
        if panel.len() != 2 {
            return Err(MetaError::BadPanel {
                task_id: panel.task_id,
                reason: format!("symmetric-linear fit needs K=2, got K={}", panel.len()),
            });
        }
        if panel.prices[0] == panel.prices[1] {
            continue; // constant-price task: dropped upstream by contract
        }
        let assignment = dcmoml_assignment(panel, seed)?;
        let s = panel.prices[0] + panel.prices[1];
        for t in supervision_targets(panel, Design::Dcmoml, &assignment, mode) {
            let f = Vector4::new(s, 1.0, t.price * s, t.price);
            xtx += t.weight * f * f.transpose();
            xty += t.weight * f * t.demand;
        }
        used += 1;
    }
    if used == 0 {
        return Err(MetaError::EmptyTrainSet);
    }
    let beta = xtx.lu().solve(&xty).ok_or(MetaError::SingularDesign)?;
    Ok(SymmetricLinearModel {
        a: [beta[0], beta[2]],
        c: [beta[1], beta[3]],
    })
}

/// Affine predictor over a design's flattened information set:
/// `theta_j = w_j . x + b_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineModel {
    pub design: Design,
    pub w: [Vec<f64>; 2],
    pub b: [f64; 2],
}

impl AffineModel {
    pub fn input_dim(&self) -> usize {
        self.w[0].len()
    }

    pub fn predict(&self, info: &MaskedInfoSet) -> Result<DemandParams, MetaError> {
        if info.design != self.design {
            return Err(MetaError::DesignMismatch {
                expected: self.design.to_string(),
                got: info.design.to_string(),
            });
        }
        self.predict_features(&info.to_features())
    }

    pub fn predict_features(&self, x: &[f64]) -> Result<DemandParams, MetaError> {
        if x.len() != self.input_dim() {
            return Err(MetaError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let dot = |w: &[f64]| w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        Ok(DemandParams::new(
            dot(&self.w[0]) + self.b[0],
            dot(&self.w[1]) + self.b[1],
        ))
    }
}

/// Closed-form ERM for the affine predictor under any design's loss.
/// Unknowns are stacked as (w0, b0, w1, b1); each supervised pair
/// contributes the row `[x, 1, p*x, p]` with its weight.
pub fn affine_fit(panels: &[TaskPanel], design: Design, mode: LossMode, seed: u64) -> Result<AffineModel, MetaError> {
    let mut dim: Option<usize> = None;
    let mut xtx: Option<DMatrix<f64>> = None;
    let mut xty: Option<DVector<f64>> = None;
    let mut row = Vec::new();
    let mut used = 0usize;
    for panel in panels {
        let assignment = match design {
            Design::Dcmoml | Design::Dcuoml => match dcmoml_assignment(panel, seed) {
                Ok(a) => a,
                Err(_) => continue, // constant prices: dropped
            },
            // The final-pair designs don't depend on the assignment.
            Design::Dcml | Design::Meta => dcmoml_assignment(panel, seed).unwrap_or(
                QueryAssignment {
                    k_star: 0,
                    k_query: panel.len() - 1,
                    k_masked_other: 0,
                },
            ),
        };
        let info = build_info_set(panel, design, &assignment).map_err(|e| MetaError::BadPanel {
            task_id: panel.task_id,
            reason: e.to_string(),
        })?;
        let x = info.to_features();
        let d = *dim.get_or_insert(x.len());
        if x.len() != d {
            return Err(MetaError::DimensionMismatch {
                expected: d,
                got: x.len(),
            });
        }
        let n = 2 * d + 2;
        let xtx = xtx.get_or_insert_with(|| DMatrix::zeros(n, n));
        let xty = xty.get_or_insert_with(|| DVector::zeros(n));
        for t in supervision_targets(panel, design, &assignment, mode) {
            row.clear();
            row.extend_from_slice(&x);
            row.push(1.0);
            row.extend(x.iter().map(|v| v * t.price));
            row.push(t.price);
            for i in 0..n {
                xty[i] += t.weight * row[i] * t.demand;
                for j in 0..n {
                    xtx[(i, j)] += t.weight * row[i] * row[j];
                }
            }
        }
        used += 1;
    }
    if used == 0 {
        return Err(MetaError::EmptyTrainSet);
    }
    let (mut xtx, xty) = (xtx.unwrap(), xty.unwrap());
    let d = dim.unwrap();
    // Constant feature slots (e.g. masked-demand sentinels at K=2) make
    // the normal matrix exactly singular; a trace-scaled ridge pins their
    // coefficients at zero without visibly moving the others.
    let n = 2 * d + 2;
    let ridge = 1e-9 * (xtx.trace() / n as f64).max(f64::MIN_POSITIVE);
    for i in 0..n {
        xtx[(i, i)] += ridge;
    }
    let beta = xtx.lu().solve(&xty).ok_or(MetaError::SingularDesign)?;
    Ok(AffineModel {
        design,
        w: [
            beta.as_slice()[..d].to_vec(),
            beta.as_slice()[d + 1..2 * d + 1].to_vec(),
        ],
        b: [beta[d], beta[2 * d + 1]],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use demand_core::mean_demand;

    fn constant_world(params: DemandParams, n: usize) -> Vec<TaskPanel> {
        (0..n as u64)
            .map(|i| {
                let prices = vec![0.3 + 0.05 * i as f64, 1.4 - 0.03 * i as f64];
                let demands = prices.iter().map(|&p| mean_demand(params, p)).collect();
                TaskPanel::new(i, vec![], prices, demands)
                    .unwrap()
                    .with_true_params(params)
            })
            .collect()
    }

    #[test]
    fn realizable_constant_target_is_recovered_exactly() {
        let params = DemandParams::new(2.0, -1.5);
        let panels = constant_world(params, 12);
        let model = symmetric_linear_fit(&panels, LossMode::Averaged, 0).unwrap();
        for panel in &panels {
            let pred = model.predict(panel.prices[0], panel.prices[1]);
            assert!((pred.theta0 - params.theta0).abs() < 1e-8);
            assert!((pred.theta1 - params.theta1).abs() < 1e-8);
        }
    }

    #[test]
    fn prediction_is_symmetric_in_the_price_pair() {
        let model = SymmetricLinearModel {
            a: [0.4, -0.2],
            c: [1.0, -0.7],
        };
        assert_eq!(model.predict(1.0, 2.0), model.predict(2.0, 1.0));
    }

    #[test]
    fn constant_model_ignores_prices() {
        let model = SymmetricLinearModel {
            a: [0.0, 0.0],
            c: [3.0, -1.0],
        };
        assert_eq!(model.predict(0.1, 0.2), model.predict(9.0, -4.0));
    }

    #[test]
    fn affine_fit_matches_symmetric_fit_on_dcmoml_pairs() {
        // The affine model over (p1, p2, masked slots) strictly contains
        // the symmetric-linear family; on symmetric data both closed forms
        // must attain the same loss-minimizing predictions.
        let params = DemandParams::new(1.0, -1.0);
        let panels = constant_world(params, 30);
        let affine = affine_fit(&panels, Design::Dcmoml, LossMode::Averaged, 0).unwrap();
        for panel in &panels {
            let a = assign_query(
                &panel.prices,
                &mut task_rng(0, StreamDomain::QueryAssignment, panel.task_id),
            )
            .unwrap();
            let info = build_info_set(panel, Design::Dcmoml, &a).unwrap();
            let pred = affine.predict(&info).unwrap();
            assert!((pred.theta0 - params.theta0).abs() < 1e-7);
            assert!((pred.theta1 - params.theta1).abs() < 1e-7);
        }
    }

    #[test]
    fn k3_panels_are_rejected_by_symmetric_fit() {
        let panel = TaskPanel::new(0, vec![], vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            symmetric_linear_fit(&[panel], LossMode::Averaged, 0),
            Err(MetaError::BadPanel { .. })
        ));
    }
}

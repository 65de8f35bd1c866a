use demand_core::{task_rng, DemandParams, StreamDomain, TaskPanel};

use info_design::{
    assign_query, build_info_set, supervision_targets, Design, LossMode, MaskedInfoSet,
    QueryAssignment,
};

use crate::TheoryError;

/// Empirical losses of a predictor and its orthogonally shifted version.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftLosses {
    pub original: f64,
    pub shifted: f64,
}

fn shift(theta: DemandParams, phi: f64, query_price: f64) -> DemandParams {
    // Direction (p_K, -1): the query-price demand prediction is invariant
    // because (1, p_K) . (p_K, -1) = 0.
    DemandParams::new(theta.theta0 + phi * query_price, theta.theta1 - phi)
}

fn loss_at(
    panel: &TaskPanel,
    design: Design,
    assignment: &QueryAssignment,
    mode: LossMode,
    theta: DemandParams,
) -> f64 {
    supervision_targets(panel, design, assignment, mode)
        .iter()
        .map(|t| {
            let r = t.demand - (theta.theta0 + t.price * theta.theta1);
            t.weight * r * r
        })
        .sum()
}

fn assignment_for(panel: &TaskPanel, seed: u64) -> Result<QueryAssignment, TheoryError> {
    assign_query(
        &panel.prices,
        &mut task_rng(seed, StreamDomain::QueryAssignment, panel.task_id),
    )
    .map_err(|e| TheoryError::BadPanel {
        task_id: panel.task_id,
        reason: e.to_string(),
    })
}

/// The query-price-revealing design admits observationally equivalent
/// solutions: adding `phi(inputs) * (p_K, -1)` to any predictor leaves
/// every loss term unchanged, because the shift is orthogonal to the
/// query regressor. Returns both empirical losses so callers can assert
/// their (near exact) equality.
pub fn dcml_shift_demo<F, P>(
    panels: &[TaskPanel],
    predict: F,
    phi: P,
    seed: u64,
) -> Result<ShiftLosses, TheoryError>
where
    F: Fn(&MaskedInfoSet) -> DemandParams,
    P: Fn(&MaskedInfoSet) -> f64,
{
    let mut original = 0.0;
    let mut shifted = 0.0;
    for panel in panels {
        let assignment = assignment_for(panel, seed)?;
        let info = build_info_set(panel, Design::Dcml, &assignment).map_err(|e| {
            TheoryError::BadPanel {
                task_id: panel.task_id,
                reason: e.to_string(),
            }
        })?;
        let theta = predict(&info);
        let query_price = info.query_price.expect("DCML exposes the query price");
        let theta_shifted = shift(theta, phi(&info), query_price);
        original += loss_at(panel, Design::Dcml, &assignment, LossMode::Averaged, theta);
        shifted += loss_at(
            panel,
            Design::Dcml,
            &assignment,
            LossMode::Averaged,
            theta_shifted,
        );
    }
    let n = panels.len().max(1) as f64;
    Ok(ShiftLosses {
        original: original / n,
        shifted: shifted / n,
    })
}

/// The same shift applied under the masked two-point loss. Because the
/// loss also evaluates the penultimate distinct price (whose regressor is
/// not orthogonal to the shift), the averaged loss strictly increases
/// whenever the price gap and phi are nonzero.
pub fn dcmoml_shift_demo<F, P>(
    panels: &[TaskPanel],
    predict: F,
    phi: P,
    seed: u64,
) -> Result<ShiftLosses, TheoryError>
where
    F: Fn(&MaskedInfoSet) -> DemandParams,
    P: Fn(&MaskedInfoSet) -> f64,
{
    let mut original = 0.0;
    let mut shifted = 0.0;
    for panel in panels {
        let assignment = assignment_for(panel, seed)?;
        let info = build_info_set(panel, Design::Dcmoml, &assignment).map_err(|e| {
            TheoryError::BadPanel {
                task_id: panel.task_id,
                reason: e.to_string(),
            }
        })?;
        let theta = predict(&info);
        let query_price = panel.prices[panel.len() - 1];
        let theta_shifted = shift(theta, phi(&info), query_price);
        original += loss_at(panel, Design::Dcmoml, &assignment, LossMode::Averaged, theta);
        shifted += loss_at(
            panel,
            Design::Dcmoml,
            &assignment,
            LossMode::Averaged,
            theta_shifted,
        );
    }
    let n = panels.len().max(1) as f64;
    Ok(ShiftLosses {
        original: original / n,
        shifted: shifted / n,
    })
}

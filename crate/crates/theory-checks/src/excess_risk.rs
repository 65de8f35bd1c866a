use demand_core::{task_rng, DemandParams, StreamDomain, TaskPanel};

use info_design::{
    assign_query, build_info_set, supervision_targets, Design, LossMode, MaskedInfoSet,
};

use crate::q_matrix::q_matrix;
use crate::TheoryError;

/// Monte Carlo estimates of both sides of the excess-risk identity
/// `L(g) - L(g*) = E[(g - g*)' Q (g - g*)]` under the masked two-point
/// design, with standard errors across tasks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcessRisk {
    pub lhs: f64,
    pub rhs: f64,
    pub lhs_se: f64,
    pub rhs_se: f64,
}

impl ExcessRisk {
    pub fn combined_se(&self) -> f64 {
        (self.lhs_se * self.lhs_se + self.rhs_se * self.rhs_se).sqrt()
    }
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Evaluate both sides of the identity on a set of panels.
///
/// `lhs` is the empirical loss gap between `predict` and `oracle` under
/// the requested loss mode (fresh query draws per `seed` in sampled
/// mode); `rhs` is the mean of the quadratic form through the per-task
/// query second-moment matrix. On noise-free panels with the averaged
/// loss the two sides agree term by term; with noise they agree in
/// expectation.
pub fn excess_risk_check<F, G>(
    panels: &[TaskPanel],
    predict: F,
    oracle: G,
    mode: LossMode,
    seed: u64,
) -> Result<ExcessRisk, TheoryError>
where
    F: Fn(&MaskedInfoSet) -> DemandParams,
    G: Fn(&MaskedInfoSet) -> DemandParams,
{
    let mut lhs_terms = Vec::with_capacity(panels.len());
    let mut rhs_terms = Vec::with_capacity(panels.len());
    for panel in panels {
        let assignment = assign_query(
            &panel.prices,
            &mut task_rng(seed, StreamDomain::QueryAssignment, panel.task_id),
        )
        .map_err(|e| TheoryError::BadPanel {
            task_id: panel.task_id,
            reason: e.to_string(),
        })?;
        let info =
            build_info_set(panel, Design::Dcmoml, &assignment).map_err(|e| TheoryError::BadPanel {
                task_id: panel.task_id,
                reason: e.to_string(),
            })?;
        let g_hat = predict(&info);
        let g_star = oracle(&info);
        let targets = supervision_targets(panel, Design::Dcmoml, &assignment, mode);
        let loss = |theta: DemandParams| -> f64 {
            targets
                .iter()
                .map(|t| {
                    let r = t.demand - (theta.theta0 + t.price * theta.theta1);
                    t.weight * r * r
                })
                .sum()
        };
        lhs_terms.push(loss(g_hat) - loss(g_star));

        let q = q_matrix(panel.prices[assignment.k_star], panel.prices[panel.len() - 1]);
        let delta = [g_hat.theta0 - g_star.theta0, g_hat.theta1 - g_star.theta1];
        rhs_terms.push(q.quad(delta));
    }
    let (lhs, lhs_se) = mean_se(&lhs_terms);
    let (rhs, rhs_se) = mean_se(&rhs_terms);
    Ok(ExcessRisk {
        lhs,
        rhs,
        lhs_se,
        rhs_se,
    })
}

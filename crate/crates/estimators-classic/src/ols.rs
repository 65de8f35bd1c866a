use demand_core::{DemandParams, TaskPanel};

use crate::EstimatorError;

/// A least-squares fit of one task's demand curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlsFit {
    pub params: DemandParams,
    /// Weighted residual sum of squares at the fit.
    pub residual_ss: f64,
    /// Rank of the design; fits are only returned at full rank 2.
    pub design_rank: u8,
}

fn has_two_distinct_prices(prices: &[f64]) -> bool {
    prices.windows(2).any(|w| w[0] != w[1])
        || prices.first().is_some_and(|&p0| prices.iter().any(|&p| p != p0))
}

/// Two-pass weighted least squares: first the weighted means, then the
/// centered moments. The slope is Cov_w(p, D) / Var_w(p), which avoids the
/// catastrophic cancellation of raw normal equations when prices are
/// nearly equal.
fn fit_obs(obs: &[(f64, f64, f64)]) -> Result<OlsFit, EstimatorError> {
    let sw: f64 = obs.iter().map(|&(_, _, w)| w).sum();
    if sw <= 0.0 {
        return Err(EstimatorError::SingularDesign);
    }
    let p_bar = obs.iter().map(|&(p, _, w)| w * p).sum::<f64>() / sw;
    let d_bar = obs.iter().map(|&(_, d, w)| w * d).sum::<f64>() / sw;
    let spp: f64 = obs.iter().map(|&(p, _, w)| w * (p - p_bar) * (p - p_bar)).sum();
    let spd: f64 = obs.iter().map(|&(p, d, w)| w * (p - p_bar) * (d - d_bar)).sum();
    if spp <= 0.0 {
        return Err(EstimatorError::SingularDesign);
    }
    let theta1 = spd / spp;
    let theta0 = d_bar - theta1 * p_bar;
    let residual_ss = obs
        .iter()
        .map(|&(p, d, w)| {
            let r = d - (theta0 + theta1 * p);
            w * r * r
        })
        .sum();
    Ok(OlsFit {
        params: DemandParams::new(theta0, theta1),
        residual_ss,
        design_rank: 2,
    })
}

fn panel_obs(panel: &TaskPanel, use_exposures: bool) -> Vec<(f64, f64, f64)> {
    (0..panel.len())
        .map(|k| {
            let w = match (&panel.exposures, use_exposures) {
                (Some(e), true) => e[k] as f64,
                _ => 1.0,
            };
            (panel.prices[k], panel.demands[k], w)
        })
        .collect()
}

/// Ordinary least squares on a single task's observations.
///
/// With K=2 distinct prices this interpolates both points exactly
/// (residual_ss = 0).
pub fn task_ols(panel: &TaskPanel) -> Result<OlsFit, EstimatorError> {
    if !has_two_distinct_prices(&panel.prices) {
        return Err(EstimatorError::SingularDesign);
    }
    fit_obs(&panel_obs(panel, false))
}

/// Per-task generalized least squares: observations weighted by exposure
/// length (demand averages over e days have variance proportional to 1/e).
/// Identical to [`task_ols`] when the panel has no exposures.
pub fn task_gls(panel: &TaskPanel) -> Result<OlsFit, EstimatorError> {
    if !has_two_distinct_prices(&panel.prices) {
        return Err(EstimatorError::SingularDesign);
    }
    fit_obs(&panel_obs(panel, true))
}

fn pooled(panels: &[TaskPanel], use_exposures: bool) -> Result<DemandParams, EstimatorError> {
    // Accumulate in task-id order so the result does not depend on the
    // order panels are supplied in.
    let mut order: Vec<&TaskPanel> = panels.iter().collect();
    order.sort_by_key(|p| p.task_id);
    let mut obs = Vec::new();
    for panel in order {
        obs.extend(panel_obs(panel, use_exposures));
    }
    Ok(fit_obs(&obs)?.params)
}

/// Pooled OLS: one shared (theta0, theta1) over all observations of all
/// tasks. Under endogenous pricing this estimand reflects the pricing
/// policy, not the causal slope.
pub fn shared_ols(panels: &[TaskPanel]) -> Result<DemandParams, EstimatorError> {
    pooled(panels, false)
}

/// Pooled fit with exposure weights when present.
pub fn shared_gls(panels: &[TaskPanel]) -> Result<DemandParams, EstimatorError> {
    pooled(panels, true)
}

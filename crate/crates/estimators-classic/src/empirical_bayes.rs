use demand_core::{DemandParams, TaskPanel};
use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::ols::shared_gls;
#[cfg(test)]
use crate::ols::task_gls;
use crate::EstimatorError;

/// Ridge applied to prior-covariance eigenvalues when inverting, so a
/// truncated-to-singular prior still yields a posterior (pinned to the
/// prior mean along the degenerate direction).
const PRIOR_RIDGE: f64 = 1e-8;
const NOISE_FLOOR: f64 = 1e-12;

/// Whether the fitted prior covariance keeps the off-diagonal coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PriorShape {
    #[default]
    Full,
    Diagonal,
}

/// A shared Gaussian prior over task coefficients, estimated from the data.
#[derive(Debug, Clone, PartialEq)]
pub struct EbPrior {
    pub mean: DemandParams,
    /// Symmetric PSD 2x2 covariance (eigenvalues truncated at zero).
    pub covariance: Matrix2<f64>,
    /// Per-observation noise variance; exposures divide it.
    pub noise_variance: f64,
}

impl EbPrior {
    /// A flat prior: infinite covariance, so the posterior equals the
    /// per-task GLS fit.
    pub fn flat(noise_variance: f64) -> Self {
        Self {
            mean: DemandParams::new(0.0, 0.0),
            covariance: Matrix2::from_diagonal_element(f64::INFINITY),
            noise_variance,
        }
    }
}

/// Eigen-decomposition of a symmetric 2x2 matrix, robust to infinite
/// diagonal entries when the off-diagonal is zero.
fn sym_eigen(m: &Matrix2<f64>) -> ([f64; 2], [Vector2<f64>; 2]) {
    let (a, b, d) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
    if b == 0.0 {
        return ([a, d], [Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)]);
    }
    let half_tr = 0.5 * (a + d);
    let disc = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    let v1 = Vector2::new(b, l1 - a).normalize();
    let v2 = Vector2::new(-(l1 - a), b).normalize();
    ([l1, l2], [v1, v2])
}

fn truncate_psd(m: &Matrix2<f64>) -> Matrix2<f64> {
    let (vals, vecs) = sym_eigen(m);
    let mut out = Matrix2::zeros();
    for (l, v) in vals.iter().zip(&vecs) {
        let l = l.max(0.0);
        out += l * v * v.transpose();
    }
    out
}

fn prior_precision(covariance: &Matrix2<f64>) -> Matrix2<f64> {
    let (vals, vecs) = sym_eigen(covariance);
    let mut out = Matrix2::zeros();
    for (l, v) in vals.iter().zip(&vecs) {
        let inv = if l.is_infinite() { 0.0 } else { 1.0 / l.max(PRIOR_RIDGE) };
        out += inv * v * v.transpose();
    }
    out
}

fn obs_weight(panel: &TaskPanel, k: usize) -> f64 {
    panel.exposures.as_ref().map_or(1.0, |e| e[k] as f64)
}

/// Method-of-moments fit of the shared prior.
///
/// - Mean: the pooled GLS fit, i.e. the precision-weighted average of the
///   per-task least-squares coefficients (plain per-task fits have
///   heavy-tailed errors under tiny price gaps, so an unweighted average
///   diverges).
/// - Covariance: regression of within-task residual cross-products
///   `r_k * r_l` (k < l, noise-free because shocks are independent across
///   observations) on `(1, p_k + p_l, p_k * p_l)`, which identifies the
///   quadratic form `P_k' C P_l`; eigenvalues truncated at zero.
/// - Noise variance: exposure-scaled residual second moments net of the
///   covariance quadratic form.
pub fn eb_fit_prior(panels: &[TaskPanel], shape: PriorShape) -> Result<EbPrior, EstimatorError> {
    let mut usable: Vec<&TaskPanel> = panels
        .iter()
        .filter(|p| p.prices.iter().any(|&x| x != p.prices[0]))
        .collect();
    usable.sort_by_key(|p| p.task_id);
    if usable.len() < 2 {
        return Err(EstimatorError::InsufficientTasks {
            needed: 2,
            got: usable.len(),
        });
    }
    let owned: Vec<TaskPanel> = usable.iter().map(|&p| p.clone()).collect();
    let mean = shared_gls(&owned)?;

    // Cross-product regression for the coefficient covariance.
    let mut xtx = Matrix3::zeros();
    let mut xty = Vector3::zeros();
    for panel in &usable {
        let r: Vec<f64> = (0..panel.len())
            .map(|k| panel.demands[k] - (mean.theta0 + mean.theta1 * panel.prices[k]))
            .collect();
        for k in 0..panel.len() {
            for l in (k + 1)..panel.len() {
                let f = Vector3::new(
                    1.0,
                    panel.prices[k] + panel.prices[l],
                    panel.prices[k] * panel.prices[l],
                );
                xtx += f * f.transpose();
                xty += f * (r[k] * r[l]);
            }
        }
    }
    let coef = xtx
        .lu()
        .solve(&xty)
        .unwrap_or_else(Vector3::zeros);
    let mut c = Matrix2::new(coef[0], coef[1], coef[1], coef[2]);
    if shape == PriorShape::Diagonal {
        c[(0, 1)] = 0.0;
        c[(1, 0)] = 0.0;
    }
    let covariance = truncate_psd(&c);

    // Noise variance: E[e_k r_k^2] = e_k P_k' C P_k + sigma^2.
    let (mut acc, mut count) = (0.0, 0.0);
    for panel in &usable {
        for k in 0..panel.len() {
            let p = Vector2::new(1.0, panel.prices[k]);
            let r = panel.demands[k] - (mean.theta0 + mean.theta1 * panel.prices[k]);
            let quad = (p.transpose() * covariance * p)[(0, 0)];
            acc += obs_weight(panel, k) * (r * r - quad);
            count += 1.0;
        }
    }
    let noise_variance = (acc / count).max(NOISE_FLOOR);

    Ok(EbPrior {
        mean,
        covariance,
        noise_variance,
    })
}

/// Gaussian posterior mean under the heteroskedastic GLS likelihood:
/// `(S0^-1 + X'WX/s2)^-1 (S0^-1 mu0 + X'WD/s2)` with W the exposure
/// weights (identity when absent).
pub fn eb_posterior(panel: &TaskPanel, prior: &EbPrior) -> DemandParams {
    let lambda0 = prior_precision(&prior.covariance);
    let mut a = lambda0;
    let mut b = lambda0 * Vector2::new(prior.mean.theta0, prior.mean.theta1);
    let s2 = prior.noise_variance.max(NOISE_FLOOR);
    for k in 0..panel.len() {
        let x = Vector2::new(1.0, panel.prices[k]);
        let w = obs_weight(panel, k) / s2;
        a += w * x * x.transpose();
        b += w * x * panel.demands[k];
    }
    let sol = a.lu().solve(&b).unwrap_or_else(|| {
        // Degenerate only if both the prior and the data carry no
        // information at all; fall back to the prior mean.
        Vector2::new(prior.mean.theta0, prior.mean.theta1)
    });
    DemandParams::new(sol[0], sol[1])
}

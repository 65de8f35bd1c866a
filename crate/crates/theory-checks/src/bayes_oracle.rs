use demand_core::{mean_demand, optimal_price, DemandParams, GenConfig, World};
use nalgebra::{DMatrix, DVector};

use crate::TheoryError;

/// Closed-form posterior mean for the near-optimal pricing world.
///
/// In that world `(theta0, p_1, .., p_K, D_1, .., D_K)` is jointly
/// Gaussian: the intercept is Gaussian, the slope is a known constant and
/// the pricing rule is affine in the intercept (`p_k = a * theta0 +
/// noise` with `a = -1 / (2 * theta1)`), so every conditional mean is an
/// affine function of the conditioning variables.
#[derive(Debug, Clone, PartialEq)]
pub struct SignFlipOracle {
    pub theta0_mean: f64,
    pub theta0_sd: f64,
    pub theta1: f64,
    pub price_sd: f64,
    pub demand_sd: f64,
}

impl SignFlipOracle {
    /// Derive the oracle from a generator config; only the near-optimal
    /// world is jointly Gaussian with an affine pricing rule.
    pub fn from_config(config: &GenConfig) -> Result<Self, TheoryError> {
        if config.world != World::NearOptimal {
            return Err(TheoryError::OracleUnavailable {
                reason: format!("{:?} has a nonlinear pricing rule", config.world),
            });
        }
        let mean_params = DemandParams::new(config.theta0_mean, config.theta1_mean);
        let p_star_mean = optimal_price(mean_params).map_err(|e| TheoryError::OracleUnavailable {
            reason: e.to_string(),
        })?;
        Ok(Self {
            theta0_mean: config.theta0_mean,
            theta0_sd: config.param_cv * config.theta0_mean.abs(),
            theta1: config.theta1_mean,
            price_sd: config.experiment_cv * p_star_mean.abs(),
            demand_sd: config.demand_noise_cv
                * mean_demand(mean_params, p_star_mean).abs(),
        })
    }

    fn price_loading(&self) -> f64 {
        -1.0 / (2.0 * self.theta1)
    }

    /// E[Theta | p_1..p_K]: the masked-design conditioning set (no demand
    /// outcomes). The slope is exactly its known constant.
    pub fn posterior_mean_given_prices(&self, prices: &[f64]) -> DemandParams {
        let k = prices.len();
        let a = self.price_loading();
        let v0 = self.theta0_sd * self.theta0_sd;
        let mut cov = DMatrix::from_element(k, k, a * a * v0);
        for i in 0..k {
            cov[(i, i)] += self.price_sd * self.price_sd;
        }
        let cross = DVector::from_element(k, a * v0);
        let centered = DVector::from_iterator(
            k,
            prices.iter().map(|&p| p - a * self.theta0_mean),
        );
        let weights = cov
            .lu()
            .solve(&centered)
            .expect("price covariance is positive definite");
        let theta0 = self.theta0_mean + cross.dot(&weights);
        DemandParams::new(theta0, self.theta1)
    }

    /// E[Theta | p_1, D_1]: the support-pair conditioning set used by the
    /// classic meta-learner at K=2.
    pub fn posterior_mean_given_support(&self, p1: f64, d1: f64) -> DemandParams {
        let a = self.price_loading();
        let v0 = self.theta0_sd * self.theta0_sd;
        let vp = self.price_sd * self.price_sd;
        let vd = self.demand_sd * self.demand_sd;
        // D_1 = theta0 (1 + theta1 a) + theta1 price-noise + demand-noise.
        let load_d = 1.0 + self.theta1 * a;
        let mut cov = DMatrix::zeros(2, 2);
        cov[(0, 0)] = a * a * v0 + vp;
        cov[(0, 1)] = a * v0 * load_d + self.theta1 * vp;
        cov[(1, 0)] = cov[(0, 1)];
        cov[(1, 1)] = load_d * load_d * v0 + self.theta1 * self.theta1 * vp + vd;
        let cross = DVector::from_vec(vec![a * v0, load_d * v0]);
        let mu_p = a * self.theta0_mean;
        let mu_d = load_d * self.theta0_mean;
        let centered = DVector::from_vec(vec![p1 - mu_p, d1 - mu_d]);
        let weights = cov.lu().solve(&centered).expect("positive definite");
        DemandParams::new(self.theta0_mean + cross.dot(&weights), self.theta1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig_oracle() -> SignFlipOracle {
        SignFlipOracle::from_config(&GenConfig::near_optimal(1, 2, 0)).unwrap()
    }

    #[test]
    fn config_conversion_matches_the_generator_scales() {
        let o = fig_oracle();
        assert_eq!(o.theta0_mean, 10.0);
        assert_eq!(o.theta0_sd, 1.0);
        assert_eq!(o.theta1, -1.0);
        assert_eq!(o.price_sd, 0.25);
        assert_eq!(o.demand_sd, 1.0);
    }

    #[test]
    fn prior_mean_inputs_give_prior_mean_posterior() {
        let o = fig_oracle();
        let post = o.posterior_mean_given_prices(&[5.0, 5.0]);
        assert!((post.theta0 - 10.0).abs() < 1e-12);
        assert_eq!(post.theta1, -1.0);
    }

    #[test]
    fn vanishing_price_noise_reveals_the_optimum() {
        let mut o = fig_oracle();
        o.price_sd = 1e-6;
        // Prices pin p* = theta0 / 2, so E[theta0 | p] -> p1 + p2.
        let post = o.posterior_mean_given_prices(&[5.3, 5.3]);
        assert!(
            (post.theta0 - 10.6).abs() < 1e-6,
            "posterior {} should approach 2 p_bar",
            post.theta0
        );
    }

    #[test]
    fn oracle_requires_the_near_optimal_world() {
        let config = GenConfig::manager(10, 2, 0.1, 0);
        assert!(matches!(
            SignFlipOracle::from_config(&config),
            Err(TheoryError::OracleUnavailable { .. })
        ));
    }
}

use serde::{Deserialize, Serialize};

use crate::DemandError;

/// Which synthetic world to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum World {
    /// Heterogeneous intercepts, common slope; managers price right at the
    /// revenue optimum plus small noise. The classic sign-flip world.
    NearOptimal,
    /// Both coefficients heterogeneous; the manager prices off a noisy
    /// signal of the optimum. `confound_sigma` scales the signal noise:
    /// zero means perfectly informed (maximal confounding), larger values
    /// inject quasi-exogenous price variation.
    Manager,
    /// Adaptive two-price experimentation: gradient steps on revenue with
    /// symmetric probe pairs; the final pair never reacts to demand inside
    /// its own block.
    TwoPointProbe,
}

/// Generator configuration.
///
/// The coefficient-of-variation fields have world-specific semantics:
/// - `Manager`/`TwoPointProbe` use them multiplicatively per draw
///   (`sd = cv * |reference|`), matching the heteroskedastic setup.
/// - `NearOptimal` converts them once, at the mean parameters, into
///   absolute noise scales so the noise stays homoskedastic across tasks:
///   price noise sd = `experiment_cv * |p*|` and demand noise sd =
///   `demand_noise_cv * |mean demand at p*|`, both evaluated at
///   `(theta0_mean, theta1_mean)`. With the defaults below this gives
///   price noise sd 0.25 and demand noise sd 1.0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n_tasks: usize,
    /// Observations per task, `K >= 2`.
    pub k_obs: usize,
    pub theta0_mean: f64,
    pub theta1_mean: f64,
    /// Coefficient of variation of the task coefficients around their means.
    pub param_cv: f64,
    pub demand_noise_cv: f64,
    /// Manager-signal noise as a fraction of `|p*|` (the confounding knob).
    pub confound_sigma: f64,
    /// Within-task price experimentation noise.
    pub experiment_cv: f64,
    pub world: World,
    pub seed: u64,
    /// Gradient step size for the two-point-probe policy.
    #[serde(default = "default_probe_step")]
    pub probe_step: f64,
    /// Probe half-gap for the two-point-probe policy.
    #[serde(default = "default_probe_delta")]
    pub probe_delta: f64,
}

fn default_probe_step() -> f64 {
    0.1
}

fn default_probe_delta() -> f64 {
    0.05
}

impl GenConfig {
    /// Sign-flip world defaults: intercepts N(10, 1), slope fixed at -1,
    /// demand noise sd 1, price noise sd 0.25.
    pub fn near_optimal(n_tasks: usize, k_obs: usize, seed: u64) -> Self {
        Self {
            n_tasks,
            k_obs,
            theta0_mean: 10.0,
            theta1_mean: -1.0,
            param_cv: 0.1,
            demand_noise_cv: 0.2,
            confound_sigma: 0.0,
            experiment_cv: 0.05,
            world: World::NearOptimal,
            seed,
            probe_step: default_probe_step(),
            probe_delta: default_probe_delta(),
        }
    }

    /// Manager world defaults: coefficients N(1, 0.1^2) and N(-1, 0.1^2),
    /// multiplicative 10% price and demand noise.
    pub fn manager(n_tasks: usize, k_obs: usize, confound_sigma: f64, seed: u64) -> Self {
        Self {
            n_tasks,
            k_obs,
            theta0_mean: 1.0,
            theta1_mean: -1.0,
            param_cv: 0.1,
            demand_noise_cv: 0.1,
            confound_sigma,
            experiment_cv: 0.1,
            world: World::Manager,
            seed,
            probe_step: default_probe_step(),
            probe_delta: default_probe_delta(),
        }
    }

    pub fn two_point_probe(n_tasks: usize, k_obs: usize, seed: u64) -> Self {
        Self {
            world: World::TwoPointProbe,
            ..Self::manager(n_tasks, k_obs, 0.1, seed)
        }
    }

    pub fn validate(&self) -> Result<(), DemandError> {
        let fail = |reason: String| Err(DemandError::InvalidConfig { reason });
        if self.n_tasks < 1 {
            return fail("n_tasks must be >= 1".into());
        }
        if self.k_obs < 2 {
            return fail(format!("k_obs must be >= 2, got {}", self.k_obs));
        }
        for (name, v) in [
            ("param_cv", self.param_cv),
            ("demand_noise_cv", self.demand_noise_cv),
            ("confound_sigma", self.confound_sigma),
            ("experiment_cv", self.experiment_cv),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return fail(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !self.theta0_mean.is_finite() || !self.theta1_mean.is_finite() {
            return fail("theta means must be finite".into());
        }
        if self.theta1_mean >= 0.0 {
            // Every world prices around the revenue optimum, which needs a
            // downward-sloping mean demand curve.
            return fail(format!(
                "theta1_mean must be negative, got {}",
                self.theta1_mean
            ));
        }
        if self.world == World::TwoPointProbe && !(self.probe_delta > 0.0) {
            return fail("probe_delta must be > 0".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_bad_fields() {
        let mut c = GenConfig::manager(100, 2, 0.1, 0);
        assert!(c.validate().is_ok());
        c.k_obs = 1;
        assert!(c.validate().is_err());
        c.k_obs = 2;
        c.param_cv = -0.1;
        assert!(c.validate().is_err());
        c.param_cv = 0.1;
        c.theta1_mean = 0.5;
        assert!(c.validate().is_err());
    }
}

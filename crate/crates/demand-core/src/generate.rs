use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::{
    mean_demand, optimal_price, task_rng, DemandError, DemandParams, GenConfig, StreamDomain,
    TaskPanel, World,
};

/// Generate panels for the configured world.
///
/// Deterministic given `(config, config.seed)`; task `i` has its own
/// counter-based stream, so panels do not depend on generation order.
pub fn generate(config: &GenConfig) -> Result<Vec<TaskPanel>, DemandError> {
    config.validate()?;
    match config.world {
        World::NearOptimal => generate_near_optimal(config),
        World::Manager => generate_manager(config),
        World::TwoPointProbe => generate_two_point_probe(config),
    }
}

fn normal_draw(rng: &mut ChaCha8Rng, mean: f64, sd: f64) -> f64 {
    // sd is always >= 0 here; Normal::new only fails on negative/NaN sd.
    Normal::new(mean, sd).expect("valid normal").sample(rng)
}

/// Near-optimal pricing world: intercepts vary across tasks, the slope is
/// common, and managers price at each task's revenue optimum plus noise.
/// Pooling this data yields an upward-sloping price-demand relation even
/// though every true slope is negative.
pub fn generate_near_optimal(config: &GenConfig) -> Result<Vec<TaskPanel>, DemandError> {
    let mean_params = DemandParams::new(config.theta0_mean, config.theta1_mean);
    let p_star_mean = optimal_price(mean_params)?;
    // Absolute noise scales, fixed across tasks (see GenConfig docs).
    let price_sd = config.experiment_cv * p_star_mean.abs();
    let demand_sd = config.demand_noise_cv * mean_demand(mean_params, p_star_mean).abs();
    let theta0_sd = config.param_cv * config.theta0_mean.abs();

    let mut panels = Vec::with_capacity(config.n_tasks);
    for task_id in 0..config.n_tasks as u64 {
        let mut rng = task_rng(config.seed, StreamDomain::Generation, task_id);
        let theta0 = normal_draw(&mut rng, config.theta0_mean, theta0_sd);
        let params = DemandParams::new(theta0, config.theta1_mean);
        let p_star = optimal_price(params)?;

        let mut prices = Vec::with_capacity(config.k_obs);
        let mut demands = Vec::with_capacity(config.k_obs);
        for _ in 0..config.k_obs {
            let p = p_star + normal_draw(&mut rng, 0.0, price_sd);
            let d = mean_demand(params, p) + normal_draw(&mut rng, 0.0, demand_sd);
            prices.push(p);
            demands.push(d);
        }
        panels.push(
            TaskPanel::new(task_id, Vec::new(), prices, demands)?.with_true_params(params),
        );
    }
    Ok(panels)
}

/// Draw task coefficients; the slope is redrawn until negative so the
/// optimal price exists (at cv 0.1 around -1 a redraw is a ~1e-23 event,
/// kept only so the generator is total).
fn draw_params(rng: &mut ChaCha8Rng, config: &GenConfig) -> DemandParams {
    let theta0 = normal_draw(rng, config.theta0_mean, config.param_cv * config.theta0_mean.abs());
    let theta1_sd = config.param_cv * config.theta1_mean.abs();
    let mut theta1 = normal_draw(rng, config.theta1_mean, theta1_sd);
    while theta1 >= 0.0 {
        theta1 = normal_draw(rng, config.theta1_mean, theta1_sd);
    }
    DemandParams::new(theta0, theta1)
}

fn manager_signal(rng: &mut ChaCha8Rng, config: &GenConfig, p_star: f64) -> f64 {
    p_star + normal_draw(rng, 0.0, config.confound_sigma * p_star.abs())
}

/// Demand realization with multiplicative noise: sd proportional to the
/// absolute expected demand (exactly zero noise at zero expected demand).
fn noisy_demand(rng: &mut ChaCha8Rng, config: &GenConfig, params: DemandParams, p: f64) -> f64 {
    let m = mean_demand(params, p);
    m + normal_draw(rng, 0.0, config.demand_noise_cv * m.abs())
}

/// Manager world: the manager prices off a noisy signal of the optimum
/// and experiments locally around it.
pub fn generate_manager(config: &GenConfig) -> Result<Vec<TaskPanel>, DemandError> {
    let mut panels = Vec::with_capacity(config.n_tasks);
    for task_id in 0..config.n_tasks as u64 {
        let mut rng = task_rng(config.seed, StreamDomain::Generation, task_id);
        let params = draw_params(&mut rng, config);
        let p_star = optimal_price(params)?;
        let p_signal = manager_signal(&mut rng, config, p_star);

        let mut prices = Vec::with_capacity(config.k_obs);
        let mut demands = Vec::with_capacity(config.k_obs);
        for _ in 0..config.k_obs {
            let p = p_signal + normal_draw(&mut rng, 0.0, config.experiment_cv * p_signal.abs());
            prices.push(p);
            demands.push(noisy_demand(&mut rng, config, params, p));
        }
        panels.push(
            TaskPanel::new(task_id, Vec::new(), prices, demands)?.with_true_params(params),
        );
    }
    Ok(panels)
}

/// Adaptive two-point-probe world. The incumbent price starts at the
/// manager's (confounded) signal and is updated by a finite-difference
/// revenue-gradient step after each completed probe block. The final two
/// prices are `incumbent +- delta` in random order and never depend on the
/// demands realized within that block, so the query-shock exogeneity
/// condition holds by construction.
pub fn generate_two_point_probe(config: &GenConfig) -> Result<Vec<TaskPanel>, DemandError> {
    let delta = config.probe_delta;
    let mut panels = Vec::with_capacity(config.n_tasks);
    for task_id in 0..config.n_tasks as u64 {
        let mut rng = task_rng(config.seed, StreamDomain::Generation, task_id);
        let params = draw_params(&mut rng, config);
        let p_star = optimal_price(params)?;
        let mut incumbent = manager_signal(&mut rng, config, p_star);

        let mut prices = Vec::with_capacity(config.k_obs);
        let mut demands = Vec::with_capacity(config.k_obs);

        // Odd K: one burn-in observation at the raw incumbent, then blocks.
        if config.k_obs % 2 == 1 {
            prices.push(incumbent);
            demands.push(noisy_demand(&mut rng, config, params, incumbent));
        }
        let n_blocks = (config.k_obs - prices.len()) / 2;
        for block in 0..n_blocks {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let p_first = incumbent + sign * delta;
            let p_second = incumbent - sign * delta;
            let d_first = noisy_demand(&mut rng, config, params, p_first);
            let d_second = noisy_demand(&mut rng, config, params, p_second);
            prices.push(p_first);
            prices.push(p_second);
            demands.push(d_first);
            demands.push(d_second);
            if block + 1 < n_blocks {
                // Two-point revenue-gradient estimate at the incumbent.
                let grad = (p_first * d_first - p_second * d_second) / (2.0 * sign * delta);
                incumbent += config.probe_step * grad;
            }
        }
        panels.push(
            TaskPanel::new(task_id, Vec::new(), prices, demands)?.with_true_params(params),
        );
    }
    Ok(panels)
}

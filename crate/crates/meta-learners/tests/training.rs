//! End-to-end training behavior: interpolation of realizable targets,
//! determinism, the masked-loss decomposition, and recovery of the
//! Gaussian posterior on the sign-flip world.

use demand_core::{generate, mean_demand, task_rng, DemandParams, GenConfig, StreamDomain,
    TaskPanel};
use info_design::{assign_query, build_info_set, Design, LossMode};
use meta_learners::{
    affine_fit, symmetric_linear_fit, train, MlpModel, TrainConfig,
};
use theory_checks::{excess_risk_check, SignFlipOracle};

fn constant_world(params: DemandParams, n: usize, seed: u64) -> Vec<TaskPanel> {
    use rand::Rng;
    let mut rng = task_rng(seed, StreamDomain::Custom(9), 0);
    (0..n as u64)
        .map(|i| {
            let p1 = rng.gen_range(0.2..1.0);
            let p2 = p1 + rng.gen_range(0.2..1.0);
            let demands = vec![mean_demand(params, p1), mean_demand(params, p2)];
            TaskPanel::new(i, vec![], vec![p1, p2], demands)
                .unwrap()
                .with_true_params(params)
        })
        .collect()
}

/// Realizable constant target: the network interpolates it and the
/// training loss collapses.
#[test]
fn constant_target_world_is_interpolated() {
    let params = DemandParams::new(1.5, -0.8);
    let panels = constant_world(params, 600, 3);
    let config = TrainConfig {
        learning_rate: 3e-3,
        max_epochs: 800,
        patience: 150,
        ..TrainConfig::default()
    };
    let k = 2;
    let model = MlpModel::new(info_design::feature_len(config.design, k, 0), 16, 2, config.seed);
    let trained = train(model, &panels, &config).unwrap();
    let best = trained
        .log
        .iter()
        .map(|e| e.val_loss)
        .fold(f64::INFINITY, f64::min);
    assert!(best < 1e-4, "best validation loss {best}");
}

#[test]
fn training_is_deterministic_given_seed() {
    let panels = generate(&GenConfig::manager(300, 2, 0.1, 11)).unwrap();
    let config = TrainConfig {
        max_epochs: 30,
        ..TrainConfig::default()
    };
    let dim = info_design::feature_len(config.design, 2, 0);
    let a = train(MlpModel::new(dim, 8, 2, config.seed), &panels, &config).unwrap();
    let b = train(MlpModel::new(dim, 8, 2, config.seed), &panels, &config).unwrap();
    assert_eq!(a.model, b.model);
    assert_eq!(a.log, b.log);

    let other_seed = TrainConfig {
        seed: 1,
        ..config.clone()
    };
    let c = train(MlpModel::new(dim, 8, 2, 1), &panels, &other_seed).unwrap();
    assert_ne!(a.model, c.model);
}

/// On noise-free data the gap between any predictor's masked loss and the
/// oracle-label loss equals the mean quadratic form through the per-task
/// query second-moment matrix, term by term.
#[test]
fn masked_loss_decomposes_through_the_q_matrix() {
    let mut config = GenConfig::manager(500, 2, 0.15, 8);
    config.demand_noise_cv = 0.0;
    let panels = generate(&config).unwrap();
    let model = symmetric_linear_fit(&panels, LossMode::Averaged, 0).unwrap();
    let by_prices = panels.clone();
    let predict = move |info: &info_design::MaskedInfoSet| {
        model.predict(info.prices[0], info.prices[1])
    };
    let oracle = move |info: &info_design::MaskedInfoSet| {
        by_prices
            .iter()
            .find(|p| p.prices == info.prices)
            .and_then(|p| p.true_params)
            .unwrap()
    };
    let out = excess_risk_check(&panels, predict, oracle, LossMode::Averaged, 0).unwrap();
    assert!(
        (out.lhs - out.rhs).abs() <= 1e-10 * (1.0 + out.lhs.abs()),
        "lhs {} vs rhs {}",
        out.lhs,
        out.rhs
    );
}

/// The symmetric-linear masked fit recovers the Gaussian posterior: at
/// large N the fitted affine map converges to the closed-form conditional
/// mean (the population minimizer), and the mean predicted slope sits at
/// the true common slope.
#[test]
fn symmetric_fit_converges_to_the_posterior_oracle() {
    let config = GenConfig::near_optimal(400_000, 2, 12);
    let panels = generate(&config).unwrap();
    let model = symmetric_linear_fit(&panels, LossMode::Averaged, 0).unwrap();
    let oracle = SignFlipOracle::from_config(&config).unwrap();

    let mut sq = 0.0;
    let mut slope_sum = 0.0;
    for panel in &panels {
        let pred = model.predict(panel.prices[0], panel.prices[1]);
        let star = oracle.posterior_mean_given_prices(&panel.prices);
        sq += (pred.theta0 - star.theta0).powi(2) + (pred.theta1 - star.theta1).powi(2);
        slope_sum += pred.theta1;
    }
    let rmse = (sq / (2.0 * panels.len() as f64)).sqrt();
    let mean_slope = slope_sum / panels.len() as f64;
    assert!(rmse < 0.05, "parameter RMSE vs oracle {rmse}");
    assert!(
        (-1.1..=-0.9).contains(&mean_slope),
        "mean predicted slope {mean_slope}"
    );

    // Pointwise at the reference probe input as well.
    let pred = model.predict(5.0, 5.1);
    let star = oracle.posterior_mean_given_prices(&[5.0, 5.1]);
    assert!((pred.theta0 - star.theta0).abs() < 0.1);
    assert!((pred.theta1 - star.theta1).abs() < 0.1);
}

/// The classic support/query meta-estimator stays biased on the same
/// data: its average slope is far from the true -1.
#[test]
fn linear_meta_estimator_is_biased_on_the_sign_flip_world() {
    let config = GenConfig::near_optimal(20_000, 2, 12);
    let panels = generate(&config).unwrap();
    let model = affine_fit(&panels, Design::Meta, LossMode::Averaged, 0).unwrap();
    let mut slope_sum = 0.0;
    for panel in &panels {
        let a = assign_query(
            &panel.prices,
            &mut task_rng(0, StreamDomain::QueryAssignment, panel.task_id),
        )
        .unwrap();
        let info = build_info_set(panel, Design::Meta, &a).unwrap();
        slope_sum += model.predict(&info).unwrap().theta1;
    }
    let mean_slope = slope_sum / panels.len() as f64;
    assert!(
        (mean_slope - (-1.0)).abs() > 0.2,
        "META slope mean {mean_slope} should be far from -1"
    );
}

/// A trained masked-design MLP lands near the posterior oracle at a probe
/// input on the scale the loss controls: its demand prediction at the
/// masked query prices. (The coefficient split itself is governed by the
/// tiny-gap eigenvalue and needs ~1e5 tasks even for the exact ERM — see
/// the closed-form convergence test above for that regime.)
#[test]
fn trained_mlp_tracks_the_posterior_at_a_probe_point() {
    let gen_config = GenConfig::near_optimal(4000, 2, 77);
    let panels = generate(&gen_config).unwrap();
    let config = TrainConfig {
        learning_rate: 3e-3,
        max_epochs: 400,
        patience: 60,
        seed: 5,
        ..TrainConfig::default()
    };
    let dim = info_design::feature_len(config.design, 2, 0);
    let trained = train(MlpModel::new(dim, 32, 2, config.seed), &panels, &config).unwrap();
    let oracle = SignFlipOracle::from_config(&gen_config).unwrap();

    let probe = TaskPanel::new(0, vec![], vec![5.0, 5.1], vec![0.0, 0.0]).unwrap();
    let a = assign_query(
        &probe.prices,
        &mut task_rng(0, StreamDomain::QueryAssignment, 0),
    )
    .unwrap();
    let info = build_info_set(&probe, Design::Dcmoml, &a).unwrap();
    let pred = trained.predict_params(&info).unwrap();
    let star = oracle.posterior_mean_given_prices(&probe.prices);
    for &p in &probe.prices {
        let d_hat = pred.theta0 + p * pred.theta1;
        let d_star = star.theta0 + p * star.theta1;
        assert!(
            (d_hat - d_star).abs() < 0.1,
            "demand at {p}: {d_hat} vs oracle {d_star}"
        );
    }
    assert!(pred.theta1 < 0.0, "trained slope should be negative");
}

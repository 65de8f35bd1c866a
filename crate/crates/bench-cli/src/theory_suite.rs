use demand_core::{generate, task_rng, DemandParams, GenConfig, StreamDomain};
use info_design::{assign_query, supervision_targets, Design, LossMode, MaskedInfoSet};
use meta_learners::symmetric_linear_fit;
use rand::Rng;
use theory_checks::{
    dcml_shift_demo, dcmoml_shift_demo, excess_risk_check, lambda_min_and_bound, q_matrix,
    CheckResult, SignFlipOracle,
};

/// Run every theory verification with its documented tolerance. All
/// numbers are deterministic (fixed streams), so the suite either passes
/// forever or fails forever on a given build.
pub fn run_theory_suite() -> Vec<CheckResult> {
    let mut out = Vec::new();

    // Query second-moment matrix entries and invariants at (0, 2).
    let q = q_matrix(0.0, 2.0);
    out.push(CheckResult::abs_diff("q-matrix determinant at (0,2)", q.det(), 1.0, 1e-15));
    out.push(CheckResult::abs_diff("q-matrix trace at (0,2)", q.trace(), 3.0, 1e-15));
    out.push(CheckResult::abs_diff(
        "query-price variance equals quarter gap squared at (1,2)",
        q_matrix(1.0, 2.0).query_price_variance(),
        0.25,
        0.0,
    ));

    // Closed-form smallest eigenvalue and the price-gap bound.
    let (lambda, bound) = lambda_min_and_bound(&q);
    out.push(CheckResult::abs_diff(
        "lambda_min closed form at (0,2)",
        lambda,
        0.5 * (3.0 - 5.0_f64.sqrt()),
        1e-12,
    ));
    out.push(CheckResult::abs_diff("gap bound at (0,2)", bound, 1.0 / 3.0, 1e-15));

    // Exhaustive random sweep of lambda_min >= bound.
    let mut rng = task_rng(20_000, StreamDomain::Custom(7), 0);
    let mut violations = 0u64;
    for _ in 0..100_000 {
        let p_a = rng.gen_range(-3.0..3.0);
        let p_b = rng.gen_range(-3.0..3.0);
        let qq = q_matrix(p_a, p_b);
        let (l, b) = lambda_min_and_bound(&qq);
        if l < b - 8.0 * f64::EPSILON * (1.0 + qq.trace()) {
            violations += 1;
        }
    }
    out.push(CheckResult::abs_diff(
        "eigenvalue bound violations over 1e5 price pairs",
        violations as f64,
        0.0,
        0.0,
    ));

    // Excess-risk identity, exact on a noise-free world.
    let mut noiseless = GenConfig::manager(2000, 2, 0.1, 61);
    noiseless.demand_noise_cv = 0.0;
    let panels = generate(&noiseless).unwrap();
    let truths: std::collections::HashMap<u64, DemandParams> = panels
        .iter()
        .map(|p| (p.task_id, p.true_params.unwrap()))
        .collect();
    let price_key: std::collections::HashMap<u64, Vec<f64>> = panels
        .iter()
        .map(|p| (p.task_id, p.prices.clone()))
        .collect();
    let lookup = move |info: &MaskedInfoSet| -> DemandParams {
        let id = price_key
            .iter()
            .find(|(_, prices)| prices.as_slice() == info.prices.as_slice())
            .map(|(id, _)| *id)
            .expect("price path identifies the task");
        truths[&id]
    };
    let offset_pred = {
        let lookup = lookup.clone();
        move |info: &MaskedInfoSet| {
            let t = lookup(info);
            DemandParams::new(t.theta0 + 0.25, t.theta1 - 0.15)
        }
    };
    let exact = excess_risk_check(&panels, offset_pred, lookup.clone(), LossMode::Averaged, 0)
        .unwrap();
    out.push(CheckResult::abs_diff(
        "excess-risk identity, noise-free sample level",
        exact.lhs,
        exact.rhs,
        1e-10 * (1.0 + exact.lhs.abs()),
    ));

    // Excess-risk identity, Monte Carlo on the sign-flip world with a
    // fitted predictor against the posterior oracle.
    let train_config = GenConfig::near_optimal(2000, 2, 7);
    let train_panels = generate(&train_config).unwrap();
    let model = symmetric_linear_fit(&train_panels, LossMode::Averaged, 0).unwrap();
    let eval_config = GenConfig::near_optimal(100_000, 2, 8);
    let eval_panels = generate(&eval_config).unwrap();
    let oracle = SignFlipOracle::from_config(&eval_config).unwrap();
    let mc = excess_risk_check(
        &eval_panels,
        move |info| model.predict(info.prices[0], info.prices[1]),
        move |info| oracle.posterior_mean_given_prices(&info.prices),
        LossMode::Sampled,
        99,
    )
    .unwrap();
    out.push(CheckResult::abs_diff(
        "excess-risk identity, sign-flip Monte Carlo (3 SE)",
        mc.lhs,
        mc.rhs,
        3.0 * mc.combined_se(),
    ));

    // Orthogonal-shift invariance of the query-price-revealing loss for
    // three phi families, and strict rejection under the masked loss.
    let shift_panels = generate(&GenConfig::manager(2000, 2, 0.1, 71)).unwrap();
    let predictor = |_: &MaskedInfoSet| DemandParams::new(0.95, -1.05);
    let phis: [(&str, Box<dyn Fn(&MaskedInfoSet) -> f64>); 3] = [
        ("phi = 1", Box::new(|_| 1.0)),
        ("phi = p1^2", Box::new(|info| info.prices[0] * info.prices[0])),
        (
            "phi = f(visible demand)",
            Box::new(|info| info.visible_demands.first().map_or(0.7, |&(_, d)| d.cos() + 1.5)),
        ),
    ];
    for (name, phi) in &phis {
        let losses = dcml_shift_demo(&shift_panels, predictor, phi, 5).unwrap();
        out.push(CheckResult::rel_diff(
            format!("query-revealing loss invariant under shift, {name}"),
            losses.original,
            losses.shifted,
            1e-12,
        ));
    }
    let mut noiseless_shift = GenConfig::manager(2000, 2, 0.1, 72);
    noiseless_shift.demand_noise_cv = 0.0;
    let ns_panels = generate(&noiseless_shift).unwrap();
    let truths2: std::collections::HashMap<String, DemandParams> = ns_panels
        .iter()
        .map(|p| (format!("{:?}", p.prices), p.true_params.unwrap()))
        .collect();
    let exact_pred = move |info: &MaskedInfoSet| truths2[&format!("{:?}", info.prices)];
    let shift = dcmoml_shift_demo(&ns_panels, exact_pred, |_| 1.0, 5).unwrap();
    out.push(CheckResult::at_least(
        "masked loss strictly increases under the shift",
        shift.shifted,
        shift.original + 1e-8,
        0.0,
    ));

    // Query randomization is a fair coin.
    let prices = [1.0, 2.0];
    let mut hits = 0u64;
    let n_draws = 100_000u64;
    for task in 0..n_draws {
        let a = assign_query(&prices, &mut task_rng(3, StreamDomain::QueryAssignment, task))
            .unwrap();
        if a.k_query == a.k_star {
            hits += 1;
        }
    }
    out.push(CheckResult::abs_diff(
        "query randomization law P(query at k*) = 1/2",
        hits as f64 / n_draws as f64,
        0.5,
        0.01,
    ));

    // Averaged loss equals the sampled loss in expectation.
    let eq_panels = generate(&GenConfig::manager(400, 2, 0.1, 21)).unwrap();
    let theta = DemandParams::new(0.9, -0.8);
    let mut averaged = 0.0;
    for panel in &eq_panels {
        let a = assign_query(
            &panel.prices,
            &mut task_rng(0, StreamDomain::QueryAssignment, panel.task_id),
        )
        .unwrap();
        for t in supervision_targets(panel, Design::Dcmoml, &a, LossMode::Averaged) {
            let r = t.demand - (theta.theta0 + t.price * theta.theta1);
            averaged += t.weight * r * r;
        }
    }
    averaged /= eq_panels.len() as f64;
    let redraws = 400u64;
    let mut sampled = Vec::new();
    for rep in 0..redraws {
        let mut total = 0.0;
        for panel in &eq_panels {
            let a = assign_query(
                &panel.prices,
                &mut task_rng(1000 + rep, StreamDomain::QueryAssignment, panel.task_id),
            )
            .unwrap();
            for t in supervision_targets(panel, Design::Dcmoml, &a, LossMode::Sampled) {
                let r = t.demand - (theta.theta0 + t.price * theta.theta1);
                total += t.weight * r * r;
            }
        }
        sampled.push(total / eq_panels.len() as f64);
    }
    let mean = sampled.iter().sum::<f64>() / sampled.len() as f64;
    let var = sampled.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
        / (sampled.len() as f64 - 1.0);
    let se = (var / sampled.len() as f64).sqrt();
    out.push(CheckResult::abs_diff(
        "sampled loss matches averaged loss in expectation (3 SE)",
        mean,
        averaged,
        3.0 * se,
    ));

    out
}

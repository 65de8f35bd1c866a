//! Verification of the closed forms against brute-force oracles:
//! quadrature for the Gaussian posterior, an exhaustive random sweep for
//! the eigenvalue bound, and the orthogonal-shift loss equalities.

use demand_core::{generate, DemandParams, GenConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use theory_checks::{
    dcml_shift_demo, dcmoml_shift_demo, lambda_min_and_bound, q_matrix, SignFlipOracle,
};

/// Brute-force conditional mean by dense quadrature over the intercept:
/// E[theta0 | p] = integral of theta0 * prior(theta0) * lik(p | theta0)
/// over a wide grid, normalized. Independent of the closed-form path.
fn quadrature_posterior(oracle: &SignFlipOracle, prices: &[f64]) -> f64 {
    let lo = oracle.theta0_mean - 10.0 * oracle.theta0_sd;
    let hi = oracle.theta0_mean + 10.0 * oracle.theta0_sd;
    let n = 40_001;
    let h = (hi - lo) / (n - 1) as f64;
    let a = -1.0 / (2.0 * oracle.theta1);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        let t0 = lo + h * i as f64;
        let zp = (t0 - oracle.theta0_mean) / oracle.theta0_sd;
        let mut log_w = -0.5 * zp * zp;
        for &p in prices {
            let z = (p - a * t0) / oracle.price_sd;
            log_w += -0.5 * z * z;
        }
        // Simpson weights: 1, 4, 2, 4, ..., 4, 1.
        let simpson = if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let w = simpson * log_w.exp();
        num += w * t0;
        den += w;
    }
    num / den
}

#[test]
fn closed_form_posterior_matches_quadrature() {
    let oracle = SignFlipOracle::from_config(&GenConfig::near_optimal(1, 2, 0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut max_err: f64 = 0.0;
    for _ in 0..20 {
        let p1 = rng.gen_range(4.0..6.0);
        let p2 = rng.gen_range(4.0..6.0);
        let closed = oracle.posterior_mean_given_prices(&[p1, p2]).theta0;
        let brute = quadrature_posterior(&oracle, &[p1, p2]);
        max_err = max_err.max((closed - brute).abs());
    }
    assert!(max_err < 1e-6, "max |closed - quadrature| = {max_err}");
}

/// The support-pair oracle agrees with quadrature as well (the demand
/// dimension enters the likelihood).
#[test]
fn support_posterior_matches_quadrature() {
    let oracle = SignFlipOracle::from_config(&GenConfig::near_optimal(1, 2, 0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = -1.0 / (2.0 * oracle.theta1);
    for _ in 0..10 {
        let p1: f64 = rng.gen_range(4.0..6.0);
        let d1: f64 = rng.gen_range(3.0..7.0);
        let closed = oracle.posterior_mean_given_support(p1, d1).theta0;

        let lo = oracle.theta0_mean - 10.0;
        let n = 40_001;
        let h = 20.0 / (n - 1) as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            let t0 = lo + h * i as f64;
            let zp = (t0 - oracle.theta0_mean) / oracle.theta0_sd;
            let zprice = (p1 - a * t0) / oracle.price_sd;
            let zd = (d1 - (t0 + oracle.theta1 * p1)) / oracle.demand_sd;
            let simpson = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let w = simpson * (-0.5 * (zp * zp + zprice * zprice + zd * zd)).exp();
            num += w * t0;
            den += w;
        }
        let brute = num / den;
        assert!(
            (closed - brute).abs() < 1e-6,
            "support posterior {closed} vs quadrature {brute}"
        );
    }
}

/// Exhaustive random sweep: the closed-form smallest eigenvalue never
/// falls below the price-gap bound. The slack term is a few ulps of the
/// trace, covering the determinant cancellation at tiny gaps.
#[test]
fn eigenvalue_bound_holds_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut violations = 0u32;
    let mut strict = 0u32;
    for _ in 0..100_000 {
        let p_a = rng.gen_range(-3.0..3.0);
        let p_b = rng.gen_range(-3.0..3.0);
        let q = q_matrix(p_a, p_b);
        let (lambda, bound) = lambda_min_and_bound(&q);
        let slack = 8.0 * f64::EPSILON * (1.0 + q.trace());
        if lambda < bound - slack {
            violations += 1;
        }
        if q.delta > 1e-2 && lambda > bound {
            strict += 1;
        }
    }
    assert_eq!(violations, 0);
    assert!(strict > 90_000, "strict inequality on most draws: {strict}");
}

#[test]
fn determinant_equals_quarter_gap_squared() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10_000 {
        let p_a: f64 = rng.gen_range(-10.0..10.0);
        let p_b: f64 = rng.gen_range(-10.0..10.0);
        let q = q_matrix(p_a, p_b);
        let analytic = 0.25 * q.delta * q.delta;
        let tol = 8.0 * f64::EPSILON * (1.0 + q.p_bar * q.p_bar + analytic);
        assert!(
            (q.det() - analytic).abs() <= tol,
            "det {} vs delta^2/4 {analytic} at ({p_a}, {p_b})",
            q.det()
        );
    }
}

fn truth_lookup(
    panels: &[demand_core::TaskPanel],
) -> impl Fn(&info_design::MaskedInfoSet) -> DemandParams + '_ {
    move |info| {
        panels
            .iter()
            .find(|p| p.prices == info.prices)
            .and_then(|p| p.true_params)
            .unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, failure_persistence: None, ..ProptestConfig::default() })]

    /// The query-price-revealing loss is exactly invariant to the
    /// orthogonal shift for a whole family of input-dependent phi:
    /// constants, squares of the first price and demand-dependent forms.
    #[test]
    fn dcml_loss_is_shift_invariant(seed in 0u64..500, family in 0usize..3) {
        let panels = generate(&GenConfig::manager(300, 2, 0.1, seed)).unwrap();
        let predict = |_: &info_design::MaskedInfoSet| DemandParams::new(0.9, -1.1);
        let phi = move |info: &info_design::MaskedInfoSet| match family {
            0 => 1.0,
            1 => info.prices[0] * info.prices[0],
            _ => info.visible_demands.first().map_or(0.5, |&(_, d)| d.sin() + 2.0),
        };
        let out = dcml_shift_demo(&panels, predict, phi, seed).unwrap();
        let rel = (out.original - out.shifted).abs() / out.original.abs().max(1e-300);
        prop_assert!(rel < 1e-12, "relative change {rel}");
    }

    /// The masked objective rejects the same shift: with the exact truth
    /// as predictor on noise-free data, any nonzero phi strictly
    /// increases the averaged loss on every run with a positive gap.
    #[test]
    fn dcmoml_loss_strictly_rejects_the_shift(seed in 0u64..200, phi_scale in 0.1f64..3.0) {
        let mut config = GenConfig::manager(200, 2, 0.1, seed);
        config.demand_noise_cv = 0.0;
        let panels = generate(&config).unwrap();
        let predict = truth_lookup(&panels);
        let out = dcmoml_shift_demo(&panels, predict, |_| phi_scale, seed).unwrap();
        prop_assert!(out.shifted > out.original);
        prop_assert!(out.shifted > 1e-8);
    }
}

use chrono::NaiveDate;
use demand_core::{task_rng, StreamDomain, TaskPanel};
use info_design::{Design, LossMode, SupervisionTarget};
use meta_learners::{prepare_examples, train_on_examples, MlpModel, TaskExample};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use retail_pipeline::{
    exposure_weighted_rmse, retail_task_to_panel, RetailTask, TransactionRecord,
    PRICE_TICKS_PER_UNIT,
};
use serde::{Deserialize, Serialize};

use crate::config::{Method, TrainOverrides};

/// Synthetic transaction log mimicking the gift-retail regime: posted
/// prices cluster tightly around each product's revenue optimum (which
/// the manager knows, so price levels are confounded with both latent
/// coefficients), within-task price moves are small, and daily quantities
/// are extremely noisy. Used by the smoke benchmark and as a runnable
/// stand-in for the external dataset, which ships separately.
pub fn synthetic_transactions(n_products: usize, seed: u64) -> Vec<TransactionRecord> {
    const COLORS: [&str; 6] = ["RED", "BLUE", "GREEN", "IVORY", "BLACK", "PINK"];
    const ITEMS: [&str; 6] = ["LANTERN", "MUG", "COASTER", "BUNTING", "CANDLE", "TRAY"];
    const PRICE_SPREAD: f64 = 0.12;
    const DAILY_NOISE_CV: f64 = 1.2;
    const SIGNAL_CV: f64 = 0.03;
    let mut records = Vec::new();
    let mut invoice = 10_000u64;
    for i in 0..n_products as u64 {
        let mut rng = task_rng(seed, StreamDomain::Custom(2), i);
        let std_normal = Normal::new(0.0, 1.0).unwrap();
        let z0: f64 = std_normal.sample(&mut rng);
        let z1: f64 = std_normal.sample(&mut rng);
        let theta0 = (40.0 + 10.0 * z0).max(10.0);
        let theta1 = -(8.0 + 2.0 * z1).max(2.0);
        let p_star = -theta0 / (2.0 * theta1);
        let zs: f64 = std_normal.sample(&mut rng);
        let signal = p_star * (1.0 + SIGNAL_CV * zs);

        // Three exact-cent price levels around the manager's signal, in a
        // random block order.
        let mut multipliers = [1.0 - PRICE_SPREAD, 1.0, 1.0 + PRICE_SPREAD];
        for j in (1..multipliers.len()).rev() {
            multipliers.swap(j, rng.gen_range(0..=j));
        }
        let product_id = format!("SYN{i:05}");
        let description = format!(
            "{} {} PRODUCT {}",
            COLORS[(i % 6) as usize],
            ITEMS[((i / 6) % 6) as usize],
            i
        );
        let mut day = NaiveDate::from_ymd_opt(2011, 1, 1).unwrap();
        for m in multipliers {
            let cents = ((signal * m) * 100.0).round().max(1.0) as i64;
            let price = cents as f64 / 100.0;
            let block_days = rng.gen_range(3..8);
            for _ in 0..block_days {
                let mean = (theta0 + theta1 * price).max(0.5);
                let noise = Normal::new(0.0, DAILY_NOISE_CV * mean).unwrap().sample(&mut rng);
                let qty = (mean + noise).round().max(1.0) as i64;
                invoice += 1;
                records.push(TransactionRecord {
                    invoice_id: invoice.to_string(),
                    stock_code: product_id.clone(),
                    description: description.clone(),
                    quantity: qty,
                    invoice_timestamp: day.and_hms_opt(10, 0, 0).unwrap(),
                    unit_price_ticks: cents * (PRICE_TICKS_PER_UNIT / 100),
                    customer_id: Some(format!("9{:05}", i % 1000)),
                    country: "United Kingdom".to_string(),
                });
                day = day.succ_opt().unwrap();
            }
        }
    }
    records
}

/// Training hyperparameters for the small retail task sets: smaller
/// batches keep the Adam step count useful at a few hundred tasks.
pub fn retail_overrides() -> TrainOverrides {
    TrainOverrides {
        hidden_width: 64,
        batch_size: 64,
        learning_rate: 1e-2,
        max_epochs: 800,
        patience: 100,
        ..TrainOverrides::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetailBenchRow {
    pub method: String,
    pub rmse_mean: f64,
    pub rmse_hw: f64,
    pub n_seeds: usize,
}

fn panels_of(tasks: &[RetailTask]) -> Vec<TaskPanel> {
    tasks
        .iter()
        .enumerate()
        .map(|(i, t)| {
            // Training panel: the two train points only; the holdout stays
            // out of every information set.
            let full = retail_task_to_panel(t, i as u64);
            TaskPanel {
                task_id: full.task_id,
                context: full.context.clone(),
                prices: full.prices[..2].to_vec(),
                demands: full.demands[..2].to_vec(),
                exposures: full.exposures.as_ref().map(|e| e[..2].to_vec()),
                true_params: None,
            }
        })
        .collect()
}

/// Role-swapped supervision for the symmetrized support/query baseline:
/// each product contributes one example per (support, query) role, with
/// exposure weights normalized within the product.
fn meta_examples(panels: &[TaskPanel], symmetrized: bool) -> Vec<TaskExample> {
    let mut out = Vec::new();
    for panel in panels {
        let e = panel.exposures.as_ref().expect("retail panels carry exposures");
        let total = (e[0] + e[1]) as f64;
        let roles: &[(usize, usize)] = if symmetrized { &[(0, 1), (1, 0)] } else { &[(0, 1)] };
        for &(support, query) in roles {
            let mut features = panel.context.clone();
            features.push(panel.prices[support]);
            features.push(panel.demands[support]);
            let weight = if symmetrized {
                e[query] as f64 / total
            } else {
                1.0
            };
            out.push(TaskExample {
                task_id: panel.task_id,
                features,
                targets: vec![SupervisionTarget {
                    price: panel.prices[query],
                    demand: panel.demands[query],
                    weight,
                }],
            });
        }
    }
    out
}

/// Train one transfer method on retail tasks and score the exposure-
/// weighted RMSE of its demand prediction at each product's held-out
/// price point.
pub fn retail_method_rmse(
    method: Method,
    tasks: &[RetailTask],
    overrides: &TrainOverrides,
    seed: u64,
) -> Result<f64, String> {
    let panels = panels_of(tasks);
    let design = method.design().ok_or_else(|| format!("{method} is not a transfer method"))?;
    let examples = match method {
        Method::Dcmoml => {
            let (ex, _) = prepare_examples(&panels, Design::Dcmoml, LossMode::Averaged, seed)
                .map_err(|e| e.to_string())?;
            ex
        }
        Method::Meta => meta_examples(&panels, true),
        Method::MetaNa => meta_examples(&panels, false),
        other => return Err(format!("{other} not supported on retail tasks")),
    };
    let input_dim = examples[0].features.len();
    let config = overrides.to_train_config(design, seed);
    let model = MlpModel::new(input_dim, overrides.hidden_width, overrides.hidden_depth, seed);
    let trained = train_on_examples(model, &examples, &config).map_err(|e| e.to_string())?;

    // Predict each product's coefficients; the symmetrized baseline
    // averages its two role predictions.
    let mut preds = Vec::with_capacity(tasks.len());
    let mut actuals = Vec::with_capacity(tasks.len());
    let mut weights = Vec::with_capacity(tasks.len());
    let by_task: std::collections::HashMap<u64, Vec<&TaskExample>> = {
        let mut m: std::collections::HashMap<u64, Vec<&TaskExample>> = Default::default();
        for ex in &examples {
            m.entry(ex.task_id).or_default().push(ex);
        }
        m
    };
    for (i, task) in tasks.iter().enumerate() {
        let exs = &by_task[&(i as u64)];
        let (mut t0, mut t1) = (0.0, 0.0);
        for ex in exs {
            let p = trained.predict_features(&ex.features).map_err(|e| e.to_string())?;
            t0 += p.theta0;
            t1 += p.theta1;
        }
        let n = exs.len() as f64;
        let (t0, t1) = (t0 / n, t1 / n);
        preds.push(t0 + t1 * task.holdout_point.0);
        actuals.push(task.holdout_point.1);
        weights.push(task.holdout_point.2 as f64);
    }
    exposure_weighted_rmse(&preds, &actuals, &weights).map_err(|e| e.to_string())
}

/// The retail smoke benchmark: masked-design training versus the
/// symmetrized and temporal support/query baselines over several seeds.
pub fn retail_smoke_bench(
    tasks: &[RetailTask],
    methods: &[Method],
    overrides: &TrainOverrides,
    seeds: &[u64],
) -> Result<Vec<RetailBenchRow>, String> {
    let mut rows = Vec::new();
    for &method in methods {
        let mut rmses = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            rmses.push(retail_method_rmse(method, tasks, overrides, seed)?);
        }
        let n = rmses.len() as f64;
        let mean = rmses.iter().sum::<f64>() / n;
        let hw = if rmses.len() > 1 {
            let var = rmses.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
            1.96 * (var / n).sqrt()
        } else {
            0.0
        };
        rows.push(RetailBenchRow {
            method: method.label().to_string(),
            rmse_mean: mean,
            rmse_hw: hw,
            n_seeds: rmses.len(),
        });
    }
    Ok(rows)
}

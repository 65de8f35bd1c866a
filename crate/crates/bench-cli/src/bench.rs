use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use demand_core::{generate, GenConfig};

use crate::config::{ExperimentConfig, Method};
use crate::methods::fit_predict;

/// Per-cell error metrics (one method on one generated world).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics {
    pub slope_mse: f64,
    pub intercept_mse: f64,
    /// Tasks the method produced a prediction for.
    pub n_predicted: usize,
    pub wall_secs: f64,
}

/// Outcome of one (method, sigma_c, seed) cell; failures are recorded,
/// not fatal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub method: Method,
    pub sigma_c: f64,
    pub seed: u64,
    pub result: Result<CellMetrics, String>,
}

/// One row of the aggregated report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub sigma_c: f64,
    pub slope_mse: f64,
    /// Half-width of the 95% interval across seeds (1.96 SE).
    pub slope_hw: f64,
    pub intercept_mse: f64,
    pub intercept_hw: f64,
    pub n_seeds: usize,
}

/// Per-task predictions retained for the first seed of each
/// (method, sigma_c) pair, feeding the histogram plot data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredRow {
    pub method: String,
    pub sigma_c: f64,
    pub seed: u64,
    pub task_id: u64,
    pub theta0_hat: f64,
    pub theta1_hat: f64,
    pub theta0_true: f64,
    pub theta1_true: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<ReportRow>,
    pub cells: Vec<CellOutcome>,
    pub predictions: Vec<PredRow>,
    pub total_wall_secs: f64,
}

fn mean_and_hw(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

/// Run the full (method x sigma_c x seed) grid.
///
/// Cells run in a work pool but are reduced in fixed cell order, and each
/// cell derives all randomness from its own seed, so parallel and serial
/// execution produce identical reports.
pub fn run_benchmark(config: &ExperimentConfig) -> Result<BenchReport, String> {
    config.validate()?;
    let start = Instant::now();

    // One generated world per (sigma_c, seed), shared by all methods.
    struct Cell {
        method: Method,
        sigma_idx: usize,
        seed: u64,
        keep_predictions: bool,
    }
    let mut cells = Vec::new();
    for &method in &config.methods {
        for (sigma_idx, _) in config.sigma_grid.iter().enumerate() {
            for (seed_idx, &seed) in config.seeds.iter().enumerate() {
                cells.push(Cell {
                    method,
                    sigma_idx,
                    seed,
                    keep_predictions: seed_idx == 0,
                });
            }
        }
    }

    let outcomes: Vec<(CellOutcome, Vec<PredRow>)> = cells
        .par_iter()
        .map(|cell| {
            let sigma_c = config.sigma_grid[cell.sigma_idx];
            let cell_start = Instant::now();
            let gen_config =
                GenConfig::manager(config.n_tasks, config.k_obs, sigma_c, cell.seed);
            let run = || -> Result<(CellMetrics, Vec<PredRow>), String> {
                let panels = generate(&gen_config).map_err(|e| e.to_string())?;
                let preds = fit_predict(cell.method, &panels, &config.train, cell.seed)?;
                if preds.is_empty() {
                    return Err("method produced no predictions".into());
                }
                let truth: std::collections::HashMap<u64, demand_core::DemandParams> = panels
                    .iter()
                    .map(|p| (p.task_id, p.true_params.expect("synthetic panels")))
                    .collect();
                let mut slope_sq = 0.0;
                let mut intercept_sq = 0.0;
                let mut pred_rows = Vec::new();
                for &(task_id, hat) in &preds {
                    let t = truth[&task_id];
                    slope_sq += (hat.theta1 - t.theta1) * (hat.theta1 - t.theta1);
                    intercept_sq += (hat.theta0 - t.theta0) * (hat.theta0 - t.theta0);
                    if cell.keep_predictions {
                        pred_rows.push(PredRow {
                            method: cell.method.label().to_string(),
                            sigma_c,
                            seed: cell.seed,
                            task_id,
                            theta0_hat: hat.theta0,
                            theta1_hat: hat.theta1,
                            theta0_true: t.theta0,
                            theta1_true: t.theta1,
                        });
                    }
                }
                let n = preds.len();
                Ok((
                    CellMetrics {
                        slope_mse: slope_sq / n as f64,
                        intercept_mse: intercept_sq / n as f64,
                        n_predicted: n,
                        wall_secs: cell_start.elapsed().as_secs_f64(),
                    },
                    pred_rows,
                ))
            };
            match run() {
                Ok((metrics, rows)) => (
                    CellOutcome {
                        method: cell.method,
                        sigma_c,
                        seed: cell.seed,
                        result: Ok(metrics),
                    },
                    rows,
                ),
                Err(e) => (
                    CellOutcome {
                        method: cell.method,
                        sigma_c,
                        seed: cell.seed,
                        result: Err(e),
                    },
                    Vec::new(),
                ),
            }
        })
        .collect();

    let mut report_cells = Vec::with_capacity(outcomes.len());
    let mut predictions = Vec::new();
    for (outcome, rows) in outcomes {
        report_cells.push(outcome);
        predictions.extend(rows);
    }

    let mut rows = Vec::new();
    for &method in &config.methods {
        for &sigma_c in &config.sigma_grid {
            let slice: Vec<&CellMetrics> = report_cells
                .iter()
                .filter(|c| c.method == method && c.sigma_c == sigma_c)
                .filter_map(|c| c.result.as_ref().ok())
                .collect();
            if slice.is_empty() {
                continue;
            }
            let slopes: Vec<f64> = slice.iter().map(|m| m.slope_mse).collect();
            let intercepts: Vec<f64> = slice.iter().map(|m| m.intercept_mse).collect();
            let (slope_mse, slope_hw) = mean_and_hw(&slopes);
            let (intercept_mse, intercept_hw) = mean_and_hw(&intercepts);
            rows.push(ReportRow {
                method: method.label().to_string(),
                sigma_c,
                slope_mse,
                slope_hw,
                intercept_mse,
                intercept_hw,
                n_seeds: slice.len(),
            });
        }
    }

    Ok(BenchReport {
        rows,
        cells: report_cells,
        predictions,
        total_wall_secs: start.elapsed().as_secs_f64(),
    })
}

impl BenchReport {
    pub fn row(&self, method: Method, sigma_c: f64) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.method == method.label() && r.sigma_c == sigma_c)
    }
}

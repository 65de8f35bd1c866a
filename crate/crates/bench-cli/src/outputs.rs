use std::fs;
use std::io::Write;
use std::path::Path;

use crate::bench::{BenchReport, ReportRow};

/// Stability contract: the exact results.csv header.
pub const RESULTS_HEADER: &str =
    "method,sigma_c,slope_mse,slope_hw,intercept_mse,intercept_hw,n_seeds";

fn fmt(v: f64) -> String {
    format!("{v}")
}

pub fn results_csv(report: &BenchReport) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.method,
            fmt(r.sigma_c),
            fmt(r.slope_mse),
            fmt(r.slope_hw),
            fmt(r.intercept_mse),
            fmt(r.intercept_hw),
            r.n_seeds
        ));
    }
    out
}

pub fn parse_results_csv(text: &str) -> Result<Vec<ReportRow>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    if header != RESULTS_HEADER {
        return Err(format!("unexpected header: {header}"));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(format!("row {}: expected 7 fields", i + 2));
        }
        let num = |j: usize| -> Result<f64, String> {
            fields[j]
                .parse()
                .map_err(|e| format!("row {} field {j}: {e}", i + 2))
        };
        rows.push(ReportRow {
            method: fields[0].to_string(),
            sigma_c: num(1)?,
            slope_mse: num(2)?,
            slope_hw: num(3)?,
            intercept_mse: num(4)?,
            intercept_hw: num(5)?,
            n_seeds: fields[6]
                .parse()
                .map_err(|e| format!("row {}: n_seeds: {e}", i + 2))?,
        });
    }
    Ok(rows)
}

/// Histogram series for the coefficient-distribution plots.
pub fn plot_data_csv(report: &BenchReport, n_bins: usize) -> String {
    let mut out = String::from("method,sigma_c,parameter,bin_lo,bin_hi,count\n");
    // Group prediction rows by (method, sigma_c).
    let mut keys: Vec<(String, f64)> = report
        .predictions
        .iter()
        .map(|p| (p.method.clone(), p.sigma_c))
        .collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    keys.dedup();
    for (method, sigma_c) in keys {
        for (param, values) in [
            (
                "intercept",
                report
                    .predictions
                    .iter()
                    .filter(|p| p.method == method && p.sigma_c == sigma_c)
                    .map(|p| p.theta0_hat)
                    .collect::<Vec<f64>>(),
            ),
            (
                "slope",
                report
                    .predictions
                    .iter()
                    .filter(|p| p.method == method && p.sigma_c == sigma_c)
                    .map(|p| p.theta1_hat)
                    .collect::<Vec<f64>>(),
            ),
        ] {
            if values.is_empty() {
                continue;
            }
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let width = if hi > lo { (hi - lo) / n_bins as f64 } else { 1.0 };
            let mut counts = vec![0usize; n_bins];
            for &v in &values {
                let mut b = ((v - lo) / width) as usize;
                if b >= n_bins {
                    b = n_bins - 1;
                }
                counts[b] += 1;
            }
            for (b, &count) in counts.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    method,
                    fmt(sigma_c),
                    param,
                    fmt(lo + width * b as f64),
                    fmt(lo + width * (b + 1) as f64),
                    count
                ));
            }
        }
    }
    out
}

pub fn predictions_csv(report: &BenchReport) -> String {
    let mut out = String::from(
        "method,sigma_c,seed,task_id,theta0_hat,theta1_hat,theta0_true,theta1_true\n",
    );
    for p in &report.predictions {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            p.method,
            fmt(p.sigma_c),
            p.seed,
            p.task_id,
            fmt(p.theta0_hat),
            fmt(p.theta1_hat),
            fmt(p.theta0_true),
            fmt(p.theta1_true)
        ));
    }
    out
}

/// Write results.csv, predictions.csv and plot_data.csv into `dir`.
pub fn emit_outputs(report: &BenchReport, dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::File::create(dir.join("results.csv"))?.write_all(results_csv(report).as_bytes())?;
    fs::File::create(dir.join("predictions.csv"))?
        .write_all(predictions_csv(report).as_bytes())?;
    fs::File::create(dir.join("plot_data.csv"))?
        .write_all(plot_data_csv(report, 40).as_bytes())?;
    Ok(())
}

use std::io::{BufRead, BufReader, Read, Write};

use thiserror::Error;

use crate::{DemandError, DemandParams, TaskPanel};

#[derive(Debug, Error)]
pub enum PanelIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("bad header: {0}")]
    BadHeader(String),
    #[error("row {row}: {reason}")]
    BadRow { row: usize, reason: String },
    #[error("panel {task_id}: {source}")]
    BadPanel {
        task_id: u64,
        source: DemandError,
    },
}

const FIXED_COLUMNS: [&str; 7] = [
    "task_id",
    "k",
    "price",
    "demand",
    "exposure",
    "true_theta0",
    "true_theta1",
];

/// One row per observation: `task_id,k,price,demand,exposure,true_theta0,
/// true_theta1,z_0..z_{d-1}`. `k` is the 0-based observation index.
/// Optional fields are written as empty strings. Floats use the shortest
/// round-trip decimal form, so parsing back reproduces the exact bits.
pub fn write_panels_csv<W: Write>(panels: &[TaskPanel], writer: W) -> Result<(), PanelIoError> {
    let context_dim = panels.first().map_or(0, |p| p.context.len());
    let mut w = csv::Writer::from_writer(writer);

    let mut header: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((0..context_dim).map(|j| format!("z_{j}")));
    w.write_record(&header)?;

    for panel in panels {
        if panel.context.len() != context_dim {
            return Err(PanelIoError::BadHeader(format!(
                "panel {} has context dim {}, expected {}",
                panel.task_id,
                panel.context.len(),
                context_dim
            )));
        }
        for k in 0..panel.len() {
            let mut record: Vec<String> = Vec::with_capacity(7 + context_dim);
            record.push(panel.task_id.to_string());
            record.push(k.to_string());
            record.push(fmt_f64(panel.prices[k]));
            record.push(fmt_f64(panel.demands[k]));
            record.push(
                panel
                    .exposures
                    .as_ref()
                    .map_or(String::new(), |e| e[k].to_string()),
            );
            record.push(
                panel
                    .true_params
                    .map_or(String::new(), |p| fmt_f64(p.theta0)),
            );
            record.push(
                panel
                    .true_params
                    .map_or(String::new(), |p| fmt_f64(p.theta1)),
            );
            record.extend(panel.context.iter().map(|&z| fmt_f64(z)));
            w.write_record(&record)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn read_panels_csv<R: Read>(reader: R) -> Result<Vec<TaskPanel>, PanelIoError> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.len() < FIXED_COLUMNS.len()
        || header.iter().take(7).ne(FIXED_COLUMNS.iter().copied())
    {
        return Err(PanelIoError::BadHeader(format!(
            "expected columns {FIXED_COLUMNS:?} followed by z_*, got {header:?}"
        )));
    }
    let context_dim = header.len() - FIXED_COLUMNS.len();

    let mut panels: Vec<TaskPanel> = Vec::new();
    for (row_idx, record) in r.records().enumerate() {
        let record = record?;
        let bad = |reason: String| PanelIoError::BadRow {
            row: row_idx + 2,
            reason,
        };
        let field = |i: usize| record.get(i).unwrap_or("");
        let task_id: u64 = field(0)
            .parse()
            .map_err(|e| bad(format!("task_id: {e}")))?;
        let price: f64 = field(2).parse().map_err(|e| bad(format!("price: {e}")))?;
        let demand: f64 = field(3).parse().map_err(|e| bad(format!("demand: {e}")))?;
        let exposure: Option<u32> = match field(4) {
            "" => None,
            s => Some(s.parse().map_err(|e| bad(format!("exposure: {e}")))?),
        };
        let true_params = match (field(5), field(6)) {
            ("", "") => None,
            (a, b) => Some(DemandParams::new(
                a.parse().map_err(|e| bad(format!("true_theta0: {e}")))?,
                b.parse().map_err(|e| bad(format!("true_theta1: {e}")))?,
            )),
        };
        let mut context = Vec::with_capacity(context_dim);
        for j in 0..context_dim {
            context.push(
                field(7 + j)
                    .parse()
                    .map_err(|e| bad(format!("z_{j}: {e}")))?,
            );
        }

        let start_new = panels.last().map_or(true, |p| p.task_id != task_id);
        if start_new {
            panels.push(TaskPanel {
                task_id,
                context,
                prices: vec![price],
                demands: vec![demand],
                exposures: exposure.map(|e| vec![e]),
                true_params,
            });
        } else {
            let panel = panels.last_mut().unwrap();
            panel.prices.push(price);
            panel.demands.push(demand);
            match (&mut panel.exposures, exposure) {
                (Some(es), Some(e)) => es.push(e),
                (None, None) => {}
                _ => {
                    return Err(bad("exposure must be present for all rows of a task or none".into()))
                }
            }
        }
    }
    for panel in &panels {
        panel.validate().map_err(|source| PanelIoError::BadPanel {
            task_id: panel.task_id,
            source,
        })?;
    }
    Ok(panels)
}

/// One panel per line as JSON.
pub fn write_panels_jsonl<W: Write>(panels: &[TaskPanel], mut writer: W) -> Result<(), PanelIoError> {
    for panel in panels {
        serde_json::to_writer(&mut writer, panel)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_panels_jsonl<R: Read>(reader: R) -> Result<Vec<TaskPanel>, PanelIoError> {
    let mut panels = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let panel: TaskPanel = serde_json::from_str(&line).map_err(|e| PanelIoError::BadRow {
            row: i + 1,
            reason: e.to_string(),
        })?;
        panel.validate().map_err(|source| PanelIoError::BadPanel {
            task_id: panel.task_id,
            source,
        })?;
        panels.push(panel);
    }
    Ok(panels)
}

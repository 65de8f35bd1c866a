use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

/// One per-task estimate row in the exchange CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub task_id: u64,
    pub method: String,
    pub theta0_hat: f64,
    pub theta1_hat: f64,
}

pub fn write_estimates_csv<W: Write>(rows: &[EstimateRow], writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_estimates_csv<R: Read>(reader: R) -> Result<Vec<EstimateRow>, csv::Error> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .collect::<Result<Vec<_>, _>>()
}

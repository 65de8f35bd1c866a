use std::io::{Read, Write};

use crate::train::TrainedMlp;

/// Serialize a trained model (layer shapes, row-major weights at full
/// double precision, standardization constants and the design tag).
pub fn save_checkpoint<W: Write>(model: &TrainedMlp, writer: W) -> Result<(), serde_json::Error> {
    serde_json::to_writer(writer, model)
}

pub fn load_checkpoint<R: Read>(reader: R) -> Result<TrainedMlp, serde_json::Error> {
    serde_json::from_reader(reader)
}

use demand_core::{task_rng, DemandParams, StreamDomain, TaskPanel};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use info_design::{
    assign_query, build_info_set, supervision_targets, Design, LossMode, MaskedInfoSet,
    QueryAssignment, SupervisionTarget,
};

use crate::mlp::{mlp_backward, mlp_forward, AdamState, MlpModel};
use crate::MetaError;

/// Training hyperparameters. The defaults are the benchmark-wide baseline;
/// experiment configs override them per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Minibatch size in tasks.
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Early-stopping patience in epochs without validation improvement.
    pub patience: usize,
    /// Fraction of tasks held out for validation, in (0, 1).
    pub validation_fraction: f64,
    pub design: Design,
    pub loss_mode: LossMode,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 256,
            max_epochs: 500,
            patience: 20,
            validation_fraction: 0.2,
            design: Design::Dcmoml,
            loss_mode: LossMode::Averaged,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), MetaError> {
        let bad = |reason: &str| MetaError::BadPanel {
            task_id: u64::MAX,
            reason: reason.to_string(),
        };
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(bad("validation_fraction must be in (0, 1)"));
        }
        if self.patience < 1 {
            return Err(bad("patience must be >= 1"));
        }
        if self.batch_size < 1 || self.max_epochs < 1 {
            return Err(bad("batch_size and max_epochs must be >= 1"));
        }
        Ok(())
    }
}

/// Per-slot affine input normalization fitted on the training split and
/// replayed at prediction time. Constant slots pass through centered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[&[f64]]) -> Self {
        let dim = rows.first().map_or(0, |r| r.len());
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for row in rows {
            for (m, v) in mean.iter_mut().zip(*row) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        let mut var = vec![0.0; dim];
        for row in rows {
            for ((s, v), m) in var.iter_mut().zip(*row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .iter()
            .map(|&s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

/// One prepared training task: flattened inputs plus supervised pairs.
#[derive(Debug, Clone)]
pub struct TaskExample {
    pub task_id: u64,
    pub features: Vec<f64>,
    pub targets: Vec<SupervisionTarget>,
}

/// Build per-task examples for a design. Tasks whose prices are all equal
/// cannot define the masked pair and are dropped; the count is returned so
/// callers can log it.
pub fn prepare_examples(
    panels: &[TaskPanel],
    design: Design,
    mode: LossMode,
    seed: u64,
) -> Result<(Vec<TaskExample>, usize), MetaError> {
    let mut examples = Vec::with_capacity(panels.len());
    let mut dropped = 0usize;
    for panel in panels {
        let assignment = match assign_query(
            &panel.prices,
            &mut task_rng(seed, StreamDomain::QueryAssignment, panel.task_id),
        ) {
            Ok(a) => a,
            Err(_) => match design {
                Design::Dcmoml | Design::Dcuoml => {
                    dropped += 1;
                    continue;
                }
                // META and DCML supervise the fixed final index and remain
                // well defined on constant-price panels.
                Design::Dcml | Design::Meta => QueryAssignment {
                    k_star: 0,
                    k_query: panel.len() - 1,
                    k_masked_other: 0,
                },
            },
        };
        let info = build_info_set(panel, design, &assignment).map_err(|e| MetaError::BadPanel {
            task_id: panel.task_id,
            reason: e.to_string(),
        })?;
        examples.push(TaskExample {
            task_id: panel.task_id,
            features: info.to_features(),
            targets: supervision_targets(panel, design, &assignment, mode),
        });
    }
    Ok((examples, dropped))
}

/// Validation-loss early stopping: remembers the best epoch and stops
/// after `patience` epochs without improvement.
#[derive(Debug, Clone)]
pub struct EarlyStopper {
    patience: usize,
    best: f64,
    pub best_epoch: usize,
    bad: usize,
}

impl EarlyStopper {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            bad: 0,
        }
    }

    /// Returns (improved, stop).
    pub fn observe(&mut self, epoch: usize, val_loss: f64) -> (bool, bool) {
        if val_loss < self.best {
            self.best = val_loss;
            self.best_epoch = epoch;
            self.bad = 0;
            (true, false)
        } else {
            self.bad += 1;
            (false, self.bad >= self.patience)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

/// A trained MLP bundled with its input normalization and design tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedMlp {
    pub model: MlpModel,
    pub standardizer: Standardizer,
    pub design: Design,
    pub loss_mode: LossMode,
    #[serde(skip)]
    pub log: Vec<EpochStats>,
    pub best_epoch: usize,
}

impl TrainedMlp {
    /// Predict the demand coefficients for a masked information set.
    pub fn predict_params(&self, info: &MaskedInfoSet) -> Result<DemandParams, MetaError> {
        if info.design != self.design {
            return Err(MetaError::DesignMismatch {
                expected: self.design.to_string(),
                got: info.design.to_string(),
            });
        }
        self.predict_features(&info.to_features())
    }

    pub fn predict_features(&self, raw: &[f64]) -> Result<DemandParams, MetaError> {
        if raw.len() != self.model.input_dim() {
            return Err(MetaError::DimensionMismatch {
                expected: self.model.input_dim(),
                got: raw.len(),
            });
        }
        let x = self.standardizer.apply(raw);
        let out = mlp_forward(&self.model, &x)?;
        Ok(DemandParams::new(out[0], out[1]))
    }
}

/// Train an MLP on a design's supervision with Adam, minibatches over
/// tasks and validation early stopping. Returns the parameters from the
/// best validation epoch together with the per-epoch loss log.
///
/// Deterministic given `config.seed`: the task split, the per-epoch
/// shuffles and the (already initialized) model are all seed-derived, and
/// minibatch gradients accumulate in a fixed task order.
pub fn train(
    model: MlpModel,
    panels: &[TaskPanel],
    config: &TrainConfig,
) -> Result<TrainedMlp, MetaError> {
    config.validate()?;
    let (examples, _dropped) =
        prepare_examples(panels, config.design, config.loss_mode, config.seed)?;
    train_on_examples(model, &examples, config)
}

/// Training entry for callers that already built their own examples (the
/// retail pipeline constructs role-swapped pairs itself).
pub fn train_on_examples(
    mut model: MlpModel,
    examples: &[TaskExample],
    config: &TrainConfig,
) -> Result<TrainedMlp, MetaError> {
    config.validate()?;
    if examples.is_empty() {
        return Err(MetaError::EmptyTrainSet);
    }
    let expected = examples[0].features.len();
    if model.input_dim() != expected {
        return Err(MetaError::DimensionMismatch {
            expected,
            got: model.input_dim(),
        });
    }

    // Deterministic validation split over task positions.
    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.shuffle(&mut task_rng(config.seed, StreamDomain::Custom(0), 0));
    let n_val = ((examples.len() as f64) * config.validation_fraction).round() as usize;
    let n_val = n_val.min(examples.len().saturating_sub(1));
    let (val_idx, train_idx) = order.split_at(n_val);
    if train_idx.is_empty() {
        return Err(MetaError::EmptyTrainSet);
    }
    let train_set: Vec<&TaskExample> = train_idx.iter().map(|&i| &examples[i]).collect();
    let val_set: Vec<&TaskExample> = val_idx.iter().map(|&i| &examples[i]).collect();

    let rows: Vec<&[f64]> = train_set.iter().map(|e| e.features.as_slice()).collect();
    let standardizer = Standardizer::fit(&rows);
    let train_std: Vec<Vec<f64>> = train_set
        .iter()
        .map(|e| standardizer.apply(&e.features))
        .collect();

    let mut adam = AdamState::new(&model);
    let mut grad = model.zeros_like();
    let mut stopper = EarlyStopper::new(config.patience);
    let mut best_model = model.clone();
    let mut log = Vec::with_capacity(config.max_epochs);
    let mut batch_order: Vec<usize> = (0..train_set.len()).collect();

    for epoch in 0..config.max_epochs {
        batch_order.shuffle(&mut task_rng(config.seed, StreamDomain::Shuffle, epoch as u64));
        let mut train_loss = 0.0;
        for batch in batch_order.chunks(config.batch_size) {
            grad.params_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for &i in batch {
                batch_loss += mlp_backward(
                    &model,
                    &train_std[i],
                    &train_set[i].targets,
                    scale,
                    &mut grad,
                )?;
            }
            train_loss += batch_loss;
            adam.step(&mut model, &grad, config.learning_rate);
        }
        train_loss /= train_set.len() as f64;

        let val_loss = if val_set.is_empty() {
            train_loss
        } else {
            let mut total = 0.0;
            for ex in &val_set {
                let x = standardizer.apply(&ex.features);
                let out = mlp_forward(&model, &x)?;
                for t in &ex.targets {
                    let r = out[0] + t.price * out[1] - t.demand;
                    total += t.weight * r * r;
                }
            }
            total / val_set.len() as f64
        };
        log.push(EpochStats {
            epoch,
            train_loss,
            val_loss,
        });
        let (improved, stop) = stopper.observe(epoch, val_loss);
        if improved {
            best_model = model.clone();
        }
        if stop {
            break;
        }
    }

    Ok(TrainedMlp {
        model: best_model,
        standardizer,
        design: config.design,
        loss_mode: config.loss_mode,
        log,
        best_epoch: stopper.best_epoch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn early_stopper_returns_planted_minimum() {
        // Synthetic validation curve with its minimum at epoch 3 and a
        // later spurious plateau.
        let curve = [1.0, 0.8, 0.5, 0.2, 0.4, 0.3, 0.25, 0.21, 0.22];
        let mut stopper = EarlyStopper::new(3);
        let mut stopped_at = None;
        for (epoch, &v) in curve.iter().enumerate() {
            let (_, stop) = stopper.observe(epoch, v);
            if stop {
                stopped_at = Some(epoch);
                break;
            }
        }
        assert_eq!(stopper.best_epoch, 3);
        assert_eq!(stopped_at, Some(6));
    }

    #[test]
    fn standardizer_centers_and_scales() {
        let rows: Vec<Vec<f64>> = vec![vec![1.0, 5.0, 2.0], vec![3.0, 5.0, 4.0]];
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let std = Standardizer::fit(&refs);
        assert_eq!(std.mean, vec![2.0, 5.0, 3.0]);
        // Constant slot keeps scale 1 and maps to exactly 0.
        assert_eq!(std.apply(&[2.0, 5.0, 3.0]), vec![0.0, 0.0, 0.0]);
        let z = std.apply(&[3.0, 5.0, 4.0]);
        assert!((z[0] - 1.0).abs() < 1e-12 && (z[2] - 1.0).abs() < 1e-12);
    }
}

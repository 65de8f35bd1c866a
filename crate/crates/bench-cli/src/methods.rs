use demand_core::{DemandParams, TaskPanel};
use estimators_classic::{eb_fit_prior, eb_posterior, shared_ols, task_ols, PriorShape};
use meta_learners::{prepare_examples, train_on_examples, MlpModel};

use crate::config::{Method, TrainOverrides};

/// Fit one method on a panel set and predict every task's coefficients.
/// Tasks a method cannot handle (constant prices for the masked designs
/// or for per-task OLS) are skipped; predictions are keyed by task id.
pub fn fit_predict(
    method: Method,
    panels: &[TaskPanel],
    overrides: &TrainOverrides,
    seed: u64,
) -> Result<Vec<(u64, DemandParams)>, String> {
    match method {
        Method::TaskOls => Ok(panels
            .iter()
            .filter_map(|p| task_ols(p).ok().map(|fit| (p.task_id, fit.params)))
            .collect()),
        Method::Shared => {
            let fit = shared_ols(panels).map_err(|e| e.to_string())?;
            Ok(panels.iter().map(|p| (p.task_id, fit)).collect())
        }
        Method::EbGls => {
            let prior = eb_fit_prior(panels, PriorShape::Full).map_err(|e| e.to_string())?;
            Ok(panels
                .iter()
                .map(|p| (p.task_id, eb_posterior(p, &prior)))
                .collect())
        }
        Method::Dcmoml | Method::Dcuoml | Method::Dcml | Method::Meta | Method::MetaNa => {
            let design = method.design().expect("transfer method");
            let config = overrides.to_train_config(design, seed);
            let (examples, _dropped) =
                prepare_examples(panels, design, config.loss_mode, config.seed)
                    .map_err(|e| e.to_string())?;
            if examples.is_empty() {
                return Err("no usable tasks".to_string());
            }
            let input_dim = examples[0].features.len();
            let model = MlpModel::new(
                input_dim,
                overrides.hidden_width,
                overrides.hidden_depth,
                config.seed,
            );
            let trained = train_on_examples(model, &examples, &config).map_err(|e| e.to_string())?;
            Ok(examples
                .iter()
                .map(|ex| {
                    let params = trained
                        .predict_features(&ex.features)
                        .expect("dims consistent by construction");
                    (ex.task_id, params)
                })
                .collect())
        }
    }
}

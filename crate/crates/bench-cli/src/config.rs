use serde::{Deserialize, Serialize};

use info_design::{Design, LossMode};
use meta_learners::TrainConfig;

/// Estimation methods the benchmark can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Dcmoml,
    Dcuoml,
    Dcml,
    Meta,
    /// Temporal meta baseline without role averaging; on synthetic
    /// fixed-query data it coincides with `Meta`, on retail sequences it
    /// supervises only the forward-in-time pair.
    MetaNa,
    EbGls,
    Shared,
    TaskOls,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Dcmoml => "DCMOML",
            Method::Dcuoml => "DCUOML",
            Method::Dcml => "DCML",
            Method::Meta => "META",
            Method::MetaNa => "META-NA",
            Method::EbGls => "EB-GLS",
            Method::Shared => "SHARED",
            Method::TaskOls => "TASK-OLS",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dcmoml" => Some(Method::Dcmoml),
            "dcuoml" => Some(Method::Dcuoml),
            "dcml" => Some(Method::Dcml),
            "meta" => Some(Method::Meta),
            "meta-na" | "metana" => Some(Method::MetaNa),
            "eb-gls" | "ebgls" => Some(Method::EbGls),
            "shared" => Some(Method::Shared),
            "task-ols" | "taskols" => Some(Method::TaskOls),
            _ => None,
        }
    }

    /// The information-set design behind a transfer-learning method.
    pub fn design(&self) -> Option<Design> {
        match self {
            Method::Dcmoml => Some(Design::Dcmoml),
            Method::Dcuoml => Some(Design::Dcuoml),
            Method::Dcml => Some(Design::Dcml),
            Method::Meta | Method::MetaNa => Some(Design::Meta),
            _ => None,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// MLP training hyperparameters for the benchmark runs. The defaults are
/// the desk-scale preset (small net, higher learning rate, long patience)
/// tuned so the full grid finishes quickly on a laptop; the `paper_*`
/// constructors configure the architectures used at full scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainOverrides {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub validation_fraction: f64,
    pub loss_mode: LossMode,
    pub hidden_width: usize,
    pub hidden_depth: usize,
}

impl Default for TrainOverrides {
    fn default() -> Self {
        Self {
            learning_rate: 3e-3,
            batch_size: 256,
            max_epochs: 500,
            patience: 50,
            validation_fraction: 0.2,
            loss_mode: LossMode::Averaged,
            hidden_width: 48,
            hidden_depth: 2,
        }
    }
}

impl TrainOverrides {
    /// Width-128, depth-4 network (full-scale synthetic preset).
    pub fn paper_synthetic() -> Self {
        Self {
            learning_rate: 1e-3,
            patience: 20,
            hidden_width: 128,
            hidden_depth: 4,
            ..Self::default()
        }
    }

    /// Width-256, depth-2 network (retail preset).
    pub fn paper_retail() -> Self {
        Self {
            learning_rate: 1e-3,
            patience: 20,
            hidden_width: 256,
            hidden_depth: 2,
            ..Self::default()
        }
    }

    pub fn to_train_config(&self, design: Design, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            max_epochs: self.max_epochs,
            patience: self.patience,
            validation_fraction: self.validation_fraction,
            design,
            loss_mode: self.loss_mode,
            seed,
        }
    }
}

/// Declarative benchmark configuration (TOML file plus flag overrides).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Tasks per generated world.
    pub n_tasks: usize,
    pub k_obs: usize,
    /// Confounding-strength grid.
    pub sigma_grid: Vec<f64>,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    pub out_dir: String,
    /// Worker threads for the cell pool (0 = rayon default).
    pub jobs: usize,
    pub train: TrainOverrides,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_tasks: 5000,
            k_obs: 2,
            sigma_grid: vec![0.0, 0.1, 0.2],
            seeds: (0..10).collect(),
            methods: vec![
                Method::Dcmoml,
                Method::Dcuoml,
                Method::Dcml,
                Method::Meta,
                Method::EbGls,
                Method::Shared,
                Method::TaskOls,
            ],
            out_dir: "results".to_string(),
            jobs: 0,
            train: TrainOverrides::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.methods.is_empty() {
            return Err("methods must be non-empty".into());
        }
        if self.seeds.is_empty() {
            return Err("seeds must be non-empty".into());
        }
        if self.sigma_grid.iter().any(|s| !(*s >= 0.0)) {
            return Err("sigma_grid values must be >= 0".into());
        }
        if self.n_tasks < 2 || self.k_obs < 2 {
            return Err("need n_tasks >= 2 and k_obs >= 2".into());
        }
        Ok(())
    }
}

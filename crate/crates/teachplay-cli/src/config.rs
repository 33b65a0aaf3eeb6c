//! Experiment configuration: one TOML file drives the whole
//! teach → augment → train → eval → report pipeline.
//!
//! All quantities are SI unless stated otherwise: durations in seconds,
//! angles in radians, torques in newton-metres, frequencies in hertz.
//! Every key except `experiment.task` and `experiment.output_dir` has a
//! documented default; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use teachplay_core::policy::{PolicyConfig, TrainConfig};
use teachplay_core::rollout::TaskSpec;
use teachplay_core::tasks::{self, TaskKind, Variant};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unknown task kind {0:?} (expected \"pick\" or \"wipe\")")]
    UnknownTask(String),
    #[error("unknown variant {0:?} for task {1}")]
    UnknownVariant(String, &'static str),
    #[error("{key} must be {requirement}, got {got}")]
    OutOfRange {
        key: &'static str,
        requirement: &'static str,
        got: f64,
    },
}

/// Raw deserialized shape; validated into [`Experiment`].
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: RawExperiment,
    #[serde(default)]
    teach: TeachSection,
    #[serde(default)]
    augment: AugmentSection,
    #[serde(default)]
    policy: PolicySection,
    #[serde(default)]
    train: TrainSection,
    #[serde(default)]
    eval: EvalSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    /// Task kind: "pick" (duration-labeled) or "wipe" (frequency-labeled).
    task: String,
    /// Directory all outputs are written under; created if absent.
    output_dir: PathBuf,
    /// Training variants (environment conditions taught and played back).
    /// Default: the task's standard pair (pick: hard+soft sponge analogs,
    /// wipe: tap+cloth surface analogs).
    #[serde(default)]
    variants: Option<Vec<String>>,
    /// Variants swept at evaluation. Default: task standard (pick adds the
    /// unseen middle sponge, wipe adds high/low friction).
    #[serde(default)]
    eval_variants: Option<Vec<String>>,
}

/// `[teach]` — demonstration episodes via bilateral control.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TeachSection {
    /// Seed for environment nuisance randomization and operator jitter.
    pub seed: u64,
}

impl Default for TeachSection {
    fn default() -> Self {
        TeachSection { seed: 42 }
    }
}

/// `[augment]` — playback collection and dataset construction.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AugmentSection {
    /// Playback speed ratios. Default per task: pick 0.5/1/2, wipe 0.5/1/1.5.
    pub ratios: Option<Vec<f64>>,
    /// Successful playbacks to keep per ratio. Default: pick 10, wipe 5.
    pub per_ratio: Option<usize>,
    /// Attempt budget per ratio before reporting a shortfall.
    /// Default: 5 × per_ratio.
    pub retry_cap: Option<usize>,
    /// Seed for playback world resets.
    pub seed: u64,
    /// Gaussian input-noise std in normalized units (σ = 1 after scaling).
    pub noise_scale: f64,
    /// Seed for the injected input noise.
    pub noise_seed: u64,
}

impl Default for AugmentSection {
    fn default() -> Self {
        AugmentSection {
            ratios: None,
            per_ratio: None,
            retry_cap: None,
            seed: 7,
            noise_scale: 0.01,
            noise_seed: 42,
        }
    }
}

/// `[policy]` — network shape. Defaults are the desk-scale configuration;
/// the full-scale reading (8 layers × 200 units) is reachable here too.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicySection {
    /// Stacked LSTM layers (the affine output layer is extra).
    pub layers: usize,
    /// Hidden units per layer.
    pub hidden: usize,
    /// Truncated-backpropagation window, model ticks (50 Hz).
    pub window: usize,
}

impl Default for PolicySection {
    fn default() -> Self {
        PolicySection {
            layers: 4,
            hidden: 64,
            window: 100,
        }
    }
}

/// `[train]` — optimizer settings.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    /// Adam learning rate.
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Global gradient-norm clip.
    pub clip_norm: f64,
    /// Sequences sampled per optimizer step (one step = one epoch here).
    pub batch: usize,
    pub epochs: usize,
    /// Validate every this many epochs (also once at the end).
    pub val_every: usize,
    /// Validate on this many stride-sampled validation sequences;
    /// 0 = the full validation split.
    pub val_subset: usize,
    /// Seed for parameter init and minibatch sampling.
    pub seed: u64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        TrainSection {
            lr: d.lr,
            beta1: d.beta1,
            beta2: d.beta2,
            epsilon: d.epsilon,
            clip_norm: d.clip_norm,
            batch: d.batch,
            epochs: d.epochs,
            val_every: d.val_every,
            val_subset: d.val_subset,
            seed: d.seed,
        }
    }
}

/// `[eval]` — autonomous-rollout grid.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    /// Seed for evaluation world resets.
    pub seed: u64,
    /// Trials per (label, variant) cell. Default: 5.
    pub trials: Option<usize>,
    /// Commanded labels (seconds for pick, hertz for wipe).
    /// Default: the task's standard seven-point grid.
    pub labels: Option<Vec<f64>>,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            seed: 5,
            trials: None,
            labels: None,
        }
    }
}

/// Validated experiment configuration.
#[derive(Debug)]
pub struct Experiment {
    pub task: TaskKind,
    pub output_dir: PathBuf,
    pub variants: Vec<Variant>,
    pub eval_variants: Vec<Variant>,
    pub teach: TeachSection,
    pub augment: AugmentSection,
    pub train: TrainSection,
    policy: PolicySection,
    eval: EvalSection,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Experiment, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Experiment, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        let task = TaskKind::parse(&raw.experiment.task)
            .ok_or_else(|| ConfigError::UnknownTask(raw.experiment.task.clone()))?;
        let parse_variants = |names: &Option<Vec<String>>, default: Vec<Variant>| {
            match names {
                None => Ok(default),
                Some(list) => list
                    .iter()
                    .map(|s| {
                        Variant::parse(s)
                            .ok_or_else(|| ConfigError::UnknownVariant(s.clone(), task.name()))
                    })
                    .collect(),
            }
        };
        let variants = parse_variants(&raw.experiment.variants, Variant::training_set(task))?;
        let eval_variants = parse_variants(&raw.experiment.eval_variants, Variant::eval_set(task))?;
        let exp = Experiment {
            task,
            output_dir: raw.experiment.output_dir,
            variants,
            eval_variants,
            teach: raw.teach,
            augment: raw.augment,
            train: raw.train,
            policy: raw.policy,
            eval: raw.eval,
        };
        exp.validate()?;
        Ok(exp)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange {
                    key,
                    requirement: "positive",
                    got: v,
                })
            }
        };
        if let Some(ratios) = &self.augment.ratios {
            for &r in ratios {
                positive("augment.ratios", r)?;
            }
        }
        positive("train.lr", self.train.lr)?;
        positive("train.batch", self.train.batch as f64)?;
        positive("policy.layers", self.policy.layers as f64)?;
        positive("policy.hidden", self.policy.hidden as f64)?;
        positive("policy.window", self.policy.window as f64)?;
        if self.augment.noise_scale < 0.0 {
            return Err(ConfigError::OutOfRange {
                key: "augment.noise_scale",
                requirement: "non-negative",
                got: self.augment.noise_scale,
            });
        }
        Ok(())
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.augment
            .ratios
            .clone()
            .unwrap_or_else(|| tasks::ratio_set(self.task))
    }

    pub fn per_ratio(&self) -> usize {
        self.augment.per_ratio.unwrap_or_else(|| tasks::per_ratio(self.task))
    }

    pub fn retry_cap(&self) -> usize {
        self.augment.retry_cap.unwrap_or(5 * self.per_ratio())
    }

    pub fn policy_config(&self) -> PolicyConfig {
        PolicyConfig {
            num_layers: self.policy.layers,
            hidden: self.policy.hidden,
            input_dim: teachplay_core::datakit::INPUT_DIM,
            output_dim: teachplay_core::datakit::TARGET_DIM,
            window: self.policy.window,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            lr: self.train.lr,
            beta1: self.train.beta1,
            beta2: self.train.beta2,
            epsilon: self.train.epsilon,
            clip_norm: self.train.clip_norm,
            batch: self.train.batch,
            epochs: self.train.epochs,
            val_every: self.train.val_every,
            val_subset: self.train.val_subset,
            seed: self.train.seed,
        }
    }

    pub fn task_spec(&self) -> TaskSpec {
        let mut spec = TaskSpec::for_task(self.task);
        if let Some(trials) = self.eval.trials {
            spec.trials = trials;
        }
        if let Some(labels) = &self.eval.labels {
            spec.labels = labels.clone();
        }
        spec
    }

    pub fn eval_seed(&self) -> u64 {
        self.eval.seed
    }
}

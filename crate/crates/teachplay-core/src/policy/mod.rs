//! Learned follower policy: a stacked LSTM trained to predict the next
//! model tick of both robots from the follower's state and a task label.

pub mod adam;
pub mod lstm;

use alloc::vec;
use alloc::vec::Vec;

pub use adam::Adam;
pub use lstm::{forward, grad_sequence, loss, predict_step, HiddenState, PolicyConfig, PolicyParams};

use crate::datakit::Dataset;
use crate::rng::Seeded;

#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub clip_norm: f64,
    /// One epoch = one optimizer step over this many sampled sequences.
    pub batch: usize,
    pub epochs: usize,
    /// Full-validation cadence, epochs.
    pub val_every: usize,
    /// Validation-subset size: evaluate on this many stride-sampled
    /// validation sequences per check; 0 = the whole split.
    pub val_subset: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            clip_norm: 1.0,
            batch: 8,
            epochs: 1000,
            val_every: 50,
            val_subset: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainError {
    EmptyTrainSplit,
    /// The loss or parameters stopped being finite at this epoch.
    Diverged { epoch: usize },
}

/// Final and best-validation parameters, with loss history.
#[derive(Debug, Clone)]
pub struct TrainResult {
    pub params: PolicyParams,
    pub best_params: PolicyParams,
    pub best_val_loss: f64,
    /// Minibatch training loss per epoch.
    pub train_curve: Vec<f64>,
    /// (epoch, full-validation loss) at each validation point.
    pub val_curve: Vec<(usize, f64)>,
}

/// Mean loss over every sequence in the slice.
pub fn eval_loss(params: &PolicyParams, seqs: &[crate::datakit::LabeledSequence]) -> f64 {
    if seqs.is_empty() {
        return 0.0;
    }
    let mut acc = 0.0;
    for s in seqs {
        let (out, _) = forward(params, &s.inputs, None);
        acc += loss(&out, &s.targets);
    }
    acc / seqs.len() as f64
}

fn eval_loss_refs(params: &PolicyParams, seqs: &[&crate::datakit::LabeledSequence]) -> f64 {
    if seqs.is_empty() {
        return 0.0;
    }
    let mut acc = 0.0;
    for s in seqs {
        let (out, _) = forward(params, &s.inputs, None);
        acc += loss(&out, &s.targets);
    }
    acc / seqs.len() as f64
}

/// Trains a policy on the dataset's training split.
///
/// Each epoch samples `batch` sequences (with replacement, seeded), averages
/// their exact BPTT gradients, clips the global norm, and takes one Adam
/// step. Validation runs every `val_every` epochs and at the end, on the
/// whole validation split or a deterministic subset (`val_subset`); the
/// best-validation parameters are kept alongside the final ones.
pub fn train(
    config: &PolicyConfig,
    dataset: &Dataset,
    tc: &TrainConfig,
) -> Result<TrainResult, TrainError> {
    if dataset.train.is_empty() {
        return Err(TrainError::EmptyTrainSplit);
    }
    let mut rng = Seeded::derive(tc.seed, 0x1b51);
    let mut params = PolicyParams::init(*config, &mut rng);
    let mut opt = Adam::new(tc.lr, tc.beta1, tc.beta2, tc.epsilon, config.param_len());
    let mut grad = vec![0.0; config.param_len()];

    let mut train_curve = Vec::with_capacity(tc.epochs);
    let mut val_curve = Vec::new();
    let mut best_params = params.clone();
    let mut best_val_loss = f64::INFINITY;

    // Stride-sampled validation subset (deterministic; whole split if 0).
    let val_view: Vec<&crate::datakit::LabeledSequence> =
        if tc.val_subset == 0 || tc.val_subset >= dataset.val.len() {
            dataset.val.iter().collect()
        } else {
            (0..tc.val_subset)
                .map(|i| &dataset.val[i * dataset.val.len() / tc.val_subset])
                .collect()
        };
    let validate = |epoch: usize,
                        params: &PolicyParams,
                        best_params: &mut PolicyParams,
                        best_val_loss: &mut f64,
                        val_curve: &mut Vec<(usize, f64)>| {
        let v = eval_loss_refs(params, &val_view);
        val_curve.push((epoch, v));
        if v < *best_val_loss {
            *best_val_loss = v;
            *best_params = params.clone();
        }
    };

    for epoch in 0..tc.epochs {
        for g in grad.iter_mut() {
            *g = 0.0;
        }
        let mut batch_loss = 0.0;
        for _ in 0..tc.batch {
            let seq = &dataset.train[rng.index(dataset.train.len())];
            batch_loss += grad_sequence(&params, &seq.inputs, &seq.targets, &mut grad);
        }
        batch_loss /= tc.batch as f64;
        for g in grad.iter_mut() {
            *g /= tc.batch as f64;
        }
        Adam::clip(&mut grad, tc.clip_norm);
        opt.update(&mut params.data, &grad);

        if !batch_loss.is_finite() || !params.is_finite() {
            return Err(TrainError::Diverged { epoch });
        }
        train_curve.push(batch_loss);

        if tc.val_every > 0 && (epoch + 1) % tc.val_every == 0 {
            validate(epoch + 1, &params, &mut best_params, &mut best_val_loss, &mut val_curve);
        }
    }
    if val_curve.last().map(|&(e, _)| e) != Some(tc.epochs) {
        validate(tc.epochs, &params, &mut best_params, &mut best_val_loss, &mut val_curve);
    }
    Ok(TrainResult {
        params,
        best_params,
        best_val_loss,
        train_curve,
        val_curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datakit::{Dataset, LabeledSequence, NormStats};
    use crate::tasks::TaskKind;
    use alloc::format;

    /// Toy dataset: normalized sine fragments with a learnable linear echo.
    fn toy_dataset(n_seqs: usize, len: usize, in_dim: usize, out_dim: usize) -> Dataset {
        let mut rng = Seeded::new(99);
        let mut train = Vec::new();
        for s in 0..n_seqs {
            let phase = rng.uniform(0.0, 6.28);
            let mut inputs = Vec::new();
            let mut targets = Vec::new();
            for t in 0..len {
                let x: Vec<f64> = (0..in_dim)
                    .map(|d| libm::sin(0.3 * t as f64 + phase + d as f64))
                    .collect();
                let y: Vec<f64> = (0..out_dim).map(|d| 0.5 * x[d % in_dim]).collect();
                inputs.push(x);
                targets.push(y);
            }
            train.push(LabeledSequence {
                inputs,
                targets,
                trace_id: format!("toy-{s}"),
                ratio: 1.0,
                phase: 0,
                label: 1.0,
            });
        }
        let val = train.split_off(n_seqs - 2);
        let unit = |d: usize| NormStats {
            mean: alloc::vec![0.0; d],
            std: alloc::vec![1.0; d],
        };
        Dataset {
            task: TaskKind::Pick,
            train,
            val,
            input_stats: unit(in_dim),
            target_stats: unit(out_dim),
        }
    }

    fn toy_config() -> PolicyConfig {
        PolicyConfig {
            num_layers: 1,
            hidden: 8,
            input_dim: 3,
            output_dim: 2,
            window: 32,
        }
    }

    #[test]
    fn same_seed_identical_curves() {
        let ds = toy_dataset(6, 12, 3, 2);
        let tc = TrainConfig {
            epochs: 10,
            batch: 2,
            ..TrainConfig::default()
        };
        let a = train(&toy_config(), &ds, &tc).unwrap();
        let b = train(&toy_config(), &ds, &tc).unwrap();
        assert_eq!(a.train_curve, b.train_curve);
        assert_eq!(a.params.data, b.params.data);
    }

    #[test]
    fn zero_lr_keeps_initial_params() {
        let ds = toy_dataset(6, 12, 3, 2);
        let tc = TrainConfig {
            lr: 0.0,
            epochs: 5,
            batch: 2,
            ..TrainConfig::default()
        };
        let result = train(&toy_config(), &ds, &tc).unwrap();
        let mut rng = Seeded::derive(tc.seed, 0x1b51);
        let init = PolicyParams::init(toy_config(), &mut rng);
        assert_eq!(result.params.data, init.data);
    }

    #[test]
    fn loss_decreases_on_toy_problem() {
        let ds = toy_dataset(8, 20, 3, 2);
        let tc = TrainConfig {
            lr: 5e-3,
            epochs: 200,
            batch: 4,
            val_every: 50,
            ..TrainConfig::default()
        };
        let result = train(&toy_config(), &ds, &tc).unwrap();
        let head: f64 = result.train_curve[..20].iter().sum::<f64>() / 20.0;
        let tail: f64 = result.train_curve[180..].iter().sum::<f64>() / 20.0;
        assert!(tail < 0.5 * head, "head={head} tail={tail}");
        assert!(result.best_val_loss <= result.val_curve[0].1);
    }

    #[test]
    fn empty_train_split_is_an_error() {
        let mut ds = toy_dataset(6, 12, 3, 2);
        ds.train.clear();
        let err = train(&toy_config(), &ds, &TrainConfig::default());
        assert!(matches!(err, Err(TrainError::EmptyTrainSplit)));
    }

    #[test]
    fn divergence_reports_epoch() {
        let ds = toy_dataset(6, 12, 3, 2);
        let tc = TrainConfig {
            lr: f64::INFINITY,
            epochs: 5,
            batch: 1,
            ..TrainConfig::default()
        };
        match train(&toy_config(), &ds, &tc) {
            Err(TrainError::Diverged { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn best_params_correspond_to_best_val_loss() {
        let ds = toy_dataset(8, 20, 3, 2);
        let tc = TrainConfig {
            lr: 5e-3,
            epochs: 100,
            batch: 4,
            val_every: 25,
            ..TrainConfig::default()
        };
        let result = train(&toy_config(), &ds, &tc).unwrap();
        let recomputed = eval_loss(&result.best_params, &ds.val);
        assert!((recomputed - result.best_val_loss).abs() < 1e-12);
    }
}

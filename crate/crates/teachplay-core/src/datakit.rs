//! Dataset pipeline: 500 -> 50 Hz downsample-and-rearrange, labeling,
//! z-score normalization, noise injection, splitting, and construction of
//! the proposed (real playback) and naive (time-rescaled) datasets.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::bilateral::{MotionTrace, TickRecord};
use crate::mocopy::{self, MocopyError, SpeedRatio};
use crate::rng::Seeded;
use crate::tasks::TaskKind;
use crate::{MODEL_DECIMATION, N_JOINTS};

/// Model input width: follower (theta, omega, tau) per joint plus the task
/// label.
pub const INPUT_DIM: usize = 3 * N_JOINTS + 1;
/// Model output width: next-tick follower plus leader (theta, omega, tau)
/// per joint.
pub const TARGET_DIM: usize = 6 * N_JOINTS;

#[derive(Debug, Clone, PartialEq)]
pub enum DatakitError {
    BadFactor,
    EmptyTrace,
    /// Duration task: the gripper never closed; the demo is malformed.
    GripperNeverClosed,
    /// A feature dimension is constant on the training split.
    ConstantDimension { index: usize, name: String },
    NotEnoughTraces { condition: String, have: usize, need: usize },
    Mocopy(MocopyError),
}

impl From<MocopyError> for DatakitError {
    fn from(e: MocopyError) -> Self {
        DatakitError::Mocopy(e)
    }
}

/// How a task labels its sequences.
#[derive(Debug, Clone, Copy)]
pub struct LabelSpec {
    pub task: TaskKind,
    /// Gripper angle below which the hand counts as closed, rad.
    pub closed_threshold: f64,
    /// Demonstration frequency, Hz (frequency-labeled task).
    pub base_freq: f64,
}

impl LabelSpec {
    pub fn for_task(task: TaskKind) -> LabelSpec {
        LabelSpec {
            task,
            closed_threshold: crate::tasks::GRIPPER_CLOSED,
            base_freq: crate::tasks::WIPE_BASE_FREQ,
        }
    }
}

/// Scalar task label for one trace.
///
/// Duration task: total time the commanded (leader-side) gripper angle is
/// below the closed threshold, so proposed and naive variants of the same
/// playback carry identical labels. Frequency task: demonstration
/// frequency multiplied by the playback speed.
pub fn attach_label(
    trace: &MotionTrace,
    spec: &LabelSpec,
    ratio: SpeedRatio,
) -> Result<f64, DatakitError> {
    match spec.task {
        TaskKind::Pick => {
            let closed = trace
                .ticks
                .iter()
                .filter(|t| t.leader_res[2].theta < spec.closed_threshold)
                .count();
            if closed == 0 {
                return Err(DatakitError::GripperNeverClosed);
            }
            Ok(closed as f64 * trace.dt)
        }
        TaskKind::Wipe => Ok(spec.base_freq * ratio.0),
    }
}

/// Splits a high-rate trace into `factor` interleaved sequences: sequence
/// `p` takes source ticks `p, p+factor, p+2*factor, ...`. Together the
/// sequences cover every source tick exactly once.
pub fn downsample_rearrange(
    trace: &MotionTrace,
    factor: usize,
) -> Result<Vec<Vec<TickRecord>>, DatakitError> {
    if factor == 0 {
        return Err(DatakitError::BadFactor);
    }
    if trace.ticks.is_empty() {
        return Err(DatakitError::EmptyTrace);
    }
    let mut out = vec![Vec::new(); factor];
    for (i, t) in trace.ticks.iter().enumerate() {
        out[i % factor].push(t.clone());
    }
    Ok(out)
}

/// Per-dimension mean and standard deviation of the training split.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    /// Computes stats over row vectors. Fails on any constant dimension.
    pub fn compute(rows: &[&Vec<f64>], names: &dyn Fn(usize) -> String) -> Result<NormStats, DatakitError> {
        let dim = rows[0].len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r.iter()) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        let mut var = vec![0.0; dim];
        for r in rows {
            for d in 0..dim {
                let e = r[d] - mean[d];
                var[d] += e * e;
            }
        }
        let mut std = vec![0.0; dim];
        for d in 0..dim {
            std[d] = libm::sqrt(var[d] / n);
            if std[d] <= 1e-12 {
                return Err(DatakitError::ConstantDimension {
                    index: d,
                    name: names(d),
                });
            }
        }
        Ok(NormStats { mean, std })
    }

    pub fn normalize(&self, row: &mut [f64]) {
        for (d, v) in row.iter_mut().enumerate() {
            *v = (*v - self.mean[d]) / self.std[d];
        }
    }

    pub fn denormalize(&self, row: &mut [f64]) {
        for (d, v) in row.iter_mut().enumerate() {
            *v = *v * self.std[d] + self.mean[d];
        }
    }
}

/// One 50 Hz training/validation sequence in normalized units.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSequence {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    pub trace_id: String,
    pub ratio: f64,
    /// Rearrangement phase, 0..factor.
    pub phase: usize,
    /// Raw (unnormalized) task label.
    pub label: f64,
}

/// Train/validation dataset with the normalization metadata that produced
/// it. Validation is normalized with the training stats.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub task: TaskKind,
    pub train: Vec<LabeledSequence>,
    pub val: Vec<LabeledSequence>,
    pub input_stats: NormStats,
    pub target_stats: NormStats,
}

pub fn input_dim_name(d: usize) -> String {
    if d == INPUT_DIM - 1 {
        return String::from("label");
    }
    let joint = d / 3;
    let chan = ["theta", "omega", "tau"][d % 3];
    format!("follower_{chan}[{joint}]")
}

pub fn target_dim_name(d: usize) -> String {
    let side = if d < 3 * N_JOINTS { "follower" } else { "leader" };
    let dd = d % (3 * N_JOINTS);
    let joint = dd / 3;
    let chan = ["theta", "omega", "tau"][dd % 3];
    format!("{side}_{chan}[{joint}]")
}

fn input_row(t: &TickRecord, label: f64) -> Vec<f64> {
    let mut row = Vec::with_capacity(INPUT_DIM);
    for j in 0..N_JOINTS {
        row.push(t.follower_res[j].theta);
        row.push(t.follower_res[j].omega);
        row.push(t.follower_res[j].tau);
    }
    row.push(label);
    row
}

fn target_row(t: &TickRecord) -> Vec<f64> {
    let mut row = Vec::with_capacity(TARGET_DIM);
    for j in 0..N_JOINTS {
        row.push(t.follower_res[j].theta);
        row.push(t.follower_res[j].omega);
        row.push(t.follower_res[j].tau);
    }
    for j in 0..N_JOINTS {
        row.push(t.leader_res[j].theta);
        row.push(t.leader_res[j].omega);
        row.push(t.leader_res[j].tau);
    }
    row
}

/// Raw (unnormalized) sequences for one trace: ten interleaved 50 Hz
/// sequences, inputs paired with targets one model tick (20 ms) ahead.
fn trace_sequences(
    trace: &MotionTrace,
    label: f64,
) -> Result<Vec<LabeledSequence>, DatakitError> {
    let phases = downsample_rearrange(trace, MODEL_DECIMATION)?;
    let mut out = Vec::with_capacity(phases.len());
    for (phase, ticks) in phases.iter().enumerate() {
        if ticks.len() < 2 {
            return Err(DatakitError::EmptyTrace);
        }
        let mut inputs = Vec::with_capacity(ticks.len() - 1);
        let mut targets = Vec::with_capacity(ticks.len() - 1);
        for k in 0..ticks.len() - 1 {
            inputs.push(input_row(&ticks[k], label));
            targets.push(target_row(&ticks[k + 1]));
        }
        out.push(LabeledSequence {
            inputs,
            targets,
            trace_id: trace.meta.id.clone(),
            ratio: trace.meta.ratio,
            phase,
            label,
        });
    }
    Ok(out)
}

/// Builds the train/validation dataset from collected traces.
///
/// Traces are grouped by (variant, ratio) condition in input order; the
/// first `train_per_condition` of each condition train, the next
/// `val_per_condition` validate. Stats come from the training split only
/// (or are supplied, for normalizing with foreign stats).
pub fn build_dataset(
    traces: &[MotionTrace],
    spec: &LabelSpec,
    train_per_condition: usize,
    val_per_condition: usize,
    stats: Option<(NormStats, NormStats)>,
) -> Result<Dataset, DatakitError> {
    if traces.is_empty() {
        return Err(DatakitError::EmptyTrace);
    }
    // group by condition, preserving first-seen order
    let mut conditions: Vec<(String, Vec<&MotionTrace>)> = Vec::new();
    for t in traces {
        let key = format!("{}-r{}", t.meta.variant.name(), t.meta.ratio);
        match conditions.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(t),
            None => conditions.push((key, vec![t])),
        }
    }
    let mut train = Vec::new();
    let mut val = Vec::new();
    for (key, list) in &conditions {
        let need = train_per_condition + val_per_condition;
        if list.len() < need {
            return Err(DatakitError::NotEnoughTraces {
                condition: key.clone(),
                have: list.len(),
                need,
            });
        }
        for (i, trace) in list.iter().take(need).enumerate() {
            let label = attach_label(trace, spec, SpeedRatio(trace.meta.ratio))?;
            let seqs = trace_sequences(trace, label)?;
            if i < train_per_condition {
                train.extend(seqs);
            } else {
                val.extend(seqs);
            }
        }
    }
    let (input_stats, target_stats) = match stats {
        Some(s) => s,
        None => {
            let in_rows: Vec<&Vec<f64>> = train.iter().flat_map(|s| s.inputs.iter()).collect();
            let tg_rows: Vec<&Vec<f64>> = train.iter().flat_map(|s| s.targets.iter()).collect();
            (
                NormStats::compute(&in_rows, &input_dim_name)?,
                NormStats::compute(&tg_rows, &target_dim_name)?,
            )
        }
    };
    for seq in train.iter_mut().chain(val.iter_mut()) {
        for row in seq.inputs.iter_mut() {
            input_stats.normalize(row);
        }
        for row in seq.targets.iter_mut() {
            target_stats.normalize(row);
        }
    }
    Ok(Dataset {
        task: spec.task,
        train,
        val,
        input_stats,
        target_stats,
    })
}

/// Naive comparison dataset: each demonstration is time-rescaled whole
/// (commands and responses alike) and duplicated until the sequence counts
/// match the proposed dataset, then built identically.
pub fn naive_augment(
    demos: &[MotionTrace],
    ratios: &[f64],
    per_ratio: usize,
    spec: &LabelSpec,
    train_per_condition: usize,
    val_per_condition: usize,
) -> Result<Dataset, DatakitError> {
    let mut traces = Vec::new();
    for demo in demos {
        for &ratio in ratios {
            let rescaled = mocopy::rescale_trace_full(demo, SpeedRatio::new(ratio)?)?;
            for copy in 0..per_ratio {
                let mut t = rescaled.clone();
                t.meta.id = crate::tasks::trace_id(t.meta.task, t.meta.variant, ratio, copy);
                traces.push(t);
            }
        }
    }
    build_dataset(&traces, spec, train_per_condition, val_per_condition, None)
}

/// Adds seeded Gaussian noise of the given scale to every normalized
/// training input dimension. Targets and the validation split are
/// untouched.
pub fn add_input_noise(dataset: &mut Dataset, scale: f64, seed: u64) {
    if scale == 0.0 {
        return;
    }
    let mut rng = Seeded::derive(seed, 0x401e);
    for seq in dataset.train.iter_mut() {
        for row in seq.inputs.iter_mut() {
            for v in row.iter_mut() {
                *v += scale * rng.normal();
            }
        }
    }
}

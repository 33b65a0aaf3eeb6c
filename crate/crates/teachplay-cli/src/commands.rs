//! Implementations behind the `teachplay` subcommands:
//! teach → augment (proposed | naive) → train → eval → report.
//!
//! Every command is deterministic given the config and seeds, and rewrites
//! its outputs identically on rerun.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use teachplay_core::bilateral::{teach_episode, EpisodeMeta, MotionTrace, Outcome};
use teachplay_core::datakit::{self, LabelSpec};
use teachplay_core::mocopy::{self, Collection};
use teachplay_core::policy::{self, TrainError};
use teachplay_core::rng::Seeded;
use teachplay_core::rollout::{self, trace_success, PolicyRuntime};
use teachplay_core::tasks::{self, Variant};

use crate::checkpoint::{self, Checkpoint};
use crate::config::{ConfigError, Experiment};
use crate::{dataset_io, fmt_f64, report, trace_io};

/// Dataset construction mode: `proposed` replays demos against the real
/// environment at each speed, `naive` time-rescales the demo wholesale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Proposed,
    Naive,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Proposed => "proposed",
            Mode::Naive => "naive",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Task(String),
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 1 for task failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Task(_) => 1,
        }
    }
}

macro_rules! task_err {
    ($($arg:tt)*) => { CliError::Task(format!($($arg)*)) };
}

impl From<trace_io::TraceIoError> for CliError {
    fn from(e: trace_io::TraceIoError) -> Self {
        CliError::Task(e.to_string())
    }
}
impl From<dataset_io::DatasetIoError> for CliError {
    fn from(e: dataset_io::DatasetIoError) -> Self {
        CliError::Task(e.to_string())
    }
}
impl From<checkpoint::CheckpointError> for CliError {
    fn from(e: checkpoint::CheckpointError) -> Self {
        CliError::Task(e.to_string())
    }
}
impl From<report::ReportError> for CliError {
    fn from(e: report::ReportError) -> Self {
        CliError::Task(e.to_string())
    }
}
impl From<datakit::DatakitError> for CliError {
    fn from(e: datakit::DatakitError) -> Self {
        CliError::Task(format!("{e:?}"))
    }
}

/// Canonical output paths under the experiment's output directory.
pub struct Paths<'a>(&'a Experiment);

impl<'a> Paths<'a> {
    pub fn demo(&self, variant: Variant) -> PathBuf {
        self.0.output_dir.join(format!(
            "demo-{}-{}.trace",
            self.0.task.name(),
            variant.name()
        ))
    }
    pub fn dataset(&self, mode: Mode) -> PathBuf {
        self.0.output_dir.join(format!("dataset-{}.ds", mode.name()))
    }
    pub fn manifest(&self, mode: Mode) -> PathBuf {
        self.0
            .output_dir
            .join(format!("manifest-{}.txt", mode.name()))
    }
    pub fn checkpoint(&self, mode: Mode) -> PathBuf {
        self.0
            .output_dir
            .join(format!("checkpoint-{}.ckpt", mode.name()))
    }
    pub fn losses(&self, mode: Mode) -> PathBuf {
        self.0.output_dir.join(format!("losses-{}.csv", mode.name()))
    }
    pub fn eval(&self, mode: Mode) -> PathBuf {
        self.0.output_dir.join(format!("eval-{}.csv", mode.name()))
    }
    pub fn eval_summary(&self, mode: Mode) -> PathBuf {
        self.0
            .output_dir
            .join(format!("eval-{}-summary.csv", mode.name()))
    }
    pub fn comparison(&self) -> PathBuf {
        self.0.output_dir.join("report.txt")
    }
}

pub fn paths(exp: &Experiment) -> Paths<'_> {
    Paths(exp)
}

fn ensure_out_dir(exp: &Experiment) -> Result<(), CliError> {
    std::fs::create_dir_all(&exp.output_dir)
        .map_err(|e| task_err!("cannot create {}: {e}", exp.output_dir.display()))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| task_err!("cannot write {}: {e}", path.display()))
}

/// Teaches one demonstration per training variant and saves the traces.
/// The episode length covers the operator schedule plus its worst-case
/// timing jitter.
pub fn cmd_teach(exp: &Experiment, seed_override: Option<u64>) -> Result<(), CliError> {
    ensure_out_dir(exp)?;
    let seed = seed_override.unwrap_or(exp.teach.seed);
    let task = exp.task;
    for &variant in &exp.variants {
        let mut rng = Seeded::new(seed);
        let mut leader = tasks::leader_world(task);
        let mut follower = tasks::follower_world(task, variant, &mut rng);
        let op = tasks::operator_model(task, variant);
        let duration = op.duration() * 1.12;
        let meta = EpisodeMeta {
            id: format!("demo-{}-{}", task.name(), variant.name()),
            task,
            variant,
            ratio: 1.0,
            seed,
            outcome: Outcome::Failed,
        };
        let trace = teach_episode(&mut leader, &mut follower, &op, duration, meta, &|t| {
            trace_success(task, t)
        });
        let pos_rms = trace.position_residual_rms();
        let (force_rms, force_peak) = trace.force_residual_rms_and_peak();
        println!(
            "demo {}-{}: {} ({:.2} s, position residual rms {:.4} rad, force residual rms {:.3} N·m / peak {:.2} N·m)",
            task.name(),
            variant.name(),
            match trace.meta.outcome {
                Outcome::Success => "success",
                Outcome::Failed => "FAILED",
            },
            trace.duration(),
            pos_rms,
            force_rms,
            force_peak
        );
        if trace.meta.outcome != Outcome::Success {
            return Err(task_err!(
                "teaching failed for variant {} (seed {seed}); try another seed",
                variant.name()
            ));
        }
        trace_io::save_trace(&paths(exp).demo(variant), &trace)?;
    }
    Ok(())
}

fn load_demos(exp: &Experiment) -> Result<Vec<MotionTrace>, CliError> {
    exp.variants
        .iter()
        .map(|&v| {
            let path = paths(exp).demo(v);
            if !path.exists() {
                return Err(task_err!(
                    "missing demo trace {} — run `teachplay teach` first",
                    path.display()
                ));
            }
            Ok(trace_io::load_trace(&path)?)
        })
        .collect()
}

/// Builds the training dataset for the given mode and writes it plus a
/// collection manifest.
pub fn cmd_augment(exp: &Experiment, mode: Mode, seed_override: Option<u64>) -> Result<(), CliError> {
    ensure_out_dir(exp)?;
    let demos = load_demos(exp)?;
    let task = exp.task;
    let spec = LabelSpec::for_task(task);
    let ratios = exp.ratios();
    let per_ratio = exp.per_ratio();
    let (train_n, val_n) = tasks::split_counts(task);
    let seed = seed_override.unwrap_or(exp.augment.seed);

    let mut manifest = String::new();
    let _ = write!(
        manifest,
        "task {}\nmode {}\nratios {:?}\nper_ratio {}\n",
        task.name(),
        mode.name(),
        ratios,
        per_ratio
    );

    let mut dataset = match mode {
        Mode::Proposed => {
            let mut all = Vec::new();
            for (vi, demo) in demos.iter().enumerate() {
                let variant = demo.meta.variant;
                let col: Collection = mocopy::collect_playbacks(
                    demo,
                    task,
                    variant,
                    &ratios,
                    per_ratio,
                    exp.retry_cap(),
                    seed.wrapping_add(vi as u64),
                    &|t| trace_success(task, t),
                )
                .map_err(|e| task_err!("playback collection failed: {e:?}"))?;
                for st in &col.stats {
                    let _ = write!(
                        manifest,
                        "{} ratio {}: {}/{} successes in {} attempts\n",
                        variant.name(),
                        st.ratio,
                        st.successes,
                        per_ratio,
                        st.attempts
                    );
                }
                if col.shortfall(per_ratio) {
                    let report = mocopy::shortfall_report(&col, per_ratio);
                    write_text(&paths(exp).manifest(mode), &manifest)?;
                    return Err(task_err!(
                        "retry budget exhausted for variant {}:\n{report}",
                        variant.name()
                    ));
                }
                all.extend(col.successes);
            }
            datakit::build_dataset(&all, &spec, train_n, val_n, None)?
        }
        Mode::Naive => datakit::naive_augment(&demos, &ratios, per_ratio, &spec, train_n, val_n)?,
    };
    datakit::add_input_noise(&mut dataset, exp.augment.noise_scale, exp.augment.noise_seed);

    let mut labels: Vec<f64> = dataset
        .train
        .iter()
        .chain(dataset.val.iter())
        .map(|s| s.label)
        .collect();
    labels.sort_by(f64::total_cmp);
    labels.dedup();
    let _ = write!(
        manifest,
        "sequences {} train / {} val\nlabels {:?}\n",
        dataset.train.len(),
        dataset.val.len(),
        labels
    );
    write_text(&paths(exp).manifest(mode), &manifest)?;
    dataset_io::save_dataset(&paths(exp).dataset(mode), &dataset)?;
    println!(
        "dataset {}: {} train / {} val sequences, labels {labels:?}",
        mode.name(),
        dataset.train.len(),
        dataset.val.len()
    );
    Ok(())
}

/// Trains a policy on the mode's dataset; writes the best-validation
/// checkpoint and the loss curves.
pub fn cmd_train(exp: &Experiment, mode: Mode, seed_override: Option<u64>) -> Result<(), CliError> {
    ensure_out_dir(exp)?;
    let ds_path = paths(exp).dataset(mode);
    if !ds_path.exists() {
        return Err(task_err!(
            "missing dataset {} — run `teachplay augment --mode {}` first",
            ds_path.display(),
            mode.name()
        ));
    }
    let dataset = dataset_io::load_dataset(&ds_path)?;
    let pc = exp.policy_config();
    let mut tc = exp.train_config();
    if let Some(seed) = seed_override {
        tc.seed = seed;
    }
    let result = policy::train(&pc, &dataset, &tc).map_err(|e| match e {
        TrainError::EmptyTrainSplit => task_err!("dataset has an empty training split"),
        TrainError::Diverged { epoch } => {
            task_err!("training diverged at epoch {epoch} (lr {} too high?)", tc.lr)
        }
    })?;

    let ck = Checkpoint {
        task: exp.task,
        params: result.best_params,
        input_stats: dataset.input_stats.clone(),
        target_stats: dataset.target_stats.clone(),
        seed: tc.seed,
        epoch: tc.epochs,
        best_val_loss: result.best_val_loss,
    };
    checkpoint::save_checkpoint(&paths(exp).checkpoint(mode), &ck)?;

    let mut csv = String::from("epoch,train_loss,val_loss\n");
    let mut val_iter = result.val_curve.iter().peekable();
    for (i, loss) in result.train_curve.iter().enumerate() {
        let epoch = i + 1;
        let val = match val_iter.peek() {
            Some(&&(e, v)) if e == epoch => {
                val_iter.next();
                fmt_f64(v)
            }
            _ => String::new(),
        };
        let _ = write!(csv, "{epoch},{},{val}\n", fmt_f64(*loss));
    }
    write_text(&paths(exp).losses(mode), &csv)?;
    println!(
        "trained {} ({} epochs, seed {}): best validation loss {:.6}",
        mode.name(),
        tc.epochs,
        tc.seed,
        result.best_val_loss
    );
    Ok(())
}

/// Evaluates a checkpoint over the label × variant grid and writes the
/// per-trial report plus the summary table.
pub fn cmd_eval(exp: &Experiment, mode: Mode, seed_override: Option<u64>) -> Result<(), CliError> {
    ensure_out_dir(exp)?;
    let ck_path = paths(exp).checkpoint(mode);
    if !ck_path.exists() {
        return Err(task_err!(
            "missing checkpoint {} — run `teachplay train --mode {}` first",
            ck_path.display(),
            mode.name()
        ));
    }
    let ck = checkpoint::load_checkpoint(&ck_path)?;
    if ck.task != exp.task {
        return Err(task_err!(
            "checkpoint is for task {}, config says {}",
            ck.task.name(),
            exp.task.name()
        ));
    }
    let rt = PolicyRuntime {
        params: &ck.params,
        input_stats: &ck.input_stats,
        target_stats: &ck.target_stats,
    };
    let spec = exp.task_spec();
    let seed = seed_override.unwrap_or(exp.eval_seed());
    let eval = rollout::evaluate(&spec, &exp.eval_variants, &rt, seed);
    report::save_report(&paths(exp).eval(mode), &eval)?;
    write_text(
        &paths(exp).eval_summary(mode),
        &report::summary_to_string(&eval, &spec),
    )?;
    println!(
        "eval {}: overall {:.1}%, interpolated {:.1}%, extrapolated {:.1}%, label rho {:.3}",
        mode.name(),
        100.0 * eval.overall_rate(),
        100.0 * eval.interpolated_rate(&spec),
        100.0 * eval.extrapolated_rate(&spec),
        eval.label_spearman()
    );
    Ok(())
}

/// Compares the proposed and naive evaluation reports.
pub fn cmd_report(
    exp: &Experiment,
    proposed_path: Option<&Path>,
    naive_path: Option<&Path>,
) -> Result<(), CliError> {
    ensure_out_dir(exp)?;
    let p = proposed_path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| paths(exp).eval(Mode::Proposed));
    let n = naive_path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| paths(exp).eval(Mode::Naive));
    for path in [&p, &n] {
        if !path.exists() {
            return Err(task_err!(
                "missing eval report {} — run `teachplay eval` for both modes first",
                path.display()
            ));
        }
    }
    let proposed = report::load_report(&p)?;
    let naive = report::load_report(&n)?;
    let spec = exp.task_spec();
    let cmp = report::compare(&proposed, &naive, &spec)?;
    print!("{}", cmp.text);
    write_text(&paths(exp).comparison(), &cmp.text)?;
    Ok(())
}

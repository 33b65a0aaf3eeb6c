//! Closed-loop policy evaluation: task success predicates, autonomous
//! rollouts of a trained policy on a live follower, measurement of the
//! commanded quantity (operating time / wipe frequency), and the label
//! grid sweep with interpolated/extrapolated bookkeeping.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::bilateral::{EpisodeMeta, Frame, MotionTrace, Outcome, States, TickRecord};
use crate::control::{CommandFrame, JointState};
use crate::datakit::{NormStats, INPUT_DIM, TARGET_DIM};
use crate::policy::{predict_step, HiddenState, PolicyParams};
use crate::rng::Seeded;
use crate::sim::World;
use crate::tasks::{self, TaskKind, Variant};
use crate::{CONTROL_DT, MODEL_DECIMATION, N_JOINTS};

/// Minimum normal force that counts as surface contact.
const CONTACT_FORCE_MIN: f64 = 0.05;
/// Hysteresis band for sweep-reversal counting, rad.
const REVERSAL_BAND: f64 = 0.05;

/// Evaluation grid for one task: labels to command, trials per cell, and
/// the episode timeout. Labels inside `[interp_lo, interp_hi]` count as
/// interpolated (inside the trained span), the rest as extrapolated.
#[derive(Debug, Clone)]
pub struct TaskSpec {
    pub task: TaskKind,
    pub labels: Vec<f64>,
    pub trials: usize,
    pub timeout: f64,
    pub interp_lo: f64,
    pub interp_hi: f64,
}

impl TaskSpec {
    pub fn for_task(task: TaskKind) -> TaskSpec {
        match task {
            TaskKind::Pick => TaskSpec {
                task,
                labels: vec![1.5, 3.0, 4.5, 6.0, 9.0, 12.0, 15.0],
                trials: 5,
                timeout: 40.0,
                interp_lo: 4.5,
                interp_hi: 12.0,
            },
            TaskKind::Wipe => TaskSpec {
                task,
                labels: vec![0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75],
                trials: 5,
                timeout: 50.0,
                interp_lo: 0.5,
                interp_hi: 1.5,
            },
        }
    }

    pub fn is_interpolated(&self, label: f64) -> bool {
        label >= self.interp_lo - 1e-9 && label <= self.interp_hi + 1e-9
    }
}

fn sweep_reversals(ticks: &[&TickRecord]) -> usize {
    if ticks.is_empty() {
        return 0;
    }
    let mean =
        ticks.iter().map(|t| t.follower_res[1].theta).sum::<f64>() / ticks.len() as f64;
    let mut reversals = 0usize;
    let mut side = 0i8; // -1 below band, +1 above, 0 undecided
    for t in ticks {
        let x = t.follower_res[1].theta - mean;
        let s = if x > REVERSAL_BAND {
            1
        } else if x < -REVERSAL_BAND {
            -1
        } else {
            0
        };
        if s != 0 {
            if side != 0 && s != side {
                reversals += 1;
            }
            side = s;
        }
    }
    reversals
}

fn pick_success(trace: &MotionTrace) -> bool {
    let last = match trace.ticks.last() {
        Some(t) => t,
        None => return false,
    };
    let was_held = trace.ticks.iter().any(|t| t.held);
    let in_zone = libm::fabs(last.object_pos - tasks::PICK_TARGET) <= tasks::PICK_ZONE_RADIUS;
    let released = !last.held && last.follower_res[2].theta > tasks::GRIPPER_CLOSED;
    was_held && in_zone && released
}

fn wipe_success(trace: &MotionTrace) -> bool {
    let first_contact = match trace
        .ticks
        .iter()
        .position(|t| t.env.normal_force > CONTACT_FORCE_MIN)
    {
        Some(i) => i,
        None => return false,
    };
    // press before wipe: no large sweep motion while still in free space
    let premature = trace.ticks[..first_contact]
        .iter()
        .any(|t| libm::fabs(t.follower_res[1].theta) > 0.5 * tasks::WIPE_AMPLITUDE);
    if premature {
        return false;
    }
    // contact maintained once pressing (short grasp margin excluded)
    let margin = (0.5 / trace.dt) as usize;
    let wiping: Vec<&TickRecord> = trace.ticks[(first_contact + margin).min(trace.ticks.len())..]
        .iter()
        .collect();
    if wiping.is_empty() {
        return false;
    }
    let touching = wiping
        .iter()
        .filter(|t| t.env.normal_force > CONTACT_FORCE_MIN)
        .count();
    if (touching as f64) < 0.9 * wiping.len() as f64 {
        return false;
    }
    // sustained periodic sweeping, not a couple of stray wobbles
    sweep_reversals(&wiping) >= 4
}

/// Task success judged on a finished trace. Faulted/truncated episodes are
/// rejected by the recorders before this is consulted.
pub fn trace_success(task: TaskKind, trace: &MotionTrace) -> bool {
    match task {
        TaskKind::Pick => pick_success(trace),
        TaskKind::Wipe => wipe_success(trace),
    }
}

/// Measured operating time: how long the follower gripper was closed, s.
pub fn measure_closed_duration(trace: &MotionTrace) -> f64 {
    trace
        .ticks
        .iter()
        .filter(|t| t.follower_res[2].theta < tasks::GRIPPER_CLOSED)
        .count() as f64
        * trace.dt
}

/// Measured wipe frequency: sweep reversals per two half-periods over the
/// contact window, Hz. Returns 0 when the eraser never touched the surface.
pub fn measure_frequency(trace: &MotionTrace) -> f64 {
    let first_contact = match trace
        .ticks
        .iter()
        .position(|t| t.env.normal_force > CONTACT_FORCE_MIN)
    {
        Some(i) => i,
        None => return 0.0,
    };
    let window: Vec<&TickRecord> = trace.ticks[first_contact..].iter().collect();
    let duration = window.len() as f64 * trace.dt;
    if duration <= 0.0 {
        return 0.0;
    }
    sweep_reversals(&window) as f64 / (2.0 * duration)
}

/// What the task grid actually measures on a successful episode.
pub fn measure(task: TaskKind, trace: &MotionTrace) -> f64 {
    match task {
        TaskKind::Pick => measure_closed_duration(trace),
        TaskKind::Wipe => measure_frequency(trace),
    }
}

/// A trained policy plus the normalization that its dataset was built with.
pub struct PolicyRuntime<'a> {
    pub params: &'a PolicyParams,
    pub input_stats: &'a NormStats,
    pub target_stats: &'a NormStats,
}

/// Runs one autonomous episode: the policy predicts at 50 Hz from the
/// follower's state and the commanded label; the predicted leader channels
/// become the follower references (force sign flipped) and are held for the
/// ten control ticks until the next model tick. The predicted leader state
/// is logged on the leader side of the trace.
///
/// The episode ends at `timeout`, on a fault or a non-finite prediction, or
/// (duration task) half a second after the object has been carried,
/// released, and the hand reopened.
pub fn run_policy_episode(
    world: &mut World,
    rt: &PolicyRuntime,
    label: f64,
    timeout: f64,
    mut meta: EpisodeMeta,
) -> MotionTrace {
    let dt = CONTROL_DT;
    let task = meta.task;
    meta.outcome = Outcome::Failed;
    let max_ticks = libm::ceil(timeout / dt) as u64;
    let mut trace = MotionTrace {
        dt,
        meta,
        ticks: Vec::new(),
    };
    let mut ctl = tasks::default_controllers(&world.arm);
    let mut hidden = HiddenState::zeros(&rt.params.config);
    let mut follower_cmd: Frame = [CommandFrame::default(); N_JOINTS];
    let mut leader_pred: States = core::array::from_fn(|i| JointState {
        theta: world.state.joints[i].theta,
        omega: 0.0,
        tau: 0.0,
    });
    let mut was_held = false;
    let mut done_at: Option<u64> = None;

    for tick in 0..max_ticks {
        let follower_res: States = core::array::from_fn(|i| JointState {
            theta: world.state.joints[i].theta,
            omega: world.state.joints[i].omega,
            tau: ctl[i].tau_reaction(),
        });
        if tick % MODEL_DECIMATION as u64 == 0 {
            let mut input = Vec::with_capacity(INPUT_DIM);
            for j in 0..N_JOINTS {
                input.push(follower_res[j].theta);
                input.push(follower_res[j].omega);
                input.push(follower_res[j].tau);
            }
            input.push(label);
            rt.input_stats.normalize(&mut input);
            let mut out = match predict_step(rt.params, &mut hidden, &input) {
                Some(o) => o,
                None => return trace,
            };
            rt.target_stats.denormalize(&mut out);
            if out.len() != TARGET_DIM || out.iter().any(|v| !v.is_finite()) {
                return trace;
            }
            // leader block: dims 9..18 as (theta, omega, tau) per joint
            leader_pred = core::array::from_fn(|j| JointState {
                theta: out[3 * N_JOINTS + 3 * j],
                omega: out[3 * N_JOINTS + 3 * j + 1],
                tau: out[3 * N_JOINTS + 3 * j + 2],
            });
            follower_cmd = core::array::from_fn(|j| CommandFrame {
                theta_ref: leader_pred[j].theta,
                omega_ref: leader_pred[j].omega,
                tau_ref: -leader_pred[j].tau,
            });
        }
        let mut tau = [0.0; N_JOINTS];
        for i in 0..N_JOINTS {
            tau[i] = ctl[i].step(&follower_cmd[i], &follower_res[i], dt);
        }
        let env = world.step(tau, [0.0; N_JOINTS], dt);
        trace.ticks.push(TickRecord {
            tick,
            leader_cmd: follower_cmd,
            leader_res: leader_pred,
            follower_cmd,
            follower_res,
            env,
            object_pos: world.state.object_pos,
            held: world.state.held,
        });
        if world.state.fault || ctl.iter().any(|c| c.fault) {
            return trace;
        }
        if task == TaskKind::Pick {
            was_held |= world.state.held;
            if done_at.is_none()
                && was_held
                && !world.state.held
                && world.state.joints[2].theta > tasks::GRIPPER_CLOSED
            {
                done_at = Some(tick);
            }
            if let Some(d) = done_at {
                if tick >= d + (0.5 / dt) as u64 {
                    break;
                }
            }
        }
    }
    trace.meta.outcome = if trace_success(task, &trace) {
        Outcome::Success
    } else {
        Outcome::Failed
    };
    trace
}

/// Fixed autonomous-episode length for the frequency task: lead-in plus a
/// measurement window, well under the timeout.
pub const WIPE_EVAL_SECS: f64 = 12.0;

/// One (label, variant) cell of the evaluation grid.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub label: f64,
    pub variant: Variant,
    pub trials: usize,
    pub successes: usize,
    /// Measured quantity of each successful trial.
    pub measured: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub task: TaskKind,
    pub cells: Vec<CellResult>,
}

impl EvalReport {
    fn rate<F: Fn(&CellResult) -> bool>(&self, keep: F) -> f64 {
        let mut succ = 0usize;
        let mut total = 0usize;
        for c in self.cells.iter().filter(|c| keep(c)) {
            succ += c.successes;
            total += c.trials;
        }
        if total == 0 {
            0.0
        } else {
            succ as f64 / total as f64
        }
    }

    pub fn overall_rate(&self) -> f64 {
        self.rate(|_| true)
    }

    pub fn interpolated_rate(&self, spec: &TaskSpec) -> f64 {
        self.rate(|c| spec.is_interpolated(c.label))
    }

    pub fn extrapolated_rate(&self, spec: &TaskSpec) -> f64 {
        self.rate(|c| !spec.is_interpolated(c.label))
    }

    pub fn variant_rate(&self, variant: Variant) -> f64 {
        self.rate(|c| c.variant == variant)
    }

    /// Rank correlation between commanded label and measured quantity over
    /// all successful episodes.
    pub fn label_spearman(&self) -> f64 {
        let mut labels = Vec::new();
        let mut measured = Vec::new();
        for c in &self.cells {
            for &m in &c.measured {
                labels.push(c.label);
                measured.push(m);
            }
        }
        spearman(&labels, &measured)
    }
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
    let mut r = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0; // average rank, 1-based
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties; 0 for fewer than
/// two points or a degenerate margin.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return 0.0;
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    let mx = rx.iter().sum::<f64>() / n as f64;
    let my = ry.iter().sum::<f64>() / n as f64;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for i in 0..n {
        let a = rx[i] - mx;
        let b = ry[i] - my;
        num += a * b;
        dx += a * a;
        dy += b * b;
    }
    if dx <= 0.0 || dy <= 0.0 {
        return 0.0;
    }
    num / libm::sqrt(dx * dy)
}

/// Sweeps the whole evaluation grid: every label in the spec, every listed
/// variant, `trials` episodes per cell with seeded nuisance resets.
pub fn evaluate(
    spec: &TaskSpec,
    variants: &[Variant],
    rt: &PolicyRuntime,
    seed: u64,
) -> EvalReport {
    let mut cells = Vec::new();
    for (li, &label) in spec.labels.iter().enumerate() {
        for (vi, &variant) in variants.iter().enumerate() {
            let mut cell = CellResult {
                label,
                variant,
                trials: spec.trials,
                successes: 0,
                measured: Vec::new(),
            };
            for trial in 0..spec.trials {
                let episode_seed = seed
                    .wrapping_add((li as u64) << 24)
                    .wrapping_add((vi as u64) << 16)
                    .wrapping_add(trial as u64);
                let mut rng = Seeded::derive(episode_seed, 0xe7a1);
                let mut world = tasks::follower_world(spec.task, variant, &mut rng);
                let timeout = match spec.task {
                    TaskKind::Pick => spec.timeout,
                    TaskKind::Wipe => WIPE_EVAL_SECS,
                };
                let meta = EpisodeMeta {
                    id: eval_id(spec.task, variant, label, trial),
                    task: spec.task,
                    variant,
                    ratio: 1.0,
                    seed: episode_seed,
                    outcome: Outcome::Failed,
                };
                let trace = run_policy_episode(&mut world, rt, label, timeout, meta);
                if trace.meta.outcome == Outcome::Success {
                    cell.successes += 1;
                    cell.measured.push(measure(spec.task, &trace));
                }
            }
            cells.push(cell);
        }
    }
    EvalReport {
        task: spec.task,
        cells,
    }
}

fn eval_id(task: TaskKind, variant: Variant, label: f64, trial: usize) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    let _ = write!(s, "eval-{}-{}-l{}-{}", task.name(), variant.name(), label, trial);
    s
}

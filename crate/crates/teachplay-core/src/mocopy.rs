//! Motion-copying playback: the recorded leader data replaces the live
//! leader, optionally time-rescaled, and the follower gathers real
//! environmental responses. Playback has no feedback from the environment
//! to the commands.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bilateral::{EpisodeMeta, Frame, MotionTrace, Outcome, States, TickRecord};
use crate::control::{CommandFrame, JointState};
use crate::rng::Seeded;
use crate::sim::World;
use crate::tasks::{self, TaskKind, Variant};
use crate::N_JOINTS;

/// Playback speed multiplier; 2 plays twice as fast.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedRatio(pub f64);

impl SpeedRatio {
    pub fn new(ratio: f64) -> Result<SpeedRatio, MocopyError> {
        if ratio > 0.0 && ratio.is_finite() {
            Ok(SpeedRatio(ratio))
        } else {
            Err(MocopyError::InvalidRatio)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MocopyError {
    InvalidRatio,
    EmptyTrace,
}

/// Recorded leader responses resampled to a playback speed, ready to feed
/// the follower as commands.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandStream {
    pub dt: f64,
    pub ratio: f64,
    /// Per tick and joint: the leader's (theta, omega, tau) at that
    /// playback time; omega already multiplied by the ratio.
    pub frames: Vec<States>,
}

impl CommandStream {
    pub fn duration(&self) -> f64 {
        self.frames.len() as f64 * self.dt
    }
}

fn lerp(a: f64, b: f64, frac: f64) -> f64 {
    a + frac * (b - a)
}

/// Linear interpolation of the leader response channels to speed `r`.
/// Position and torque are interpolated; velocity is interpolated and then
/// multiplied by the ratio. Output tick `k` reads source time `k*dt*r`.
pub fn resample_trace(trace: &MotionTrace, r: SpeedRatio) -> Result<CommandStream, MocopyError> {
    let n = trace.ticks.len();
    if n == 0 {
        return Err(MocopyError::EmptyTrace);
    }
    let ratio = r.0;
    let out_len = libm::ceil(n as f64 / ratio) as usize;
    let mut frames = Vec::with_capacity(out_len);
    for k in 0..out_len {
        let pos = (k as f64 * ratio).min((n - 1) as f64);
        let i0 = libm::floor(pos) as usize;
        let i1 = (i0 + 1).min(n - 1);
        let frac = pos - i0 as f64;
        let a = &trace.ticks[i0].leader_res;
        let b = &trace.ticks[i1].leader_res;
        let f: States = core::array::from_fn(|j| JointState {
            theta: lerp(a[j].theta, b[j].theta, frac),
            omega: ratio * lerp(a[j].omega, b[j].omega, frac),
            tau: lerp(a[j].tau, b[j].tau, frac),
        });
        frames.push(f);
    }
    Ok(CommandStream {
        dt: trace.dt,
        ratio,
        frames,
    })
}

/// Full-trace time rescale used by the naive augmentation: every channel of
/// every side (commands, responses, environment) is interpolated to speed
/// `r`, with velocity channels multiplied by the ratio.
pub fn rescale_trace_full(trace: &MotionTrace, r: SpeedRatio) -> Result<MotionTrace, MocopyError> {
    let n = trace.ticks.len();
    if n == 0 {
        return Err(MocopyError::EmptyTrace);
    }
    let ratio = r.0;
    let out_len = libm::ceil(n as f64 / ratio) as usize;
    let mut ticks = Vec::with_capacity(out_len);
    let states = |a: &States, b: &States, frac: f64| -> States {
        core::array::from_fn(|j| JointState {
            theta: lerp(a[j].theta, b[j].theta, frac),
            omega: ratio * lerp(a[j].omega, b[j].omega, frac),
            tau: lerp(a[j].tau, b[j].tau, frac),
        })
    };
    let cmds = |a: &Frame, b: &Frame, frac: f64| -> Frame {
        core::array::from_fn(|j| CommandFrame {
            theta_ref: lerp(a[j].theta_ref, b[j].theta_ref, frac),
            omega_ref: ratio * lerp(a[j].omega_ref, b[j].omega_ref, frac),
            tau_ref: lerp(a[j].tau_ref, b[j].tau_ref, frac),
        })
    };
    for k in 0..out_len {
        let pos = (k as f64 * ratio).min((n - 1) as f64);
        let i0 = libm::floor(pos) as usize;
        let i1 = (i0 + 1).min(n - 1);
        let frac = pos - i0 as f64;
        let a = &trace.ticks[i0];
        let b = &trace.ticks[i1];
        let mut env = a.env;
        for j in 0..N_JOINTS {
            env.torque[j] = lerp(a.env.torque[j], b.env.torque[j], frac);
        }
        env.normal_force = lerp(a.env.normal_force, b.env.normal_force, frac);
        env.grip_force = lerp(a.env.grip_force, b.env.grip_force, frac);
        env.penetration = lerp(a.env.penetration, b.env.penetration, frac);
        ticks.push(TickRecord {
            tick: k as u64,
            leader_cmd: cmds(&a.leader_cmd, &b.leader_cmd, frac),
            leader_res: states(&a.leader_res, &b.leader_res, frac),
            follower_cmd: cmds(&a.follower_cmd, &b.follower_cmd, frac),
            follower_res: states(&a.follower_res, &b.follower_res, frac),
            env,
            object_pos: lerp(a.object_pos, b.object_pos, frac),
            held: a.held,
        });
    }
    let mut meta = trace.meta.clone();
    meta.ratio = ratio;
    Ok(MotionTrace {
        dt: trace.dt,
        meta,
        ticks,
    })
}

/// Replays a command stream on a live follower world. The stored commands
/// go out open-loop (`theta/omega` as-is, torque sign flipped per the
/// bilateral force law); the stream itself is logged unchanged on the
/// leader side of the returned trace.
pub fn playback(follower: &mut World, stream: &CommandStream, meta: EpisodeMeta) -> MotionTrace {
    let dt = stream.dt;
    let mut trace = MotionTrace {
        dt,
        meta,
        ticks: Vec::with_capacity(stream.frames.len()),
    };
    trace.meta.outcome = Outcome::Failed;
    trace.meta.ratio = stream.ratio;
    let mut ctl = tasks::default_controllers(&follower.arm);
    for (tick, stored) in stream.frames.iter().enumerate() {
        let follower_res: States = core::array::from_fn(|i| JointState {
            theta: follower.state.joints[i].theta,
            omega: follower.state.joints[i].omega,
            tau: ctl[i].tau_reaction(),
        });
        let follower_cmd: Frame = core::array::from_fn(|i| CommandFrame {
            theta_ref: stored[i].theta,
            omega_ref: stored[i].omega,
            tau_ref: -stored[i].tau,
        });
        let mut tau = [0.0; N_JOINTS];
        for i in 0..N_JOINTS {
            tau[i] = ctl[i].step(&follower_cmd[i], &follower_res[i], dt);
        }
        let env = follower.step(tau, [0.0; N_JOINTS], dt);
        trace.ticks.push(TickRecord {
            tick: tick as u64,
            leader_cmd: follower_cmd,
            leader_res: *stored,
            follower_cmd,
            follower_res,
            env,
            object_pos: follower.state.object_pos,
            held: follower.state.held,
        });
        if follower.state.fault || ctl.iter().any(|c| c.fault) {
            return trace;
        }
    }
    trace
}

/// Attempt counts for one ratio during playback collection.
#[derive(Debug, Clone, Copy)]
pub struct RatioStats {
    pub ratio: f64,
    pub attempts: usize,
    pub successes: usize,
}

/// Result of [`collect_playbacks`]: successful traces in collection order,
/// failed attempts (flagged, for diagnostics), and per-ratio attempt counts.
#[derive(Debug)]
pub struct Collection {
    pub successes: Vec<MotionTrace>,
    pub failures: Vec<MotionTrace>,
    pub stats: Vec<RatioStats>,
}

impl Collection {
    /// True when some ratio exhausted its retry budget short of the target.
    pub fn shortfall(&self, per_ratio: usize) -> bool {
        self.stats.iter().any(|s| s.successes < per_ratio)
    }
}

/// Replays `trace` at each ratio until `per_ratio` successes or `retry_cap`
/// attempts. Fresh world resets re-randomize only the seed-driven nuisance
/// parameters; only the success predicate decides what is kept.
#[allow(clippy::too_many_arguments)]
pub fn collect_playbacks(
    trace: &MotionTrace,
    task: TaskKind,
    variant: Variant,
    ratios: &[f64],
    per_ratio: usize,
    retry_cap: usize,
    seed: u64,
    predicate: &dyn Fn(&MotionTrace) -> bool,
) -> Result<Collection, MocopyError> {
    let mut out = Collection {
        successes: Vec::new(),
        failures: Vec::new(),
        stats: Vec::new(),
    };
    for (ri, &ratio) in ratios.iter().enumerate() {
        let stream = resample_trace(trace, SpeedRatio::new(ratio)?)?;
        let mut stats = RatioStats {
            ratio,
            attempts: 0,
            successes: 0,
        };
        while stats.successes < per_ratio && stats.attempts < retry_cap {
            let attempt_seed = seed
                .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(1 + ri as u64 * 1000 + stats.attempts as u64));
            let mut rng = Seeded::derive(attempt_seed, 0x6d0c);
            let mut world = tasks::follower_world(task, variant, &mut rng);
            let meta = EpisodeMeta {
                id: tasks::trace_id(task, variant, ratio, stats.attempts),
                task,
                variant,
                ratio,
                seed: attempt_seed,
                outcome: Outcome::Failed,
            };
            let mut result = playback(&mut world, &stream, meta);
            stats.attempts += 1;
            if result.ticks.len() == stream.frames.len() && predicate(&result) {
                result.meta.outcome = Outcome::Success;
                result.meta.id = format!(
                    "{}",
                    tasks::trace_id(task, variant, ratio, stats.successes)
                );
                stats.successes += 1;
                out.successes.push(result);
            } else {
                out.failures.push(result);
            }
        }
        out.stats.push(stats);
    }
    Ok(out)
}

/// Human-readable shortfall report line per ratio.
pub fn shortfall_report(c: &Collection, per_ratio: usize) -> String {
    let mut s = String::new();
    for st in &c.stats {
        if st.successes < per_ratio {
            s.push_str(&format!(
                "ratio {}: {}/{} successes after {} attempts\n",
                st.ratio, st.successes, per_ratio, st.attempts
            ));
        }
    }
    s
}

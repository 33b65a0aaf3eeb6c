//! Four-channel bilateral coupling of leader and follower, and the teaching
//! loop that records demonstrations.
//!
//! The coupling drives `theta_f - theta_l -> 0` and `tau_f + tau_l -> 0`:
//! each side's references are the other side's responses, with the force
//! sign flipped.

use alloc::string::String;
use alloc::vec::Vec;

use crate::control::{CommandFrame, GainSet, JointState};
use crate::rng::Seeded;
use crate::sim::{ContactSample, OperatorInstance, OperatorModel, World};
use crate::tasks::{self, TaskKind, Variant};
use crate::{CONTROL_DT, N_JOINTS};

pub type Frame = [CommandFrame; N_JOINTS];
pub type States = [JointState; N_JOINTS];

/// Channel gains for both sides. Symmetric full gains on leader and
/// follower; no inter-robot scaling.
#[derive(Debug, Clone, Copy)]
pub struct BilateralGains {
    pub gains: GainSet,
}

impl Default for BilateralGains {
    fn default() -> Self {
        BilateralGains {
            gains: tasks::default_gains(),
        }
    }
}

/// Episode outcome as judged by the task success predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failed,
}

#[derive(Debug, Clone)]
pub struct EpisodeMeta {
    pub id: String,
    pub task: TaskKind,
    pub variant: Variant,
    /// Playback speed ratio; 1.0 for teaching episodes.
    pub ratio: f64,
    pub seed: u64,
    pub outcome: Outcome,
}

/// One 500 Hz sample of both robots plus the follower's environment.
#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub tick: u64,
    pub leader_cmd: Frame,
    pub leader_res: States,
    pub follower_cmd: Frame,
    pub follower_res: States,
    pub env: ContactSample,
    pub object_pos: f64,
    pub held: bool,
}

/// Uniform 500 Hz log of one episode.
#[derive(Debug, Clone)]
pub struct MotionTrace {
    pub dt: f64,
    pub meta: EpisodeMeta,
    pub ticks: Vec<TickRecord>,
}

impl MotionTrace {
    pub fn duration(&self) -> f64 {
        self.ticks.len() as f64 * self.dt
    }

    /// RMS of `theta_f - theta_l` across joints and ticks.
    pub fn position_residual_rms(&self) -> f64 {
        let mut acc = 0.0;
        let mut n = 0usize;
        for t in &self.ticks {
            for i in 0..N_JOINTS {
                let e = t.follower_res[i].theta - t.leader_res[i].theta;
                acc += e * e;
                n += 1;
            }
        }
        if n == 0 {
            return 0.0;
        }
        libm::sqrt(acc / n as f64)
    }

    /// RMS of `tau_f + tau_l` over contact-phase ticks (where the follower
    /// feels meaningful external torque), together with the peak |tau_f|.
    pub fn force_residual_rms_and_peak(&self) -> (f64, f64) {
        let mut peak: f64 = 0.0;
        for t in &self.ticks {
            for i in 0..N_JOINTS {
                peak = peak.max(libm::fabs(t.follower_res[i].tau));
            }
        }
        let gate = 0.1 * peak;
        let mut acc = 0.0;
        let mut n = 0usize;
        for t in &self.ticks {
            for i in 0..N_JOINTS {
                if libm::fabs(t.follower_res[i].tau) >= gate {
                    let e = t.follower_res[i].tau + t.leader_res[i].tau;
                    acc += e * e;
                    n += 1;
                }
            }
        }
        let rms = if n == 0 { 0.0 } else { libm::sqrt(acc / n as f64) };
        (rms, peak)
    }
}

/// Cross-wires responses into references: the follower follows the leader,
/// the leader renders the follower's reaction back to the operator.
pub fn bilateral_step(leader: &States, follower: &States) -> (Frame, Frame) {
    let mut leader_cmd = [CommandFrame::default(); N_JOINTS];
    let mut follower_cmd = [CommandFrame::default(); N_JOINTS];
    for i in 0..N_JOINTS {
        follower_cmd[i] = CommandFrame {
            theta_ref: leader[i].theta,
            omega_ref: leader[i].omega,
            tau_ref: -leader[i].tau,
        };
        leader_cmd[i] = CommandFrame {
            theta_ref: follower[i].theta,
            omega_ref: follower[i].omega,
            tau_ref: -follower[i].tau,
        };
    }
    (leader_cmd, follower_cmd)
}

/// Runs one teaching episode: the scripted operator drives the leader, the
/// follower mirrors it against the environment, both sides are logged at
/// 500 Hz. The outcome is judged by `predicate` on the finished trace.
pub fn teach_episode(
    leader: &mut World,
    follower: &mut World,
    op: &OperatorModel,
    duration: f64,
    mut meta: EpisodeMeta,
    predicate: &dyn Fn(&MotionTrace) -> bool,
) -> MotionTrace {
    let dt = CONTROL_DT;
    let seed = meta.seed;
    meta.outcome = Outcome::Failed;
    let mut trace = MotionTrace {
        dt,
        meta,
        ticks: Vec::new(),
    };
    let steps = libm::ceil(duration / dt) as u64;
    if steps == 0 {
        return trace; // degenerate: empty, failed
    }
    let mut rng = Seeded::derive(seed, 0x7e41);
    let operator = OperatorInstance::new(op, &mut rng);
    let mut leader_ctl = tasks::default_controllers(&leader.arm);
    let mut follower_ctl = tasks::default_controllers(&follower.arm);
    trace.ticks.reserve(steps as usize);

    for tick in 0..steps {
        let leader_res: States = core::array::from_fn(|i| JointState {
            theta: leader.state.joints[i].theta,
            omega: leader.state.joints[i].omega,
            tau: leader_ctl[i].tau_reaction(),
        });
        let follower_res: States = core::array::from_fn(|i| JointState {
            theta: follower.state.joints[i].theta,
            omega: follower.state.joints[i].omega,
            tau: follower_ctl[i].tau_reaction(),
        });
        let (leader_cmd, follower_cmd) = bilateral_step(&leader_res, &follower_res);

        let mut tau_l = [0.0; N_JOINTS];
        let mut tau_f = [0.0; N_JOINTS];
        for i in 0..N_JOINTS {
            tau_l[i] = leader_ctl[i].step(&leader_cmd[i], &leader_res[i], dt);
            tau_f[i] = follower_ctl[i].step(&follower_cmd[i], &follower_res[i], dt);
        }
        let hand = operator.torque(&leader.state.joints, leader.state.time);
        leader.step(tau_l, hand, dt);
        let env = follower.step(tau_f, [0.0; N_JOINTS], dt);

        trace.ticks.push(TickRecord {
            tick,
            leader_cmd,
            leader_res,
            follower_cmd,
            follower_res,
            env,
            object_pos: follower.state.object_pos,
            held: follower.state.held,
        });

        let ctl_fault = leader_ctl.iter().any(|c| c.fault) || follower_ctl.iter().any(|c| c.fault);
        if leader.state.fault || follower.state.fault || ctl_fault {
            trace.meta.outcome = Outcome::Failed;
            return trace;
        }
    }
    trace.meta.outcome = if predicate(&trace) {
        Outcome::Success
    } else {
        Outcome::Failed
    };
    trace
}

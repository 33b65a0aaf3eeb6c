//! Task scenarios: world builders, operator schedules, variants, and the
//! default controller/observer parameters used across the workbench.
//!
//! Two tasks mirror a carry (pick-and-place) and a press-and-slide (wiping)
//! setup. Each has two training variants; the carry task adds two eval-only
//! object classes with impedances far outside the trained pair.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::control::{GainSet, JointController, ObserverState};
use crate::rng::Seeded;
use crate::sim::{ArmModel, Compliance, ContactModel, EnvModel, JointParams, OperatorModel, World};
use crate::N_JOINTS;

/// Which experiment a world/schedule belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    /// Duration-labeled carry task.
    Pick,
    /// Frequency-labeled wipe task.
    Wipe,
}

impl TaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::Pick => "pick",
            TaskKind::Wipe => "wipe",
        }
    }

    pub fn parse(s: &str) -> Option<TaskKind> {
        match s {
            "pick" => Some(TaskKind::Pick),
            "wipe" => Some(TaskKind::Wipe),
            _ => None,
        }
    }
}

/// Environment variant within a task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Pick: stiff object (trained).
    Hard,
    /// Pick: soft object (trained).
    Soft,
    /// Pick: much stiffer object, eval only.
    Tap,
    /// Pick: much softer object, eval only.
    Cloth,
    /// Wipe: high surface (trained).
    High,
    /// Wipe: low surface (trained).
    Low,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Hard => "hard",
            Variant::Soft => "soft",
            Variant::Tap => "tap",
            Variant::Cloth => "cloth",
            Variant::High => "high",
            Variant::Low => "low",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        match s {
            "hard" => Some(Variant::Hard),
            "soft" => Some(Variant::Soft),
            "tap" => Some(Variant::Tap),
            "cloth" => Some(Variant::Cloth),
            "high" => Some(Variant::High),
            "low" => Some(Variant::Low),
            _ => None,
        }
    }

    /// Variants demonstrations are taught on.
    pub fn training_set(task: TaskKind) -> Vec<Variant> {
        match task {
            TaskKind::Pick => vec![Variant::Hard, Variant::Soft],
            TaskKind::Wipe => vec![Variant::High, Variant::Low],
        }
    }

    /// Variants the evaluation grid covers.
    pub fn eval_set(task: TaskKind) -> Vec<Variant> {
        match task {
            TaskKind::Pick => vec![Variant::Hard, Variant::Soft, Variant::Tap, Variant::Cloth],
            TaskKind::Wipe => vec![Variant::High, Variant::Low],
        }
    }
}

/// Default arm: lift (0), sweep (1), gripper (2). True inertias carry a
/// 10% model error against the nominal values the observers use.
pub fn default_arm() -> ArmModel {
    ArmModel {
        joints: [
            JointParams {
                inertia_nominal: 0.020,
                inertia_true: 0.022,
                viscous: 0.040,
                coulomb: 0.050,
                stribeck_torque: 0.060,
                stribeck_vel: 0.10,
                gravity: 0.25,
                limit_lo: -1.5,
                limit_hi: 1.5,
                torque_max: 8.0,
            },
            JointParams {
                inertia_nominal: 0.015,
                inertia_true: 0.0165,
                viscous: 0.030,
                coulomb: 0.040,
                stribeck_torque: 0.050,
                stribeck_vel: 0.08,
                gravity: 0.0,
                limit_lo: -1.2,
                limit_hi: 1.2,
                torque_max: 8.0,
            },
            JointParams {
                inertia_nominal: 0.004,
                inertia_true: 0.0044,
                viscous: 0.010,
                coulomb: 0.010,
                stribeck_torque: 0.012,
                stribeck_vel: 0.05,
                gravity: 0.0,
                limit_lo: 0.0,
                limit_hi: 1.4,
                torque_max: 4.0,
            },
        ],
    }
}

/// Controller natural frequency, rad/s (Kp = w^2, Kd = 2w).
pub const OMEGA_N: f64 = 20.0;
/// Force channel gain.
pub const KF: f64 = 2.0;
/// Observer cutoff, rad/s.
pub const OBS_CUTOFF: f64 = 100.0;

pub fn default_gains() -> GainSet {
    GainSet::critically_damped(OMEGA_N, KF)
}

/// One hybrid controller per joint, with exact-model RFOB compensation.
pub fn default_controllers(arm: &ArmModel) -> [JointController; N_JOINTS] {
    core::array::from_fn(|i| {
        let mut nominal = arm.joints[i];
        // observers work from the nominal model only
        nominal.inertia_true = nominal.inertia_nominal;
        JointController::new(
            default_gains(),
            ObserverState::new(OBS_CUTOFF, nominal, 1.0),
            arm.joints[i].torque_max,
        )
    })
}

// ---- pick task geometry ----

/// Sweep angle where the object starts.
pub const PICK_START: f64 = -0.5;
/// Sweep angle of the target zone center.
pub const PICK_TARGET: f64 = 0.5;
/// Target zone radius, rad.
pub const PICK_ZONE_RADIUS: f64 = 0.10;
/// Gripper angle below which the hand counts as closed (label threshold).
pub const GRIPPER_CLOSED: f64 = 0.6;
/// Gripper angle the operator closes to.
pub const GRIPPER_CLOSE_TARGET: f64 = 0.30;
/// Gripper open angle.
pub const GRIPPER_OPEN: f64 = 1.2;
/// Lift angle held while carrying the object.
pub const PICK_CARRY_LIFT: f64 = 0.3;

fn pick_object(variant: Variant) -> ContactModel {
    let (stiffness, damping, surface_pos, compliance) = match variant {
        Variant::Hard => (60.0, 0.20, 0.50, Compliance::Stiff),
        Variant::Soft => (20.0, 0.12, 0.72, Compliance::Soft),
        Variant::Tap => (160.0, 0.35, 0.44, Compliance::VeryStiff),
        Variant::Cloth => (8.0, 0.06, 0.90, Compliance::VerySoft),
        _ => panic!("not a pick variant"),
    };
    ContactModel {
        stiffness,
        damping,
        tangential_coulomb: 0.0,
        tangential_stribeck: 0.0,
        tangential_stribeck_vel: 1.0,
        tangential_viscous: 0.0,
        surface_pos,
        compliance,
    }
}

// ---- wipe task geometry ----

/// Lift angle the arm starts from.
pub const WIPE_LIFT_START: f64 = 0.55;
/// Press depth below the surface the operator aims for, rad.
pub const WIPE_PRESS_DEPTH: f64 = 0.025;
/// Sweep oscillation amplitude, rad.
pub const WIPE_AMPLITUDE: f64 = 0.30;
/// Demonstration wipe frequency, Hz.
pub const WIPE_BASE_FREQ: f64 = 1.0;

fn wipe_surface(variant: Variant) -> ContactModel {
    let surface_pos = match variant {
        Variant::High => 0.30,
        Variant::Low => 0.22,
        _ => panic!("not a wipe variant"),
    };
    ContactModel {
        stiffness: 80.0,
        damping: 0.30,
        // strongly speed-dependent drag, monotone in sweep speed: viscous
        // dominates, so the tangential force magnitude encodes the wiping
        // speed and a time-rescaled trace badly misstates the contact forces
        tangential_coulomb: 0.30,
        tangential_stribeck: 0.40,
        tangential_stribeck_vel: 0.15,
        tangential_viscous: 0.60,
        surface_pos,
        compliance: Compliance::Stiff,
    }
}

fn wipe_eraser() -> ContactModel {
    ContactModel {
        stiffness: 40.0,
        damping: 0.15,
        tangential_coulomb: 0.0,
        tangential_stribeck: 0.0,
        tangential_stribeck_vel: 1.0,
        tangential_viscous: 0.0,
        surface_pos: 0.55,
        compliance: Compliance::Stiff,
    }
}

/// Start pose per task.
pub fn start_pose(task: TaskKind) -> [f64; N_JOINTS] {
    match task {
        TaskKind::Pick => [0.0, 0.0, GRIPPER_OPEN],
        TaskKind::Wipe => [WIPE_LIFT_START, 0.0, GRIPPER_OPEN],
    }
}

/// Follower world for a task variant. `rng` drives the nuisance reset
/// (object placement / surface height tolerance) only.
pub fn follower_world(task: TaskKind, variant: Variant, rng: &mut Seeded) -> World {
    let arm = default_arm();
    let env = match task {
        TaskKind::Pick => EnvModel::Pick {
            object: pick_object(variant),
            start_pos: PICK_START + rng.uniform(-0.02, 0.02),
            target_pos: PICK_TARGET,
            zone_radius: PICK_ZONE_RADIUS,
            capture_radius: 0.12,
            grasp_force_min: 0.15,
            held_inertia: 0.004,
        },
        TaskKind::Wipe => {
            let mut surface = wipe_surface(variant);
            surface.surface_pos += rng.uniform(-0.005, 0.005);
            EnvModel::Wipe {
                surface,
                eraser: wipe_eraser(),
            }
        }
    };
    World::new(arm, env, start_pose(task))
}

/// Leader world: identical body, no environment (the operator hand is the
/// only leader-side contact).
pub fn leader_world(task: TaskKind) -> World {
    World::new(default_arm(), EnvModel::Free, start_pose(task))
}

/// Scripted demonstration schedule for the leader operator.
///
/// Pick: reach, close on the object, carry to the target, release, retreat;
/// 6.6 s on the stiff object, 7.0 s on the soft one (the softer object
/// needs a slower squeeze). Wipe: press, grasp, then sinusoidal wiping at
/// the metronome frequency.
pub fn operator_model(task: TaskKind, variant: Variant) -> OperatorModel {
    match task {
        TaskKind::Pick => {
            let total = match variant {
                Variant::Soft | Variant::Cloth => 7.0,
                _ => 6.6,
            };
            // phase boundaries scale with the total duration
            let s = total / 6.6;
            let reach_end = 0.5 * s;
            let close_end = 1.1 * s;
            let carry_end = 5.7 * s;
            let open_end = 6.2 * s;
            let waypoints = vec![
                (0.0, [0.0, 0.0, GRIPPER_OPEN]),
                (reach_end, [0.0, PICK_START, GRIPPER_OPEN]),
                (close_end, [0.0, PICK_START, GRIPPER_CLOSE_TARGET]),
                // lift while carrying, lower again while releasing
                (carry_end, [PICK_CARRY_LIFT, PICK_TARGET, GRIPPER_CLOSE_TARGET]),
                (open_end, [0.05, PICK_TARGET, GRIPPER_OPEN]),
                (total, [0.15, PICK_TARGET - 0.2, GRIPPER_OPEN]),
            ];
            OperatorModel {
                waypoints,
                stiffness: [30.0, 30.0, 12.0],
                damping: [1.2, 1.2, 0.5],
                torque_max: 6.0,
                jitter_bound: 0.05,
            }
        }
        TaskKind::Wipe => {
            let surface_pos = wipe_surface(variant).surface_pos;
            let press_target = surface_pos - WIPE_PRESS_DEPTH;
            let press_end = 1.2;
            let grasp_end = 2.0;
            let wipe_secs = 8.0;
            let total = grasp_end + wipe_secs;
            let mut waypoints = vec![
                (0.0, [WIPE_LIFT_START, 0.0, GRIPPER_OPEN]),
                (press_end, [press_target, 0.0, GRIPPER_OPEN]),
                (grasp_end, [press_target, 0.0, GRIPPER_CLOSE_TARGET]),
            ];
            // dense sinusoid waypoints, 20 ms spacing
            let step = 0.02;
            let mut t = grasp_end + step;
            while t <= total + 1e-9 {
                let phase = 2.0 * core::f64::consts::PI * WIPE_BASE_FREQ * (t - grasp_end);
                let sweep = WIPE_AMPLITUDE * libm::sin(phase);
                waypoints.push((t, [press_target, sweep, GRIPPER_CLOSE_TARGET]));
                t += step;
            }
            OperatorModel {
                waypoints,
                stiffness: [30.0, 30.0, 12.0],
                damping: [1.2, 1.2, 0.5],
                torque_max: 6.0,
                jitter_bound: 0.05,
            }
        }
    }
}

/// Playback speed-ratio set for a task.
pub fn ratio_set(task: TaskKind) -> Vec<f64> {
    match task {
        TaskKind::Pick => vec![0.5, 1.0, 2.0],
        TaskKind::Wipe => vec![0.5, 1.0, 1.5],
    }
}

/// Successful playbacks collected per ratio and variant.
pub fn per_ratio(task: TaskKind) -> usize {
    match task {
        TaskKind::Pick => 10,
        TaskKind::Wipe => 5,
    }
}

/// Train/validation split per (variant, ratio) condition.
pub fn split_counts(task: TaskKind) -> (usize, usize) {
    match task {
        TaskKind::Pick => (7, 3),
        TaskKind::Wipe => (3, 2),
    }
}

/// Identifier for one collected trace.
pub fn trace_id(task: TaskKind, variant: Variant, ratio: f64, index: usize) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    let _ = write!(s, "{}-{}-r{}-{:02}", task.name(), variant.name(), ratio, index);
    s
}

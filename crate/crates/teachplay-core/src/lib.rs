//! Desk-scale workbench for variable-speed teaching-playback as real-world
//! data augmentation in force-controlled imitation learning.
//!
//! The crate simulates a torque-controlled 2-joint arm plus gripper with
//! speed-nonlinear contact physics, teaches tasks through four-channel
//! bilateral control, replays taught motion at multiple speeds against the
//! simulated environment, and trains an LSTM policy on the collected
//! responses. Everything here is deterministic given the seeds handed in;
//! IO, file formats, and the CLI live in the companion `teachplay-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bilateral;
pub mod control;
pub mod datakit;
pub mod mocopy;
pub mod policy;
pub mod rng;
pub mod rollout;
pub mod sim;
pub mod tasks;

/// Joint count of the simulated body: lift, sweep, gripper.
pub const N_JOINTS: usize = 3;

/// Control and simulation period, 500 Hz.
pub const CONTROL_DT: f64 = 0.002;

/// Model period, 50 Hz; one policy tick per `MODEL_DECIMATION` control ticks.
pub const MODEL_DECIMATION: usize = 10;

//! IO companion to `teachplay-core`: experiment configuration, trace /
//! dataset / checkpoint file formats, evaluation reports, and the command
//! implementations behind the `teachplay` binary.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod dataset_io;
pub mod report;
pub mod trace_io;

/// Formats a float with Rust's shortest round-trip representation, so that
/// parsing the text back yields the identical bits. All file formats here
/// rely on this for byte-exact reruns.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

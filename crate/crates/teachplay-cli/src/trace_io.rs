//! Motion-trace file format: a text header followed by one CSV row per
//! 500 Hz tick. Diff-able, tool-agnostic, and byte-exact on round trip
//! (floats use the shortest round-trip decimal form).
//!
//! ```text
//! teachplay-trace v1
//! id <episode id>
//! task pick|wipe
//! variant <name>
//! ratio <f64>
//! seed <u64>
//! outcome success|failed
//! n_joints 3
//! rate <f64 Hz>
//! dt <f64 s>
//! ticks <count>
//! columns tick,<see below>
//! <csv rows>
//! ```
//!
//! Columns per row: `tick`, then for each side (leader, follower) and each
//! joint `theta_ref,omega_ref,tau_ref,theta_res,omega_res,tau_res`, then
//! the follower-environment extras `env_tau0..2, normal_force, grip_force,
//! penetration, object_pos, held` (held is 0/1).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use teachplay_core::bilateral::{EpisodeMeta, MotionTrace, Outcome, TickRecord};
use teachplay_core::control::{CommandFrame, JointState};
use teachplay_core::sim::ContactSample;
use teachplay_core::tasks::{TaskKind, Variant};
use teachplay_core::N_JOINTS;

use crate::fmt_f64;

pub const TRACE_MAGIC: &str = "teachplay-trace v1";

/// Fixed column layout for the current format version.
pub const COLUMNS: usize = 1 + 2 * N_JOINTS * 6 + N_JOINTS + 5;

#[derive(Debug, thiserror::Error)]
pub enum TraceIoError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("unknown trace format version: {0:?}")]
    Version(String),
    #[error("missing header field {0:?}")]
    MissingHeader(&'static str),
    #[error("bad header field {field} = {value:?}")]
    BadHeader { field: &'static str, value: String },
    #[error("record {record}: expected {expect} columns, got {got}")]
    ColumnCount {
        record: usize,
        expect: usize,
        got: usize,
    },
    #[error("record {record}, column {column}: unparseable number {value:?}")]
    BadNumber {
        record: usize,
        column: usize,
        value: String,
    },
    #[error("record {record}, column {column}: non-finite value")]
    NonFinite { record: usize, column: usize },
    #[error("truncated: header declares {declared} ticks, file ends after {got} at byte offset {offset}")]
    Truncated {
        declared: usize,
        got: usize,
        offset: usize,
    },
}

fn push_frame(row: &mut String, f: &CommandFrame, s: &JointState) {
    let _ = write!(
        row,
        ",{},{},{},{},{},{}",
        fmt_f64(f.theta_ref),
        fmt_f64(f.omega_ref),
        fmt_f64(f.tau_ref),
        fmt_f64(s.theta),
        fmt_f64(s.omega),
        fmt_f64(s.tau)
    );
}

/// Serializes a trace to the text format above.
pub fn trace_to_string(trace: &MotionTrace) -> String {
    let mut out = String::with_capacity(64 + trace.ticks.len() * 360);
    let m = &trace.meta;
    let outcome = match m.outcome {
        Outcome::Success => "success",
        Outcome::Failed => "failed",
    };
    let _ = write!(
        out,
        "{TRACE_MAGIC}\nid {}\ntask {}\nvariant {}\nratio {}\nseed {}\noutcome {}\nn_joints {}\nrate {}\ndt {}\nticks {}\n",
        m.id,
        m.task.name(),
        m.variant.name(),
        fmt_f64(m.ratio),
        m.seed,
        outcome,
        N_JOINTS,
        fmt_f64(1.0 / trace.dt),
        fmt_f64(trace.dt),
        trace.ticks.len()
    );
    out.push_str(
        "columns tick,[side x joint x (theta_ref,omega_ref,tau_ref,theta_res,omega_res,tau_res)],env_tau x joint,normal_force,grip_force,penetration,object_pos,held\n",
    );
    for t in &trace.ticks {
        let mut row = String::with_capacity(360);
        let _ = write!(row, "{}", t.tick);
        for j in 0..N_JOINTS {
            push_frame(&mut row, &t.leader_cmd[j], &t.leader_res[j]);
        }
        for j in 0..N_JOINTS {
            push_frame(&mut row, &t.follower_cmd[j], &t.follower_res[j]);
        }
        for j in 0..N_JOINTS {
            let _ = write!(row, ",{}", fmt_f64(t.env.torque[j]));
        }
        let _ = write!(
            row,
            ",{},{},{},{},{}\n",
            fmt_f64(t.env.normal_force),
            fmt_f64(t.env.grip_force),
            fmt_f64(t.env.penetration),
            fmt_f64(t.object_pos),
            u8::from(t.held)
        );
        out.push_str(&row);
    }
    out
}

pub fn save_trace(path: &Path, trace: &MotionTrace) -> Result<(), TraceIoError> {
    std::fs::write(path, trace_to_string(trace)).map_err(|source| TraceIoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

struct HeaderCursor<'a> {
    text: &'a str,
    /// Byte offset of the next unread line.
    offset: usize,
}

impl<'a> HeaderCursor<'a> {
    fn next_line(&mut self) -> Option<&'a str> {
        if self.offset >= self.text.len() {
            return None;
        }
        let rest = &self.text[self.offset..];
        let (line, advance) = match rest.find('\n') {
            Some(i) => (&rest[..i], i + 1),
            None => (rest, rest.len()),
        };
        self.offset += advance;
        Some(line)
    }

    fn field(&mut self, name: &'static str) -> Result<&'a str, TraceIoError> {
        let line = self.next_line().ok_or(TraceIoError::MissingHeader(name))?;
        line.strip_prefix(name)
            .and_then(|v| v.strip_prefix(' '))
            .ok_or(TraceIoError::MissingHeader(name))
    }
}

fn parse_cell(
    cell: &str,
    record: usize,
    column: usize,
) -> Result<f64, TraceIoError> {
    let v: f64 = cell.parse().map_err(|_| TraceIoError::BadNumber {
        record,
        column,
        value: cell.to_string(),
    })?;
    if !v.is_finite() {
        return Err(TraceIoError::NonFinite { record, column });
    }
    Ok(v)
}

/// Parses the text format above back into a trace.
pub fn trace_from_str(text: &str) -> Result<MotionTrace, TraceIoError> {
    let mut cur = HeaderCursor { text, offset: 0 };
    let magic = cur.next_line().unwrap_or("");
    if magic != TRACE_MAGIC {
        return Err(TraceIoError::Version(magic.to_string()));
    }
    let id = cur.field("id")?.to_string();
    let task_s = cur.field("task")?;
    let task = TaskKind::parse(task_s).ok_or(TraceIoError::BadHeader {
        field: "task",
        value: task_s.to_string(),
    })?;
    let variant_s = cur.field("variant")?;
    let variant = Variant::parse(variant_s).ok_or(TraceIoError::BadHeader {
        field: "variant",
        value: variant_s.to_string(),
    })?;
    let ratio = parse_header_f64(&mut cur, "ratio")?;
    let seed_s = cur.field("seed")?;
    let seed: u64 = seed_s.parse().map_err(|_| TraceIoError::BadHeader {
        field: "seed",
        value: seed_s.to_string(),
    })?;
    let outcome = match cur.field("outcome")? {
        "success" => Outcome::Success,
        "failed" => Outcome::Failed,
        other => {
            return Err(TraceIoError::BadHeader {
                field: "outcome",
                value: other.to_string(),
            })
        }
    };
    let nj = parse_header_f64(&mut cur, "n_joints")?;
    if nj != N_JOINTS as f64 {
        return Err(TraceIoError::BadHeader {
            field: "n_joints",
            value: nj.to_string(),
        });
    }
    let _rate = parse_header_f64(&mut cur, "rate")?;
    let dt = parse_header_f64(&mut cur, "dt")?;
    let ticks_s = cur.field("ticks")?;
    let declared: usize = ticks_s.parse().map_err(|_| TraceIoError::BadHeader {
        field: "ticks",
        value: ticks_s.to_string(),
    })?;
    cur.field("columns")?;

    let mut ticks = Vec::with_capacity(declared);
    for record in 0..declared {
        let row_offset = cur.offset;
        let line = match cur.next_line() {
            Some(l) if !l.is_empty() => l,
            _ => {
                return Err(TraceIoError::Truncated {
                    declared,
                    got: record,
                    offset: row_offset,
                })
            }
        };
        ticks.push(parse_row(line, record)?);
    }
    Ok(MotionTrace {
        dt,
        meta: EpisodeMeta {
            id,
            task,
            variant,
            ratio,
            seed,
            outcome,
        },
        ticks,
    })
}

fn parse_header_f64(cur: &mut HeaderCursor, name: &'static str) -> Result<f64, TraceIoError> {
    let v = cur.field(name)?;
    v.parse().map_err(|_| TraceIoError::BadHeader {
        field: name,
        value: v.to_string(),
    })
}

fn parse_row(line: &str, record: usize) -> Result<TickRecord, TraceIoError> {
    let cells: Vec<&str> = line.split(',').collect();
    if cells.len() != COLUMNS {
        return Err(TraceIoError::ColumnCount {
            record,
            expect: COLUMNS,
            got: cells.len(),
        });
    }
    let tick: u64 = cells[0].parse().map_err(|_| TraceIoError::BadNumber {
        record,
        column: 0,
        value: cells[0].to_string(),
    })?;
    let mut col = 1;
    let num = |cells: &[&str], col: &mut usize| -> Result<f64, TraceIoError> {
        let v = parse_cell(cells[*col], record, *col)?;
        *col += 1;
        Ok(v)
    };
    let side = |cells: &[&str],
                    col: &mut usize|
     -> Result<([CommandFrame; N_JOINTS], [JointState; N_JOINTS]), TraceIoError> {
        let mut cmd = [CommandFrame::default(); N_JOINTS];
        let mut res = [JointState::default(); N_JOINTS];
        for j in 0..N_JOINTS {
            cmd[j].theta_ref = num(cells, col)?;
            cmd[j].omega_ref = num(cells, col)?;
            cmd[j].tau_ref = num(cells, col)?;
            res[j].theta = num(cells, col)?;
            res[j].omega = num(cells, col)?;
            res[j].tau = num(cells, col)?;
        }
        Ok((cmd, res))
    };
    let (leader_cmd, leader_res) = side(&cells, &mut col)?;
    let (follower_cmd, follower_res) = side(&cells, &mut col)?;
    let mut env = ContactSample::default();
    for j in 0..N_JOINTS {
        env.torque[j] = num(&cells, &mut col)?;
    }
    env.normal_force = num(&cells, &mut col)?;
    env.grip_force = num(&cells, &mut col)?;
    env.penetration = num(&cells, &mut col)?;
    let object_pos = num(&cells, &mut col)?;
    let held_cell = cells[col];
    let held = match held_cell {
        "0" => false,
        "1" => true,
        _ => {
            return Err(TraceIoError::BadNumber {
                record,
                column: col,
                value: held_cell.to_string(),
            })
        }
    };
    Ok(TickRecord {
        tick,
        leader_cmd,
        leader_res,
        follower_cmd,
        follower_res,
        env,
        object_pos,
        held,
    })
}

pub fn load_trace(path: &Path) -> Result<MotionTrace, TraceIoError> {
    let text = std::fs::read_to_string(path).map_err(|source| TraceIoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    trace_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_trace(n: usize) -> MotionTrace {
        let mut ticks = Vec::new();
        for i in 0..n {
            let x = i as f64 * 0.37 - 1.0;
            let mut t = TickRecord {
                tick: i as u64,
                leader_cmd: Default::default(),
                leader_res: Default::default(),
                follower_cmd: Default::default(),
                follower_res: Default::default(),
                env: ContactSample::default(),
                object_pos: x * 0.1,
                held: i % 2 == 0,
            };
            for j in 0..N_JOINTS {
                t.leader_cmd[j].theta_ref = x + j as f64;
                t.leader_cmd[j].tau_ref = -x / 3.0;
                t.leader_res[j].theta = x * 1.0000001;
                t.follower_res[j].tau = f64::from_bits(0x3ff0_0000_0000_0001) * x;
                t.env.torque[j] = x.sin();
            }
            t.env.penetration = 1e-17 * x;
            ticks.push(t);
        }
        MotionTrace {
            dt: 0.002,
            meta: EpisodeMeta {
                id: "demo-pick-hard".into(),
                task: TaskKind::Pick,
                variant: Variant::Hard,
                ratio: 1.0,
                seed: 42,
                outcome: Outcome::Success,
            },
            ticks,
        }
    }

    #[test]
    fn round_trip_bit_exact() {
        let trace = sample_trace(25);
        let text = trace_to_string(&trace);
        let back = trace_from_str(&text).unwrap();
        assert_eq!(trace.dt.to_bits(), back.dt.to_bits());
        assert_eq!(trace.meta.id, back.meta.id);
        assert_eq!(trace.ticks, back.ticks);
        // and the re-serialization is byte-identical
        assert_eq!(text, trace_to_string(&back));
    }

    #[test]
    fn truncated_file_names_offset() {
        let text = trace_to_string(&sample_trace(10));
        let cut = text.len() - 40;
        let truncated = &text[..cut];
        match trace_from_str(truncated) {
            Err(TraceIoError::Truncated { declared, got, offset }) => {
                assert_eq!(declared, 10);
                assert!(got < 10);
                assert!(offset <= cut);
            }
            // the cut may land mid-row instead: then the row is malformed
            Err(TraceIoError::ColumnCount { record, .. }) => assert_eq!(record, 9),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn unknown_version_rejected() {
        let err = trace_from_str("teachplay-trace v9\n").unwrap_err();
        assert!(matches!(err, TraceIoError::Version(_)));
    }

    #[test]
    fn non_finite_cell_names_record() {
        let mut trace = sample_trace(5);
        trace.ticks[3].leader_res[1].omega = f64::NAN;
        let text = trace_to_string(&trace);
        match trace_from_str(&text) {
            Err(TraceIoError::NonFinite { record, .. }) => assert_eq!(record, 3),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn save_load_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.trace");
        let trace = sample_trace(8);
        save_trace(&path, &trace).unwrap();
        let back = load_trace(&path).unwrap();
        assert_eq!(trace.ticks, back.ticks);
    }
}

//! Dataset file format: mirrors the trace format — a text header carrying
//! the normalization stats, then delimited sequences of CSV rows. Floats
//! use the shortest round-trip decimal form, so save→load is bit-exact.
//!
//! ```text
//! teachplay-dataset v1
//! task pick|wipe
//! input_dim 10
//! target_dim 18
//! input_mean <csv>
//! input_std <csv>
//! target_mean <csv>
//! target_std <csv>
//! train <count>
//! val <count>
//! sequence <train|val> <trace_id> <ratio> <phase> <label> <len>
//! <len input rows, csv>
//! <len target rows, csv>
//! ...
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use teachplay_core::datakit::{Dataset, LabeledSequence, NormStats, INPUT_DIM, TARGET_DIM};
use teachplay_core::tasks::TaskKind;

use crate::fmt_f64;

pub const DATASET_MAGIC: &str = "teachplay-dataset v1";

#[derive(Debug, thiserror::Error)]
pub enum DatasetIoError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("unknown dataset format version: {0:?}")]
    Version(String),
    #[error("missing or malformed header field {0:?}")]
    Header(&'static str),
    #[error("sequence {index}: malformed sequence header {line:?}")]
    SequenceHeader { index: usize, line: String },
    #[error("sequence {index}, row {row}: expected {expect} values, got {got}")]
    RowWidth {
        index: usize,
        row: usize,
        expect: usize,
        got: usize,
    },
    #[error("sequence {index}, row {row}: unparseable or non-finite value {value:?}")]
    BadValue {
        index: usize,
        row: usize,
        value: String,
    },
    #[error("truncated: expected {expect} sequences, file ends after {got}")]
    Truncated { expect: usize, got: usize },
}

fn push_vec(out: &mut String, v: &[f64]) {
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_f64(*x));
    }
    out.push('\n');
}

pub fn dataset_to_string(ds: &Dataset) -> String {
    let rows: usize = ds
        .train
        .iter()
        .chain(ds.val.iter())
        .map(|s| 2 * s.inputs.len())
        .sum();
    let mut out = String::with_capacity(128 + rows * 200);
    let _ = write!(
        out,
        "{DATASET_MAGIC}\ntask {}\ninput_dim {}\ntarget_dim {}\n",
        ds.task.name(),
        INPUT_DIM,
        TARGET_DIM
    );
    for (name, v) in [
        ("input_mean", &ds.input_stats.mean),
        ("input_std", &ds.input_stats.std),
        ("target_mean", &ds.target_stats.mean),
        ("target_std", &ds.target_stats.std),
    ] {
        out.push_str(name);
        out.push(' ');
        push_vec(&mut out, v);
    }
    let _ = write!(out, "train {}\nval {}\n", ds.train.len(), ds.val.len());
    for (split, seqs) in [("train", &ds.train), ("val", &ds.val)] {
        for s in seqs {
            let _ = write!(
                out,
                "sequence {split} {} {} {} {} {}\n",
                s.trace_id,
                fmt_f64(s.ratio),
                s.phase,
                fmt_f64(s.label),
                s.inputs.len()
            );
            for row in &s.inputs {
                push_vec(&mut out, row);
            }
            for row in &s.targets {
                push_vec(&mut out, row);
            }
        }
    }
    out
}

pub fn save_dataset(path: &Path, ds: &Dataset) -> Result<(), DatasetIoError> {
    std::fs::write(path, dataset_to_string(ds)).map_err(|source| DatasetIoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_vec(
    line: &str,
    expect: usize,
    index: usize,
    row: usize,
) -> Result<Vec<f64>, DatasetIoError> {
    let cells: Vec<&str> = line.split(',').collect();
    if cells.len() != expect {
        return Err(DatasetIoError::RowWidth {
            index,
            row,
            expect,
            got: cells.len(),
        });
    }
    cells
        .iter()
        .map(|c| {
            c.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| DatasetIoError::BadValue {
                    index,
                    row,
                    value: c.to_string(),
                })
        })
        .collect()
}

pub fn dataset_from_str(text: &str) -> Result<Dataset, DatasetIoError> {
    let mut lines = text.lines();
    if lines.next() != Some(DATASET_MAGIC) {
        return Err(DatasetIoError::Version(
            text.lines().next().unwrap_or("").to_string(),
        ));
    }
    let mut field = |name: &'static str| -> Result<String, DatasetIoError> {
        lines
            .next()
            .and_then(|l| l.strip_prefix(name))
            .and_then(|v| v.strip_prefix(' '))
            .map(str::to_string)
            .ok_or(DatasetIoError::Header(name))
    };
    let task =
        TaskKind::parse(&field("task")?).ok_or(DatasetIoError::Header("task"))?;
    let input_dim: usize = field("input_dim")?
        .parse()
        .map_err(|_| DatasetIoError::Header("input_dim"))?;
    let target_dim: usize = field("target_dim")?
        .parse()
        .map_err(|_| DatasetIoError::Header("target_dim"))?;
    let mut stats_vec = |name: &'static str, dim: usize| -> Result<Vec<f64>, DatasetIoError> {
        let line = field(name)?;
        parse_vec(&line, dim, 0, 0).map_err(|_| DatasetIoError::Header(name))
    };
    let input_stats = NormStats {
        mean: stats_vec("input_mean", input_dim)?,
        std: stats_vec("input_std", input_dim)?,
    };
    let target_stats = NormStats {
        mean: stats_vec("target_mean", target_dim)?,
        std: stats_vec("target_std", target_dim)?,
    };
    let n_train: usize = field("train")?
        .parse()
        .map_err(|_| DatasetIoError::Header("train"))?;
    let n_val: usize = field("val")?
        .parse()
        .map_err(|_| DatasetIoError::Header("val"))?;

    let mut train = Vec::with_capacity(n_train);
    let mut val = Vec::with_capacity(n_val);
    for index in 0..n_train + n_val {
        let header = lines.next().ok_or(DatasetIoError::Truncated {
            expect: n_train + n_val,
            got: index,
        })?;
        let bad = || DatasetIoError::SequenceHeader {
            index,
            line: header.to_string(),
        };
        let mut parts = header.split(' ');
        if parts.next() != Some("sequence") {
            return Err(bad());
        }
        let split = parts.next().ok_or_else(bad)?;
        let trace_id = parts.next().ok_or_else(bad)?.to_string();
        let ratio: f64 = parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let phase: usize = parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let label: f64 = parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let len: usize = parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let mut read_block = |dim: usize, base: usize| -> Result<Vec<Vec<f64>>, DatasetIoError> {
            (0..len)
                .map(|r| {
                    let line = lines.next().ok_or(DatasetIoError::Truncated {
                        expect: n_train + n_val,
                        got: index,
                    })?;
                    parse_vec(line, dim, index, base + r)
                })
                .collect()
        };
        let inputs = read_block(input_dim, 0)?;
        let targets = read_block(target_dim, len)?;
        let seq = LabeledSequence {
            inputs,
            targets,
            trace_id,
            ratio,
            phase,
            label,
        };
        match split {
            "train" => train.push(seq),
            "val" => val.push(seq),
            _ => return Err(bad()),
        }
    }
    Ok(Dataset {
        task,
        train,
        val,
        input_stats,
        target_stats,
    })
}

pub fn load_dataset(path: &Path) -> Result<Dataset, DatasetIoError> {
    let text = std::fs::read_to_string(path).map_err(|source| DatasetIoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    dataset_from_str(&text)
}

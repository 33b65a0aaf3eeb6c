//! Evaluation-report files and the proposed-vs-naive comparison summary.
//!
//! The trial file has one CSV row per rollout; the summary file has one row
//! per (label, variant) cell. `measured` is seconds of closed-gripper time
//! for the duration task and hertz for the frequency task, empty on failed
//! trials.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use teachplay_core::rollout::{CellResult, EvalReport, TaskSpec};
use teachplay_core::tasks::{TaskKind, Variant};

use crate::fmt_f64;

pub const EVAL_MAGIC: &str = "teachplay-eval v1";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("unknown eval report format version: {0:?}")]
    Version(String),
    #[error("missing or malformed header field {0:?}")]
    Header(&'static str),
    #[error("row {0}: malformed record {1:?}")]
    Row(usize, String),
    #[error("reports cover different grids: {0}")]
    GridMismatch(String),
}

/// One row per trial: `label,variant,trial,success,measured`.
pub fn report_to_string(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "{EVAL_MAGIC}\ntask {}\nlabel,variant,trial,success,measured\n",
        report.task.name()
    );
    for cell in &report.cells {
        for trial in 0..cell.trials {
            // `measured` holds successes only, in success order; align the
            // successful trials first (per-trial order is not retained).
            let success = trial < cell.successes;
            let measured = if success {
                fmt_f64(cell.measured[trial])
            } else {
                String::new()
            };
            let _ = write!(
                out,
                "{},{},{},{},{}\n",
                fmt_f64(cell.label),
                cell.variant.name(),
                trial,
                u8::from(success),
                measured
            );
        }
    }
    out
}

/// One row per cell: `label,variant,trials,successes,rate`.
pub fn summary_to_string(report: &EvalReport, spec: &TaskSpec) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "{EVAL_MAGIC}\ntask {}\nlabel,variant,range,trials,successes,rate\n",
        report.task.name()
    );
    for cell in &report.cells {
        let range = if spec.is_interpolated(cell.label) {
            "interpolated"
        } else {
            "extrapolated"
        };
        let _ = write!(
            out,
            "{},{},{},{},{},{}\n",
            fmt_f64(cell.label),
            cell.variant.name(),
            range,
            cell.trials,
            cell.successes,
            fmt_f64(cell.successes as f64 / cell.trials.max(1) as f64)
        );
    }
    let _ = write!(
        out,
        "overall,,,{},{},{}\n",
        report.cells.iter().map(|c| c.trials).sum::<usize>(),
        report.cells.iter().map(|c| c.successes).sum::<usize>(),
        fmt_f64(report.overall_rate())
    );
    out
}

pub fn save_report(path: &Path, report: &EvalReport) -> Result<(), ReportError> {
    std::fs::write(path, report_to_string(report)).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn report_from_str(text: &str) -> Result<EvalReport, ReportError> {
    let mut lines = text.lines();
    let magic = lines.next().unwrap_or("");
    if magic != EVAL_MAGIC {
        return Err(ReportError::Version(magic.to_string()));
    }
    let task_line = lines
        .next()
        .and_then(|l| l.strip_prefix("task "))
        .ok_or(ReportError::Header("task"))?;
    let task = TaskKind::parse(task_line).ok_or(ReportError::Header("task"))?;
    lines.next().ok_or(ReportError::Header("columns"))?;

    let mut cells: Vec<CellResult> = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let bad = || ReportError::Row(i, line.to_string());
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(bad());
        }
        let label: f64 = parts[0].parse().map_err(|_| bad())?;
        let variant = Variant::parse(parts[1]).ok_or_else(bad)?;
        let success = match parts[3] {
            "0" => false,
            "1" => true,
            _ => return Err(bad()),
        };
        let measured: Option<f64> = if parts[4].is_empty() {
            None
        } else {
            Some(parts[4].parse().map_err(|_| bad())?)
        };
        let cell = match cells
            .iter_mut()
            .find(|c| c.label == label && c.variant == variant)
        {
            Some(c) => c,
            None => {
                cells.push(CellResult {
                    label,
                    variant,
                    trials: 0,
                    successes: 0,
                    measured: Vec::new(),
                });
                cells.last_mut().unwrap()
            }
        };
        cell.trials += 1;
        if success {
            cell.successes += 1;
            cell.measured.push(measured.ok_or_else(bad)?);
        }
    }
    Ok(EvalReport { task, cells })
}

pub fn load_report(path: &Path) -> Result<EvalReport, ReportError> {
    let text = std::fs::read_to_string(path).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    report_from_str(&text)
}

/// Side-by-side comparison of two evaluation reports over the same grid.
pub struct Comparison {
    pub overall_delta_pp: f64,
    pub interpolated_delta_pp: f64,
    pub text: String,
}

/// Builds the proposed-vs-naive summary: per-cell success rates, overall and
/// interpolated-range deltas in percentage points, and the label-tracking
/// correlation (Spearman of commanded label vs measured value on successful
/// trials) per mode.
pub fn compare(
    proposed: &EvalReport,
    naive: &EvalReport,
    spec: &TaskSpec,
) -> Result<Comparison, ReportError> {
    if proposed.task != naive.task {
        return Err(ReportError::GridMismatch(format!(
            "tasks differ: {} vs {}",
            proposed.task.name(),
            naive.task.name()
        )));
    }
    if proposed.cells.len() != naive.cells.len()
        || proposed
            .cells
            .iter()
            .zip(naive.cells.iter())
            .any(|(a, b)| a.label != b.label || a.variant != b.variant || a.trials != b.trials)
    {
        return Err(ReportError::GridMismatch(
            "cell grids (label, variant, trials) differ".to_string(),
        ));
    }

    let mut text = String::new();
    let _ = write!(
        text,
        "task: {}\n\nlabel    variant    proposed    naive\n",
        proposed.task.name()
    );
    for (p, n) in proposed.cells.iter().zip(naive.cells.iter()) {
        let _ = write!(
            text,
            "{:<8} {:<10} {}/{:<9} {}/{}\n",
            p.label,
            p.variant.name(),
            p.successes,
            p.trials,
            n.successes,
            n.trials
        );
    }
    let overall_delta_pp = 100.0 * (proposed.overall_rate() - naive.overall_rate());
    let interpolated_delta_pp =
        100.0 * (proposed.interpolated_rate(spec) - naive.interpolated_rate(spec));
    let _ = write!(
        text,
        "\noverall:      proposed {:.1}% vs naive {:.1}%  (delta {:+.1} pp)\n",
        100.0 * proposed.overall_rate(),
        100.0 * naive.overall_rate(),
        overall_delta_pp
    );
    let _ = write!(
        text,
        "interpolated: proposed {:.1}% vs naive {:.1}%  (delta {:+.1} pp)\n",
        100.0 * proposed.interpolated_rate(spec),
        100.0 * naive.interpolated_rate(spec),
        interpolated_delta_pp
    );
    let _ = write!(
        text,
        "label tracking (Spearman rho): proposed {:.3} vs naive {:.3}\n",
        proposed.label_spearman(),
        naive.label_spearman()
    );
    Ok(Comparison {
        overall_delta_pp,
        interpolated_delta_pp,
        text,
    })
}

//! Policy checkpoint format: a self-describing text header (network shape,
//! training provenance, normalization stats) followed by the flat parameter
//! vector as raw IEEE-754 binary64 values in little-endian byte order.
//!
//! ```text
//! teachplay-checkpoint v1
//! task pick|wipe
//! layers <n> hidden <n> input_dim <n> output_dim <n> window <n>
//! seed <u64>
//! epoch <count>
//! best_val_loss <f64>
//! input_mean <csv>
//! input_std <csv>
//! target_mean <csv>
//! target_std <csv>
//! payload <param count> f64 le
//! <raw little-endian f64 bytes>
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use teachplay_core::datakit::NormStats;
use teachplay_core::policy::{PolicyConfig, PolicyParams};
use teachplay_core::tasks::TaskKind;

use crate::fmt_f64;

pub const CHECKPOINT_MAGIC: &str = "teachplay-checkpoint v1";

/// A trained policy plus everything needed to run it: the normalization
/// stats it was trained under and the provenance that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub task: TaskKind,
    pub params: PolicyParams,
    pub input_stats: NormStats,
    pub target_stats: NormStats,
    pub seed: u64,
    pub epoch: usize,
    pub best_val_loss: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("unknown checkpoint format version: {0:?}")]
    Version(String),
    #[error("missing or malformed header field {0:?}")]
    Header(&'static str),
    #[error("payload truncated: expected {expect} parameters ({} bytes), got {got_bytes} bytes", expect * 8)]
    Truncated { expect: usize, got_bytes: usize },
    #[error("parameter {index} is non-finite")]
    NonFinite { index: usize },
}

pub fn checkpoint_to_bytes(ck: &Checkpoint) -> Vec<u8> {
    let cfg = &ck.params.config;
    let mut header = String::new();
    let _ = write!(
        header,
        "{CHECKPOINT_MAGIC}\ntask {}\nlayers {} hidden {} input_dim {} output_dim {} window {}\nseed {}\nepoch {}\nbest_val_loss {}\n",
        ck.task.name(),
        cfg.num_layers,
        cfg.hidden,
        cfg.input_dim,
        cfg.output_dim,
        cfg.window,
        ck.seed,
        ck.epoch,
        fmt_f64(ck.best_val_loss)
    );
    for (name, v) in [
        ("input_mean", &ck.input_stats.mean),
        ("input_std", &ck.input_stats.std),
        ("target_mean", &ck.target_stats.mean),
        ("target_std", &ck.target_stats.std),
    ] {
        header.push_str(name);
        for x in v {
            header.push(' ');
            header.push_str(&fmt_f64(*x));
        }
        header.push('\n');
    }
    let _ = write!(header, "payload {} f64 le\n", ck.params.data.len());
    let mut out = header.into_bytes();
    out.reserve(ck.params.data.len() * 8);
    for v in &ck.params.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn save_checkpoint(path: &Path, ck: &Checkpoint) -> Result<(), CheckpointError> {
    std::fs::write(path, checkpoint_to_bytes(ck)).map_err(|source| CheckpointError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn checkpoint_from_bytes(bytes: &[u8]) -> Result<Checkpoint, CheckpointError> {
    // Split the text header from the binary payload at the end of the
    // "payload ..." line.
    let mut offset = 0usize;
    let mut lines: Vec<&str> = Vec::new();
    loop {
        let rest = &bytes[offset..];
        let nl = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or(CheckpointError::Header("payload"))?;
        let line = std::str::from_utf8(&rest[..nl])
            .map_err(|_| CheckpointError::Header("payload"))?;
        offset += nl + 1;
        lines.push(line);
        if line.starts_with("payload ") {
            break;
        }
        if lines.len() > 16 {
            return Err(CheckpointError::Header("payload"));
        }
    }
    let mut it = lines.into_iter();
    let magic = it.next().unwrap_or("");
    if magic != CHECKPOINT_MAGIC {
        return Err(CheckpointError::Version(magic.to_string()));
    }
    let mut field = |name: &'static str| -> Result<&str, CheckpointError> {
        it.next()
            .and_then(|l| l.strip_prefix(name))
            .and_then(|v| v.strip_prefix(' '))
            .ok_or(CheckpointError::Header(name))
    };
    let task = TaskKind::parse(field("task")?).ok_or(CheckpointError::Header("task"))?;
    let shape_line = field("layers")?;
    // "N hidden N input_dim N output_dim N window N"
    let nums: Vec<usize> = shape_line
        .split(' ')
        .filter_map(|t| t.parse().ok())
        .collect();
    if nums.len() != 5 {
        return Err(CheckpointError::Header("layers"));
    }
    let config = PolicyConfig {
        num_layers: nums[0],
        hidden: nums[1],
        input_dim: nums[2],
        output_dim: nums[3],
        window: nums[4],
    };
    let seed: u64 = field("seed")?
        .parse()
        .map_err(|_| CheckpointError::Header("seed"))?;
    let epoch: usize = field("epoch")?
        .parse()
        .map_err(|_| CheckpointError::Header("epoch"))?;
    let best_val_loss: f64 = field("best_val_loss")?
        .parse()
        .map_err(|_| CheckpointError::Header("best_val_loss"))?;
    let mut stat = |name: &'static str| -> Result<Vec<f64>, CheckpointError> {
        field(name)?
            .split(' ')
            .map(|t| t.parse::<f64>().map_err(|_| CheckpointError::Header(name)))
            .collect()
    };
    let input_stats = NormStats {
        mean: stat("input_mean")?,
        std: stat("input_std")?,
    };
    let target_stats = NormStats {
        mean: stat("target_mean")?,
        std: stat("target_std")?,
    };
    let payload_line = field("payload")?;
    let count: usize = payload_line
        .split(' ')
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or(CheckpointError::Header("payload"))?;
    if count != config.param_len() {
        return Err(CheckpointError::Header("payload"));
    }
    let payload = &bytes[offset..];
    if payload.len() != count * 8 {
        return Err(CheckpointError::Truncated {
            expect: count,
            got_bytes: payload.len(),
        });
    }
    let mut data = Vec::with_capacity(count);
    for (index, chunk) in payload.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(CheckpointError::NonFinite { index });
        }
        data.push(v);
    }
    Ok(Checkpoint {
        task,
        params: PolicyParams { config, data },
        input_stats,
        target_stats,
        seed,
        epoch,
        best_val_loss,
    })
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, CheckpointError> {
    let bytes = std::fs::read(path).map_err(|source| CheckpointError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    checkpoint_from_bytes(&bytes)
}

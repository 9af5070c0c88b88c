//! Stage checkpoints: versioned JSON envelopes written atomically so an
//! interrupted pipeline can resume from the last completed stage.
//!
//! A checkpoint is bound to the resolved configuration through a content
//! digest; resuming against an edited config is rejected rather than
//! silently mixing artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("checkpoint schema v{found} is not the supported v{expected}")]
    SchemaMismatch { found: u32, expected: u32 },
    #[error("checkpoint holds stage '{found}', expected '{expected}'")]
    StageMismatch { found: String, expected: String },
    #[error("checkpoint was written for a different configuration (digest {found} != {expected})")]
    DigestMismatch { found: String, expected: String },
}

/// Envelope around one stage's artifacts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint<T> {
    pub schema: u32,
    pub stage: String,
    pub config_digest: String,
    pub seed: u64,
    pub payload: T,
}

/// FNV-1a 64-bit digest of the resolved configuration text, hex encoded.
/// Deliberately implemented here so the digest never changes under us.
pub fn config_digest(text: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn tmp_sibling(path: &Path) -> PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "checkpoint".to_string());
    path.with_file_name(format!("{name}.tmp"))
}

/// Serialize and persist a stage payload. The write goes through a sibling
/// temp file and a rename, so a crash never leaves a half-written file at
/// `path`.
pub fn save_checkpoint<T: Serialize>(
    path: &Path,
    stage: &str,
    config_digest: &str,
    seed: u64,
    payload: &T,
) -> Result<(), CheckpointError> {
    let envelope = Checkpoint {
        schema: SCHEMA_VERSION,
        stage: stage.to_string(),
        config_digest: config_digest.to_string(),
        seed,
        payload,
    };
    let text = serde_json::to_string_pretty(&envelope)?;
    let tmp = tmp_sibling(path);
    fs::write(&tmp, text.as_bytes())?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Load and validate a stage checkpoint: schema version, stage name, and
/// config digest must all match.
pub fn load_checkpoint<T: DeserializeOwned>(
    path: &Path,
    stage: &str,
    config_digest: &str,
) -> Result<Checkpoint<T>, CheckpointError> {
    let text = fs::read_to_string(path)?;
    let envelope: Checkpoint<T> = serde_json::from_str(&text)?;
    if envelope.schema != SCHEMA_VERSION {
        return Err(CheckpointError::SchemaMismatch {
            found: envelope.schema,
            expected: SCHEMA_VERSION,
        });
    }
    if envelope.stage != stage {
        return Err(CheckpointError::StageMismatch {
            found: envelope.stage,
            expected: stage.to_string(),
        });
    }
    if envelope.config_digest != config_digest {
        return Err(CheckpointError::DigestMismatch {
            found: envelope.config_digest,
            expected: config_digest.to_string(),
        });
    }
    Ok(envelope)
}

/// Like [`load_checkpoint`], but a missing file is `Ok(None)` so resume
/// logic can fall through to recomputing the stage.
pub fn try_load_checkpoint<T: DeserializeOwned>(
    path: &Path,
    stage: &str,
    config_digest: &str,
) -> Result<Option<Checkpoint<T>>, CheckpointError> {
    if !path.exists() {
        return Ok(None);
    }
    load_checkpoint(path, stage, config_digest).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::SearchWindow;

    fn scratch(name: &str) -> PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("vqsls-ckpt-{}-{name}.json", std::process::id()));
        p
    }

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Toy {
        xs: Vec<f64>,
        label: String,
    }

    #[test]
    fn digest_matches_reference_vectors() {
        assert_eq!(config_digest(""), "cbf29ce484222325");
        assert_eq!(config_digest("a"), "af63dc4c8601ec8c");
        assert_ne!(config_digest("seed = 1"), config_digest("seed = 2"));
    }

    #[test]
    fn round_trips_and_cleans_up_the_temp_file() {
        let path = scratch("roundtrip");
        let digest = config_digest("n_sites = 12");
        let payload = Toy { xs: vec![1.5, -2.25], label: "stage".into() };
        save_checkpoint(&path, "surrogate", &digest, 7, &payload).unwrap();
        assert!(!tmp_sibling(&path).exists());
        let loaded: Checkpoint<Toy> = load_checkpoint(&path, "surrogate", &digest).unwrap();
        assert_eq!(loaded.schema, SCHEMA_VERSION);
        assert_eq!(loaded.seed, 7);
        assert_eq!(loaded.payload, payload);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn real_stage_payloads_serialize() {
        let path = scratch("window");
        let digest = config_digest("cfg");
        let w = SearchWindow::<f64> {
            half_widths: vec![0.1, 0.2],
            targets: vec![0.01, 0.01],
            per_direction_delta_e: vec![1e-4, 2e-4],
            delta_e: 1e-4,
            m_points: 7,
            degree: 4,
        };
        save_checkpoint(&path, "windows", &digest, 0, &w).unwrap();
        let loaded: Checkpoint<SearchWindow<f64>> =
            load_checkpoint(&path, "windows", &digest).unwrap();
        assert_eq!(loaded.payload.half_widths, w.half_widths);
        assert_eq!(loaded.payload.m_points, 7);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn mismatches_are_rejected() {
        let path = scratch("mismatch");
        let digest = config_digest("cfg");
        let payload = Toy { xs: vec![], label: "x".into() };
        save_checkpoint(&path, "hessian", &digest, 0, &payload).unwrap();
        assert!(matches!(
            load_checkpoint::<Toy>(&path, "windows", &digest),
            Err(CheckpointError::StageMismatch { .. })
        ));
        assert!(matches!(
            load_checkpoint::<Toy>(&path, "hessian", "deadbeefdeadbeef"),
            Err(CheckpointError::DigestMismatch { .. })
        ));
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn wrong_schema_and_missing_files_are_distinct() {
        let path = scratch("schema");
        let digest = config_digest("cfg");
        let text = r#"{"schema":2,"stage":"hessian","config_digest":"cfg-digest","seed":0,"payload":{"xs":[],"label":""}}"#;
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            load_checkpoint::<Toy>(&path, "hessian", &digest),
            Err(CheckpointError::SchemaMismatch { found: 2, .. })
        ));
        std::fs::remove_file(&path).ok();

        let missing = scratch("missing");
        assert!(matches!(
            try_load_checkpoint::<Toy>(&missing, "hessian", &digest),
            Ok(None)
        ));
        assert!(load_checkpoint::<Toy>(&missing, "hessian", &digest).is_err());
    }
}

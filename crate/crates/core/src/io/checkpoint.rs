//! Versioned, checksummed, byte-stable model checkpoints.
//!
//! The file is JSON with sorted keys and shortest round-trip float
//! formatting. The checksum is the SHA-256 of the canonical encoding of the
//! `model` object alone.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::PatchworkModel;

pub const CHECKPOINT_VERSION: u32 = 1;
const FORMAT_TAG: &str = "patchwork-checkpoint";

fn canonical(v: &Value) -> Result<String> {
    // serde_json maps are ordered by key, so this is canonical
    Ok(serde_json::to_string(v)?)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Canonical checkpoint text for `model`.
pub fn checkpoint_string(model: &PatchworkModel) -> Result<String> {
    model.validate()?;
    let body = serde_json::to_value(model)?;
    let checksum = sha256_hex(canonical(&body)?.as_bytes());
    let doc = json!({
        "format": FORMAT_TAG,
        "version": CHECKPOINT_VERSION,
        "checksum": checksum,
        "model": body,
    });
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_checkpoint(text: &str) -> Result<PatchworkModel> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::CorruptCheckpoint(e.to_string()))?;
    if doc.get("format").and_then(Value::as_str) != Some(FORMAT_TAG) {
        return Err(Error::CorruptCheckpoint("missing format tag".into()));
    }
    let version = doc
        .get("version")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::CorruptCheckpoint("missing version".into()))?;
    if version != CHECKPOINT_VERSION as u64 {
        return Err(Error::VersionMismatch {
            found: version.min(u32::MAX as u64) as u32,
            supported: CHECKPOINT_VERSION,
        });
    }
    let body = doc
        .get("model")
        .ok_or_else(|| Error::CorruptCheckpoint("missing model".into()))?;
    let stored = doc.get("checksum").and_then(Value::as_str).unwrap_or("");
    let actual = sha256_hex(canonical(body)?.as_bytes());
    if stored != actual {
        return Err(Error::CorruptCheckpoint(format!(
            "checksum mismatch (stored {stored}, computed {actual})"
        )));
    }
    let model: PatchworkModel =
        serde_json::from_value(body.clone()).map_err(|e| Error::CorruptCheckpoint(e.to_string()))?;
    model.validate()?;
    Ok(model)
}

pub fn save_checkpoint(model: &PatchworkModel, path: &Path) -> Result<()> {
    fs::write(path, checkpoint_string(model)?)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<PatchworkModel> {
    parse_checkpoint(&fs::read_to_string(path)?)
}

//! Output plumbing: file creation, the per-run manifest, and prediction
//! CSVs.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use asa_core::{Metrics, Prediction};

/// Open `path` for writing, creating missing parent directories.
pub fn create_file(path: &Path) -> Result<File> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating directory {}", parent.display()))?;
        }
    }
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = create_file(path)?;
    f.write_all(text.as_bytes())
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// `<file>.manifest.json`, next to the file it describes.
pub fn manifest_path(primary_output: &Path) -> PathBuf {
    let mut name = primary_output
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str(".manifest.json");
    primary_output.with_file_name(name)
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    config: serde_json::Value,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
    /// SHA-256 over command, seed, and the resolved config.
    fingerprint: String,
}

/// Write the run manifest next to `primary_output` and return the config
/// fingerprint. `config` must be the fully resolved configuration (file
/// values already overridden by flags) so a rerun from the manifest alone
/// reproduces the result.
pub fn write_manifest(
    command: &str,
    primary_output: &Path,
    seed: Option<u64>,
    config: serde_json::Value,
    inputs: &[(&str, &Path)],
    outputs: &[&Path],
) -> Result<String> {
    let hashed = json!({ "command": command, "seed": seed, "config": config });
    let fingerprint = format!("{:x}", Sha256::digest(hashed.to_string().as_bytes()));
    let manifest = Manifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        config,
        inputs: inputs
            .iter()
            .map(|(k, p)| (k.to_string(), p.display().to_string()))
            .collect(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        fingerprint: fingerprint.clone(),
    };
    let path = manifest_path(primary_output);
    let mut f = create_file(&path)?;
    serde_json::to_writer_pretty(&mut f, &manifest)?;
    f.write_all(b"\n")?;
    Ok(fingerprint)
}

/// Write fold predictions as CSV (header
/// `seq_id,fold,label,predicted,first_accept_time`).
pub fn write_predictions(path: &Path, preds: &[Prediction]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(create_file(path)?);
    for p in preds {
        wtr.serialize(p)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Confusion counts plus the derived rates, for summary JSON.
pub fn metrics_json(m: &Metrics) -> serde_json::Value {
    json!({
        "true_positives": m.true_positives,
        "false_positives": m.false_positives,
        "true_negatives": m.true_negatives,
        "false_negatives": m.false_negatives,
        "accuracy": m.accuracy(),
        "precision": m.precision(),
        "recall": m.recall(),
        "f1": m.f1(),
    })
}

/// Print the one-object JSON summary every command ends with.
pub fn print_summary(value: &serde_json::Value) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, value)?;
    stdout.write_all(b"\n")?;
    Ok(())
}

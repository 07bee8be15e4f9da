//! Experiment runner for the multipath MCRB library: JSON configs, figure
//! presets, CSV/SVG outputs and run manifests.

pub mod config;
pub mod error;
pub mod experiments;
pub mod selftest;
pub mod svg;
pub mod table;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub use config::{preset, ExperimentConfig};
pub use error::CliError;
pub use experiments::Output;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

/// Written next to the outputs; feeding it back through `--config`
/// reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub tool_version: String,
    pub library_version: String,
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub trials: Option<u32>,
    pub outputs: Vec<OutputRecord>,
}

pub struct RunReport {
    pub outputs: Vec<Output>,
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
}

/// Runs an experiment and writes its CSVs, optional SVGs and the manifest
/// into `out_dir`.
pub fn run_to_dir(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    svg: bool,
) -> Result<RunReport, CliError> {
    let outputs = experiments::run(cfg)?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut records = Vec::new();
    for o in &outputs {
        let file = format!("{}.csv", o.stem);
        let bytes = o.table.write_csv(&out_dir.join(&file))?;
        records.push(OutputRecord {
            file,
            sha256: sha256_hex(&bytes),
        });
        if let (true, Some(kind)) = (svg, &o.plot) {
            if let Some(doc) = svg::render(&o.table, kind) {
                let file = format!("{}.svg", o.stem);
                let path = out_dir.join(&file);
                std::fs::write(&path, &doc).map_err(|e| CliError::io(&path, e))?;
                records.push(OutputRecord {
                    file,
                    sha256: sha256_hex(doc.as_bytes()),
                });
            }
        }
    }
    let (seed, trials) = match &cfg.experiment {
        config::Experiment::Montecarlo(m) => (Some(m.seed), Some(m.trials)),
        _ => (None, None),
    };
    let canonical = serde_json::to_vec(cfg).expect("config serializes");
    let manifest = Manifest {
        tool: "mcrb".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        library_version: mpmcrb::VERSION.into(),
        config: cfg.clone(),
        config_sha256: sha256_hex(&canonical),
        seed,
        trials,
        outputs: records,
    };
    let manifest_path = out_dir.join(format!("{}.manifest.json", cfg.name));
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&manifest_path, text + "\n").map_err(|e| CliError::io(&manifest_path, e))?;
    Ok(RunReport {
        outputs,
        manifest,
        manifest_path,
    })
}

/// Reads a config or a manifest from disk.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ExperimentConfig::from_json(&text)
}

use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use stppm_core::likelihood::DATA_FILES;

use crate::failure::{CliResult, Failure};
use crate::output::{sha256_file, sha256_hex, write_json};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Provenance record written next to every subcommand's outputs. Hashes
/// cover the effective config and the input files; artifacts list every
/// file produced under the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub engine_version: String,
    pub argv: Vec<String>,
    pub seeds: Vec<u64>,
    pub config_sha256: Option<String>,
    pub inputs: Vec<Artifact>,
    pub data_sha256: Option<String>,
    pub artifacts: Vec<Artifact>,
    pub started_at: String,
    pub finished_at: String,
    pub wall_seconds: f64,
}

pub struct ManifestBuilder {
    subcommand: &'static str,
    argv: Vec<String>,
    seeds: Vec<u64>,
    config_sha256: Option<String>,
    inputs: Vec<PathBuf>,
    started: DateTime<Utc>,
    clock: Instant,
}

impl ManifestBuilder {
    pub fn start(subcommand: &'static str, argv: &[String]) -> Self {
        ManifestBuilder {
            subcommand,
            argv: argv.to_vec(),
            seeds: Vec::new(),
            config_sha256: None,
            inputs: Vec::new(),
            started: Utc::now(),
            clock: Instant::now(),
        }
    }

    pub fn seeds(mut self, seeds: Vec<u64>) -> Self {
        self.seeds = seeds;
        self
    }

    pub fn config<T: Serialize>(mut self, config: &T) -> Self {
        let bytes = serde_json::to_vec(config).expect("config serializes");
        self.config_sha256 = Some(sha256_hex(&bytes));
        self
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.to_path_buf());
        self
    }

    /// The data files present in a data directory.
    pub fn data_dir(mut self, dir: &Path) -> Self {
        self.inputs.extend(DATA_FILES.iter().map(|f| dir.join(f)));
        self
    }

    pub fn finish(self, out_dir: &Path) -> CliResult<RunManifest> {
        let mut inputs = Vec::new();
        for p in &self.inputs {
            if p.is_file() {
                inputs.push(artifact(p, p.display().to_string())?);
            }
        }
        let data_sha256 = if inputs.is_empty() {
            None
        } else {
            let joined: String = inputs.iter().map(|a| format!("{}\n", a.sha256)).collect();
            Some(sha256_hex(joined.as_bytes()))
        };
        let mut artifacts = list_files(out_dir, out_dir)?;
        artifacts.retain(|a| a.path != MANIFEST_FILE);
        artifacts.sort_by(|a, b| a.path.cmp(&b.path));
        let finished = Utc::now();
        let manifest = RunManifest {
            subcommand: self.subcommand.to_string(),
            engine_version: stppm_core::VERSION.to_string(),
            argv: self.argv,
            seeds: self.seeds,
            config_sha256: self.config_sha256,
            inputs,
            data_sha256,
            artifacts,
            started_at: self.started.to_rfc3339_opts(SecondsFormat::Millis, true),
            finished_at: finished.to_rfc3339_opts(SecondsFormat::Millis, true),
            wall_seconds: self.clock.elapsed().as_secs_f64(),
        };
        write_json(&out_dir.join(MANIFEST_FILE), &manifest)?;
        Ok(manifest)
    }
}

fn artifact(path: &Path, name: String) -> CliResult<Artifact> {
    let bytes = std::fs::metadata(path).map_err(|e| Failure::io(path, e))?.len();
    Ok(Artifact {
        path: name,
        sha256: sha256_file(path)?,
        bytes,
    })
}

fn list_files(root: &Path, dir: &Path) -> CliResult<Vec<Artifact>> {
    let mut out = Vec::new();
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Failure::io(dir, e))?.path();
        if path.is_dir() {
            out.extend(list_files(root, &path)?);
        } else {
            let rel = path.strip_prefix(root).unwrap_or(&path);
            let name = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
            out.push(artifact(&path, name)?);
        }
    }
    Ok(out)
}

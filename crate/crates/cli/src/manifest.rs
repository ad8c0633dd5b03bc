use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gisc_core::GiscError;
use serde::Serialize;
use serde_json::Value;

/// Provenance record written beside every output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub seed: Option<u64>,
    pub inputs: BTreeMap<String, PathBuf>,
    pub outputs: BTreeMap<String, PathBuf>,
    pub params: Value,
    pub version: &'static str,
    pub wall_time_s: f64,
}

pub struct Recorder {
    started: Instant,
    manifest: RunManifest,
}

impl Recorder {
    pub fn start(seed: Option<u64>, params: Value) -> Self {
        Self {
            started: Instant::now(),
            manifest: RunManifest {
                command_line: std::env::args().collect(),
                seed,
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
                params,
                version: env!("CARGO_PKG_VERSION"),
                wall_time_s: 0.0,
            },
        }
    }

    pub fn input(&mut self, role: &str, path: &Path) -> &mut Self {
        self.manifest.inputs.insert(role.into(), path.to_path_buf());
        self
    }

    pub fn output(&mut self, role: &str, path: &Path) -> &mut Self {
        self.manifest
            .outputs
            .insert(role.into(), path.to_path_buf());
        self
    }

    /// Writes the manifest to `path` and returns it.
    pub fn finish(mut self, path: &Path) -> Result<RunManifest, GiscError> {
        self.manifest.wall_time_s = self.started.elapsed().as_secs_f64();
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(|source| GiscError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(self.manifest)
    }
}

/// `<out>.manifest.json`.
pub fn beside(out: &Path) -> PathBuf {
    suffixed(out, ".manifest.json")
}

pub fn suffixed(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

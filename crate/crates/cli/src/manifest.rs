//! Run manifest written into every output directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use frameot::PipelineConfig;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub millis: f64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config: PipelineConfig,
    /// Command-specific settings after flags were applied.
    pub options: Value,
    pub inputs: Vec<InputHash>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<StageTiming>>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::runtime(format!("cannot read {}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Collects per-stage wall-clock times and the files a command writes.
pub struct Recorder {
    command: String,
    out_dir: PathBuf,
    deterministic: bool,
    inputs: Vec<InputHash>,
    outputs: Vec<String>,
    timings: Vec<StageTiming>,
}

impl Recorder {
    pub fn new(command: &str, out_dir: &Path, deterministic: bool) -> Result<Self, CliError> {
        std::fs::create_dir_all(out_dir)
            .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", out_dir.display())))?;
        Ok(Self {
            command: command.to_string(),
            out_dir: out_dir.to_path_buf(),
            deterministic,
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings: Vec::new(),
        })
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        self.inputs.push(InputHash {
            path: path.display().to_string(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push(StageTiming {
            stage: name.to_string(),
            millis: start.elapsed().as_secs_f64() * 1e3,
        });
        out
    }

    /// Writes `name` in the output directory through `write`.
    pub fn output(
        &mut self,
        name: &str,
        write: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> frameot::Result<()>,
    ) -> Result<(), CliError> {
        let path = self.out_dir.join(name);
        let file = std::fs::File::create(&path)
            .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", path.display())))?;
        let mut w = std::io::BufWriter::new(file);
        write(&mut w)?;
        use std::io::Write;
        w.flush().map_err(|e| CliError::runtime(e.to_string()))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.output(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            std::io::Write::write_all(w, b"\n")?;
            Ok(())
        })
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        self.output(name, |w| Ok(std::io::Write::write_all(w, body.as_bytes())?))
    }

    pub fn deterministic(&self) -> bool {
        self.deterministic
    }

    pub fn finish(mut self, config: &PipelineConfig, options: Value) -> Result<(), CliError> {
        let outputs = std::mem::take(&mut self.outputs);
        let manifest = RunManifest {
            tool: "frameot",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command.clone(),
            seed: config.rng_seed,
            config: config.clone(),
            options,
            inputs: std::mem::take(&mut self.inputs),
            outputs,
            timings: (!self.deterministic).then(|| std::mem::take(&mut self.timings)),
        };
        self.json(FILE_NAME, &manifest)
    }
}

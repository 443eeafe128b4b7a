use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::RngExt;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Seed from the flag or from entropy; the latter is printed to stderr.
pub fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::rng().random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

/// SHA-256 of the compact JSON form.
pub fn config_hash(config: &Value) -> String {
    let bytes = serde_json::to_vec(config).expect("JSON values serialise");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Header comment line carried by every output file.
pub fn header(seed: u64, config: &Value) -> String {
    format!(
        "# rrt {} seed={seed} config=sha256:{}",
        env!("CARGO_PKG_VERSION"),
        config_hash(config)
    )
}

/// Destination for one output: a file under `--out` or stdout.
pub struct Sink {
    path: Option<PathBuf>,
    buf: Vec<u8>,
}

impl Sink {
    pub fn new(out: Option<&Path>, file: &str) -> Result<Self, CliError> {
        let path = match out {
            Some(dir) => {
                fs::create_dir_all(dir)
                    .map_err(|e| CliError::Failure(format!("{}: {e}", dir.display())))?;
                Some(dir.join(file))
            }
            None => None,
        };
        Ok(Self {
            path,
            buf: Vec::new(),
        })
    }

    pub fn is_file(&self) -> bool {
        self.path.is_some()
    }

    pub fn finish(self) -> Result<Option<PathBuf>, CliError> {
        match self.path {
            Some(p) => {
                fs::write(&p, &self.buf)
                    .map_err(|e| CliError::Failure(format!("{}: {e}", p.display())))?;
                Ok(Some(p))
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(&self.buf)
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::Failure(e.to_string()))?;
                Ok(None)
            }
        }
    }
}

impl Write for Sink {
    fn write(&mut self, data: &[u8]) -> std::io::Result<usize> {
        self.buf.write(data)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

//! Output-file plumbing shared by every subcommand.
//!
//! Each tool writes into one output directory. Every file starts with the
//! same three header lines - tool version, SHA-256 of the resolved config
//! echo, and the seed - so any artifact can be traced back to the exact
//! configuration that produced it. The hash covers the echo body only
//! (headers excluded), which makes it stable across tool versions that
//! resolve a config identically.

use crate::error::CliError;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Writes the artifacts of one run: headers, resolved config, data files.
pub struct OutputWriter {
    dir: PathBuf,
    config_sha256: String,
    seed: u64,
}

impl OutputWriter {
    /// Creates the output directory, computes the config hash and writes
    /// `resolved_config.ini`.
    pub fn new(dir: &Path, config_echo: &str, seed: u64) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::io(&format!("creating {}", dir.display()), e))?;
        let mut hasher = Sha256::new();
        hasher.update(config_echo.as_bytes());
        let config_sha256 = hasher
            .finalize()
            .iter()
            .fold(String::with_capacity(64), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            });
        let writer = Self {
            dir: dir.to_path_buf(),
            config_sha256,
            seed,
        };
        writer.write("resolved_config.ini", config_echo)?;
        Ok(writer)
    }

    /// Writes one output file prefixed with the standard header lines.
    pub fn write(&self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut content = String::with_capacity(body.len() + 128);
        let _ = writeln!(content, "# satqkd {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(content, "# config_sha256 = {}", self.config_sha256);
        let _ = writeln!(content, "# seed = {}", self.seed);
        content.push_str(body);
        fs::write(&path, content)
            .map_err(|e| CliError::io(&format!("writing {}", path.display()), e))
    }
}

/// Builds a CSV body: a column-name line followed by data rows.
pub struct Csv {
    body: String,
    columns: usize,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            body: format!("{}\n", columns.join(",")),
            columns: columns.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        debug_assert_eq!(fields.len(), self.columns);
        self.body.push_str(&fields.join(","));
        self.body.push('\n');
    }

    pub fn finish(self) -> String {
        self.body
    }
}

/// Formats an f64 with its shortest round-trip representation, which is
/// deterministic across platforms.
pub fn num(v: f64) -> String {
    format!("{v}")
}

//! CSV and manifest emission.
//!
//! Every data file is plain comma-separated text with one header row naming
//! each column and its unit. Floating-point cells use full-precision
//! scientific notation (17 significant digits) so committed golden files are
//! bit-stable across platforms; plotting is left to external tools.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Full-precision cell format; round-trips any finite f64 exactly.
pub fn cell(v: f64) -> String {
    format!("{v:.16e}")
}

/// One CSV file being written; bytes are hashed as they go out so the
/// manifest checksum never needs a second read.
pub struct CsvFile {
    name: String,
    writer: BufWriter<File>,
    hasher: Sha256,
}

impl CsvFile {
    pub fn create(dir: &Path, name: &str, header: &str) -> Result<CsvFile> {
        let path = dir.join(name);
        let file = File::create(&path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut f = CsvFile {
            name: name.to_string(),
            writer: BufWriter::new(file),
            hasher: Sha256::new(),
        };
        f.raw_line(header)?;
        Ok(f)
    }

    fn raw_line(&mut self, line: &str) -> Result<()> {
        self.writer.write_all(line.as_bytes())?;
        self.writer.write_all(b"\n")?;
        self.hasher.update(line.as_bytes());
        self.hasher.update(b"\n");
        Ok(())
    }

    pub fn row<I>(&mut self, cells: I) -> Result<()>
    where
        I: IntoIterator,
        I::Item: AsRef<str>,
    {
        let line = cells
            .into_iter()
            .map(|c| c.as_ref().to_string())
            .collect::<Vec<_>>()
            .join(",");
        self.raw_line(&line)
    }

    /// Flushes and returns (file name, hex SHA-256) for the manifest.
    pub fn finish(mut self) -> Result<(String, String)> {
        self.writer.flush()?;
        let digest = self.hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        Ok((self.name, hex))
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    config_sha256: String,
    files: BTreeMap<String, String>,
}

/// Writes manifest.toml next to the data files: config hash, tool version,
/// and one checksum per emitted CSV, sorted by file name.
pub fn write_manifest(dir: &Path, config_bytes: &[u8], files: Vec<(String, String)>) -> Result<()> {
    let digest = Sha256::digest(config_bytes);
    let manifest = Manifest {
        tool: "tavis-cli",
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        files: files.into_iter().collect(),
    };
    let text = toml::to_string(&manifest)
        .map_err(|e| CliError::Io(format!("manifest serialization: {e}")))?;
    let path = dir.join("manifest.toml");
    std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

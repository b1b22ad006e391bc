//! Run manifests and result files.

use std::fmt::Display;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::CliError;

pub const SNR_CONVENTION: &str = "snr = |X beta|^2 / (n sigma^2)";

/// Parameters and provenance of one run. Every result file of the run is
/// written next to, or embeds, exactly one manifest.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub artifact: &'static str,
    pub version: &'static str,
    pub command: String,
    pub master_seed: u64,
    pub parameters: serde_json::Value,
    /// Seconds since the Unix epoch; `null` when stamping is disabled.
    pub timestamp: Option<u64>,
    pub snr_convention: &'static str,
}

impl RunManifest {
    pub fn new(command: &str, master_seed: u64, parameters: &impl Serialize, stamp: bool) -> Result<Self, CliError> {
        let parameters = serde_json::to_value(parameters).map_err(|e| CliError::Numerical(e.to_string()))?;
        let timestamp = stamp.then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
        Ok(Self {
            artifact: "vdselect",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            master_seed,
            parameters,
            timestamp,
            snr_convention: SNR_CONVENTION,
        })
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes a CSV file with the given header and rows of display values.
pub fn write_csv<R>(path: &Path, header: &str, rows: impl IntoIterator<Item = R>, fields: impl Fn(&R) -> Vec<String>) -> Result<(), CliError> {
    let io = |e| CliError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "{header}").map_err(io)?;
    for r in rows {
        writeln!(w, "{}", fields(&r).join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn s(v: impl Display) -> String {
    v.to_string()
}

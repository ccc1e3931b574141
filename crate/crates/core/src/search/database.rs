//! JSON-Lines gate database: one self-describing record per line, each
//! carrying an echo of the configuration that produced it.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{GateRecord, SearchConfig, SearchError};
use crate::hamiltonian::CouplingPair;

/// The configuration fields that determine the search output. The worker
/// count is left out so databases from different pool sizes are identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub couplings: CouplingPair<f64>,
    pub range: f64,
    pub density: usize,
    pub conv_tol: f64,
    pub obj_threshold: f64,
    pub angle_tol: f64,
    pub max_iterations: usize,
    pub jitter: f64,
    pub seed: u64,
    pub tau_penalty: f64,
    pub version: String,
}

impl ConfigEcho {
    pub fn from_config(c: &SearchConfig) -> Self {
        Self {
            couplings: c.couplings,
            range: c.range,
            density: c.density,
            conv_tol: c.conv_tol,
            obj_threshold: c.obj_threshold,
            angle_tol: c.angle_tol,
            max_iterations: c.max_iterations,
            jitter: c.jitter,
            seed: c.seed,
            tau_penalty: c.tau_penalty,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Search configuration reproducing this echo with the given pool size.
    pub fn to_config(&self, workers: usize) -> SearchConfig {
        SearchConfig {
            couplings: self.couplings,
            range: self.range,
            density: self.density,
            conv_tol: self.conv_tol,
            obj_threshold: self.obj_threshold,
            angle_tol: self.angle_tol,
            max_iterations: self.max_iterations,
            workers,
            jitter: self.jitter,
            seed: self.seed,
            tau_penalty: self.tau_penalty,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbEntry {
    #[serde(flatten)]
    pub record: GateRecord,
    pub config: ConfigEcho,
}

pub fn write_database<W: Write>(mut out: W, records: &[GateRecord], config: &SearchConfig) -> Result<(), SearchError> {
    let echo = ConfigEcho::from_config(config);
    for r in records {
        let entry = DbEntry {
            record: r.clone(),
            config: echo.clone(),
        };
        serde_json::to_writer(&mut out, &entry).map_err(|e| SearchError::Io(e.into()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads every entry; blank lines are skipped and all entries must share
/// one configuration.
pub fn read_database<R: BufRead>(input: R) -> Result<Vec<DbEntry>, SearchError> {
    let mut entries: Vec<DbEntry> = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: DbEntry = serde_json::from_str(&line).map_err(|source| SearchError::Parse { line: i + 1, source })?;
        if let Some(first) = entries.first() {
            if first.config != entry.config {
                return Err(SearchError::MixedConfig { line: i + 1 });
            }
        }
        entries.push(entry);
    }
    Ok(entries)
}

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use aitlab::complexity::TableKey;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::Format;
use crate::error::CliError;

/// The fully resolved parameters of one run. Embedded in every report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perm_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack: Option<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub strings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub t: u64,
    pub cap_slack: usize,
    pub force: bool,
    pub cache_dir: PathBuf,
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct Envelope<'a> {
    pub config: &'a ExperimentConfig,
    pub machine_version: &'a str,
    pub tables: Vec<TableKey>,
    pub result: Value,
}

pub struct Output {
    pub format: Format,
    pub path: Option<PathBuf>,
}

impl Output {
    fn sink(&self) -> Result<Box<dyn Write>, CliError> {
        Ok(match &self.path {
            Some(p) => Box::new(fs::File::create(p)?),
            None => Box::new(io::stdout().lock()),
        })
    }

    /// Writes the JSON envelope, or CSV rows preceded by `#` comment lines
    /// carrying the machine version, config and table provenance.
    pub fn emit<R: Serialize>(&self, env: &Envelope, rows: &[R]) -> Result<(), CliError> {
        let mut sink = self.sink()?;
        match self.format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut sink, env)?;
                writeln!(sink)?;
            }
            Format::Csv => {
                writeln!(sink, "# machine_version: {}", env.machine_version)?;
                writeln!(sink, "# config: {}", serde_json::to_string(env.config)?)?;
                writeln!(sink, "# tables: {}", serde_json::to_string(&env.tables)?)?;
                let mut w = csv::Writer::from_writer(sink);
                for r in rows {
                    w.serialize(r)?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }
}

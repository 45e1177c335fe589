//! JSON run reports and the per-run output directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub const TOOL: &str = "xyzglass";

/// One asserted (or reported) quantity with its method and tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// `mc`, `quadrature`, `exact` or `oracle`.
    pub method: String,
    pub inputs: Value,
    pub seed: Option<u64>,
    pub n_samples: Option<u64>,
    /// Residual, margin or deviation, depending on the check.
    pub value: f64,
    pub std_error: Option<f64>,
    pub tolerance: f64,
    /// False only for reported quantities that carry no assertion.
    pub asserted: bool,
    pub passed: bool,
    pub clipped: Option<usize>,
    pub details: Value,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, method: &str, value: f64, tolerance: f64, passed: bool) -> Self {
        Self {
            name: name.into(),
            method: method.into(),
            inputs: Value::Null,
            seed: None,
            n_samples: None,
            value,
            std_error: None,
            tolerance,
            asserted: true,
            passed,
            clipped: None,
            details: Value::Null,
        }
    }

    /// `value <= tolerance` for a non-negative deviation.
    pub fn deviation(name: impl Into<String>, method: &str, value: f64, tolerance: f64) -> Self {
        Self::new(name, method, value, tolerance, value <= tolerance)
    }

    pub fn with_inputs(mut self, inputs: Value) -> Self {
        self.inputs = inputs;
        self
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn with_samples(mut self, seed: Option<u64>, n_samples: Option<u64>) -> Self {
        self.seed = seed;
        self.n_samples = n_samples;
        self
    }

    pub fn reported_only(mut self) -> Self {
        self.asserted = false;
        self.passed = true;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    /// Seconds since the Unix epoch; the only field that differs between
    /// repeated runs.
    pub timestamp: u64,
    pub config_hash: String,
    pub seed: u64,
    pub conventions: Vec<String>,
    pub config: Value,
    pub checks: Vec<CheckRecord>,
    pub results: Value,
    pub passed: bool,
}

/// Fixed modelling choices recorded in every report.
pub fn conventions(config: &RunConfig) -> Vec<String> {
    let mut out = vec![
        "H = -sum_p sum_X sum_w J^w_{X,p} sigma^w_X; site 0 is the most significant basis bit"
            .to_string(),
        "a coupling component with mean 0 and width 0 is treated as identically zero and is \
         allowed on gauge-transformed axes"
            .to_string(),
        "when both transformed means vanish, K = J^v/Delta^v and G = -J^w/Delta^w".to_string(),
    ];
    if let Some(lat) = &config.lattice {
        out.push(format!("boundary: {}", lat.boundary));
    }
    out
}

impl Report {
    pub fn new(subcommand: &str, config: &RunConfig, checks: Vec<CheckRecord>, results: Value) -> Result<Self, CliError> {
        let passed = checks.iter().all(|c| c.passed);
        Ok(Self {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.into(),
            timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config_hash: config_hash(config)?,
            seed: config.seed,
            conventions: conventions(config),
            config: serde_json::to_value(config).map_err(|e| CliError::Config(e.to_string()))?,
            checks,
            results,
            passed,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// SHA-256 of the resolved config as compact JSON.
pub fn config_hash(config: &RunConfig) -> Result<String, CliError> {
    let text = serde_json::to_string(config).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}

/// `<out>/<seed>-<first 12 hex digits of the config hash>`.
pub fn run_dir(out: &Path, config: &RunConfig) -> Result<PathBuf, CliError> {
    Ok(out.join(format!("{}-{}", config.seed, &config_hash(config)?[..12])))
}

/// Output files of one run inside a run directory. Earlier runs are never
/// overwritten: the k-th run writes `report-k.json` (the first just
/// `report.json`) and suffixes its tables the same way.
#[derive(Debug, Clone)]
pub struct RunFiles {
    pub dir: PathBuf,
    index: usize,
}

impl RunFiles {
    pub fn create(dir: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|e| CliError::io(dir.display(), e))?;
        let mut index = 1;
        while dir.join(Self::name("report", "json", index)).exists() {
            index += 1;
        }
        Ok(Self { dir, index })
    }

    fn name(stem: &str, ext: &str, index: usize) -> String {
        if index == 1 {
            format!("{stem}.{ext}")
        } else {
            format!("{stem}-{index}.{ext}")
        }
    }

    pub fn path(&self, stem: &str, ext: &str) -> PathBuf {
        self.dir.join(Self::name(stem, ext, self.index))
    }

    pub fn write(&self, stem: &str, ext: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.path(stem, ext);
        fs::write(&path, contents).map_err(|e| CliError::io(path.display(), e))?;
        Ok(path)
    }
}

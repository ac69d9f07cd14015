//! Run manifests: the full resolved configuration, input digests, output
//! paths, stage timings, and warnings of one command invocation.
//!
//! A manifest is sufficient to re-run its command bit-identically: the
//! parameters are echoed verbatim and the input digest is verified before a
//! re-run. Timings are informational and excluded from any reproducibility
//! comparison.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cmd::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputFile {
    pub role: String,
    pub path: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthParams {
    pub parents: usize,
    pub alpha: f64,
    pub len: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeParams {
    pub input: String,
    pub measure: String,
    pub q: f64,
    pub nf: usize,
    pub k: usize,
    pub distance_floor: f64,
    pub normalization: String,
    pub transform: String,
    pub epsilon: f64,
    pub mds_dim: usize,
    pub dbscan_eps: Option<f64>,
    pub dbscan_min_pts: usize,
    pub max_lag: Option<usize>,
    pub standardize: bool,
    pub drop_incomplete: bool,
    pub sample_interval_ms: Option<f64>,
    pub svg: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MdsParams {
    pub input: String,
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterParams {
    pub input: String,
    pub eps: f64,
    pub min_pts: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RenderParams {
    pub input: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Prefix all output files were derived from; reruns may override it.
    pub out_prefix: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analyze: Option<AnalyzeParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mds: Option<MdsParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster: Option<ClusterParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub render: Option<RenderParams>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<OutputFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    pub warnings: Vec<String>,
    pub timings_s: Vec<StageTiming>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Self {
            tool: "amif".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            out_prefix: String::new(),
            synth: None,
            analyze: None,
            mds: None,
            cluster: None,
            render: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            eigenvalues: None,
            warnings: Vec::new(),
            timings_s: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::data(format!("bad manifest {}: {e}", path.display())))
    }
}

/// Record a named output for the manifest.
pub fn output(role: &str, path: &Path) -> OutputFile {
    OutputFile {
        role: role.to_string(),
        path: path.display().to_string(),
    }
}

/// Derived output paths for a command, all sharing one prefix.
pub struct OutPaths {
    pub prefix: PathBuf,
}

impl OutPaths {
    pub fn new(prefix: &Path) -> Self {
        Self {
            prefix: prefix.to_path_buf(),
        }
    }

    fn with_suffix(&self, suffix: &str) -> PathBuf {
        let mut name = self
            .prefix
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        name.push_str(suffix);
        self.prefix.with_file_name(name)
    }

    pub fn series(&self) -> PathBuf {
        self.with_suffix(".series.csv")
    }

    pub fn labels(&self) -> PathBuf {
        self.with_suffix(".labels.csv")
    }

    pub fn similarity(&self) -> PathBuf {
        self.with_suffix(".similarity.csv")
    }

    pub fn dissimilarity(&self) -> PathBuf {
        self.with_suffix(".dissimilarity.csv")
    }

    pub fn embedding(&self) -> PathBuf {
        self.with_suffix(".embedding.csv")
    }

    pub fn svg(&self) -> PathBuf {
        self.with_suffix(".svg")
    }

    pub fn manifest(&self) -> PathBuf {
        self.with_suffix(".manifest.json")
    }
}

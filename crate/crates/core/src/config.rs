//! TOML pipeline configuration.
//!
//! ```toml
//! output = "out"
//!
//! [input]
//! cases = "cases.csv"
//! metadata = "metadata.csv"
//!
//! [window]
//! start = "2022-03-08"
//! end = "2022-07-31"
//!
//! [features]            # all keys optional
//! rate_scale = 100000.0
//! alpha_grid = [10, 20, 30, 40, 50, 60, 70, 80, 90]
//! n_bins = 4
//!
//! [association]         # optional
//! thresholds = [0.5, 0.7]
//!
//! [[fusion]]
//! name = "left30to70"
//! columns = ["left30", "left40", "left50", "left60", "left70"]
//! k = 4
//! seed = 1
//!
//! [[response]]
//! name = "region"       # metadata field (region, status) or a feature column
//! candidates = ["left30to70", "peakvalue"]
//! seed = 7
//!
//! [[cluster]]
//! name = "left"
//! columns = ["left90", "left80", "left70"]
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::cluster::{DEFAULT_K, DEFAULT_RESTARTS};
use crate::curve::AlphaGrid;
use crate::error::{Error, Result};
use crate::ingest::DEFAULT_RATE_SCALE;
use crate::major_factor::{DEFAULT_REPLICATES, MAX_SCAN_ORDER};

/// Metadata fields usable as binary responses.
pub const METADATA_RESPONSES: [&str; 2] = ["region", "status"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub output: PathBuf,
    pub input: InputConfig,
    pub window: WindowConfig,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub association: AssociationConfig,
    #[serde(default)]
    pub fusion: Vec<FusionSpec>,
    #[serde(default)]
    pub response: Vec<ResponseSpec>,
    #[serde(default)]
    pub cluster: Vec<ClusterSpec>,
    /// Directory relative paths resolve against; not serialized.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub cases: PathBuf,
    pub metadata: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureConfig {
    pub rate_scale: f64,
    pub alpha_grid: Vec<u8>,
    pub n_bins: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            rate_scale: DEFAULT_RATE_SCALE,
            alpha_grid: (1..=9).map(|k| k * 10).collect(),
            n_bins: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AssociationConfig {
    pub thresholds: Vec<f64>,
    /// Defaults to the shape features (every column except peakdate and
    /// curvature).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<String>>,
}

impl Default for AssociationConfig {
    fn default() -> Self {
        AssociationConfig {
            thresholds: vec![0.5, 0.7],
            columns: None,
        }
    }
}

fn default_k() -> usize {
    DEFAULT_K
}

fn default_restarts() -> usize {
    DEFAULT_RESTARTS
}

fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}

fn default_order() -> usize {
    2
}

fn default_top() -> usize {
    5
}

fn default_bottom() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionSpec {
    pub name: String,
    pub columns: Vec<String>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseSpec {
    pub name: String,
    /// Defaults to the shape features plus every fused feature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<String>>,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_top")]
    pub top: usize,
    #[serde(default = "default_bottom")]
    pub bottom: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSpec {
    pub name: String,
    pub columns: Vec<String>,
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn check_name(kind: &str, name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if ok {
        Ok(())
    } else {
        Err(cfg_err(format!(
            "{kind} name \"{name}\" must be non-empty ASCII letters, digits, '_' or '-'"
        )))
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| cfg_err(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, &base)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output)
    }

    pub fn alpha_grid(&self) -> Result<AlphaGrid> {
        AlphaGrid::new(&self.features.alpha_grid).map_err(|e| cfg_err(format!("alpha_grid: {e}")))
    }

    pub fn association_columns(&self) -> Result<Vec<String>> {
        Ok(match &self.association.columns {
            Some(c) => c.clone(),
            None => self.alpha_grid()?.shape_feature_names(),
        })
    }

    pub fn candidates(&self, response: &ResponseSpec) -> Result<Vec<String>> {
        Ok(match &response.candidates {
            Some(c) => c.clone(),
            None => {
                let mut c = self.alpha_grid()?.shape_feature_names();
                c.extend(self.fusion.iter().map(|f| f.name.clone()));
                c.retain(|n| *n != response.name);
                c
            }
        })
    }

    /// Checks ranges and that every referenced column will exist.
    pub fn validate(&self) -> Result<()> {
        if self.window.start >= self.window.end {
            return Err(cfg_err(format!(
                "window start {} must be before end {}",
                self.window.start, self.window.end
            )));
        }
        if !(self.features.rate_scale.is_finite() && self.features.rate_scale > 0.0) {
            return Err(cfg_err("rate_scale must be positive"));
        }
        if !(1..=254).contains(&self.features.n_bins) {
            return Err(cfg_err("n_bins must be in 1..=254"));
        }
        let grid = self.alpha_grid()?;
        for &t in &self.association.thresholds {
            if !(0.0..=1.0).contains(&t) {
                return Err(cfg_err(format!("network threshold {t} outside [0, 1]")));
            }
        }

        let base: BTreeSet<String> = grid.feature_names().into_iter().collect();
        let known_base = |col: &str, ctx: &str| {
            if base.contains(col) {
                Ok(())
            } else {
                Err(Error::UnknownColumn(format!("{col} (in {ctx})")))
            }
        };
        for c in self.association_columns()? {
            known_base(&c, "association")?;
        }

        let mut fused = BTreeSet::new();
        for f in &self.fusion {
            check_name("fusion", &f.name)?;
            if base.contains(&f.name) || !fused.insert(f.name.clone()) {
                return Err(cfg_err(format!(
                    "fusion name \"{}\" is already taken",
                    f.name
                )));
            }
            if f.columns.is_empty() {
                return Err(cfg_err(format!("fusion {}: no columns", f.name)));
            }
            if !(1..=255).contains(&f.k) {
                return Err(cfg_err(format!("fusion {}: k must be in 1..=255", f.name)));
            }
            if f.restarts == 0 {
                return Err(cfg_err(format!(
                    "fusion {}: restarts must be at least 1",
                    f.name
                )));
            }
            for c in &f.columns {
                known_base(c, &format!("fusion {}", f.name))?;
            }
        }

        let mut responses = BTreeSet::new();
        for r in &self.response {
            check_name("response", &r.name)?;
            if !responses.insert(r.name.clone()) {
                return Err(cfg_err(format!("duplicate response \"{}\"", r.name)));
            }
            let is_column = base.contains(&r.name) || fused.contains(&r.name);
            if !is_column && !METADATA_RESPONSES.contains(&r.name.as_str()) {
                return Err(Error::UnknownColumn(format!("{} (response)", r.name)));
            }
            if !(1..=MAX_SCAN_ORDER).contains(&r.order) {
                return Err(cfg_err(format!(
                    "response {}: order must be in 1..={MAX_SCAN_ORDER}",
                    r.name
                )));
            }
            if r.replicates == 0 {
                return Err(cfg_err(format!(
                    "response {}: replicates must be at least 1",
                    r.name
                )));
            }
            let candidates = self.candidates(r)?;
            if candidates.is_empty() {
                return Err(cfg_err(format!("response {}: no candidates", r.name)));
            }
            let mut seen = BTreeSet::new();
            for c in &candidates {
                if !(base.contains(c) || fused.contains(c)) {
                    return Err(Error::UnknownColumn(format!(
                        "{c} (candidate for {})",
                        r.name
                    )));
                }
                if *c == r.name || !seen.insert(c) {
                    return Err(cfg_err(format!(
                        "response {}: candidate {c} repeated or equal to response",
                        r.name
                    )));
                }
            }
        }

        let mut clusters = BTreeSet::new();
        for c in &self.cluster {
            check_name("cluster", &c.name)?;
            if !clusters.insert(c.name.clone()) {
                return Err(cfg_err(format!("duplicate cluster \"{}\"", c.name)));
            }
            if c.columns.is_empty() {
                return Err(cfg_err(format!("cluster {}: no columns", c.name)));
            }
            for col in &c.columns {
                known_base(col, &format!("cluster {}", c.name))?;
            }
        }
        Ok(())
    }
}

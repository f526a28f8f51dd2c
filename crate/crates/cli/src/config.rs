use std::path::{Path, PathBuf};

use fractal_she::fractal::{Gluing, PcfStructure};
use nalgebra::DMatrix;
use fractal_she::BoundaryCondition;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Largest `M^m` accepted; dense eigensolves beyond this take minutes.
pub const MAX_CELLS: usize = 2200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Verify,
    Spectrum,
    Resistance,
    Simulate,
    Holder,
    Invariant,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Verify => "verify",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Resistance => "resistance",
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Holder => "holder",
            ExperimentKind::Invariant => "invariant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bc {
    #[serde(rename = "D", alias = "dirichlet")]
    Dirichlet,
    #[serde(rename = "N", alias = "neumann")]
    Neumann,
}

impl From<Bc> for BoundaryCondition {
    fn from(b: Bc) -> Self {
        match b {
            Bc::Dirichlet => BoundaryCondition::Dirichlet,
            Bc::Neumann => BoundaryCondition::Neumann,
        }
    }
}

/// A user-supplied harmonic structure. Cells are 1-based, boundary points
/// 0-based, as in the library.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserStructure {
    pub name: String,
    pub weights: Vec<f64>,
    /// rows of `A0`
    pub a0: Vec<Vec<f64>>,
    /// `[i, a, j, b]` for `ψ_i(q_a) = ψ_j(q_b)`
    pub gluing: Vec<[usize; 4]>,
    /// `[i, a]` for `q_c = ψ_i(q_a)`, one per boundary point
    pub boundary_images: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StructureSpec {
    Preset { preset: String },
    User(UserStructure),
}

impl StructureSpec {
    pub fn build(&self) -> Result<PcfStructure, CliError> {
        match self {
            StructureSpec::Preset { preset } => {
                PcfStructure::preset(preset).map_err(|_| CliError::UnknownPreset(preset.clone()))
            }
            StructureSpec::User(u) => {
                let n = u.a0.len();
                if u.a0.iter().any(|row| row.len() != n) {
                    return Err(CliError::Config("a0 must be a square matrix".into()));
                }
                let a0 = DMatrix::from_fn(n, n, |i, j| u.a0[i][j]);
                let gluing = u
                    .gluing
                    .iter()
                    .map(|g| Gluing {
                        left: (g[0], g[1]),
                        right: (g[2], g[3]),
                    })
                    .collect();
                let images = u.boundary_images.iter().map(|b| (b[0], b[1])).collect();
                Ok(PcfStructure::new(u.name.clone(), u.weights.clone(), a0, gluing, images)?)
            }
        }
    }
}

/// Either an explicit list or `steps` equal steps from `start` to `end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

impl TimeGrid {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        let grid = match (&self.times, self.end, self.steps) {
            (Some(t), None, None) if self.start.is_none() => t.clone(),
            (None, Some(end), Some(steps)) if steps > 0 => {
                let start = self.start.unwrap_or(0.0);
                (0..=steps)
                    .map(|i| start + (end - start) * i as f64 / steps as f64)
                    .collect()
            }
            _ => {
                return Err(CliError::Config(
                    "time grid needs either `times` or `end` and `steps` (> 0)".into(),
                ))
            }
        };
        if grid.is_empty() || grid[0] < 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) || grid.iter().any(|t| !t.is_finite())
        {
            return Err(CliError::Config("time grid must be nonnegative and strictly increasing".into()));
        }
        Ok(grid)
    }

    pub fn last(&self) -> Result<f64, CliError> {
        Ok(*self.points()?.last().expect("grids are nonempty"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolderParams {
    /// vertices sampled for spatial pairs
    #[serde(default = "default_spatial_vertices")]
    pub spatial_vertices: usize,
    /// vertices pooled for temporal increments
    #[serde(default = "default_temporal_vertices")]
    pub temporal_vertices: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_lags")]
    pub lags: usize,
}

fn default_spatial_vertices() -> usize {
    250
}
fn default_temporal_vertices() -> usize {
    20
}
fn default_bins() -> usize {
    12
}
fn default_lags() -> usize {
    12
}

impl Default for HolderParams {
    fn default() -> Self {
        HolderParams {
            spatial_vertices: default_spatial_vertices(),
            temporal_vertices: default_temporal_vertices(),
            bins: default_bins(),
            lags: default_lags(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantParams {
    /// leading coefficients tested
    #[serde(default = "default_coefficients")]
    pub coefficients: usize,
    /// time after which the run from zero is compared with the invariant law
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// time at which a run started from the invariant law is checked
    #[serde(default = "default_check_time")]
    pub check_time: f64,
}

fn default_coefficients() -> usize {
    5
}
fn default_horizon() -> f64 {
    5.0
}
fn default_check_time() -> f64 {
    1.0
}

impl Default for InvariantParams {
    fn default() -> Self {
        InvariantParams {
            coefficients: default_coefficients(),
            horizon: default_horizon(),
            check_time: default_check_time(),
        }
    }
}

/// One experiment, read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub level: usize,
    #[serde(default = "default_bc")]
    pub bc: Bc,
    #[serde(default)]
    pub alpha: f64,
    /// number of eigenpairs; all free vertices when absent
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    /// field trajectories written to CSV by `simulate`
    #[serde(default = "default_export")]
    pub export_replicas: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub structure: StructureSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeGrid>,
    #[serde(default)]
    pub holder: HolderParams,
    #[serde(default)]
    pub invariant: InvariantParams,
}

fn default_bc() -> Bc {
    Bc::Dirichlet
}
fn default_replicas() -> usize {
    1000
}
fn default_export() -> usize {
    10
}

impl ExperimentConfig {
    /// Minimal config for `kind` on a preset; everything else defaulted.
    pub fn preset(kind: ExperimentKind, preset: &str, level: usize) -> Self {
        ExperimentConfig {
            kind,
            level,
            bc: Bc::Dirichlet,
            alpha: 0.0,
            truncation: None,
            replicas: default_replicas(),
            export_replicas: default_export(),
            seed: 0,
            output: None,
            structure: StructureSpec::Preset { preset: preset.into() },
            time: None,
            holder: HolderParams::default(),
            invariant: InvariantParams::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Serialize(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::ConfigFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Loads a config for a subcommand. A missing `kind` is filled in from
    /// `kind`; a different one is rejected.
    pub fn load_for(path: &Path, kind: ExperimentKind) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::ConfigFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        match table.get("kind").and_then(|v| v.as_str()) {
            None if table.contains_key("kind") => return Err(CliError::Config("kind must be a string".into())),
            None => {
                table.insert("kind".into(), toml::Value::String(kind.name().into()));
            }
            Some(k) if k != kind.name() => {
                return Err(CliError::Config(format!(
                    "config is for kind {k:?} but the {} subcommand was used",
                    kind.name()
                )))
            }
            Some(_) => {}
        }
        table.try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
    }

    pub fn boundary_condition(&self) -> BoundaryCondition {
        self.bc.into()
    }

    /// Checks ranges and kind-specific requirements, returning the structure.
    pub fn validate(&self) -> Result<PcfStructure, CliError> {
        let s = self.structure.build()?;
        let cells = (s.alphabet() as f64).powi(self.level as i32);
        if cells > MAX_CELLS as f64 {
            let max = (MAX_CELLS as f64).ln() / (s.alphabet() as f64).ln();
            return Err(CliError::LevelOutOfRange {
                level: self.level,
                max: max.floor() as usize,
            });
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(CliError::Config(format!("alpha must be finite and >= 0, got {}", self.alpha)));
        }
        if self.truncation == Some(0) {
            return Err(CliError::TruncationOutOfRange { requested: 0, available: 0 });
        }
        let needs_level = matches!(
            self.kind,
            ExperimentKind::Spectrum | ExperimentKind::Simulate | ExperimentKind::Holder | ExperimentKind::Invariant
        );
        if needs_level && self.level == 0 {
            return Err(CliError::LevelOutOfRange { level: 0, max: 0 });
        }
        match self.kind {
            ExperimentKind::Simulate => {
                self.time
                    .as_ref()
                    .ok_or_else(|| CliError::Config("simulate needs a [time] grid".into()))?
                    .points()?;
                if self.replicas == 0 {
                    return Err(CliError::Config("replicas must be positive".into()));
                }
            }
            ExperimentKind::Holder | ExperimentKind::Invariant => {
                if self.replicas < fractal_she::regularity::MIN_REPLICAS {
                    return Err(CliError::Config(format!(
                        "{} needs at least {} replicas, got {}",
                        self.kind.name(),
                        fractal_she::regularity::MIN_REPLICAS,
                        self.replicas
                    )));
                }
                if let Some(t) = &self.time {
                    t.points()?;
                }
                let p = &self.invariant;
                if p.coefficients == 0 || !(p.horizon > 0.0) || !(p.check_time > 0.0) {
                    return Err(CliError::Config("invariant parameters must be positive".into()));
                }
                let h = &self.holder;
                if h.spatial_vertices < 2 || h.temporal_vertices == 0 || h.bins == 0 || h.lags < 5 {
                    return Err(CliError::Config(
                        "holder needs >= 2 spatial vertices, >= 1 temporal vertex, >= 1 bin and >= 5 lags".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(s)
    }
}

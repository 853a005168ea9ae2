//! Experiment files for `qsklab sweep`.
//!
//! TOML with every section closed to unknown keys:
//!
//! ```toml
//! seed = 42
//!
//! [model]
//! n = 6
//! j = 1.0
//! law = "gaussian"
//!
//! [ensemble]
//! mode = "monte_carlo"
//! samples = 100
//!
//! [grid]
//! beta = [5.0, 20.0]
//! h = [0.05, 0.5]
//!
//! [output]
//! csv = "sweep.csv"
//! json = "sweep.json"
//! ```
//!
//! Everything is validated, caps included, before any diagonalization.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ensemble::{grid_configs, planned_samples, EnsembleConfig, EnsembleMode};
use crate::error::{Error, Result};
use crate::hilbert::site_cap;
use crate::model::{DisorderSpec, ModelParams};
use crate::observables::ReportOptions;

/// Largest sample count a single grid point may request.
pub const MAX_SAMPLES: usize = 10_000_000;
/// Largest number of grid points.
pub const MAX_GRID_POINTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub seed: u64,
    pub model: ModelSection,
    pub ensemble: EnsembleSection,
    pub grid: GridSection,
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<LimitsSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub n: usize,
    #[serde(default = "one")]
    pub j: f64,
    pub law: String,
}

fn one() -> f64 {
    1.0
}

fn monte_carlo() -> String {
    "monte_carlo".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    #[serde(default = "monte_carlo")]
    pub mode: String,
    #[serde(default)]
    pub samples: usize,
    #[serde(default)]
    pub pair_terms: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature_nodes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub beta: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub csv: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsSection {
    /// Raises or lowers the site cap for this experiment.
    pub max_n: Option<usize>,
}

impl ExperimentFile {
    /// Parses without validating; errors carry line and column.
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string().trim_end().to_string()))
    }

    /// Installs `limits.max_n` as the process-wide site cap.
    pub fn apply_limits(&self) {
        if let Some(cap) = self.limits.as_ref().and_then(|l| l.max_n) {
            crate::hilbert::set_site_cap(Some(cap));
        }
    }

    /// Reads, parses, applies limits and validates.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let file = Self::parse(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        file.apply_limits();
        file.validate()?;
        Ok(file)
    }

    /// Site cap in force: the file's `limits.max_n`, else the global cap.
    pub fn site_cap(&self) -> usize {
        self.limits
            .as_ref()
            .and_then(|l| l.max_n)
            .unwrap_or_else(site_cap)
    }

    pub fn mode(&self) -> Result<EnsembleMode> {
        let mode: EnsembleMode = self.ensemble.mode.parse()?;
        Ok(match (mode, self.ensemble.quadrature_nodes) {
            (EnsembleMode::Quadrature { .. }, Some(nodes)) => EnsembleMode::Quadrature { nodes },
            (_, Some(_)) => {
                return Err(Error::InvalidParameter(
                    "quadrature_nodes only applies to mode = \"quadrature\"".into(),
                ))
            }
            (m, None) => m,
        })
    }

    /// Config of the first grid point with the base seed.
    pub fn base_config(&self) -> Result<EnsembleConfig> {
        let spec = DisorderSpec::by_name(&self.model.law)?;
        let beta = self.grid.beta.first().copied().unwrap_or(1.0);
        let h = self.grid.h.first().copied().unwrap_or(0.0);
        let params = ModelParams {
            n_sites: self.model.n,
            beta,
            h,
            j_coupling: self.model.j,
        };
        Ok(
            EnsembleConfig::new(params, spec, self.ensemble.samples, self.seed, self.mode()?)
                .with_options(ReportOptions {
                    pair_terms: self.ensemble.pair_terms,
                    third_cumulant: false,
                }),
        )
    }

    pub fn configs(&self) -> Result<Vec<EnsembleConfig>> {
        grid_configs(&self.base_config()?, &self.grid.beta, &self.grid.h)
    }

    /// Every check that can fail before computing: parameter ranges, the site
    /// cap, sample and grid caps, and the enumeration cap of every point.
    /// A raised `limits.max_n` must be applied first.
    pub fn validate(&self) -> Result<()> {
        let cap = self.site_cap();
        if self.model.n > cap {
            return Err(Error::TooManySites {
                n_sites: self.model.n,
                cap,
            });
        }
        if self.grid.beta.is_empty() || self.grid.h.is_empty() {
            return Err(Error::InvalidParameter(
                "grid needs at least one beta and one h".into(),
            ));
        }
        let points = self.grid.beta.len() * self.grid.h.len();
        if points > MAX_GRID_POINTS {
            return Err(Error::ResourceCap(format!(
                "{points} grid points exceed the cap of {MAX_GRID_POINTS}"
            )));
        }
        if self.ensemble.samples > MAX_SAMPLES {
            return Err(Error::ResourceCap(format!(
                "{} samples per point exceed the cap of {MAX_SAMPLES}",
                self.ensemble.samples
            )));
        }
        if self.output.csv.as_os_str().is_empty() {
            return Err(Error::InvalidParameter(
                "output.csv must name a file".into(),
            ));
        }
        for config in self.configs()? {
            planned_samples(&config)?;
        }
        Ok(())
    }

    /// The file as TOML, for embedding in outputs.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment serializes")
    }
}

/// Writes `contents` to a temporary file beside `path`, then renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

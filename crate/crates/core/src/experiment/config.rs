use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::envelope::DEFAULT_REFINE;
use crate::error::{Error, Result};
use crate::grid::{Grid, Potential};
use crate::operator::Scheme;

/// Default output directory when neither `--out` nor the config names one.
pub const OUT_DIR_ENV: &str = "HFMODE_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub x_min: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub h: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            x_min: -16.0,
            length: 32.0,
            h: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    Sech,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub w: f64,
    /// Samples on the configured grid, for `kind = "tabulated"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            kind: PotentialKind::Sech,
            amplitude: 3.0,
            w: 0.5,
            values: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::config(
                "output.format",
                format!("expected csv or json, got {other:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub format: Format,
    /// Output directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    pub potential: PotentialConfig,
    pub scheme: Scheme,
    pub k: usize,
    pub refine: usize,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            potential: PotentialConfig::default(),
            scheme: Scheme::CentralDifference,
            k: 4,
            refine: DEFAULT_REFINE,
            output: OutputConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn grid(&self) -> Result<Grid> {
        let GridConfig { x_min, length, h } = self.grid;
        if !x_min.is_finite() {
            return Err(Error::config("grid.x_min", format!("must be finite, got {x_min}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::config("grid.L", format!("must be positive, got {length}")));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::config("grid.h", format!("must be positive, got {h}")));
        }
        let grid = Grid::new(x_min, length, h).map_err(|e| Error::config("grid.h", e.to_string()))?;
        grid.require_even()
            .map_err(|e| Error::config("grid.h", e.to_string()))?;
        Ok(grid)
    }

    pub fn potential(&self) -> Result<Potential> {
        let p = &self.potential;
        match p.kind {
            PotentialKind::Sech => {
                if !p.amplitude.is_finite() {
                    return Err(Error::config(
                        "potential.A",
                        format!("must be finite, got {}", p.amplitude),
                    ));
                }
                if !(p.w.is_finite() && p.w > 0.0) {
                    return Err(Error::config("potential.w", format!("must be positive, got {}", p.w)));
                }
                Potential::sech(p.amplitude, p.w)
            }
            PotentialKind::Tabulated => {
                let values = p
                    .values
                    .clone()
                    .ok_or_else(|| Error::config("potential.values", "required for a tabulated potential"))?;
                Potential::tabulated(self.grid()?, values).map_err(|e| Error::config("potential.values", e.to_string()))
            }
        }
    }

    /// Checks every field and returns the first problem found.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        self.potential()?;
        if self.k == 0 || self.k > grid.len() {
            return Err(Error::config(
                "k",
                format!("must be in 1..={}, got {}", grid.len(), self.k),
            ));
        }
        if self.refine == 0 {
            return Err(Error::config("refine", "must be at least 1"));
        }
        Ok(())
    }

    /// Directory for output files: the config's path, then the environment
    /// variable, then `out`.
    pub fn out_dir(&self) -> PathBuf {
        self.output
            .path
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Applies a `field.path=value` override.
    pub fn set(&mut self, field: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(field: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::config(field, format!("cannot parse {value:?}")))
        }
        match field {
            "grid.x_min" => self.grid.x_min = num(field, value)?,
            "grid.L" | "grid.length" => self.grid.length = num(field, value)?,
            "grid.h" => self.grid.h = num(field, value)?,
            "potential.kind" => {
                self.potential.kind = match value {
                    "sech" => PotentialKind::Sech,
                    "tabulated" => PotentialKind::Tabulated,
                    other => {
                        return Err(Error::config(
                            field,
                            format!("expected sech or tabulated, got {other:?}"),
                        ))
                    }
                }
            }
            "potential.A" | "potential.amplitude" => self.potential.amplitude = num(field, value)?,
            "potential.w" | "potential.width" => self.potential.w = num(field, value)?,
            "scheme" => self.scheme = value.parse()?,
            "k" => self.k = num(field, value)?,
            "refine" => self.refine = num(field, value)?,
            "output.format" | "format" => self.output.format = value.parse()?,
            "output.path" | "out" => self.output.path = Some(PathBuf::from(value)),
            other => return Err(Error::config(other, "unknown field")),
        }
        Ok(())
    }
}

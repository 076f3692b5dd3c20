//! TOML run configuration: window, point set, weight, sweep radii,
//! contour and caps. Unknown keys are rejected so a typo never silently
//! falls back to a default.

use crate::pointset::{enumerate_lattice_in_ball, LatticeSpec, PointSet, DEFAULT_POINT_CAP};
use crate::weight::WeightSpec;
use crate::window::WindowSpec;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub window: WindowConfig,
    pub set: SetConfig,
    pub weight: WeightConfig,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub contour: ContourConfig,
    #[serde(default)]
    pub caps: CapsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    /// "gaussian" or "sampled".
    pub kind: String,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default)]
    pub normalized: bool,
    /// CSV path (columns t,re,im) for sampled windows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

fn default_dim() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetConfig {
    /// Row-major 2d×2d lattice generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<Vec<Vec<f64>>>,
    /// Explicit point cloud CSV (columns x_1..x_d, xi_1..xi_d).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points_csv: Option<PathBuf>,
    #[serde(default = "default_dim")]
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    /// "constant", "polynomial", "subexponential" or "exponential".
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Ascending section radii.
    pub radii: Vec<f64>,
    /// Enumeration radius for the tail bounds (defaults to
    /// max(20, 3·max radius)); bounds need a deeper tail than the Gram.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_radius: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourConfig {
    /// Contour radius override; without it the default ρ = Â/2 applies
    /// and requires the decade gap flag.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Gap threshold override (absolute); default is 1e-4·b_n.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_threshold: Option<f64>,
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig {
            rho: None,
            nodes: default_nodes(),
            gap_threshold: None,
        }
    }
}

fn default_nodes() -> usize {
    crate::kernel::DEFAULT_CONTOUR_NODES
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapsConfig {
    #[serde(default = "default_cap")]
    pub max_points: usize,
}

fn default_cap() -> usize {
    DEFAULT_POINT_CAP
}

impl Default for CapsConfig {
    fn default() -> Self {
        CapsConfig {
            max_points: default_cap(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_out_dir(),
        }
    }
}

impl RunConfig {
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_str(&text)?;
        // resolve relative data paths against the config location
        if let Some(dir) = path.parent() {
            if let Some(csv) = &cfg.window.csv {
                if csv.is_relative() {
                    cfg.window.csv = Some(dir.join(csv));
                }
            }
            if let Some(csv) = &cfg.set.points_csv {
                if csv.is_relative() {
                    cfg.set.points_csv = Some(dir.join(csv));
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.window.kind.as_str() {
            "gaussian" => {
                if self.window.dim == 0 {
                    return Err(invalid("window.dim", "must be >= 1"));
                }
            }
            "sampled" => {
                if self.window.csv.is_none() {
                    return Err(invalid("window.csv", "sampled windows need a csv path"));
                }
                if self.window.dim != 1 {
                    return Err(invalid("window.dim", "sampled windows support d = 1 only"));
                }
            }
            other => {
                return Err(invalid(
                    "window.kind",
                    format!("unknown kind {other:?}; expected gaussian or sampled"),
                ))
            }
        }

        match (&self.set.lattice, &self.set.points_csv) {
            (Some(rows), None) => {
                let n = 2 * self.set.dim;
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(invalid(
                        "set.lattice",
                        format!("generator must be {n}x{n} for dim {}", self.set.dim),
                    ));
                }
            }
            (None, Some(_)) => {}
            (Some(_), Some(_)) => {
                return Err(invalid("set", "give either lattice or points_csv, not both"))
            }
            (None, None) => return Err(invalid("set", "need lattice or points_csv")),
        }
        if self.set.dim != self.window.dim {
            return Err(invalid(
                "set.dim",
                format!(
                    "point dimension {} must match window dimension {}",
                    self.set.dim, self.window.dim
                ),
            ));
        }

        match self.weight.kind.as_str() {
            "constant" => {}
            "polynomial" => {
                let s = self
                    .weight
                    .s
                    .ok_or_else(|| invalid("weight.s", "polynomial weight needs s"))?;
                if s < 0.0 {
                    return Err(invalid("weight.s", "must be >= 0"));
                }
            }
            "subexponential" => {
                let a = self
                    .weight
                    .a
                    .ok_or_else(|| invalid("weight.a", "sub-exponential weight needs a"))?;
                let b = self
                    .weight
                    .b
                    .ok_or_else(|| invalid("weight.b", "sub-exponential weight needs b"))?;
                if a <= 0.0 {
                    return Err(invalid("weight.a", "must be > 0"));
                }
                if !(b > 0.0 && b < 1.0) {
                    return Err(invalid("weight.b", "must lie in (0, 1)"));
                }
            }
            "exponential" => {
                let a = self
                    .weight
                    .a
                    .ok_or_else(|| invalid("weight.a", "exponential weight needs a"))?;
                if a <= 0.0 {
                    return Err(invalid("weight.a", "must be > 0"));
                }
            }
            other => {
                return Err(invalid(
                    "weight.kind",
                    format!("unknown kind {other:?}"),
                ))
            }
        }

        if self.sweep.radii.is_empty() {
            return Err(invalid("sweep.radii", "need at least one radius"));
        }
        if self.sweep.radii.iter().any(|&r| r < 0.0 || !r.is_finite()) {
            return Err(invalid("sweep.radii", "radii must be finite and >= 0"));
        }
        if self.sweep.radii.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("sweep.radii", "radii must be ascending"));
        }
        if let Some(br) = self.sweep.bound_radius {
            if br < *self.sweep.radii.last().unwrap() {
                return Err(invalid(
                    "sweep.bound_radius",
                    "must be at least the largest sweep radius",
                ));
            }
        }
        if let Some(rho) = self.contour.rho {
            if rho <= 0.0 || !rho.is_finite() {
                return Err(invalid("contour.rho", "must be > 0"));
            }
        }
        if self.contour.nodes < 16 {
            return Err(invalid("contour.nodes", "must be >= 16"));
        }
        if let Some(t) = self.contour.gap_threshold {
            if t <= 0.0 || !t.is_finite() {
                return Err(invalid("contour.gap_threshold", "must be > 0"));
            }
        }
        if self.caps.max_points == 0 {
            return Err(invalid("caps.max_points", "must be >= 1"));
        }
        Ok(())
    }

    pub fn build_window(&self) -> Result<WindowSpec, ConfigError> {
        match self.window.kind.as_str() {
            "gaussian" => WindowSpec::gaussian(self.window.dim, self.window.normalized)
                .map_err(|e| invalid("window", e.to_string())),
            "sampled" => {
                let path = self.window.csv.as_ref().expect("validated");
                WindowSpec::from_csv(path, self.window.normalized)
                    .map_err(|e| invalid("window.csv", e.to_string()))
            }
            _ => unreachable!("validated"),
        }
    }

    pub fn build_weight(&self) -> Result<WeightSpec, ConfigError> {
        let w = match self.weight.kind.as_str() {
            "constant" => WeightSpec::Constant,
            "polynomial" => WeightSpec::Polynomial {
                s: self.weight.s.expect("validated"),
            },
            "subexponential" => WeightSpec::SubExponential {
                a: self.weight.a.expect("validated"),
                b: self.weight.b.expect("validated"),
            },
            "exponential" => WeightSpec::Exponential {
                a: self.weight.a.expect("validated"),
            },
            _ => unreachable!("validated"),
        };
        w.validate().map_err(|e| invalid("weight", e.to_string()))?;
        Ok(w)
    }

    pub fn build_lattice(&self) -> Result<Option<LatticeSpec>, ConfigError> {
        match &self.set.lattice {
            Some(rows) => LatticeSpec::new(self.set.dim, rows)
                .map(Some)
                .map_err(|e| invalid("set.lattice", e.to_string())),
            None => Ok(None),
        }
    }

    /// Point set enumerated to `radius` (lattices) or read from file
    /// (explicit clouds, which ignore the radius).
    pub fn build_pointset(&self, radius: f64) -> Result<PointSet, ConfigError> {
        if let Some(lat) = self.build_lattice()? {
            enumerate_lattice_in_ball(&lat, radius, self.caps.max_points)
                .map_err(|e| invalid("set.lattice", e.to_string()))
        } else {
            let path = self.set.points_csv.as_ref().expect("validated");
            PointSet::from_csv(path).map_err(|e| invalid("set.points_csv", e.to_string()))
        }
    }

    pub fn max_radius(&self) -> f64 {
        *self.sweep.radii.last().expect("validated: radii nonempty")
    }

    pub fn bound_radius(&self) -> f64 {
        self.sweep
            .bound_radius
            .unwrap_or_else(|| (3.0 * self.max_radius()).max(20.0))
    }
}

//! JSON curve, path and curve-list files.

use std::path::{Path, PathBuf};

use elastic_geodesics::bspline::{fit_curve, DiscreteCurve, DiscretePath};
use elastic_geodesics::SplineConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::SplineSection;
use crate::error::CliError;

/// Parses JSON, naming the offending key path on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path.is_empty() || path == "." {
            CliError::Input(format!("{what}: {inner}"))
        } else {
            CliError::Input(format!("{what}: key `{path}`: {inner}"))
        }
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(&path.display().to_string(), e))?;
    parse_json(&text, &path.display().to_string())
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::input(&path.display().to_string(), e))
}

/// A curve given either as raw points to be fitted or as spline data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "default_closed")]
    pub closed: bool,
    /// M × 2 point list, M ≥ 4, fitted with chord-length parameters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spline: Option<SplineCurveData>,
}

fn default_closed() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplineCurveData {
    pub degree: usize,
    pub ctrl: Vec<[f64; 2]>,
}

impl CurveFile {
    pub fn from_points(name: &str, closed: bool, points: Vec<[f64; 2]>) -> Self {
        Self {
            name: Some(name.to_string()),
            closed,
            points: Some(points),
            spline: None,
        }
    }

    pub fn from_curve(name: &str, curve: &DiscreteCurve<f64>) -> Self {
        Self {
            name: Some(name.to_string()),
            closed: curve.config.closed,
            points: None,
            spline: Some(SplineCurveData {
                degree: curve.config.degree_theta,
                ctrl: curve.ctrl.clone(),
            }),
        }
    }

    /// Curve in its own spline layout (point lists are fitted into the
    /// spatial layout of `spline`).
    pub fn to_curve(&self, spline: &SplineSection) -> Result<DiscreteCurve<f64>, CliError> {
        match (&self.points, &self.spline) {
            (Some(points), None) => {
                if points.len() < 4 {
                    return Err(CliError::Input(format!("points: need at least 4 points, got {}", points.len())));
                }
                let cfg = spline.to_config(self.closed)?;
                let (curve, report) = fit_curve(points, &cfg).map_err(|e| CliError::input("points", e))?;
                log::debug!("fitted {} points: max residual {:.3e}", points.len(), report.max_residual);
                Ok(curve)
            }
            (None, Some(data)) => {
                let cfg = if self.closed {
                    SplineConfig::closed(data.degree, data.ctrl.len())
                } else {
                    SplineConfig::open(data.degree, data.ctrl.len())
                };
                DiscreteCurve::new(cfg, data.ctrl.clone()).map_err(|e| CliError::input("spline", e))
            }
            _ => Err(CliError::Input("curve file needs exactly one of `points` or `spline`".into())),
        }
    }
}

/// A loaded curve with its display name.
#[derive(Debug, Clone)]
pub struct NamedCurve {
    pub name: String,
    pub curve: DiscreteCurve<f64>,
}

pub fn load_curve(path: &Path, spline: &SplineSection) -> Result<NamedCurve, CliError> {
    let file: CurveFile = read_json(path)?;
    let curve = file.to_curve(spline).map_err(|e| e.context(path.display()))?;
    let name = file
        .name
        .clone()
        .unwrap_or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    Ok(NamedCurve { name, curve })
}

/// Full layout of a path of curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLayout {
    pub degree_theta: usize,
    pub ctrl_theta: usize,
    pub degree_t: usize,
    pub ctrl_t: usize,
    pub closed: bool,
    #[serde(default = "default_quad_theta")]
    pub quad_theta: usize,
    #[serde(default = "default_quad_t")]
    pub quad_t: usize,
}

fn default_quad_theta() -> usize {
    SplineConfig::default().quad_theta
}

fn default_quad_t() -> usize {
    SplineConfig::default().quad_t
}

impl From<SplineConfig> for PathLayout {
    fn from(c: SplineConfig) -> Self {
        Self {
            degree_theta: c.degree_theta,
            ctrl_theta: c.ctrl_theta,
            degree_t: c.degree_t,
            ctrl_t: c.ctrl_t,
            closed: c.closed,
            quad_theta: c.quad_theta,
            quad_t: c.quad_t,
        }
    }
}

impl PathLayout {
    pub fn to_config(&self) -> SplineConfig {
        let base = if self.closed {
            SplineConfig::closed(self.degree_theta, self.ctrl_theta)
        } else {
            SplineConfig::open(self.degree_theta, self.ctrl_theta)
        };
        base.with_time(self.degree_t, self.ctrl_t).with_quadrature(self.quad_theta, self.quad_t)
    }
}

/// Path control points, one row of θ control points per time control point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathFile {
    pub spline: PathLayout,
    pub ctrl: Vec<Vec<[f64; 2]>>,
    /// Length T of the time interval the path is traversed in; the energy
    /// over [0, T] is the energy over [0, 1] divided by T.
    #[serde(default = "default_duration")]
    pub duration: f64,
}

fn default_duration() -> f64 {
    1.0
}

impl PathFile {
    pub fn from_path(path: &DiscretePath<f64>) -> Self {
        let n = path.config.ctrl_theta;
        Self {
            spline: path.config.into(),
            ctrl: path.ctrl.chunks(n).map(|r| r.to_vec()).collect(),
            duration: 1.0,
        }
    }

    pub fn to_path(&self) -> Result<DiscretePath<f64>, CliError> {
        if !(self.duration > 0.0) {
            return Err(CliError::Input(format!("duration: must be positive, got {}", self.duration)));
        }
        let cfg = self.spline.to_config();
        cfg.validate().map_err(|e| CliError::input("spline", e))?;
        if self.ctrl.len() != cfg.ctrl_t || self.ctrl.iter().any(|r| r.len() != cfg.ctrl_theta) {
            return Err(CliError::Input(format!(
                "ctrl: expected {} rows of {} points",
                cfg.ctrl_t, cfg.ctrl_theta
            )));
        }
        DiscretePath::new(cfg, self.ctrl.concat()).map_err(|e| CliError::input("ctrl", e))
    }
}

/// Curve files for a distance matrix, relative to the list file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveList {
    pub curves: Vec<String>,
}

impl CurveList {
    pub fn resolve(&self, list_path: &Path) -> Vec<PathBuf> {
        let base = list_path.parent().unwrap_or(Path::new("."));
        self.curves.iter().map(|c| base.join(c)).collect()
    }
}

//! Run configuration: JSON with named fields, every section optional,
//! unknown keys rejected.

use elastic_geodesics::matching::{AugLagState, MatchMode, TransformFlags};
use elastic_geodesics::optim::{GradNorm, OptimSettings};
use elastic_geodesics::varifold::{RadialKernel, VarifoldKernel, VarifoldSampling, ZonalKernel};
use elastic_geodesics::{Metric, SplineConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub spline: SplineSection,
    pub metric: MetricSection,
    pub kernel: KernelSection,
    pub options: OptionsSection,
    pub optim: OptimSection,
    pub io: IoSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplineSection {
    pub degree_theta: usize,
    pub ctrl_theta: usize,
    pub degree_t: usize,
    pub ctrl_t: usize,
    pub quad_theta: usize,
    pub quad_t: usize,
}

impl Default for SplineSection {
    fn default() -> Self {
        let d = SplineConfig::default();
        Self {
            degree_theta: d.degree_theta,
            ctrl_theta: d.ctrl_theta,
            degree_t: d.degree_t,
            ctrl_t: d.ctrl_t,
            quad_theta: d.quad_theta,
            quad_t: d.quad_t,
        }
    }
}

impl SplineSection {
    /// Closedness comes from the curves, not the configuration.
    pub fn to_config(&self, closed: bool) -> Result<SplineConfig, CliError> {
        let base = if closed {
            SplineConfig::closed(self.degree_theta, self.ctrl_theta)
        } else {
            SplineConfig::open(self.degree_theta, self.ctrl_theta)
        };
        let cfg = base.with_time(self.degree_t, self.ctrl_t).with_quadrature(self.quad_theta, self.quad_t);
        cfg.validate().map_err(|e| CliError::input("spline", e))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricSection {
    pub a0: f64,
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub length_weighted: bool,
}

impl Default for MetricSection {
    fn default() -> Self {
        Self {
            a0: 1.0,
            a1: 1.0,
            b1: 1.0,
            a2: 1.0,
            length_weighted: false,
        }
    }
}

impl MetricSection {
    pub fn to_params(&self) -> Result<Metric, CliError> {
        let m = Metric {
            a0: self.a0,
            a1: self.a1,
            b1: self.b1,
            a2: self.a2,
            length_weighted: self.length_weighted,
        };
        m.validate().map_err(|e| CliError::input("metric", e))?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialName {
    Gaussian,
    Cauchy,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZonalName {
    Constant,
    Linear,
    Squared,
    GaussianOriented,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSection {
    pub radial: RadialName,
    pub radial_scale: f64,
    pub zonal: ZonalName,
    pub zonal_scale: f64,
    /// Evaluate on this many equally spaced sites instead of the
    /// θ-quadrature sites.
    pub sample_points: Option<usize>,
}

impl Default for KernelSection {
    fn default() -> Self {
        Self {
            radial: RadialName::Gaussian,
            radial_scale: 0.1,
            zonal: ZonalName::GaussianOriented,
            zonal_scale: 0.3,
            sample_points: None,
        }
    }
}

impl KernelSection {
    pub fn to_kernel(&self) -> Result<VarifoldKernel<f64>, CliError> {
        let radial = match self.radial {
            RadialName::Gaussian => RadialKernel::Gaussian,
            RadialName::Cauchy => RadialKernel::Cauchy,
            RadialName::Constant => RadialKernel::Constant,
        };
        let zonal = match self.zonal {
            ZonalName::Constant => ZonalKernel::Constant,
            ZonalName::Linear => ZonalKernel::Linear,
            ZonalName::Squared => ZonalKernel::Squared,
            ZonalName::GaussianOriented => ZonalKernel::GaussianOriented,
        };
        let k = VarifoldKernel::new(radial, self.radial_scale, zonal, self.zonal_scale);
        k.validate().map_err(|e| CliError::input("kernel", e))?;
        Ok(k)
    }

    pub fn sampling(&self) -> Result<VarifoldSampling, CliError> {
        match self.sample_points {
            None => Ok(VarifoldSampling::Quadrature),
            Some(n) if n >= 2 => Ok(VarifoldSampling::Uniform(n)),
            Some(n) => Err(CliError::Input(format!("kernel.sample_points: need at least 2, got {n}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Penalty,
    #[default]
    Auglag,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptionsSection {
    pub mode: ModeName,
    /// Weight λ_w of the quadratic penalty.
    pub penalty_weight: f64,
    pub opt_translation: bool,
    pub opt_rotation: bool,
    pub opt_scale: bool,
    pub lambda0: f64,
    pub mu0: f64,
    pub tau0: f64,
    pub eps: f64,
    pub rho: f64,
    pub tau_final: f64,
    pub k_max: usize,
}

impl Default for OptionsSection {
    fn default() -> Self {
        let s = AugLagState::<f64>::default();
        Self {
            mode: ModeName::Auglag,
            penalty_weight: 1e3,
            opt_translation: false,
            opt_rotation: false,
            opt_scale: false,
            lambda0: s.lambda,
            mu0: s.mu,
            tau0: s.tau,
            eps: s.eps,
            rho: s.rho,
            tau_final: s.tau_final,
            k_max: s.k_max,
        }
    }
}

impl OptionsSection {
    pub fn auglag_state(&self) -> AugLagState<f64> {
        AugLagState {
            lambda: self.lambda0,
            mu: self.mu0,
            tau: self.tau0,
            eps: self.eps,
            rho: self.rho,
            tau_final: self.tau_final,
            k_max: self.k_max,
        }
    }

    pub fn mode(&self) -> Result<MatchMode<f64>, CliError> {
        match self.mode {
            ModeName::Penalty => {
                if !(self.penalty_weight > 0.0) {
                    return Err(CliError::Input(format!(
                        "options.penalty_weight: must be positive, got {}",
                        self.penalty_weight
                    )));
                }
                Ok(MatchMode::Penalty {
                    weight: self.penalty_weight,
                })
            }
            ModeName::Auglag => {
                let s = self.auglag_state();
                s.validate().map_err(|e| CliError::input("options", e))?;
                Ok(MatchMode::AugmentedLagrangian(s))
            }
        }
    }

    pub fn transform(&self) -> TransformFlags {
        TransformFlags {
            translation: self.opt_translation,
            rotation: self.opt_rotation,
            scale: self.opt_scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NormName {
    #[default]
    Two,
    Sup,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimSection {
    pub memory: usize,
    pub max_iters: usize,
    /// Gradient tolerance of the penalty solve. The augmented Lagrangian
    /// uses its own τ schedule instead.
    pub grad_tol: f64,
    pub norm: NormName,
    pub c1: f64,
    pub c2: f64,
    pub max_line_search: usize,
    pub verbosity: u8,
}

impl Default for OptimSection {
    fn default() -> Self {
        let s = OptimSettings::<f64>::default();
        Self {
            memory: 20,
            max_iters: s.max_iters,
            grad_tol: s.grad_tol,
            norm: NormName::Two,
            c1: s.c1,
            c2: s.c2,
            max_line_search: s.max_line_search,
            verbosity: 0,
        }
    }
}

impl OptimSection {
    pub fn to_settings(&self) -> Result<OptimSettings<f64>, CliError> {
        let s = OptimSettings {
            memory: self.memory,
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            norm: match self.norm {
                NormName::Two => GradNorm::Two,
                NormName::Sup => GradNorm::Sup,
            },
            c1: self.c1,
            c2: self.c2,
            max_line_search: self.max_line_search,
            verbosity: self.verbosity,
        };
        s.validate().map_err(|e| CliError::input("optim", e))?;
        Ok(s)
    }
}

/// Default paths; command-line arguments take precedence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct IoSection {
    pub source: Option<String>,
    pub target: Option<String>,
    pub out: Option<String>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        crate::files::parse_json(text, "config")
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        crate::files::read_json(path)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical (compact, field-ordered) serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        format!("{:x}", Sha256::digest(canonical.as_bytes()))
    }

    /// Checks every section without needing curves.
    pub fn validate(&self) -> Result<(), CliError> {
        self.spline.to_config(true)?;
        self.metric.to_params()?;
        self.kernel.to_kernel()?;
        self.kernel.sampling()?;
        self.options.mode()?;
        self.optim.to_settings()?;
        Ok(())
    }
}

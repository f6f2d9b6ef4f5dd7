//! JSON run configuration: schema-validated before any computation, unknown
//! keys rejected.

use crate::error::{CglError, Result};
use crate::experiments::corpus::CorpusSpec;
use crate::experiments::necessity::ScanFamily;
use crate::grid::RadialGrid;
use crate::integrator::SimParams;
use crate::weights::{make_weight, make_zeta, HShape, WeightFamily, ZetaProfile};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub schema: Option<String>,
    pub dim: usize,
    pub alpha: f64,
    /// Single angle for simulate / bounds / verify-identities.
    #[serde(default)]
    pub theta: Option<f64>,
    /// Explicit sweep angles (strictly increasing), or
    #[serde(default)]
    pub theta_list: Option<Vec<f64>>,
    /// a geometric cos(theta) grid for sweeps probing theta -> pi/2.
    #[serde(default)]
    pub cos_theta_log_grid: Option<CosThetaLogGrid>,
    pub grid: GridConfig,
    pub integrator: IntegratorConfig,
    pub initial_data: CorpusSpec,
    #[serde(default = "default_gn_c")]
    pub gn_constant_c: f64,
    #[serde(default)]
    pub weight: Option<WeightConfig>,
    /// Residual ceiling turning identity audits into a CI gate (exit code 4).
    #[serde(default)]
    pub audit: Option<AuditConfig>,
    #[serde(default)]
    pub necessity: Option<NecessityConfig>,
    #[serde(default)]
    pub lemma71: Option<Lemma71Config>,
    pub output_dir: PathBuf,
}

fn default_gn_c() -> f64 {
    1.0
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub r_max: f64,
    pub m: usize,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub dt0: f64,
    pub dt_min: f64,
    /// Absolute L-infinity blow-up threshold; null means 1e6 * ||u0||_inf.
    #[serde(default)]
    pub u_max: Option<f64>,
    pub tol: f64,
    pub t_end: f64,
    pub record_every: usize,
    #[serde(default)]
    pub linear_only: bool,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosThetaLogGrid {
    pub first: f64,
    pub factor: f64,
    pub count: usize,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub auto: Option<AutoWeightConfig>,
}

/// Certify epsilon from a bound: largest grid epsilon with
/// max I_eps <= a over fields of mass at most A^2.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutoWeightConfig {
    pub a: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    pub max_rel_residual: f64,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NecessityConfig {
    pub family: ScanFamily,
    pub lambdas: Vec<f64>,
    /// Offset radius (scaled family) or annulus radius (annular family).
    pub radius: f64,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma71Config {
    pub m_bound: f64,
    pub c_grid_min: f64,
    pub c_grid_max: f64,
    pub c_grid_points: usize,
    pub corpus: Vec<CorpusSpec>,
    #[serde(default)]
    pub allow_alpha_outside: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CglError::io(path))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| CglError::Config(format!(
            "{}: {e}",
            path.display()
        )))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(CglError::Config(format!("dim must be >= 1, got {}", self.dim)));
        }
        if !(self.alpha > 0.0) {
            return Err(CglError::Config(format!(
                "alpha must be > 0, got {}",
                self.alpha
            )));
        }
        if !(self.gn_constant_c > 0.0) {
            return Err(CglError::Config(format!(
                "gn_constant_c must be > 0, got {}",
                self.gn_constant_c
            )));
        }
        if let Some(w) = &self.weight {
            match (&w.epsilon, &w.auto) {
                (Some(e), None) if *e > 0.0 => {}
                (None, Some(a)) if a.a > 0.0 && a.big_a > 0.0 => {}
                _ => {
                    return Err(CglError::Config(
                        "weight needs exactly one of a positive `epsilon` \
                         or `auto: {a, A}` with positive entries"
                            .into(),
                    ))
                }
            }
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Arc<RadialGrid>> {
        Ok(Arc::new(RadialGrid::new(
            self.dim,
            self.grid.r_max,
            self.grid.m,
        )?))
    }

    pub fn zeta(&self) -> Arc<ZetaProfile> {
        make_zeta(HShape::StandardMollifier)
    }

    /// Resolve the weight family: explicit epsilon, or the certified search
    /// run against the configured initial datum.
    pub fn build_weight(
        &self,
        grid: &Arc<RadialGrid>,
        zeta: &Arc<ZetaProfile>,
    ) -> Result<Option<WeightFamily>> {
        let Some(w) = &self.weight else {
            return Ok(None);
        };
        if let Some(eps) = w.epsilon {
            return Ok(Some(make_weight(zeta.clone(), eps, self.dim)?));
        }
        let auto = w.auto.as_ref().expect("validated");
        let u0 = self.initial_data.materialize(grid, zeta)?;
        let cert = crate::weights::find_epsilon(
            grid,
            auto.a,
            auto.big_a,
            std::slice::from_ref(&u0),
            zeta,
            self.alpha,
            self.dim,
        )?;
        Ok(Some(make_weight(zeta.clone(), cert.epsilon, self.dim)?))
    }

    pub fn sim_params(&self, grid: Arc<RadialGrid>, theta: f64) -> Result<SimParams> {
        let zeta = self.zeta();
        let weight = self.build_weight(&grid, &zeta)?;
        Ok(SimParams {
            grid,
            alpha: self.alpha,
            theta,
            dt0: self.integrator.dt0,
            dt_min: self.integrator.dt_min,
            u_max: self.integrator.u_max,
            t_end: self.integrator.t_end,
            tol: self.integrator.tol,
            record_every: self.integrator.record_every,
            linear_only: self.integrator.linear_only,
            weight,
        })
    }

    /// The single angle for non-sweep subcommands.
    pub fn single_theta(&self) -> Result<f64> {
        match (self.theta, &self.theta_list) {
            (Some(t), _) => Ok(t),
            (None, Some(l)) if l.len() == 1 => Ok(l[0]),
            _ => Err(CglError::Config(
                "this subcommand needs a single `theta` in the config".into(),
            )),
        }
    }

    /// Sweep angles from either theta_list or the cos grid.
    pub fn sweep_thetas(&self) -> Result<Vec<f64>> {
        match (&self.theta_list, &self.cos_theta_log_grid) {
            (Some(l), None) => {
                if l.len() < 2 {
                    return Err(CglError::Config("theta_list needs >= 2 angles".into()));
                }
                Ok(l.clone())
            }
            (None, Some(g)) => {
                crate::experiments::thetas_from_cos_grid(g.first, g.factor, g.count)
            }
            (Some(_), Some(_)) => Err(CglError::Config(
                "give either theta_list or cos_theta_log_grid, not both".into(),
            )),
            (None, None) => Err(CglError::Config(
                "sweep needs theta_list or cos_theta_log_grid".into(),
            )),
        }
    }
}

//! Scenario configuration: TOML schema, validation and the bundled library.
//!
//! See `docs/scenario-schema.md` for the full schema.  All physical defaults
//! live in [`crate::tolerances`] and in the serde defaults here; the
//! `defaults_version` field pins them so summaries stay reproducible across
//! releases.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{KGrid, TimeGrid, XGrid};
use crate::tolerances;
use crate::units::Units;
use crate::wavepacket::GaussianComponent;

/// Version of the default constants baked into this build.
pub const DEFAULTS_VERSION: u32 = 1;

fn default_version() -> u32 {
    DEFAULTS_VERSION
}

/// One Gaussian component of the prepared state.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub weight_re: f64,
    #[serde(default)]
    pub weight_im: f64,
    pub k0: f64,
    pub sigma_k: f64,
    #[serde(default)]
    pub x0: f64,
}

impl ComponentSpec {
    pub fn to_component(&self) -> GaussianComponent {
        GaussianComponent {
            weight: (self.weight_re, self.weight_im),
            k0: self.k0,
            sigma_k: self.sigma_k,
            x0: self.x0,
        }
    }
}

/// The prepared state: a Gaussian superposition, optionally pre-evolved.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub components: Vec<ComponentSpec>,
    /// Free evolution applied before the scenario clock starts (shifts every
    /// arrival-time series by the same amount).
    #[serde(default)]
    pub evolve_by: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrivalSpec {
    #[serde(default)]
    pub x: f64,
}

impl Default for ArrivalSpec {
    fn default() -> Self {
        ArrivalSpec { x: 0.0 }
    }
}

/// Overridable numerical tolerances (defaults from [`crate::tolerances`]).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(default = "default_chi_rel")]
    pub chi_rel: f64,
    #[serde(default = "default_backflow_threshold")]
    pub backflow_threshold: f64,
    #[serde(default = "default_endpoint_decay")]
    pub endpoint_decay: f64,
}

fn default_chi_rel() -> f64 {
    tolerances::CHI_REL
}
fn default_backflow_threshold() -> f64 {
    tolerances::BACKFLOW_THRESHOLD
}
fn default_endpoint_decay() -> f64 {
    tolerances::ENDPOINT_DECAY
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        ToleranceSpec {
            chi_rel: default_chi_rel(),
            backflow_threshold: default_backflow_threshold(),
            endpoint_decay: default_endpoint_decay(),
        }
    }
}

/// Monte Carlo trajectory settings.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    pub n: usize,
    pub seed: u64,
    #[serde(default = "default_local_tol")]
    pub local_tol: f64,
    #[serde(default = "default_h_max")]
    pub h_max: f64,
}

fn default_local_tol() -> f64 {
    tolerances::ODE_LOCAL_TOL
}
fn default_h_max() -> f64 {
    0.1
}

/// Superposition-scan settings for the quadratic-form violation experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadformSpec {
    /// Number of scan points on `[0, pi/2]`.
    #[serde(default = "default_scan_points")]
    pub m: usize,
    /// The crossing packet paired against the scenario's backflow state.
    pub phi: ComponentSpec,
}

fn default_scan_points() -> usize {
    65
}

/// Expected relation between the Kijowski and Bohmian means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GapExpectation {
    #[default]
    None,
    /// Backflow-free right mover: the means coincide and `B = J` pointwise.
    Equality,
    /// Backflow state: strictly positive forward gap, dual-route checked.
    Strict,
    /// Parity-transformed backflow state: reversed inequality.
    Mirror,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BackflowExpectation {
    #[default]
    Ignore,
    Forbidden,
    Required,
}

/// Which checks a run executes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct CheckSpec {
    pub unitarity: bool,
    pub parseval: bool,
    pub flux: bool,
    pub axioms: bool,
    pub first_moment_equality: bool,
    pub gap: GapExpectation,
    pub backflow: BackflowExpectation,
    pub quadform: bool,
    pub trajectories: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub series_csv: bool,
    pub scan_csv: bool,
    pub trajectories_csv: bool,
}

/// A complete, reproducible experiment definition.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default = "default_version")]
    pub defaults_version: u32,
    #[serde(default)]
    pub units: Units,
    pub kgrid: KGrid,
    pub state: StateSpec,
    pub time: TimeGrid,
    #[serde(default)]
    pub xgrid: Option<XGrid>,
    #[serde(default)]
    pub arrival: ArrivalSpec,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
    #[serde(default)]
    pub trajectories: Option<TrajectorySpec>,
    #[serde(default)]
    pub quadform: Option<QuadformSpec>,
    #[serde(default)]
    pub checks: CheckSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("cannot parse config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config(format!("cannot read config {}: {e}", path.display()))
        })?;
        ScenarioConfig::from_toml(&text)
    }

    /// Resolve a bundled name or a filesystem path.
    pub fn load(name_or_path: &str) -> Result<Self> {
        let p = Path::new(name_or_path);
        if p.exists() {
            return ScenarioConfig::from_path(p);
        }
        if let Some(text) = bundled_toml(name_or_path) {
            return ScenarioConfig::from_toml(text);
        }
        Err(Error::config(format!(
            "'{name_or_path}' is neither a readable file nor a bundled scenario; \
             bundled: {}",
            bundled_names().join(", ")
        )))
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::config("scenario name must not be empty"));
        }
        if self.defaults_version != DEFAULTS_VERSION {
            return Err(Error::config(format!(
                "config pins defaults_version = {}, this build provides {}",
                self.defaults_version, DEFAULTS_VERSION
            )));
        }
        Units::new(self.units.hbar, self.units.mass)
            .map_err(|e| Error::config(format!("units: {e}")))?;
        KGrid::new(self.kgrid.k_min, self.kgrid.k_max, self.kgrid.n_k)
            .map_err(|e| Error::config(format!("kgrid: {e}")))?;
        TimeGrid::new(self.time.t_min, self.time.t_max, self.time.n_t)
            .map_err(|e| Error::config(format!("time: {e}")))?;
        if let Some(xg) = &self.xgrid {
            let xg = XGrid::new(xg.x_min, xg.x_max, xg.n_x)
                .map_err(|e| Error::config(format!("xgrid: {e}")))?;
            let kmax = self.kgrid.abs_k_max();
            if xg.spacing() * kmax >= std::f64::consts::PI {
                return Err(Error::config(format!(
                    "xgrid too coarse: dx * |k|_max = {:.4} >= pi",
                    xg.spacing() * kmax
                )));
            }
        }
        if self.state.components.is_empty() {
            return Err(Error::config("state needs at least one component"));
        }
        for (i, c) in self.state.components.iter().enumerate() {
            if !(c.sigma_k > 0.0) {
                return Err(Error::config(format!("component {i}: sigma_k must be > 0")));
            }
        }
        if self.checks.parseval && self.xgrid.is_none() {
            return Err(Error::config("parseval check needs an xgrid"));
        }
        if self.checks.quadform && self.quadform.is_none() {
            return Err(Error::config("quadform check needs a [quadform] section"));
        }
        if self.checks.trajectories && self.trajectories.is_none() {
            return Err(Error::config("trajectories check needs a [trajectories] section"));
        }
        if let Some(t) = &self.trajectories {
            if t.n < 100 {
                return Err(Error::config("trajectories.n must be at least 100"));
            }
        }
        if let Some(q) = &self.quadform {
            if q.m < 33 {
                return Err(Error::config("quadform.m must be at least 33"));
            }
            let i = self.time.nearest_index(0.0);
            if self.time.point(i).abs() > 1e-9 {
                return Err(Error::config(
                    "quadform scenarios must sample t = 0 on the time grid",
                ));
            }
        }
        Ok(())
    }
}

const BUNDLED: &[(&str, &str)] = &[
    ("gaussian-no-backflow", include_str!("../scenarios/gaussian-no-backflow.toml")),
    ("two-gaussian-backflow", include_str!("../scenarios/two-gaussian-backflow.toml")),
    ("theorem4-pair", include_str!("../scenarios/theorem4-pair.toml")),
    ("mirror-left-mover", include_str!("../scenarios/mirror-left-mover.toml")),
    ("montecarlo-oracle", include_str!("../scenarios/montecarlo-oracle.toml")),
];

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

pub fn bundled_toml(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

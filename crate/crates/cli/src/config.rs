//! TOML run configuration. Every section is optional; missing keys take the
//! defaults below, and the fully resolved form is written to each manifest.

use std::f64::consts::PI;
use std::path::Path;

use drs_lip::model::equivalent_vertical_sinusoid;
use drs_lip::oracle::IntegratorConfig;
use drs_lip::planner::{DrsPreset, Foot, GaitParams, PlannerConfig, Point2};
use drs_lip::stability::SweepGrid;
use drs_lip::{ModelParams, Pitching, SeriesConfig, SurfaceMotion, VerticalSinusoid};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub model: ModelSection,
    pub surface: SurfaceSpec,
    pub series: SeriesConfig,
    pub integrator: IntegratorConfig,
    pub solve: SolveSection,
    pub compare: CompareSection,
    pub stability: StabilitySection,
    pub gait: GaitSection,
    pub planner: PlannerConfig,
    pub plan: PlanSection,
    pub bench: BenchSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub z0: f64,
    pub g: f64,
    pub mass: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            z0: 0.42,
            g: 9.81,
            mass: 25.0,
        }
    }
}

/// Surface motion: a named preset or explicit parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSpec {
    Preset {
        name: DrsPreset,
    },
    VerticalSinusoid {
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    Pitching {
        amplitude_deg: f64,
        frequency: f64,
        radius: f64,
    },
}

impl Default for SurfaceSpec {
    fn default() -> Self {
        SurfaceSpec::VerticalSinusoid {
            amplitude: 0.07,
            omega: PI,
            phase: 0.0,
        }
    }
}

impl SurfaceSpec {
    pub fn motion(&self) -> drs_lip::Result<SurfaceMotion> {
        let m: SurfaceMotion = match *self {
            SurfaceSpec::Preset { name } => name.motion(),
            SurfaceSpec::VerticalSinusoid {
                amplitude,
                omega,
                phase,
            } => VerticalSinusoid::with_phase(amplitude, omega, phase)?.into(),
            SurfaceSpec::Pitching {
                amplitude_deg,
                frequency,
                radius,
            } => Pitching::from_degrees(amplitude_deg, frequency, radius)?.into(),
        };
        m.validate()?;
        Ok(m)
    }

    /// Vertical sinusoid fed to the pendulum; pitching surfaces use their
    /// first-harmonic equivalent at the configured radius.
    pub fn vertical(&self) -> drs_lip::Result<VerticalSinusoid> {
        match self.motion()? {
            SurfaceMotion::VerticalSinusoid(s) => Ok(s),
            SurfaceMotion::Pitching(p) => equivalent_vertical_sinusoid(&p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    pub x0: f64,
    pub v0: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
}

impl Default for SolveSection {
    fn default() -> Self {
        Self {
            x0: 0.1,
            v0: 0.0,
            t_start: 0.0,
            t_end: 0.5,
            samples: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    pub trials: usize,
    pub samples: usize,
    pub t_end: f64,
    pub x_max: f64,
    pub v_max: f64,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            trials: 1000,
            samples: 1000,
            t_end: 0.5,
            x_max: 0.2,
            v_max: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilitySection {
    pub grid: SweepGrid,
    /// `|Re μ| ≤ tol` classifies as marginal.
    pub tol: f64,
}

impl Default for StabilitySection {
    fn default() -> Self {
        Self {
            grid: SweepGrid::default(),
            tol: drs_lip::stability::DEFAULT_MARGINAL_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaitPreset {
    G1,
    G2,
}

/// Gait preset with optional per-field overrides.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaitSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<GaitPreset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub friction_coefficient: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gait_period: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avg_velocity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step_height: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contact_sequence: Option<[Foot; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stance_half_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stance_half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_footholds: Option<[Point2; 4]>,
}

impl GaitSection {
    pub fn params(&self) -> GaitParams {
        let mut g = match self.preset.unwrap_or(GaitPreset::G1) {
            GaitPreset::G1 => GaitParams::g1(),
            GaitPreset::G2 => GaitParams::g2(),
        };
        macro_rules! apply {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { g.$f = v; })* };
        }
        apply!(
            friction_coefficient,
            z0,
            gait_period,
            avg_velocity,
            step_length,
            max_step_height,
            contact_sequence,
            stance_half_length,
            stance_half_width
        );
        if self.initial_footholds.is_some() {
            g.initial_footholds = self.initial_footholds;
        }
        g
    }

    /// Every field explicit, no preset.
    pub fn resolved(&self) -> Self {
        let g = self.params();
        Self {
            preset: None,
            friction_coefficient: Some(g.friction_coefficient),
            z0: Some(g.z0),
            gait_period: Some(g.gait_period),
            avg_velocity: Some(g.avg_velocity),
            step_length: Some(g.step_length),
            max_step_height: Some(g.max_step_height),
            contact_sequence: Some(g.contact_sequence),
            stance_half_length: Some(g.stance_half_length),
            stance_half_width: Some(g.stance_half_width),
            initial_footholds: g.initial_footholds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanSection {
    /// Sampling step of the plan CSV (s).
    pub dt: f64,
    /// Random instants per phase in the feasibility post-check.
    pub post_check_samples: usize,
}

impl Default for PlanSection {
    fn default() -> Self {
        Self {
            dt: 0.01,
            post_check_samples: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchWorkload {
    Solve,
    Plan,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub workload: BenchWorkload,
    /// Repetitions of the solve workload.
    pub reps: usize,
    /// Repetitions of each planner solve.
    pub plan_reps: usize,
}

impl Default for BenchSection {
    fn default() -> Self {
        Self {
            workload: BenchWorkload::All,
            reps: 1000,
            plan_reps: 20,
        }
    }
}

impl Config {
    /// Parses TOML text; errors carry the line and column.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads a TOML config, or the `config` object of a JSON run manifest.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::load_with_seed(path).map(|(c, _)| c)
    }

    /// Like [`Config::load`], also returning the seed recorded in a manifest.
    pub fn load_with_seed(path: &Path) -> Result<(Self, Option<u64>), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
                CliError::Config(format!(
                    "{}: line {}, column {}: {e}",
                    path.display(),
                    e.line(),
                    e.column()
                ))
            })?;
            let seed = value.get("seed").and_then(|s| s.as_u64());
            let cfg = value.get("config").cloned().unwrap_or(value);
            let cfg = serde_json::from_value(cfg)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            return Ok((cfg, seed));
        }
        let cfg = Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        Ok((cfg, None))
    }

    /// Copy with every default materialized.
    pub fn resolved(&self) -> Self {
        Self {
            gait: self.gait.resolved(),
            ..self.clone()
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn model_params(&self) -> drs_lip::Result<ModelParams> {
        ModelParams::new(self.model.z0, self.model.g, self.model.mass)
    }

    /// Checks every section; failures are configuration errors.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |e: drs_lip::Error| CliError::Config(e.to_string());
        self.model_params().map_err(bad)?;
        self.surface.motion().map_err(bad)?;
        self.integrator.validate().map_err(bad)?;
        self.stability.grid.validate().map_err(bad)?;
        self.planner.validate().map_err(bad)?;
        if self.series.n_terms == 0 || self.series.depth < self.series.n_terms {
            return Err(CliError::Config(
                "series: need n_terms ≥ 1 and depth ≥ n_terms".into(),
            ));
        }
        let s = &self.solve;
        if s.samples < 2 || !(s.t_end > s.t_start) {
            return Err(CliError::Config(
                "solve: need samples ≥ 2 and t_end > t_start".into(),
            ));
        }
        let c = &self.compare;
        if c.samples < 2 || !(c.t_end > 0.0) || !(c.x_max > 0.0) || !(c.v_max > 0.0) {
            return Err(CliError::Config(
                "compare: need samples ≥ 2 and positive t_end, x_max, v_max".into(),
            ));
        }
        if !(self.plan.dt > 0.0) {
            return Err(CliError::Config("plan: dt must be positive".into()));
        }
        if self.bench.reps == 0 || self.bench.plan_reps == 0 {
            return Err(CliError::Config("bench: reps must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(Config::from_toml("").unwrap(), Config::default());
    }

    #[test]
    fn resolved_round_trips() {
        let cfg = Config::from_toml("[gait]\npreset = \"G2\"\n")
            .unwrap()
            .resolved();
        let back = Config::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.gait.params(), GaitParams::g2());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = Config::from_toml("[model]\nz0 = 0.42\nheight = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn surface_presets_parse() {
        let cfg = Config::from_toml("[surface]\nkind = \"preset\"\nname = \"DRS3\"\n").unwrap();
        let v = cfg.surface.vertical().unwrap();
        assert!((v.omega - 0.8 * PI).abs() < 1e-15);
    }

    #[test]
    fn invalid_values_fail_validation() {
        let cfg = Config::from_toml("[model]\nz0 = -1.0\n").unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }
}

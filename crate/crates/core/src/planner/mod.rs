//! Two-layer quadruped walking planner on a moving surface.
//!
//! The upper layer picks the initial horizontal CoM state of each of the four
//! single-swing phases of a gait cycle so that the analytic pendulum
//! trajectories are continuous, keep the requested average velocity, stay
//! inside the support polygons and respect friction. The lower layer turns
//! that CoM plan into base and foot trajectories.

mod bezier;
mod com;
mod geometry;
mod lower;
mod nlp;
mod schedule;
pub mod solver;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::mathieu::SeriesConfig;
use crate::model::{Pitching, SurfaceMotion, VerticalSinusoid};

pub use bezier::{swing_curve, BezierCurve, Point3};
pub use com::{com_plan, feasibility_check, CoMPlan, FeasibilityCheck, PhaseTrajectory};
pub use geometry::{ConvexPolygon, Point2};
pub use lower::{lower_layer, sample_plan, surface_height_at, FullBodyPlan, PlanSample};
pub use nlp::{
    build_nlp, phase_motion, AnalyticPhaseSolver, CostFunction, GaitNlp, PhaseSolver,
    PhaseTimeline, ZeroCost, DECISION_DIM,
};
pub use schedule::{build_schedule, GaitSchedule, PhaseSpec};
pub use solver::{
    solve_nlp, AugmentedLagrangian, NlpEvaluation, NlpProblem, NlpSolver, SolverConfig,
    SolverReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Foot {
    FR,
    FL,
    RR,
    RL,
}

impl Foot {
    pub const ALL: [Foot; 4] = [Foot::FR, Foot::FL, Foot::RR, Foot::RL];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Bit used in support masks: FR = 1, FL = 2, RR = 4, RL = 8.
    pub fn bit(self) -> u8 {
        1 << self.index()
    }

    pub fn name(self) -> &'static str {
        match self {
            Foot::FR => "FR",
            Foot::FL => "FL",
            Foot::RR => "RR",
            Foot::RL => "RL",
        }
    }

    /// Sign of the nominal offset along the travel (x) and lateral (y) axes.
    fn signs(self) -> (f64, f64) {
        match self {
            Foot::FR => (1.0, -1.0),
            Foot::FL => (1.0, 1.0),
            Foot::RR => (-1.0, -1.0),
            Foot::RL => (-1.0, 1.0),
        }
    }
}

impl fmt::Display for Foot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Foot {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "FR" => Ok(Foot::FR),
            "FL" => Ok(Foot::FL),
            "RR" => Ok(Foot::RR),
            "RL" => Ok(Foot::RL),
            other => Err(format!("unknown foot `{other}`")),
        }
    }
}

/// User-defined gait parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaitParams {
    pub friction_coefficient: f64,
    /// CoM height above the support point (m).
    pub z0: f64,
    pub gait_period: f64,
    /// Average forward speed (m/s).
    pub avg_velocity: f64,
    pub step_length: f64,
    pub max_step_height: f64,
    /// Swing order over the four phases.
    #[serde(default = "default_sequence")]
    pub contact_sequence: [Foot; 4],
    /// Half the fore-aft distance between nominal footholds (m).
    #[serde(default = "default_half_length")]
    pub stance_half_length: f64,
    /// Half the lateral distance between nominal footholds (m).
    #[serde(default = "default_half_width")]
    pub stance_half_width: f64,
    /// World footholds at the start of the cycle, in FR, FL, RR, RL order.
    /// Generated from the nominal stance when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_footholds: Option<[Point2; 4]>,
}

fn default_sequence() -> [Foot; 4] {
    [Foot::FR, Foot::RL, Foot::FL, Foot::RR]
}

fn default_half_length() -> f64 {
    0.2
}

fn default_half_width() -> f64 {
    0.15
}

impl GaitParams {
    /// Gait G1: 2 s period, 5 cm/s, 10 cm steps, 5 cm swing height.
    pub fn g1() -> Self {
        Self {
            friction_coefficient: 0.5,
            z0: 0.42,
            gait_period: 2.0,
            avg_velocity: 0.05,
            step_length: 0.10,
            max_step_height: 0.05,
            contact_sequence: default_sequence(),
            stance_half_length: default_half_length(),
            stance_half_width: default_half_width(),
            initial_footholds: None,
        }
    }

    /// Gait G2: 2.5 s period, 6 cm/s, 15 cm steps, 4 cm swing height.
    pub fn g2() -> Self {
        Self {
            gait_period: 2.5,
            avg_velocity: 0.06,
            step_length: 0.15,
            max_step_height: 0.04,
            ..Self::g1()
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("friction_coefficient", self.friction_coefficient)?;
        ensure_positive("z0", self.z0)?;
        ensure_positive("gait_period", self.gait_period)?;
        ensure_positive("avg_velocity", self.avg_velocity)?;
        ensure_positive("step_length", self.step_length)?;
        ensure_positive("stance_half_length", self.stance_half_length)?;
        ensure_positive("stance_half_width", self.stance_half_width)?;
        if !(self.max_step_height > 0.0) {
            return Err(Error::NonPositiveStepHeight(self.max_step_height));
        }
        let mut seen = [false; 4];
        for f in self.contact_sequence {
            if std::mem::replace(&mut seen[f.index()], true) {
                return Err(Error::InfeasibleSchedule(format!(
                    "contact sequence swings {f} twice"
                )));
            }
        }
        let stride = self.avg_velocity * self.gait_period;
        if (stride - self.step_length).abs() > 1e-9 * self.step_length.max(1.0) {
            return Err(Error::InfeasibleSchedule(format!(
                "avg_velocity · gait_period = {stride} m does not match step_length = {} m",
                self.step_length
            )));
        }
        Ok(())
    }

    /// Footholds at the start of the cycle. The default staggers the nominal
    /// rectangle so that each foot's time-averaged position relative to a
    /// body moving at `avg_velocity` equals its nominal offset.
    pub fn footholds(&self) -> [Point2; 4] {
        if let Some(f) = self.initial_footholds {
            return f;
        }
        let mut out = [[0.0; 2]; 4];
        for foot in Foot::ALL {
            let k = self
                .contact_sequence
                .iter()
                .position(|&f| f == foot)
                .unwrap_or(0) as f64;
            let (sx, sy) = foot.signs();
            out[foot.index()] = [
                sx * self.stance_half_length - self.step_length * (1.5 - k) / 4.0,
                sy * self.stance_half_width,
            ];
        }
        out
    }
}

/// Named surface motions used in the examples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DrsPreset {
    /// Vertical sinusoid, 10 cm at π rad/s.
    #[serde(rename = "DRS1")]
    Drs1,
    /// Pitching, 5° at 0.5 Hz.
    #[serde(rename = "DRS2")]
    Drs2,
    /// Pitching, 5° at 0.4 Hz.
    #[serde(rename = "DRS3")]
    Drs3,
}

/// Radius at which preset pitching motions are quoted (m).
pub const PRESET_PITCH_RADIUS: f64 = 1.0;

impl DrsPreset {
    pub fn motion(self) -> SurfaceMotion {
        match self {
            DrsPreset::Drs1 => VerticalSinusoid {
                amplitude: 0.10,
                omega: PI,
                phase: 0.0,
            }
            .into(),
            DrsPreset::Drs2 => Pitching {
                amplitude: 5f64.to_radians(),
                frequency: 0.5,
                radius: PRESET_PITCH_RADIUS,
            }
            .into(),
            DrsPreset::Drs3 => Pitching {
                amplitude: 5f64.to_radians(),
                frequency: 0.4,
                radius: PRESET_PITCH_RADIUS,
            }
            .into(),
        }
    }
}

impl FromStr for DrsPreset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "DRS1" => Ok(DrsPreset::Drs1),
            "DRS2" => Ok(DrsPreset::Drs2),
            "DRS3" => Ok(DrsPreset::Drs3),
            other => Err(format!("unknown surface preset `{other}`")),
        }
    }
}

/// Planner settings not part of the gait itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// Path-constraint samples per phase, endpoints included.
    pub n_check: usize,
    /// Four-leg support inserted after switches 1→2 and 3→4, as a fraction of
    /// the gait period.
    pub four_leg_fraction: f64,
    /// World x of the pitching axis (m).
    pub pitch_axis_x: f64,
    /// Box bound on the initial CoM offsets (m).
    pub position_bound: f64,
    /// Box bound on the initial CoM velocities (m/s).
    pub velocity_bound: f64,
    pub solver: SolverConfig,
    pub series: SeriesConfig,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            n_check: 10,
            four_leg_fraction: 0.05,
            pitch_axis_x: -1.0,
            position_bound: 0.5,
            velocity_bound: 1.0,
            solver: SolverConfig::default(),
            series: SeriesConfig::default(),
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_check < 2 {
            return Err(Error::InvalidParameter {
                name: "n_check",
                value: self.n_check as f64,
                reason: "must be at least 2",
            });
        }
        if !(0.0..0.25).contains(&self.four_leg_fraction) {
            return Err(Error::InvalidParameter {
                name: "four_leg_fraction",
                value: self.four_leg_fraction,
                reason: "must lie in [0, 0.25)",
            });
        }
        ensure_positive("position_bound", self.position_bound)?;
        ensure_positive("velocity_bound", self.velocity_bound)?;
        ensure_positive("tol", self.solver.tol)
    }
}

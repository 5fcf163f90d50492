use serde::{Deserialize, Serialize};

use super::geometry::{ConvexPolygon, Point2};
use super::{Foot, GaitParams};
use crate::error::{Error, Result};

/// Polygons thinner than this (m) are rejected as degenerate.
pub const MIN_POLYGON_WIDTH: f64 = 1e-4;

/// One continuous single-swing phase of the gait cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpec {
    pub index: usize,
    pub start: f64,
    pub duration: f64,
    pub swing_foot: Foot,
    pub support_feet: Vec<Foot>,
    /// Positions of all four feet during the phase (swing foot at lift-off).
    pub footholds: [Point2; 4],
    /// Where the swing foot lands at the end of the phase.
    pub landing: Point2,
    pub support_polygon: ConvexPolygon,
    /// Support point of the pendulum during this phase.
    pub cop_reference: Point2,
}

impl PhaseSpec {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    pub fn support_mask(&self) -> u8 {
        self.support_feet.iter().fold(0, |m, f| m | f.bit())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitSchedule {
    pub phases: Vec<PhaseSpec>,
    pub period: f64,
    /// Displacement of every foothold over one cycle.
    pub stride: Point2,
}

impl GaitSchedule {
    /// Index of the phase containing `t` (the last phase owns `t = period`).
    pub fn phase_at(&self, t: f64) -> usize {
        let n = self.phases.len();
        self.phases
            .iter()
            .position(|p| t < p.end())
            .unwrap_or(n - 1)
    }
}

/// Four equal phases; phase `k` swings `contact_sequence[k]` forward by one
/// step while the other three feet support the pendulum at the centroid of
/// their triangle.
pub fn build_schedule(gait: &GaitParams) -> Result<GaitSchedule> {
    gait.validate()?;
    let duration = gait.gait_period / 4.0;
    let mut feet = gait.footholds();
    let mut phases = Vec::with_capacity(4);
    for (k, &swing) in gait.contact_sequence.iter().enumerate() {
        let support_feet: Vec<Foot> = Foot::ALL.into_iter().filter(|&f| f != swing).collect();
        let pts: Vec<Point2> = support_feet.iter().map(|f| feet[f.index()]).collect();
        let polygon = ConvexPolygon::hull(&pts);
        let width = polygon.min_width();
        if polygon.edge_count() < 3 || width < MIN_POLYGON_WIDTH {
            return Err(Error::InfeasibleSchedule(format!(
                "support polygon of phase {} is degenerate (width {width:e} m)",
                k + 1
            )));
        }
        let cop = polygon.centroid();
        let lift = feet[swing.index()];
        let landing = [lift[0] + gait.step_length, lift[1]];
        phases.push(PhaseSpec {
            index: k,
            start: k as f64 * duration,
            duration,
            swing_foot: swing,
            support_feet,
            footholds: feet,
            landing,
            support_polygon: polygon,
            cop_reference: cop,
        });
        feet[swing.index()] = landing;
    }
    Ok(GaitSchedule {
        phases,
        period: gait.gait_period,
        stride: [gait.step_length, 0.0],
    })
}

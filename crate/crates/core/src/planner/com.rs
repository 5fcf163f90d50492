use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use super::geometry::Point2;
use super::nlp::{phase_motion, DECISION_DIM};
use super::schedule::{build_schedule, GaitSchedule};
use super::{GaitParams, PlannerConfig};
use crate::error::{Error, Result};
use crate::mathieu::{AnalyticSolution, MathieuBasis};
use crate::model::{ModelParams, PendulumState, SurfaceMotion, VerticalSinusoid};

/// Horizontal CoM trajectory of one phase, relative to its support point.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrajectory {
    pub start: f64,
    pub end: f64,
    pub support: Point2,
    pub motion: VerticalSinusoid,
    pub x: AnalyticSolution,
    pub y: AnalyticSolution,
}

impl PhaseTrajectory {
    /// World-frame horizontal position and velocity.
    pub fn world(&self, t: f64) -> (Point2, Point2) {
        let sx = self.x.evaluate(t);
        let sy = self.y.evaluate(t);
        (
            [self.support[0] + sx.x, self.support[1] + sy.x],
            [sx.v, sy.v],
        )
    }

    /// Offset from the support point.
    pub fn offset(&self, t: f64) -> Point2 {
        [self.x.position(t), self.y.position(t)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoMPlan {
    pub phases: Vec<PhaseTrajectory>,
    pub schedule: GaitSchedule,
    pub z0: f64,
}

impl CoMPlan {
    pub fn period(&self) -> f64 {
        self.schedule.period
    }

    pub fn phase_at(&self, t: f64) -> usize {
        self.schedule.phase_at(t)
    }

    /// World-frame horizontal CoM position and velocity at `t`.
    pub fn horizontal(&self, t: f64) -> (Point2, Point2) {
        self.phases[self.phase_at(t)].world(t)
    }

    /// Position jump at each phase end; the last one compares against the
    /// next cycle's start shifted by one stride.
    pub fn continuity_residuals(&self) -> Vec<f64> {
        let n = self.phases.len();
        let stride = self.schedule.stride;
        (0..n)
            .map(|k| {
                let (end, _) = self.phases[k].world(self.phases[k].end);
                let next = &self.phases[(k + 1) % n];
                let (mut start, _) = next.world(next.start);
                if k + 1 == n {
                    start[0] += stride[0];
                    start[1] += stride[1];
                }
                (end[0] - start[0]).hypot(end[1] - start[1])
            })
            .collect()
    }

    /// Mean horizontal velocity over the cycle.
    pub fn average_velocity(&self) -> Point2 {
        let first = &self.phases[0];
        let last = &self.phases[self.phases.len() - 1];
        let (a, _) = first.world(first.start);
        let (b, _) = last.world(last.end);
        let t = self.period();
        [(b[0] - a[0]) / t, (b[1] - a[1]) / t]
    }
}

/// Worst friction ratio and polygon distance over random instants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityCheck {
    pub samples_per_phase: usize,
    /// Largest `|r_sc| / z0`.
    pub max_friction_ratio: f64,
    /// Largest signed distance outside the support polygon (m); negative
    /// when every sample is strictly inside.
    pub max_polygon_distance: f64,
}

impl FeasibilityCheck {
    pub fn passes(&self, friction_coefficient: f64, tol: f64) -> bool {
        self.max_friction_ratio <= friction_coefficient + tol && self.max_polygon_distance <= tol
    }
}

/// Samples each phase at uniformly random instants.
pub fn feasibility_check(plan: &CoMPlan, samples_per_phase: usize, seed: u64) -> FeasibilityCheck {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut check = FeasibilityCheck {
        samples_per_phase,
        max_friction_ratio: 0.0,
        max_polygon_distance: f64::NEG_INFINITY,
    };
    for (phase, spec) in plan.phases.iter().zip(&plan.schedule.phases) {
        for _ in 0..samples_per_phase {
            let t = rng.random_range(phase.start..phase.end);
            let off = phase.offset(t);
            let ratio = off[0].hypot(off[1]) / plan.z0;
            check.max_friction_ratio = check.max_friction_ratio.max(ratio);
            let (pos, _) = phase.world(t);
            let (d, _) = spec.support_polygon.max_edge_distance(pos);
            check.max_polygon_distance = check.max_polygon_distance.max(d);
        }
    }
    check
}

/// Fits the per-phase analytic solutions for a decision vector.
pub fn com_plan(
    alpha: &[f64],
    gait: &GaitParams,
    motion: &SurfaceMotion,
    model: &ModelParams,
    config: &PlannerConfig,
) -> Result<CoMPlan> {
    if alpha.len() != DECISION_DIM || alpha.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha.len() as f64,
            reason: "must hold 16 finite values",
        });
    }
    let model = ModelParams {
        z0: gait.z0,
        ..*model
    };
    let schedule = build_schedule(gait)?;
    let mut phases = Vec::with_capacity(4);
    for (k, p) in schedule.phases.iter().enumerate() {
        let m = phase_motion(motion, p.cop_reference, config.pitch_axis_x)?;
        let basis = Arc::new(MathieuBasis::for_model(&model, &m, &config.series)?);
        let a = &alpha[4 * k..4 * k + 4];
        phases.push(PhaseTrajectory {
            start: p.start,
            end: p.end(),
            support: p.cop_reference,
            motion: m,
            x: basis.solve(p.start, PendulumState::new(a[0], a[2]))?,
            y: basis.solve(p.start, PendulumState::new(a[1], a[3]))?,
        });
    }
    Ok(CoMPlan {
        phases,
        schedule,
        z0: gait.z0,
    })
}

use serde::{Deserialize, Serialize};

use super::bezier::{swing_curve, BezierCurve, Point3};
use super::com::CoMPlan;
use super::geometry::Point2;
use super::{Foot, GaitParams, PlannerConfig};
use crate::error::{Error, Result};
use crate::model::SurfaceMotion;

/// One row of a sampled plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanSample {
    pub t: f64,
    pub base: Point3,
    pub base_pitch: f64,
    /// Foot positions in FR, FL, RR, RL order.
    pub feet: [Point3; 4],
    /// 1-based gait phase.
    pub phase_id: usize,
    pub support_mask: u8,
    /// Height of the active support point.
    pub support_z: f64,
}

impl PlanSample {
    pub const CSV_HEADER: &'static str = "t_s,base_x_m,base_y_m,base_z_m,base_pitch_rad,\
footFR_x_m,footFR_y_m,footFR_z_m,footFL_x_m,footFL_y_m,footFL_z_m,\
footRR_x_m,footRR_y_m,footRR_z_m,footRL_x_m,footRL_y_m,footRL_z_m,\
phase_id,support_feet_mask";

    pub fn csv_row(&self) -> String {
        let mut cols = vec![
            self.t,
            self.base[0],
            self.base[1],
            self.base[2],
            self.base_pitch,
        ];
        for f in &self.feet {
            cols.extend_from_slice(f);
        }
        let mut row = cols
            .iter()
            .map(|v| format!("{v:e}"))
            .collect::<Vec<_>>()
            .join(",");
        row.push_str(&format!(",{},{}", self.phase_id, self.support_mask));
        row
    }
}

/// Base and foot trajectories over one gait cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct FullBodyPlan {
    pub com: CoMPlan,
    pub motion: SurfaceMotion,
    pub pitch_axis_x: f64,
    /// Swing curve of each phase, surface-relative in z.
    pub swings: Vec<BezierCurve>,
    /// Swing window `[lift, touchdown]` of each phase.
    pub swing_windows: Vec<(f64, f64)>,
    /// Four-leg support intervals.
    pub four_leg_intervals: Vec<(f64, f64)>,
}

/// Height of the surface under the horizontal point `p`.
pub fn surface_height_at(motion: &SurfaceMotion, pitch_axis_x: f64, p: Point2, t: f64) -> f64 {
    match motion {
        SurfaceMotion::VerticalSinusoid(m) => m.height(t),
        SurfaceMotion::Pitching(m) => (p[0] - pitch_axis_x) * m.angle(t).sin(),
    }
}

impl FullBodyPlan {
    pub fn horizon(&self) -> f64 {
        self.com.period()
    }

    pub fn state_at(&self, t: f64) -> PlanSample {
        let k = self.com.phase_at(t);
        let phase = &self.com.schedule.phases[k];
        let traj = &self.com.phases[k];
        let (xy, _) = traj.world(t);
        let support_z = traj.motion.height(t);
        let mut feet = [[0.0; 3]; 4];
        for foot in Foot::ALL {
            let p = phase.footholds[foot.index()];
            feet[foot.index()] = [
                p[0],
                p[1],
                surface_height_at(&self.motion, self.pitch_axis_x, p, t),
            ];
        }
        let (lift, touchdown) = self.swing_windows[k];
        let mut mask = phase.support_mask();
        if t >= lift {
            let s = ((t - lift) / (touchdown - lift)).clamp(0.0, 1.0);
            let b = self.swings[k].point(s);
            let ground = surface_height_at(&self.motion, self.pitch_axis_x, [b[0], b[1]], t);
            feet[phase.swing_foot.index()] = [b[0], b[1], ground + b[2]];
        } else {
            mask |= phase.swing_foot.bit();
        }
        PlanSample {
            t,
            base: [xy[0], xy[1], support_z + self.com.z0],
            base_pitch: self.motion.pitch(t),
            feet,
            phase_id: k + 1,
            support_mask: mask,
            support_z,
        }
    }
}

/// Interpolates base and foot trajectories around a CoM plan. Four-leg
/// support delays the swings of phases 2 and 4.
pub fn lower_layer(
    com: &CoMPlan,
    gait: &GaitParams,
    motion: &SurfaceMotion,
    config: &PlannerConfig,
) -> Result<FullBodyPlan> {
    if !(gait.max_step_height > 0.0) {
        return Err(Error::NonPositiveStepHeight(gait.max_step_height));
    }
    let delay = config.four_leg_fraction * gait.gait_period;
    let mut swings = Vec::with_capacity(4);
    let mut windows = Vec::with_capacity(4);
    let mut four_leg = Vec::new();
    for p in &com.schedule.phases {
        let lift = p.footholds[p.swing_foot.index()];
        let curve = swing_curve(
            [lift[0], lift[1], 0.0],
            [p.landing[0], p.landing[1], 0.0],
            gait.max_step_height,
        )?;
        let start = if p.index % 2 == 1 && delay > 0.0 {
            four_leg.push((p.start, p.start + delay));
            p.start + delay
        } else {
            p.start
        };
        swings.push(curve);
        windows.push((start, p.end()));
    }
    Ok(FullBodyPlan {
        com: com.clone(),
        motion: *motion,
        pitch_axis_x: config.pitch_axis_x,
        swings,
        swing_windows: windows,
        four_leg_intervals: four_leg,
    })
}

/// Samples the plan at `k·dt` for `k = 0..=floor(horizon/dt)`.
pub fn sample_plan(plan: &FullBodyPlan, dt: f64) -> Vec<PlanSample> {
    let horizon = plan.horizon();
    if !(dt > 0.0) {
        return Vec::new();
    }
    let n = (horizon / dt * (1.0 + 1e-12)).floor() as usize;
    (0..=n)
        .map(|k| plan.state_at((k as f64 * dt).min(horizon)))
        .collect()
}

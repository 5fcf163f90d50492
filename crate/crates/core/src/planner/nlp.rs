//! The upper-layer NLP: 16 decision variables, the initial CoM offset and
//! velocity of each phase relative to its support point.
//!
//! Layout of the decision vector, per phase `k`: `[x0, y0, vx0, vy0]` at
//! indices `4k..4k+4`. Constraint order:
//!
//! * equalities: position continuity `(x, y)` at the end of each phase
//!   (the last one against the next cycle's first phase), then the average
//!   velocity along `x` and `y`;
//! * inequalities: for each phase and each of `n_check` samples, friction
//!   then polygon; then upper and lower box bounds for each variable.

use std::sync::Arc;

use super::geometry::Point2;
use super::schedule::{build_schedule, GaitSchedule};
use super::solver::{NlpEvaluation, NlpProblem};
use super::{GaitParams, PlannerConfig};
use crate::error::{Error, Result};
use crate::grid::linspace;
use crate::mathieu::{MathieuBasis, SeriesConfig};
use crate::model::{
    equivalent_vertical_sinusoid, ModelParams, PendulumState, SurfaceMotion, VerticalSinusoid,
};

pub const DECISION_DIM: usize = 16;
const N_EQ: usize = 10;

/// Propagates a phase's horizontal pendulum from its initial state.
pub trait PhaseSolver: Send + Sync {
    /// Positions relative to the support point at the phase's sample times.
    fn positions(&self, phase: usize, ic: PendulumState, out: &mut [f64]) -> Result<()>;
}

/// Phase start times, constraint sample times and the vertical sinusoid
/// driving each phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTimeline {
    pub starts: Vec<f64>,
    pub samples: Vec<Vec<f64>>,
    pub motions: Vec<VerticalSinusoid>,
}

/// Vertical sinusoid seen at `support`. Pitching surfaces use the
/// first-harmonic equivalent at the support point's distance from the axis.
pub fn phase_motion(
    motion: &SurfaceMotion,
    support: Point2,
    pitch_axis_x: f64,
) -> Result<VerticalSinusoid> {
    match motion {
        SurfaceMotion::VerticalSinusoid(s) => Ok(*s),
        SurfaceMotion::Pitching(p) => {
            let radius = support[0] - pitch_axis_x;
            if !(radius > 0.0) {
                return Err(Error::InfeasibleSchedule(format!(
                    "support point x = {} m is not ahead of the pitch axis at {pitch_axis_x} m",
                    support[0]
                )));
            }
            let mut at = *p;
            at.radius = radius;
            equivalent_vertical_sinusoid(&at)
        }
    }
}

impl PhaseTimeline {
    pub fn new(
        schedule: &GaitSchedule,
        motion: &SurfaceMotion,
        n_check: usize,
        pitch_axis_x: f64,
    ) -> Result<Self> {
        let mut starts = Vec::new();
        let mut samples = Vec::new();
        let mut motions = Vec::new();
        for p in &schedule.phases {
            starts.push(p.start);
            samples.push(linspace(p.start, p.end(), n_check));
            motions.push(phase_motion(motion, p.cop_reference, pitch_axis_x)?);
        }
        Ok(Self {
            starts,
            samples,
            motions,
        })
    }
}

/// Evaluates phases through the series solution.
#[derive(Debug, Clone)]
pub struct AnalyticPhaseSolver {
    bases: Vec<Arc<MathieuBasis>>,
    timeline: PhaseTimeline,
}

impl AnalyticPhaseSolver {
    pub fn new(
        model: &ModelParams,
        timeline: PhaseTimeline,
        series: &SeriesConfig,
    ) -> Result<Self> {
        let bases = timeline
            .motions
            .iter()
            .map(|m| MathieuBasis::for_model(model, m, series).map(Arc::new))
            .collect::<Result<_>>()?;
        Ok(Self { bases, timeline })
    }

    pub fn bases(&self) -> &[Arc<MathieuBasis>] {
        &self.bases
    }
}

impl PhaseSolver for AnalyticPhaseSolver {
    fn positions(&self, phase: usize, ic: PendulumState, out: &mut [f64]) -> Result<()> {
        let basis = &self.bases[phase];
        let t_ref = self.timeline.starts[phase];
        let a = basis.fit(t_ref, ic)?;
        for (o, &t) in out.iter_mut().zip(&self.timeline.samples[phase]) {
            let [p1, p2] = basis.values_at(t_ref, t);
            *o = a.alpha1 * p1 + a.alpha2 * p2;
        }
        Ok(())
    }
}

/// Differentiable scalar cost on the decision vector.
pub trait CostFunction: Send + Sync {
    /// Returns the cost and writes its gradient.
    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

/// The trivial cost `h ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroCost;

impl CostFunction for ZeroCost {
    fn evaluate(&self, _x: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        0.0
    }
}

pub struct GaitNlp {
    gait: GaitParams,
    model: ModelParams,
    schedule: GaitSchedule,
    timeline: PhaseTimeline,
    n_check: usize,
    bounds: [f64; 4],
    solver: Box<dyn PhaseSolver>,
    cost: Box<dyn CostFunction>,
}

/// Builds the NLP with constraints evaluated through the analytic solution
/// and the trivial cost.
pub fn build_nlp(
    gait: &GaitParams,
    motion: &SurfaceMotion,
    model: &ModelParams,
    config: &PlannerConfig,
) -> Result<GaitNlp> {
    config.validate()?;
    motion.validate()?;
    let model = ModelParams {
        z0: gait.z0,
        ..*model
    };
    model.validate()?;
    let schedule = build_schedule(gait)?;
    let quotient = motion.period() / gait.gait_period;
    if (quotient - quotient.round()).abs() > 1e-9 * quotient.max(1.0) || quotient.round() < 1.0 {
        return Err(Error::InfeasibleSchedule(format!(
            "surface period {} s is not an integer multiple of the gait period {} s",
            motion.period(),
            gait.gait_period
        )));
    }
    let timeline = PhaseTimeline::new(&schedule, motion, config.n_check, config.pitch_axis_x)?;
    let solver = AnalyticPhaseSolver::new(&model, timeline.clone(), &config.series)?;
    let (p, v) = (config.position_bound, config.velocity_bound);
    Ok(GaitNlp {
        gait: gait.clone(),
        model,
        schedule,
        timeline,
        n_check: config.n_check,
        bounds: [p, p, v, v],
        solver: Box::new(solver),
        cost: Box::new(ZeroCost),
    })
}

impl GaitNlp {
    pub fn with_cost(mut self, cost: Box<dyn CostFunction>) -> Self {
        self.cost = cost;
        self
    }

    /// Replaces the phase propagator used inside constraint evaluation.
    pub fn with_phase_solver(mut self, solver: Box<dyn PhaseSolver>) -> Self {
        self.solver = solver;
        self
    }

    pub fn gait(&self) -> &GaitParams {
        &self.gait
    }

    pub fn model(&self) -> &ModelParams {
        &self.model
    }

    pub fn schedule(&self) -> &GaitSchedule {
        &self.schedule
    }

    pub fn timeline(&self) -> &PhaseTimeline {
        &self.timeline
    }

    pub fn n_check(&self) -> usize {
        self.n_check
    }

    /// Box bound magnitude of decision variable `i`.
    pub fn bound(&self, i: usize) -> f64 {
        self.bounds[i % 4]
    }
}

fn ic(x: &[f64], phase: usize, axis: usize) -> PendulumState {
    PendulumState::new(x[4 * phase + axis], x[4 * phase + 2 + axis])
}

impl NlpProblem for GaitNlp {
    fn dim(&self) -> usize {
        DECISION_DIM
    }

    fn n_eq(&self) -> usize {
        N_EQ
    }

    fn n_ineq(&self) -> usize {
        4 * self.n_check * 2 + 2 * DECISION_DIM
    }

    fn evaluate(&self, x: &[f64], out: &mut NlpEvaluation) -> Result<()> {
        let n = DECISION_DIM;
        let m = self.n_check;
        out.cost = self.cost.evaluate(x, &mut out.cost_grad);
        out.eq_jac.iter_mut().for_each(|v| *v = 0.0);
        out.ineq_jac.iter_mut().for_each(|v| *v = 0.0);

        // pos[k][axis][j] and unit responses to (1, 0) and (0, 1).
        let mut pos = vec![[vec![0.0; m], vec![0.0; m]]; 4];
        let mut unit = vec![[vec![0.0; m], vec![0.0; m]]; 4];
        for k in 0..4 {
            for axis in 0..2 {
                self.solver
                    .positions(k, ic(x, k, axis), &mut pos[k][axis])?;
            }
            self.solver
                .positions(k, PendulumState::new(1.0, 0.0), &mut unit[k][0])?;
            self.solver
                .positions(k, PendulumState::new(0.0, 1.0), &mut unit[k][1])?;
        }

        let phases = &self.schedule.phases;
        let stride = self.schedule.stride;
        for k in 0..4 {
            let next = (k + 1) % 4;
            let shift = if k == 3 { stride } else { [0.0, 0.0] };
            for axis in 0..2 {
                let row = 2 * k + axis;
                out.eq[row] = phases[k].cop_reference[axis] + pos[k][axis][m - 1]
                    - (phases[next].cop_reference[axis] + x[4 * next + axis] + shift[axis]);
                let jac = &mut out.eq_jac[row * n..(row + 1) * n];
                jac[4 * k + axis] += unit[k][0][m - 1];
                jac[4 * k + 2 + axis] += unit[k][1][m - 1];
                jac[4 * next + axis] -= 1.0;
            }
        }
        let period = self.gait.gait_period;
        let target = [self.gait.avg_velocity, 0.0];
        for axis in 0..2 {
            let row = 8 + axis;
            let end = phases[3].cop_reference[axis] + pos[3][axis][m - 1];
            let start = phases[0].cop_reference[axis] + x[axis];
            out.eq[row] = (end - start) / period - target[axis];
            let jac = &mut out.eq_jac[row * n..(row + 1) * n];
            jac[12 + axis] += unit[3][0][m - 1] / period;
            jac[14 + axis] += unit[3][1][m - 1] / period;
            jac[axis] -= 1.0 / period;
        }

        let z0_sq = self.gait.z0 * self.gait.z0;
        let mu_sq = self.gait.friction_coefficient * self.gait.friction_coefficient;
        for k in 0..4 {
            let polygon = &phases[k].support_polygon;
            let cop = phases[k].cop_reference;
            for j in 0..m {
                let (px, py) = (pos[k][0][j], pos[k][1][j]);
                let (ux, uv) = (unit[k][0][j], unit[k][1][j]);
                let row = 2 * (k * m + j);
                out.ineq[row] = (px * px + py * py) / z0_sq - mu_sq;
                let jac = &mut out.ineq_jac[row * n..(row + 1) * n];
                jac[4 * k] = 2.0 * px / z0_sq * ux;
                jac[4 * k + 2] = 2.0 * px / z0_sq * uv;
                jac[4 * k + 1] = 2.0 * py / z0_sq * ux;
                jac[4 * k + 3] = 2.0 * py / z0_sq * uv;

                let (dist, edge) = polygon.max_edge_distance([cop[0] + px, cop[1] + py]);
                let (normal, _) = polygon.edge(edge);
                out.ineq[row + 1] = dist;
                let jac = &mut out.ineq_jac[(row + 1) * n..(row + 2) * n];
                jac[4 * k] = normal[0] * ux;
                jac[4 * k + 2] = normal[0] * uv;
                jac[4 * k + 1] = normal[1] * ux;
                jac[4 * k + 3] = normal[1] * uv;
            }
        }
        let base = 8 * m;
        for i in 0..n {
            let b = self.bound(i);
            out.ineq[base + 2 * i] = x[i] - b;
            out.ineq_jac[(base + 2 * i) * n + i] = 1.0;
            out.ineq[base + 2 * i + 1] = -b - x[i];
            out.ineq_jac[(base + 2 * i + 1) * n + i] = -1.0;
        }
        Ok(())
    }
}

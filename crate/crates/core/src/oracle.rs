//! Numerical reference solutions: an adaptive Dormand–Prince 4(5) integrator
//! with dense output, Floquet exponents from the monodromy matrix, and error
//! statistics between analytic and numeric trajectories.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
pub use crate::grid::linspace;
use crate::mathieu::{AnalyticSolution, CharacteristicExponent};
use crate::model::{MathieuParams, ModelParams, PendulumState, VerticalSinusoid};
use crate::planner::{PhaseSolver, PhaseTimeline};

/// Smallest step the integrator accepts before giving up.
pub const MIN_STEP: f64 = 1e-14;

/// Denominator guard (m) for pointwise percentage errors.
pub const PERCENT_ERROR_FLOOR: f64 = 1e-9;

/// Interpolant used to report states between accepted steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenseOutput {
    /// Fourth-order continuous extension of the Dormand–Prince pair.
    #[default]
    Native,
    /// Cubic Hermite interpolation from endpoint states and slopes.
    Hermite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step size; unbounded when `None`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    pub max_steps: usize,
    pub dense_output: DenseOutput,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self::with_tolerance(1e-9)
    }
}

impl IntegratorConfig {
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            rel_tol: tol,
            abs_tol: tol,
            max_step: None,
            max_steps: 1_000_000,
            dense_output: DenseOutput::Native,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, tol) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(tol > 0.0 && tol <= 1e-2) {
                return Err(Error::InvalidParameter {
                    name,
                    value: tol,
                    reason: "must lie in (0, 1e-2]",
                });
            }
        }
        if let Some(h) = self.max_step {
            ensure_positive("max_step", h)?;
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter {
                name: "max_steps",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

type State = [f64; 2];

#[inline]
fn axpy(y: &State, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += c * k[0];
        out[1] += c * k[1];
    }
    out
}

/// Cubic Hermite interpolant on `[t, t + h]` at fraction `theta`.
#[inline]
fn hermite(y0: &State, f0: &State, y1: &State, f1: &State, h: f64, theta: f64) -> State {
    let mut out = [0.0; 2];
    for i in 0..2 {
        let dy = y1[i] - y0[i];
        out[i] = y0[i]
            + theta * dy
            + theta
                * (theta - 1.0)
                * ((1.0 - 2.0 * theta) * dy + (theta - 1.0) * h * f0[i] + theta * h * f1[i]);
    }
    out
}

fn scaled_rms(v: &State, y0: &State, y1: &State, cfg: &IntegratorConfig) -> f64 {
    let mut sum = 0.0;
    for i in 0..2 {
        let sc = cfg.abs_tol + cfg.rel_tol * y0[i].abs().max(y1[i].abs());
        sum += (v[i] / sc).powi(2);
    }
    (0.5 * sum).sqrt()
}

fn initial_step<F: FnMut(f64, &State) -> State>(
    f: &mut F,
    t0: f64,
    y0: &State,
    f0: &State,
    span: f64,
    cfg: &IntegratorConfig,
) -> f64 {
    let d0 = scaled_rms(y0, y0, y0, cfg);
    let d1 = scaled_rms(f0, y0, y0, cfg);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span);
    let y1 = axpy(y0, &[(h0, f0)]);
    let f1 = f(t0 + h0, &y1);
    let diff = [f1[0] - f0[0], f1[1] - f0[1]];
    let d2 = scaled_rms(&diff, y0, y0, cfg) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end`, writing the dense-output
/// state at each of `sample_times` (ascending, inside `[t0, t_end]`) to `out`.
pub fn integrate_ode<F>(
    mut f: F,
    t0: f64,
    y0: State,
    t_end: f64,
    sample_times: &[f64],
    cfg: &IntegratorConfig,
    out: &mut Vec<State>,
) -> Result<IntegrationStats>
where
    F: FnMut(f64, &State) -> State,
{
    cfg.validate()?;
    if !(t0.is_finite() && t_end.is_finite() && t_end >= t0) {
        return Err(Error::InvalidParameter {
            name: "t_span",
            value: t_end - t0,
            reason: "must be finite with t_end ≥ t0",
        });
    }
    out.clear();
    out.reserve(sample_times.len());
    let mut stats = IntegrationStats::default();
    let mut next = 0;
    while next < sample_times.len() && sample_times[next] <= t0 {
        out.push(y0);
        next += 1;
    }
    let span = t_end - t0;
    if span == 0.0 {
        return Ok(stats);
    }

    let mut t = t0;
    let mut y = y0;
    let mut comp = [0.0; 2];
    let mut k1 = f(t, &y);
    stats.evaluations += 1;
    let mut h = initial_step(&mut f, t0, &y, &k1, span, cfg);
    stats.evaluations += 1;
    if let Some(hmax) = cfg.max_step {
        h = h.min(hmax);
    }

    let mut last_rejected = false;
    while t < t_end {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(Error::TooManySteps {
                max_steps: cfg.max_steps,
                t_end,
            });
        }
        let remaining = t_end - t;
        let mut final_step = false;
        if h >= remaining * (1.0 - 1e-12) {
            h = remaining;
            final_step = true;
        }
        if h < MIN_STEP {
            return Err(Error::StepSizeUnderflow { t, step: h });
        }

        let k2 = f(t + C2 * h, &axpy(&y, &[(h * A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(&y, &[(h * A31, &k1), (h * A32, &k2)]));
        let k4 = f(
            t + C4 * h,
            &axpy(&y, &[(h * A41, &k1), (h * A42, &k2), (h * A43, &k3)]),
        );
        let k5 = f(
            t + C5 * h,
            &axpy(
                &y,
                &[
                    (h * A51, &k1),
                    (h * A52, &k2),
                    (h * A53, &k3),
                    (h * A54, &k4),
                ],
            ),
        );
        let k6 = f(
            t + h,
            &axpy(
                &y,
                &[
                    (h * A61, &k1),
                    (h * A62, &k2),
                    (h * A63, &k3),
                    (h * A64, &k4),
                    (h * A65, &k5),
                ],
            ),
        );
        let mut delta = [0.0; 2];
        for i in 0..2 {
            delta[i] = h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        let y_new = [y[0] + delta[0], y[1] + delta[1]];
        let t_new = if final_step { t_end } else { t + h };
        let k7 = f(t_new, &y_new);
        stats.evaluations += 6;

        let mut err = [0.0; 2];
        for i in 0..2 {
            err[i] =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err_norm = scaled_rms(&err, &y, &y_new, cfg);

        if err_norm <= 1.0 {
            stats.accepted += 1;
            // Compensated update of the state.
            let mut y_acc = y;
            for i in 0..2 {
                let d = delta[i] - comp[i];
                let s = y[i] + d;
                comp[i] = (s - y[i]) - d;
                y_acc[i] = s;
            }
            if next < sample_times.len() && sample_times[next] <= t_new {
                let mut native = [[0.0; 2]; 3];
                if cfg.dense_output == DenseOutput::Native {
                    for i in 0..2 {
                        let dy = y_acc[i] - y[i];
                        let bspl = h * k1[i] - dy;
                        native[0][i] = bspl;
                        native[1][i] = dy - h * k7[i] - bspl;
                        native[2][i] = h
                            * (D1 * k1[i]
                                + D3 * k3[i]
                                + D4 * k4[i]
                                + D5 * k5[i]
                                + D6 * k6[i]
                                + D7 * k7[i]);
                    }
                }
                while next < sample_times.len() && sample_times[next] <= t_new {
                    let ts = sample_times[next];
                    let theta = (ts - t) / h;
                    out.push(if ts >= t_new {
                        y_acc
                    } else if cfg.dense_output == DenseOutput::Hermite {
                        hermite(&y, &k1, &y_acc, &k7, h, theta)
                    } else {
                        let mut v = [0.0; 2];
                        let eta = 1.0 - theta;
                        for i in 0..2 {
                            let dy = y_acc[i] - y[i];
                            v[i] = y[i]
                                + theta
                                    * (dy
                                        + eta
                                            * (native[0][i]
                                                + theta * (native[1][i] + eta * native[2][i])));
                        }
                        v
                    });
                    next += 1;
                }
            }
            t = t_new;
            y = y_acc;
            k1 = k7;
            let mut factor = if err_norm == 0.0 {
                10.0
            } else {
                (0.9 * err_norm.powf(-0.2)).clamp(0.2, 10.0)
            };
            if last_rejected {
                factor = factor.min(1.0);
            }
            last_rejected = false;
            h *= factor;
            if let Some(hmax) = cfg.max_step {
                h = h.min(hmax);
            }
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h *= (0.9 * err_norm.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
    while next < sample_times.len() {
        out.push(y);
        next += 1;
    }
    Ok(stats)
}

/// Positions and velocities on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledTrajectory {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
}

impl SampledTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Pendulum states at `times` (ascending, all ≥ `t0`) starting from `ic` at `t0`.
pub fn integrate_at(
    params: &ModelParams,
    motion: &VerticalSinusoid,
    ic: PendulumState,
    t0: f64,
    times: &[f64],
    config: &IntegratorConfig,
) -> Result<Vec<PendulumState>> {
    let t_end = times.last().copied().unwrap_or(t0).max(t0);
    let (g, z0) = (params.g, params.z0);
    let mut raw = Vec::new();
    integrate_ode(
        |t, y| [y[1], (g + motion.accel(t)) / z0 * y[0]],
        t0,
        [ic.x, ic.v],
        t_end,
        times,
        config,
        &mut raw,
    )?;
    Ok(raw
        .into_iter()
        .map(|s| PendulumState::new(s[0], s[1]))
        .collect())
}

/// Solution of the pendulum equation over `t_span`, sampled at `n_samples`
/// evenly spaced instants.
pub fn integrate(
    params: &ModelParams,
    motion: &VerticalSinusoid,
    ic: PendulumState,
    t_span: (f64, f64),
    n_samples: usize,
    config: &IntegratorConfig,
) -> Result<SampledTrajectory> {
    params.validate()?;
    motion.validate()?;
    if n_samples < 2 {
        return Err(Error::InvalidParameter {
            name: "n_samples",
            value: n_samples as f64,
            reason: "must be at least 2",
        });
    }
    if !(t_span.0.is_finite() && t_span.1.is_finite() && t_span.1 > t_span.0) {
        return Err(Error::InvalidParameter {
            name: "t_span",
            value: t_span.1 - t_span.0,
            reason: "must be finite and increasing",
        });
    }
    let times = linspace(t_span.0, t_span.1, n_samples);
    let states = integrate_at(params, motion, ic, t_span.0, &times, config)?;
    Ok(SampledTrajectory {
        positions: states.iter().map(|s| s.x).collect(),
        velocities: states.iter().map(|s| s.v).collect(),
        times,
    })
}

/// Monodromy matrix over one period of the τ-domain equation and the
/// exponent derived from its eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monodromy {
    /// Columns are the fundamental solutions `(x, dx/dτ)` at `τ = π`.
    pub matrix: [[f64; 2]; 2],
    pub multipliers: [Complex64; 2],
    pub exponent: CharacteristicExponent,
}

impl Monodromy {
    pub fn trace(&self) -> f64 {
        self.matrix[0][0] + self.matrix[1][1]
    }

    /// `ad − bc` with a fused correction term.
    pub fn determinant(&self) -> f64 {
        let [[a, b], [c, d]] = self.matrix;
        let bc = b * c;
        let err = b.mul_add(c, -bc);
        a.mul_add(d, -bc) - err
    }
}

/// Phase propagator for the gait NLP backed by the Runge–Kutta integrator.
#[derive(Debug, Clone)]
pub struct NumericPhaseSolver {
    model: ModelParams,
    timeline: PhaseTimeline,
    config: IntegratorConfig,
}

impl NumericPhaseSolver {
    pub fn new(
        model: ModelParams,
        timeline: PhaseTimeline,
        config: IntegratorConfig,
    ) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            model,
            timeline,
            config,
        })
    }
}

impl PhaseSolver for NumericPhaseSolver {
    fn positions(&self, phase: usize, ic: PendulumState, out: &mut [f64]) -> Result<()> {
        let states = integrate_at(
            &self.model,
            &self.timeline.motions[phase],
            ic,
            self.timeline.starts[phase],
            &self.timeline.samples[phase],
            &self.config,
        )?;
        for (o, s) in out.iter_mut().zip(states) {
            *o = s.x;
        }
        Ok(())
    }
}

/// Monodromy matrix of `x'' + (c0 − 2 c1 cos 2τ) x = 0` over `τ ∈ [0, π]`.
pub fn monodromy(params: &MathieuParams, config: &IntegratorConfig) -> Result<Monodromy> {
    let mut columns = [[0.0; 2]; 2];
    let mut raw = Vec::new();
    for (j, ic) in [[1.0, 0.0], [0.0, 1.0]].into_iter().enumerate() {
        integrate_ode(
            |tau, y| [y[1], -params.stiffness(tau) * y[0]],
            0.0,
            ic,
            PI,
            &[PI],
            config,
            &mut raw,
        )?;
        columns[j] = raw[0];
    }
    let matrix = [
        [columns[0][0], columns[1][0]],
        [columns[0][1], columns[1][1]],
    ];
    let mut m = Monodromy {
        matrix,
        multipliers: [Complex64::new(0.0, 0.0); 2],
        exponent: CharacteristicExponent { re: 0.0, im: 0.0 },
    };
    let tr = m.trace();
    let det = m.determinant();
    let disc = tr * tr - 4.0 * det;
    let (big, small) = if disc >= 0.0 {
        let root = disc.sqrt();
        let big = 0.5 * (tr + tr.signum() * root);
        let big = if big == 0.0 { root * 0.5 } else { big };
        (Complex64::new(big, 0.0), Complex64::new(det / big, 0.0))
    } else {
        let im = 0.5 * (-disc).sqrt();
        (Complex64::new(0.5 * tr, im), Complex64::new(0.5 * tr, -im))
    };
    m.multipliers = [big, small];
    m.exponent = CharacteristicExponent::canonical(big.ln() / PI);
    Ok(m)
}

/// Characteristic exponent from Floquet multipliers.
pub fn monodromy_exponent(
    params: &MathieuParams,
    config: &IntegratorConfig,
) -> Result<CharacteristicExponent> {
    Ok(monodromy(params, config)?.exponent)
}

/// Mean, maximum and population standard deviation of a set of samples.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub max: f64,
    pub std_dev: f64,
    pub count: usize,
}

impl SummaryStats {
    pub fn from_samples(samples: &[f64]) -> Self {
        let mut acc = StatsAccumulator::default();
        for &s in samples {
            acc.push(s);
        }
        acc.finish()
    }
}

/// Streaming mean / variance (Welford) and maximum.
#[derive(Debug, Clone, Copy, Default)]
pub struct StatsAccumulator {
    count: usize,
    mean: f64,
    m2: f64,
    max: f64,
}

impl StatsAccumulator {
    pub fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
        if self.count == 1 || value > self.max {
            self.max = value;
        }
    }

    pub fn merge(&mut self, other: &StatsAccumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.max = self.max.max(other.max);
        self.count += other.count;
    }

    pub fn finish(&self) -> SummaryStats {
        if self.count == 0 {
            return SummaryStats::default();
        }
        SummaryStats {
            mean: self.mean,
            max: self.max,
            std_dev: (self.m2 / self.count as f64).max(0.0).sqrt(),
            count: self.count,
        }
    }
}

/// Pointwise absolute percentage errors of the analytic solution against a
/// numeric trajectory, with summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub percent_errors: Vec<f64>,
    pub summary: SummaryStats,
}

/// `|x̂ − x| / max(|x|, ε) · 100`.
pub fn percent_error(approx: f64, reference: f64) -> f64 {
    (approx - reference).abs() / reference.abs().max(PERCENT_ERROR_FLOOR) * 100.0
}

pub fn compare(analytic: &AnalyticSolution, numeric: &SampledTrajectory) -> ErrorStats {
    let percent_errors: Vec<f64> = numeric
        .times
        .iter()
        .zip(&numeric.positions)
        .map(|(&t, &x)| percent_error(analytic.position(t), x))
        .collect();
    let summary = SummaryStats::from_samples(&percent_errors);
    ErrorStats {
        percent_errors,
        summary,
    }
}

/// Seeded initial conditions uniform in `|x0| < x_max`, `|v0| < v_max`.
pub fn random_initial_conditions(
    seed: u64,
    count: usize,
    x_max: f64,
    v_max: f64,
) -> Vec<PendulumState> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x = rng.random_range(-x_max..x_max);
            let v = rng.random_range(-v_max..v_max);
            PendulumState::new(x, v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathieu::{characteristic_exponent, MathieuBasis, SeriesConfig};
    use crate::model::to_mathieu;
    use std::sync::Arc;

    fn base() -> (ModelParams, VerticalSinusoid) {
        (
            ModelParams::new(0.42, 9.81, 25.0).unwrap(),
            VerticalSinusoid::new(0.07, PI).unwrap(),
        )
    }

    #[test]
    fn zero_ic_stays_zero() {
        let (m, s) = base();
        let traj = integrate(
            &m,
            &s,
            PendulumState::default(),
            (0.0, 0.5),
            100,
            &Default::default(),
        )
        .unwrap();
        assert!(traj.positions.iter().all(|&x| x == 0.0));
        assert!(traj.velocities.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn classical_limit_matches_cosh() {
        let m = ModelParams::new(0.42, 9.81, 25.0).unwrap();
        let s = VerticalSinusoid::new(0.0, PI).unwrap();
        let lambda = (9.81f64 / 0.42).sqrt();
        let traj = integrate(
            &m,
            &s,
            PendulumState::new(0.1, 0.0),
            (0.0, 1.0),
            201,
            &Default::default(),
        )
        .unwrap();
        for (t, x) in traj.times.iter().zip(&traj.positions) {
            let exact = 0.1 * (lambda * t).cosh();
            assert!((x - exact).abs() <= 1e-8 * exact, "t {t}: {x} vs {exact}");
        }
    }

    #[test]
    fn hermite_dense_output_is_coarser_but_usable() {
        let m = ModelParams::new(0.42, 9.81, 25.0).unwrap();
        let s = VerticalSinusoid::new(0.0, PI).unwrap();
        let lambda = (9.81f64 / 0.42).sqrt();
        let worst = |dense_output| {
            let cfg = IntegratorConfig {
                dense_output,
                ..Default::default()
            };
            let traj =
                integrate(&m, &s, PendulumState::new(0.1, 0.0), (0.0, 1.0), 201, &cfg).unwrap();
            traj.times
                .iter()
                .zip(&traj.positions)
                .map(|(t, x)| (x / (0.1 * (lambda * t).cosh()) - 1.0).abs())
                .fold(0.0, f64::max)
        };
        let native = worst(DenseOutput::Native);
        let hermite = worst(DenseOutput::Hermite);
        assert!(native < hermite);
        assert!(hermite < 1e-6);
    }

    #[test]
    fn halving_tolerance_changes_endpoint_little() {
        let (m, s) = base();
        let ic = PendulumState::new(0.1, -0.2);
        let end = |tol: f64| {
            let cfg = IntegratorConfig::with_tolerance(tol);
            *integrate(&m, &s, ic, (0.0, 0.5), 2, &cfg)
                .unwrap()
                .positions
                .last()
                .unwrap()
        };
        for tol in [1e-6, 1e-8, 1e-9] {
            let scale = end(tol).abs().max(1.0);
            assert!((end(tol) - end(tol / 2.0)).abs() < 10.0 * tol * scale);
        }
    }

    #[test]
    fn global_error_tracks_tolerance() {
        let m = ModelParams::new(0.42, 9.81, 25.0).unwrap();
        let s = VerticalSinusoid::new(0.0, PI).unwrap();
        let lambda = (9.81f64 / 0.42).sqrt();
        let exact = 0.1 * (lambda * 0.5).cosh();
        let err = |tol: f64| {
            let cfg = IntegratorConfig::with_tolerance(tol);
            let traj =
                integrate(&m, &s, PendulumState::new(0.1, 0.0), (0.0, 0.5), 2, &cfg).unwrap();
            (traj.positions[1] - exact).abs()
        };
        let coarse = err(1e-6);
        let fine = err(1e-7);
        assert!(fine < coarse, "{fine} vs {coarse}");
        assert!(
            coarse / fine > 2.0 && coarse / fine < 50.0,
            "{}",
            coarse / fine
        );
    }

    #[test]
    fn invalid_inputs_rejected() {
        let (m, s) = base();
        let ic = PendulumState::new(0.1, 0.0);
        assert!(integrate(&m, &s, ic, (0.0, 0.5), 1, &Default::default()).is_err());
        assert!(integrate(&m, &s, ic, (0.0, f64::NAN), 10, &Default::default()).is_err());
        let bad = IntegratorConfig::with_tolerance(0.5);
        assert!(integrate(&m, &s, ic, (0.0, 0.5), 10, &bad).is_err());
    }

    #[test]
    fn step_budget_is_enforced() {
        let (m, s) = base();
        let cfg = IntegratorConfig {
            max_steps: 3,
            ..IntegratorConfig::with_tolerance(1e-10)
        };
        let r = integrate(&m, &s, PendulumState::new(0.1, 0.0), (0.0, 5.0), 2, &cfg);
        assert!(matches!(r, Err(Error::TooManySteps { .. })));
    }

    #[test]
    fn monodromy_unforced() {
        let p = MathieuParams::new(-9.4663, 0.0, PI).unwrap();
        let cfg = IntegratorConfig::with_tolerance(1e-12);
        let mu = monodromy_exponent(&p, &cfg).unwrap();
        assert!((mu.re - 9.4663f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn monodromy_matches_hill_exponent() {
        let (m, s) = base();
        let p = to_mathieu(&m, &s);
        let cfg = IntegratorConfig::with_tolerance(1e-12);
        let mono = monodromy(&p, &cfg).unwrap();
        let hill = characteristic_exponent(&p, &SeriesConfig::default()).unwrap();
        assert!((mono.exponent.re - hill.re).abs() < 1e-6 * hill.re);
        assert!(
            (mono.determinant() - 1.0).abs() < 1e-8,
            "{}",
            mono.determinant()
        );
    }

    #[test]
    fn monodromy_bounded_case_has_unit_multipliers() {
        // Inside a stability tongue: c0 > 0 between resonances, small c1.
        let p = MathieuParams::new(2.0, 0.3, 1.0).unwrap();
        let mono = monodromy(&p, &IntegratorConfig::with_tolerance(1e-12)).unwrap();
        assert!(mono.trace().abs() < 2.0);
        assert!(mono.exponent.re.abs() < 1e-6);
        assert!((mono.multipliers[0].norm() - 1.0).abs() < 1e-8);
        assert!((mono.determinant() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn compare_identical_is_zero() {
        let (m, s) = base();
        let basis = Arc::new(MathieuBasis::for_model(&m, &s, &SeriesConfig::default()).unwrap());
        let sol = basis.solve(0.0, PendulumState::new(0.1, 0.05)).unwrap();
        let times = linspace(0.0, 0.5, 50);
        let traj = SampledTrajectory {
            positions: times.iter().map(|&t| sol.position(t)).collect(),
            velocities: times.iter().map(|&t| sol.evaluate(t).v).collect(),
            times,
        };
        let stats = compare(&sol, &traj);
        assert_eq!(stats.summary.max, 0.0);
        assert_eq!(stats.summary.mean, 0.0);
        assert_eq!(stats.summary.std_dev, 0.0);
    }

    #[test]
    fn compare_against_integrator_at_base_parameters() {
        let (m, s) = base();
        let basis = Arc::new(MathieuBasis::for_model(&m, &s, &SeriesConfig::default()).unwrap());
        for ic in random_initial_conditions(7, 20, 0.2, 0.2) {
            let sol = basis.solve(0.0, ic).unwrap();
            let traj = integrate(&m, &s, ic, (0.0, 0.5), 1000, &Default::default()).unwrap();
            let stats = compare(&sol, &traj);
            assert!(stats.percent_errors[0] <= 1e-8);
            assert!(stats.summary.max < 0.02, "{:?}", stats.summary);
        }
    }

    #[test]
    fn stats_single_sample_has_zero_spread() {
        let s = SummaryStats::from_samples(&[3.5]);
        assert_eq!((s.mean, s.max, s.std_dev, s.count), (3.5, 3.5, 0.0, 1));
    }

    #[test]
    fn stats_merge_matches_direct() {
        let data: Vec<f64> = (0..100).map(|k| ((k * 37) % 11) as f64 * 0.3).collect();
        let direct = SummaryStats::from_samples(&data);
        let mut a = StatsAccumulator::default();
        let mut b = StatsAccumulator::default();
        data[..40].iter().for_each(|&x| a.push(x));
        data[40..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        let merged = a.finish();
        assert!((merged.mean - direct.mean).abs() < 1e-12);
        assert!((merged.std_dev - direct.std_dev).abs() < 1e-12);
        assert_eq!(merged.max, direct.max);
    }

    #[test]
    fn random_ics_are_seeded_and_bounded() {
        let a = random_initial_conditions(42, 100, 0.2, 0.2);
        let b = random_initial_conditions(42, 100, 0.2, 0.2);
        assert_eq!(a, b);
        assert!(a.iter().all(|s| s.x.abs() < 0.2 && s.v.abs() < 0.2));
        assert_ne!(a, random_initial_conditions(43, 100, 0.2, 0.2));
    }

    #[test]
    fn linspace_endpoints() {
        let t = linspace(0.0, 0.5, 1000);
        assert_eq!(t.len(), 1000);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[999], 0.5);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
    }
}

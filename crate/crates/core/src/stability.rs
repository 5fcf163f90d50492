//! Floquet stability classification and parameter sweeps.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::mathieu::{characteristic_exponent, MathieuBasis, SeriesConfig};
use crate::model::{to_mathieu, MathieuParams, ModelParams, PendulumState, VerticalSinusoid};

/// Default tolerance on `|Re μ2|` below which a point counts as marginal.
pub const DEFAULT_MARGINAL_TOL: f64 = 1e-9;

/// Grid spacing of [`divergence_demo`] (s).
pub const DIVERGENCE_SCAN_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    Stable,
    Unstable,
    Marginal,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Stable => "Stable",
            Classification::Unstable => "Unstable",
            Classification::Marginal => "Marginal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Exponent with `Re ≤ 0`.
    pub mu1: Complex64,
    /// Exponent with `Re ≥ 0`.
    pub mu2: Complex64,
    pub classification: Classification,
}

impl StabilityReport {
    pub fn from_exponent(mu: Complex64, tol: f64) -> Self {
        let mu2 = if mu.re < 0.0 { -mu } else { mu };
        let mu1 = -mu2;
        let classification = if mu1.re < 0.0 && mu2.re < 0.0 {
            Classification::Stable
        } else if mu2.re.abs() <= tol {
            Classification::Marginal
        } else {
            Classification::Unstable
        };
        Self {
            mu1,
            mu2,
            classification,
        }
    }
}

pub fn classify_mathieu(
    params: &MathieuParams,
    config: &SeriesConfig,
    tol: f64,
) -> Result<StabilityReport> {
    let mu = characteristic_exponent(params, config)?;
    Ok(StabilityReport::from_exponent(mu.value(), tol))
}

/// Classifies the pendulum on a vertical sinusoid by its exponent pair.
pub fn classify(
    params: &ModelParams,
    motion: &VerticalSinusoid,
    tol: f64,
) -> Result<StabilityReport> {
    params.validate()?;
    motion.validate()?;
    classify_mathieu(&to_mathieu(params, motion), &SeriesConfig::default(), tol)
}

/// Evenly spaced values from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count }
    }

    pub fn single(value: f64) -> Self {
        Self::new(value, value, 1)
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.max
                } else {
                    self.min + k as f64 * step
                }
            })
            .collect()
    }

    fn validate(&self, name: &'static str, allow_zero: bool) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidParameter {
                name,
                value: 0.0,
                reason: "axis count must be at least 1",
            });
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.max < self.min {
            return Err(Error::InvalidParameter {
                name,
                value: self.max - self.min,
                reason: "axis must satisfy min ≤ max",
            });
        }
        if allow_zero {
            if self.min < 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value: self.min,
                    reason: "axis must be non-negative",
                });
            }
            Ok(())
        } else {
            ensure_positive(name, self.min)
        }
    }
}

/// Rectangular grid over surface amplitude, surface frequency and pendulum
/// height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub amplitude: Axis,
    pub omega: Axis,
    pub height: Axis,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            amplitude: Axis::new(0.2, 1.0, 5),
            omega: Axis::new(0.1, 2.0 * PI, 5),
            height: Axis::new(0.3, 0.55, 5),
        }
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        self.amplitude.validate("amplitude", true)?;
        self.omega.validate("omega", false)?;
        self.height.validate("z0", false)
    }

    pub fn len(&self) -> usize {
        self.amplitude.count * self.omega.count * self.height.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points `(A, ω, z0)` with `z0` varying fastest.
    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        let (a, w, z) = (
            self.amplitude.values(),
            self.omega.values(),
            self.height.values(),
        );
        let mut out = Vec::with_capacity(self.len());
        for &amp in &a {
            for &om in &w {
                for &h in &z {
                    out.push((amp, om, h));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub amplitude: f64,
    pub omega: f64,
    pub z0: f64,
    pub result: Result<StabilityReport>,
}

impl SweepRow {
    pub fn re_mu2(&self) -> Option<f64> {
        self.result.as_ref().ok().map(|r| r.mu2.re)
    }
}

fn sweep_point(
    (amplitude, omega, z0): (f64, f64, f64),
    g: f64,
    config: &SeriesConfig,
    tol: f64,
) -> SweepRow {
    let result = ModelParams::new(z0, g, 1.0)
        .and_then(|m| VerticalSinusoid::new(amplitude, omega).map(|s| to_mathieu(&m, &s)))
        .and_then(|p| classify_mathieu(&p, config, tol));
    SweepRow {
        amplitude,
        omega,
        z0,
        result,
    }
}

/// Classifies every grid point. Rows come back in grid order; per-point
/// failures are stored in the row.
pub fn sweep(grid: &SweepGrid, g: f64, config: &SeriesConfig, tol: f64) -> Result<Vec<SweepRow>> {
    grid.validate()?;
    ensure_positive("g", g)?;
    let points = grid.points();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        Ok(points
            .into_par_iter()
            .map(|p| sweep_point(p, g, config, tol))
            .collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(points
            .into_iter()
            .map(|p| sweep_point(p, g, config, tol))
            .collect())
    }
}

/// First instant on a 1 ms grid at which the analytic solution from `ic`
/// leaves `|x| ≤ threshold`, or `None` within the horizon.
pub fn divergence_demo(
    params: &ModelParams,
    motion: &VerticalSinusoid,
    ic: PendulumState,
    horizon: f64,
    threshold: f64,
) -> Result<Option<f64>> {
    ensure_positive("horizon", horizon)?;
    ensure_positive("threshold", threshold)?;
    if ic.is_zero() {
        return Ok(None);
    }
    let basis = Arc::new(MathieuBasis::for_model(
        params,
        motion,
        &SeriesConfig::default(),
    )?);
    let solution = basis.solve(0.0, ic)?;
    let steps = (horizon / DIVERGENCE_SCAN_STEP + 1e-9).floor() as usize;
    Ok((0..=steps)
        .map(|k| k as f64 * DIVERGENCE_SCAN_STEP)
        .find(|&t| solution.position(t).abs() > threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{monodromy_exponent, IntegratorConfig};
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::SplitMix64;

    fn base() -> (ModelParams, VerticalSinusoid) {
        (
            ModelParams::new(0.42, 9.81, 25.0).unwrap(),
            VerticalSinusoid::new(0.07, PI).unwrap(),
        )
    }

    #[test]
    fn base_point_is_unstable() {
        let (m, s) = base();
        let r = classify(&m, &s, DEFAULT_MARGINAL_TOL).unwrap();
        assert_eq!(r.classification, Classification::Unstable);
        assert_eq!(r.mu1 + r.mu2, Complex64::new(0.0, 0.0));
        assert!(r.mu1.re < 0.0 && r.mu2.re > 0.0);
    }

    #[test]
    fn classical_lip_is_unstable() {
        let m = ModelParams::new(0.42, 9.81, 25.0).unwrap();
        let s = VerticalSinusoid::new(0.0, PI).unwrap();
        let r = classify(&m, &s, DEFAULT_MARGINAL_TOL).unwrap();
        assert_eq!(r.classification, Classification::Unstable);
        let c0 = to_mathieu(&m, &s).c0;
        assert!((r.mu2.re - (-c0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn classification_depends_only_on_mathieu_coefficients() {
        // Doubling z0 and A together with ω/√2 keeps (c0, c1) fixed.
        let a = classify(
            &ModelParams::new(0.42, 9.81, 25.0).unwrap(),
            &VerticalSinusoid::new(0.07, PI).unwrap(),
            DEFAULT_MARGINAL_TOL,
        )
        .unwrap();
        let b = classify(
            &ModelParams::new(0.84, 9.81, 3.0).unwrap(),
            &VerticalSinusoid::new(0.14, PI / 2f64.sqrt()).unwrap(),
            DEFAULT_MARGINAL_TOL,
        )
        .unwrap();
        assert_eq!(a.classification, b.classification);
        assert!((a.mu2 - b.mu2).norm() < 1e-12);
    }

    #[test]
    fn marginal_when_exponent_is_imaginary() {
        let r = StabilityReport::from_exponent(Complex64::new(0.0, 0.4), 1e-9);
        assert_eq!(r.classification, Classification::Marginal);
        let r = StabilityReport::from_exponent(Complex64::new(-0.3, 0.0), 1e-9);
        assert_eq!(r.mu2.re, 0.3);
        assert_eq!(r.classification, Classification::Unstable);
    }

    #[test]
    fn single_point_sweep_equals_classify() {
        let grid = SweepGrid {
            amplitude: Axis::single(0.07),
            omega: Axis::single(PI),
            height: Axis::single(0.42),
        };
        let rows = sweep(&grid, 9.81, &SeriesConfig::default(), DEFAULT_MARGINAL_TOL).unwrap();
        assert_eq!(rows.len(), 1);
        let (m, s) = base();
        assert_eq!(
            rows[0].result.as_ref().unwrap(),
            &classify(&m, &s, DEFAULT_MARGINAL_TOL).unwrap()
        );
    }

    #[test]
    fn sweep_rows_in_grid_order() {
        let grid = SweepGrid::default();
        let rows = sweep(&grid, 9.81, &SeriesConfig::default(), DEFAULT_MARGINAL_TOL).unwrap();
        assert_eq!(rows.len(), 125);
        for (row, p) in rows.iter().zip(grid.points()) {
            assert_eq!((row.amplitude, row.omega, row.z0), p);
        }
        assert_eq!(rows[0].z0, 0.3);
        assert_eq!(rows[1].z0, 0.3625);
    }

    #[test]
    fn sweep_matches_monodromy_at_random_points() {
        let mut rng = SplitMix64::seed_from_u64(11);
        let cfg = IntegratorConfig::with_tolerance(1e-12);
        for _ in 0..10 {
            let a = rng.random_range(0.01..0.5);
            let w = rng.random_range(2.0..2.0 * PI);
            let z = rng.random_range(0.3..0.55);
            let grid = SweepGrid {
                amplitude: Axis::single(a),
                omega: Axis::single(w),
                height: Axis::single(z),
            };
            let rows = sweep(&grid, 9.81, &SeriesConfig::default(), DEFAULT_MARGINAL_TOL).unwrap();
            let re = rows[0].re_mu2().unwrap();
            let p = to_mathieu(
                &ModelParams::new(z, 9.81, 1.0).unwrap(),
                &VerticalSinusoid::new(a, w).unwrap(),
            );
            let mono = monodromy_exponent(&p, &cfg).unwrap();
            assert!(
                (re - mono.re).abs() <= 1e-6 * re.abs().max(1.0),
                "{re} vs {}",
                mono.re
            );
        }
    }

    #[test]
    fn invalid_grid_rejected() {
        let mut grid = SweepGrid::default();
        grid.omega = Axis::new(0.0, 1.0, 3);
        assert!(sweep(&grid, 9.81, &SeriesConfig::default(), 1e-9).is_err());
        grid.omega = Axis::new(0.1, 1.0, 0);
        assert!(sweep(&grid, 9.81, &SeriesConfig::default(), 1e-9).is_err());
    }

    #[test]
    fn divergence_examples() {
        let (m, s) = base();
        assert_eq!(
            divergence_demo(&m, &s, PendulumState::default(), 5.0, 10.0).unwrap(),
            None
        );
        let t = divergence_demo(&m, &s, PendulumState::new(0.02, 0.10), 5.0, 10.0)
            .unwrap()
            .unwrap();
        assert!(t > 0.5 && t < 5.0, "{t}");
        let t_big = divergence_demo(&m, &s, PendulumState::new(0.04, 0.20), 5.0, 10.0)
            .unwrap()
            .unwrap();
        assert!(t_big <= t);
    }

    #[test]
    fn unstable_solutions_grow_over_each_period() {
        let (m, s) = base();
        let basis = Arc::new(MathieuBasis::for_model(&m, &s, &SeriesConfig::default()).unwrap());
        let period = s.period();
        for ic in [
            PendulumState::new(0.1, -0.3),
            PendulumState::new(-0.05, 0.2),
        ] {
            let sol = basis.solve(0.0, ic).unwrap();
            for k in 0..20 {
                let t1 = 2.0 * period + 0.037 * k as f64;
                assert!(sol.position(t1 + period).abs() > sol.position(t1).abs());
            }
        }
    }
}

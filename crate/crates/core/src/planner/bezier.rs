use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

/// Sum of the three middle Bernstein weights of degree 6 at `s = 1/2`.
const APEX_WEIGHT: f64 = 50.0 / 64.0;

/// Degree-6 Bézier curve in 3-D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BezierCurve {
    pub control: [Point3; 7],
}

impl BezierCurve {
    pub fn new(control: [Point3; 7]) -> Self {
        Self { control }
    }

    /// Point at `s`, clamped to `[0, 1]` (de Casteljau).
    pub fn point(&self, s: f64) -> Point3 {
        let s = s.clamp(0.0, 1.0);
        let mut p = self.control;
        for level in (1..7).rev() {
            for i in 0..level {
                for d in 0..3 {
                    p[i][d] += s * (p[i + 1][d] - p[i][d]);
                }
            }
        }
        p[0]
    }

    /// Derivative with respect to `s`.
    pub fn derivative(&self, s: f64) -> Point3 {
        let s = s.clamp(0.0, 1.0);
        let mut p = [[0.0; 3]; 6];
        for i in 0..6 {
            for d in 0..3 {
                p[i][d] = 6.0 * (self.control[i + 1][d] - self.control[i][d]);
            }
        }
        for level in (1..6).rev() {
            for i in 0..level {
                for d in 0..3 {
                    p[i][d] += s * (p[i + 1][d] - p[i][d]);
                }
            }
        }
        p[0]
    }
}

/// Swing curve from `lift` to `touchdown` with zero end velocities and the
/// vertical offset peaking at exactly `height` above the chord midpoint.
pub fn swing_curve(lift: Point3, touchdown: Point3, height: f64) -> Result<BezierCurve> {
    if !(height > 0.0) {
        return Err(Error::NonPositiveStepHeight(height));
    }
    let h = height / APEX_WEIGHT;
    let mid = [
        0.5 * (lift[0] + touchdown[0]),
        0.5 * (lift[1] + touchdown[1]),
        0.5 * (lift[2] + touchdown[2]),
    ];
    let raise = |p: Point3| [p[0], p[1], p[2] + h];
    Ok(BezierCurve::new([
        lift,
        lift,
        raise(lift),
        raise(mid),
        raise(touchdown),
        touchdown,
        touchdown,
    ]))
}

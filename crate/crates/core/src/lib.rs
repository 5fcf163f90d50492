//! Linear inverted pendulum on a vertically oscillating surface.
//!
//! The horizontal CoM dynamics over a surface moving as `A sin(ωt + φ)` reduce
//! to Mathieu's equation. This crate provides the closed-form series solution,
//! numerical reference solvers, stability analysis and a quadruped gait
//! planner built on top of them.

pub mod error;
pub mod grid;
pub mod mathieu;
pub mod model;
pub mod oracle;
pub mod planner;
pub mod stability;

pub use error::{Error, Result};
pub use mathieu::{
    AnalyticSolution, CharacteristicExponent, CoefficientTable, MathieuBasis, SeriesConfig,
    SolutionCoefficients, TabulatedBasis,
};
pub use model::{
    to_mathieu, MathieuParams, ModelParams, PendulumState, Pitching, SurfaceMotion,
    VerticalSinusoid,
};

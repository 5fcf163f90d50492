//! Physical model of a linear inverted pendulum whose support point rides on a
//! moving rigid surface.
//!
//! The CoM is held at a constant height `z0` above the support point, the
//! leg is massless and the horizontal acceleration of the support point is
//! neglected. Under a vertical sinusoid `z_ws = A sin(ωt + φ)` the horizontal
//! dynamics
//!
//! ```text
//! ẍ_sc = (g − Aω² sin(ωt + φ)) / z0 · x_sc
//! ```
//!
//! become Mathieu's equation `x'' + (c0 − 2 c1 cos 2τ) x = 0` under the time
//! map `τ = (π/2 + ωt + φ) / 2`, with `c0 = −4g/(ω² z0)` and `c1 = 2A/z0`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_non_negative, ensure_positive, Error, Result};

/// Standard gravity used when a configuration does not override it.
pub const STANDARD_GRAVITY: f64 = 9.81;

/// Largest pitch amplitude accepted by the first-harmonic vertical
/// approximation of a pitching surface.
pub const MAX_PITCH_AMPLITUDE_DEG: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// CoM height above the support point (m).
    pub z0: f64,
    /// Gravitational acceleration magnitude (m/s²).
    pub g: f64,
    /// Total mass (kg).
    pub mass: f64,
}

impl ModelParams {
    pub fn new(z0: f64, g: f64, mass: f64) -> Result<Self> {
        let params = Self { z0, g, mass };
        params.validate()?;
        Ok(params)
    }

    /// Standard gravity and unit mass.
    pub fn with_height(z0: f64) -> Result<Self> {
        Self::new(z0, STANDARD_GRAVITY, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("z0", self.z0)?;
        ensure_positive("g", self.g)?;
        ensure_positive("mass", self.mass)
    }

    /// Growth rate of the classical (stationary-surface) pendulum, `√(g/z0)`.
    pub fn natural_rate(&self) -> f64 {
        (self.g / self.z0).sqrt()
    }
}

/// Vertical sinusoidal surface motion `z = A sin(ωt + φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerticalSinusoid {
    /// Amplitude `A` (m).
    pub amplitude: f64,
    /// Angular frequency `ω` (rad/s).
    pub omega: f64,
    /// Phase `φ` (rad).
    #[serde(default)]
    pub phase: f64,
}

impl VerticalSinusoid {
    pub fn new(amplitude: f64, omega: f64) -> Result<Self> {
        Self::with_phase(amplitude, omega, 0.0)
    }

    pub fn with_phase(amplitude: f64, omega: f64, phase: f64) -> Result<Self> {
        let motion = Self {
            amplitude,
            omega,
            phase,
        };
        motion.validate()?;
        Ok(motion)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("amplitude", self.amplitude)?;
        ensure_positive("omega", self.omega)?;
        ensure_finite("phase", self.phase)
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn height(&self, t: f64) -> f64 {
        self.amplitude * (self.omega * t + self.phase).sin()
    }

    pub fn velocity(&self, t: f64) -> f64 {
        self.amplitude * self.omega * (self.omega * t + self.phase).cos()
    }

    pub fn accel(&self, t: f64) -> f64 {
        -self.amplitude * self.omega * self.omega * (self.omega * t + self.phase).sin()
    }
}

/// Sinusoidal pitching of a rigid surface about a horizontal axis,
/// `θ(t) = θ_a sin(2π f t)`, observed at a point `radius` metres from the axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pitching {
    /// Pitch amplitude `θ_a` (rad).
    pub amplitude: f64,
    /// Pitch frequency (Hz).
    pub frequency: f64,
    /// Horizontal distance of the observed contact point from the axis (m).
    pub radius: f64,
}

impl Pitching {
    pub fn new(amplitude: f64, frequency: f64, radius: f64) -> Result<Self> {
        let motion = Self {
            amplitude,
            frequency,
            radius,
        };
        motion.validate()?;
        Ok(motion)
    }

    pub fn from_degrees(amplitude_deg: f64, frequency: f64, radius: f64) -> Result<Self> {
        Self::new(amplitude_deg.to_radians(), frequency, radius)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("pitch_amplitude", self.amplitude)?;
        if self.amplitude >= FRAC_PI_2 {
            return Err(Error::InvalidParameter {
                name: "pitch_amplitude",
                value: self.amplitude,
                reason: "must be below π/2",
            });
        }
        ensure_positive("pitch_frequency", self.frequency)?;
        ensure_positive("reference_radius", self.radius)
    }

    pub fn angular_frequency(&self) -> f64 {
        2.0 * PI * self.frequency
    }

    /// Pitch angle θ(t).
    pub fn angle(&self, t: f64) -> f64 {
        self.amplitude * (self.angular_frequency() * t).sin()
    }

    pub fn height(&self, t: f64) -> f64 {
        self.radius * self.angle(t).sin()
    }

    pub fn accel(&self, t: f64) -> f64 {
        let w = self.angular_frequency();
        let (s, c) = (w * t).sin_cos();
        let theta = self.amplitude * s;
        let theta_dot = self.amplitude * w * c;
        let theta_ddot = -self.amplitude * w * w * s;
        self.radius * (theta.cos() * theta_ddot - theta.sin() * theta_dot * theta_dot)
    }
}

/// The known surface motion at a contact point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceMotion {
    VerticalSinusoid(VerticalSinusoid),
    Pitching(Pitching),
}

impl SurfaceMotion {
    pub fn validate(&self) -> Result<()> {
        match self {
            SurfaceMotion::VerticalSinusoid(m) => m.validate(),
            SurfaceMotion::Pitching(m) => m.validate(),
        }
    }

    /// Surface pitch angle; zero for a purely vertical motion.
    pub fn pitch(&self, t: f64) -> f64 {
        match self {
            SurfaceMotion::VerticalSinusoid(_) => 0.0,
            SurfaceMotion::Pitching(m) => m.angle(t),
        }
    }

    /// Period of the surface motion (s).
    pub fn period(&self) -> f64 {
        match self {
            SurfaceMotion::VerticalSinusoid(m) => m.period(),
            SurfaceMotion::Pitching(m) => 1.0 / m.frequency,
        }
    }
}

impl From<VerticalSinusoid> for SurfaceMotion {
    fn from(m: VerticalSinusoid) -> Self {
        SurfaceMotion::VerticalSinusoid(m)
    }
}

impl From<Pitching> for SurfaceMotion {
    fn from(m: Pitching) -> Self {
        SurfaceMotion::Pitching(m)
    }
}

/// Vertical position of the contact point at time `t`.
pub fn surface_height(motion: &SurfaceMotion, t: f64) -> f64 {
    match motion {
        SurfaceMotion::VerticalSinusoid(m) => m.height(t),
        SurfaceMotion::Pitching(m) => m.height(t),
    }
}

/// Closed-form second time derivative of [`surface_height`].
pub fn surface_accel(motion: &SurfaceMotion, t: f64) -> f64 {
    match motion {
        SurfaceMotion::VerticalSinusoid(m) => m.accel(t),
        SurfaceMotion::Pitching(m) => m.accel(t),
    }
}

/// First-harmonic vertical sinusoid seen by a contact point on a pitching
/// surface: amplitude `r sin θ_a`, frequency `2πf`.
pub fn equivalent_vertical_sinusoid(motion: &Pitching) -> Result<VerticalSinusoid> {
    motion.validate()?;
    let degrees = motion.amplitude.to_degrees();
    if motion.amplitude >= MAX_PITCH_AMPLITUDE_DEG.to_radians() * (1.0 - 1e-12) {
        return Err(Error::PitchTooLarge {
            degrees,
            limit_degrees: MAX_PITCH_AMPLITUDE_DEG,
        });
    }
    VerticalSinusoid::new(
        motion.radius * motion.amplitude.sin(),
        motion.angular_frequency(),
    )
}

/// Coefficients of the standard Mathieu form together with the data needed
/// to map τ back to physical time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MathieuParams {
    pub c0: f64,
    pub c1: f64,
    /// Surface angular frequency (rad/s).
    pub omega: f64,
    /// Surface phase (rad).
    #[serde(default)]
    pub phase: f64,
}

impl MathieuParams {
    /// Direct construction from Mathieu coefficients (phase zero).
    pub fn new(c0: f64, c1: f64, omega: f64) -> Result<Self> {
        ensure_finite("c0", c0)?;
        ensure_non_negative("c1", c1)?;
        ensure_positive("omega", omega)?;
        Ok(Self {
            c0,
            c1,
            omega,
            phase: 0.0,
        })
    }

    /// τ(t) = (π/2 + ωt + φ) / 2.
    pub fn tau(&self, t: f64) -> f64 {
        0.5 * (FRAC_PI_2 + self.omega * t + self.phase)
    }

    /// Inverse of [`MathieuParams::tau`].
    pub fn time(&self, tau: f64) -> f64 {
        (2.0 * tau - FRAC_PI_2 - self.phase) / self.omega
    }

    /// dτ/dt.
    pub fn tau_rate(&self) -> f64 {
        0.5 * self.omega
    }

    /// Coefficient of `x` in the τ-domain equation, `c0 − 2 c1 cos 2τ`.
    pub fn stiffness(&self, tau: f64) -> f64 {
        self.c0 - 2.0 * self.c1 * (2.0 * tau).cos()
    }
}

/// Transforms the pendulum on a vertical sinusoid into Mathieu form.
pub fn to_mathieu(params: &ModelParams, motion: &VerticalSinusoid) -> MathieuParams {
    let w2 = motion.omega * motion.omega;
    MathieuParams {
        c0: -4.0 * params.g / (w2 * params.z0),
        c1: 2.0 * motion.amplitude / params.z0,
        omega: motion.omega,
        phase: motion.phase,
    }
}

/// Time-varying stiffness of the t-domain equation, `(g + z̈_ws(t)) / z0`.
pub fn pendulum_stiffness(params: &ModelParams, motion: &VerticalSinusoid, t: f64) -> f64 {
    (params.g + motion.accel(t)) / params.z0
}

/// Leg axial force magnitude `m (z̈_ws + g) / cos θ`.
pub fn axial_force(
    params: &ModelParams,
    motion: &VerticalSinusoid,
    x_sc: f64,
    y_sc: f64,
    t: f64,
) -> f64 {
    let z0 = params.z0;
    let cos_theta = z0 / (x_sc * x_sc + y_sc * y_sc + z0 * z0).sqrt();
    params.mass * (motion.accel(t) + params.g) / cos_theta
}

/// Horizontal CoM state relative to the support point along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PendulumState {
    /// Position (m).
    pub x: f64,
    /// Velocity (m/s).
    pub v: f64,
}

impl PendulumState {
    pub fn new(x: f64, v: f64) -> Self {
        Self { x, v }
    }

    pub fn is_zero(&self) -> bool {
        self.x == 0.0 && self.v == 0.0
    }
}

use thiserror::Error;

/// Errors produced by the model, solver, oracle and planner layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("pitch amplitude {degrees:.3} deg exceeds the {limit_degrees} deg small-angle limit")]
    PitchTooLarge { degrees: f64, limit_degrees: f64 },

    #[error("degenerate Mathieu parameters: {what} has magnitude {magnitude:e}")]
    DegenerateParameters { what: &'static str, magnitude: f64 },

    #[error("characteristic exponent {re} + {im}i is not real; the real-basis series solution is unavailable")]
    NonRealExponent { re: f64, im: f64 },

    #[error("solution basis is singular at t = {t} (relative Wronskian {relative:e})")]
    SingularBasis { t: f64, relative: f64 },

    #[error("integrator step size fell to {step:e} s at t = {t}")]
    StepSizeUnderflow { t: f64, step: f64 },

    #[error("integrator exceeded {max_steps} steps before reaching t = {t_end}")]
    TooManySteps { max_steps: usize, t_end: f64 },

    #[error("infeasible gait schedule: {0}")]
    InfeasibleSchedule(String),

    #[error("swing apex height must be positive, got {0}")]
    NonPositiveStepHeight(f64),

    #[error("NLP solver stopped after {iterations} iterations (violation {violation:e}, stationarity {stationarity:e})")]
    NlpNotConverged {
        iterations: usize,
        violation: f64,
        stationarity: f64,
        best: Vec<f64>,
    },

    #[error("NLP appears infeasible: constraint violation stagnated at {violation:e}")]
    NlpInfeasible { violation: f64, best: Vec<f64> },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and positive",
        })
    }
}

pub(crate) fn ensure_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and non-negative",
        })
    }
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}

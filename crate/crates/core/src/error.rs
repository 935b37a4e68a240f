use thiserror::Error;

/// Failures of the generic numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("invalid bracket [{lo}, {hi}]: {reason}")]
    InvalidBracket { lo: f64, hi: f64, reason: &'static str },
    #[error("function evaluated to a non-finite value at x = {x}")]
    NonFinite { x: f64 },
    #[error("sign change in [{lo}, {hi}] is a pole, not a root")]
    PoleInBracket { lo: f64, hi: f64 },
    #[error("root finder exceeded {iterations} iterations")]
    IterationLimit { iterations: usize },
    #[error("tolerance {0} is below the supported minimum 1e-14")]
    Tolerance(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("peak not bracketed")]
    PeakNotBracketed,
    #[error("half width not bracketed")]
    HalfWidthNotBracketed,
}

/// Errors surfaced by the physics layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CouplerError {
    #[error("{field} must be {requirement} (got {value})")]
    Invalid { field: &'static str, requirement: &'static str, value: f64 },
    #[error("target untunable: omega3/2pi = {target_ghz} GHz is outside the tuning range of the stub")]
    /// `abs_cos` is the |cos(φ_ex/2)| the target would need (NaN above the
    /// first quarter-wave branch).
    Untunable { target_ghz: f64, abs_cos: f64 },
    #[error("exactly decoupled cavity at omega/2pi = {freq_ghz} GHz; use cavity_mode")]
    ExactlyDecoupled { freq_ghz: f64 },
    #[error("not decoupled: |omega3 - omega2| = 2pi x {detuning_hz} Hz exceeds tolerance")]
    NotDecoupled { detuning_hz: f64 },
    #[error("decoupled: kappa below numerical floor (|omega3 - omega2| = 2pi x {detuning_hz} Hz)")]
    Decoupled { detuning_hz: f64 },
    #[error("divergent N_crit: sin(pi*L3/(2*L2)) vanishes at L3 = {l3_m} m")]
    DivergentNcrit { l3_m: f64 },
    #[error("{what} crossing not bracketed inside the search window")]
    CrossingNotBracketed { what: &'static str },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

impl CouplerError {
    /// Whether the error stems from bad input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            CouplerError::Invalid { .. }
                | CouplerError::Untunable { .. }
                | CouplerError::NotDecoupled { .. }
                | CouplerError::DivergentNcrit { .. }
        )
    }
}

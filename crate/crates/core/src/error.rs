use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("Mathieu characteristic value did not converge for nu={nu}, q={q}: shift {shift:e} between basis {basis} and {next_basis}")]
    Convergence {
        nu: f64,
        q: f64,
        basis: usize,
        next_basis: usize,
        shift: f64,
    },

    #[error("ambiguous Mathieu branch at nu={nu}, q={q}: nu lies within the band gap discontinuity; candidates {lower} and {upper}")]
    Ambiguity { nu: f64, q: f64, lower: f64, upper: f64 },

    #[error("degenerate spectrum: zeta = 0 (linear spectrum), {0}")]
    DegenerateSpectrum(String),

    #[error("pendulum matrix span {span} too small: boundary weight {weight:e} for offset {offset}")]
    Span { span: usize, offset: i64, weight: f64 },

    #[error("resonance singularity: |1 - mu^2| = {gap:e} (mu = {mu})")]
    ResonanceSingularity { mu: f64, gap: f64 },

    #[error("detuning singularity: omega = {omega} coincides with omega_N = 1/{order}")]
    DetuningSingularity { omega: f64, order: u32 },

    #[error("regime error: rho = {rho}: {reason}")]
    Regime { rho: f64, reason: String },

    #[error("wave packet truncated: basis captures only {captured} of the population weight")]
    Truncation { captured: f64 },

    #[error("propagation unstable: norm drifted by {drift:e} at t = {t}")]
    Stability { drift: f64, t: f64 },

    #[error("boundary reflection: amplitude {amplitude:e} in the outer grid region at t = {t}")]
    BoundaryReflection { amplitude: f64, t: f64 },

    #[error("grid too small: level {level} turns at x = {turning_point}, beyond 70% of the box; use x_max >= {suggested_x_max}")]
    InsufficientGrid {
        level: usize,
        turning_point: f64,
        suggested_x_max: f64,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

use num_complex::Complex64;
use thiserror::Error;

/// Failure modes shared by every module.
///
/// Each variant is either a *domain* error (the caller asked for something
/// outside the model's validity) or a *numerical* error (a solver gave up).
/// [`Error::is_domain`] makes the split explicit for callers that map errors
/// to exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("leading coefficient vanishes; polynomial degree is lower than declared")]
    Degree,

    #[error("pinch label ambiguous: continuation path passes a double root near lambda = {at}")]
    PinchAmbiguous { at: Complex64 },

    #[error("no triple point: {0}")]
    NoTriplePoint(String),

    #[error("continuation failed: {0}")]
    Continuation(String),

    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),

    #[error("no stabilizing speed found below {cap}")]
    NoStabilizingSpeed { cap: f64 },

    #[error("absolute spectrum is stable; no resonant mode")]
    NoResonance,

    #[error("{what} too close to lambda = {at}")]
    PoleProximity { what: String, at: Complex64 },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("solution blew up at t = {t}")]
    Blowup { t: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("out of range: {0}")]
    Range(String),
}

impl Error {
    /// True for errors caused by invalid inputs rather than solver failure.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Degree
                | Error::NoTriplePoint(_)
                | Error::NoResonance
                | Error::PoleProximity { .. }
                | Error::Config(_)
                | Error::Range(_)
        )
    }

    /// Short stable tag used in machine-readable error lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Degree => "degree",
            Error::PinchAmbiguous { .. } => "pinch_ambiguous",
            Error::NoTriplePoint(_) => "no_triple_point",
            Error::Continuation(_) => "continuation",
            Error::OracleMismatch(_) => "oracle_mismatch",
            Error::NoStabilizingSpeed { .. } => "no_stabilizing_speed",
            Error::NoResonance => "no_resonance",
            Error::PoleProximity { .. } => "pole_proximity",
            Error::Consistency(_) => "consistency",
            Error::Blowup { .. } => "blowup",
            Error::Config(_) => "config",
            Error::Range(_) => "range",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} is not finite")))
    }
}

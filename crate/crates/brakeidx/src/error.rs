use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("phase step of {step:.3} rad at t = {t:.6} exceeds the unwrap limit; refine the path")]
    PhaseResolution { t: f64, step: f64 },
    #[error("degenerate crossing at t = {t:.10} (dimension {dimension})")]
    DegenerateCrossing { t: f64, dimension: usize },
    #[error("no stabilization: {0}")]
    NoStabilization(String),
    #[error("consistency check failed: {0}")]
    Consistency(String),
    #[error("no orbit found: {0}")]
    NoOrbit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

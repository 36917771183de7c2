use std::fmt;
use std::io;

use knotflux::current::CurrentError;
use knotflux::ensemble::EnsembleError;
use knotflux::geometry::GeometryError;
use knotflux::magnetostatics::FluxError;
use knotflux::modulation::ModulationError;

/// A failed run, split by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or inputs; exit code 2.
    Validation(String),
    /// The computation itself did not succeed; exit code 3.
    Numerical(String),
}

impl Failure {
    pub fn validation(msg: impl Into<String>) -> Self {
        Failure::Validation(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::QuadratureFailure(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<FluxError> for Failure {
    fn from(e: FluxError) -> Self {
        match e {
            FluxError::QuadratureNotConverged { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<ModulationError> for Failure {
    fn from(e: ModulationError) -> Self {
        match e {
            ModulationError::DegenerateProfile => Failure::Numerical(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<CurrentError> for Failure {
    fn from(e: CurrentError) -> Self {
        match e {
            CurrentError::Flux(f) => f.into(),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<EnsembleError> for Failure {
    fn from(e: EnsembleError) -> Self {
        match e {
            EnsembleError::Flux(f) => f.into(),
            EnsembleError::Modulation(m) => m.into(),
            EnsembleError::InvalidConfig(_) | EnsembleError::NoBins => {
                Failure::Validation(e.to_string())
            }
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Validation(format!("i/o error: {e}"))
    }
}

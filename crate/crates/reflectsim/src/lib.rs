//! Simulator and training harness for CSI-free control of mechanically steered
//! reflector arrays. A hexagonally packed array of flat tiles is steered through
//! per-segment focal points: each tile aligns its normal with the bisector of the
//! directions to the transmitter and to its segment's focal point. A single-bounce
//! specular propagation model scores receive power, and cooperative PPO agents
//! learn to place the focal points from local observations only.

pub mod baselines;
pub mod environment;
pub mod geometry;
pub mod harness;
pub mod marl;
pub mod neural;
pub mod propagation;
mod vec3;

pub use vec3::Vec3;

use thiserror::Error;

/// Crate-wide error taxonomy. Variants map onto CLI exit codes: configuration
/// and argument errors exit 2, incompatible checkpoints exit 3, the rest exit 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate bisector: {0}")]
    DegenerateBisector(String),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("incompatible checkpoint: {0}")]
    IncompatibleCheckpoint(String),
    #[error("malformed file: {0}")]
    MalformedFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

use crate::rational::Q64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("mode {mode} of a vector at {vector} does not exist on a state at {state}: exponent is not integral")]
    NonIntegralExponent {
        vector: String,
        state: String,
        mode: Q64,
    },
    #[error("lattice vector {0} is outside the registered cocycle group")]
    UnregisteredVector(String),
    #[error("vector is not annihilated by the zero mode of the deformation vector")]
    NotInKernel,
    #[error("zero mode of the deformation vector is not nilpotent within {0} steps")]
    NotNilpotent(usize),
    #[error("characteristic polynomial has an irreducible factor of degree > 1: {0}")]
    IrrationalEigenvalue(String),
    #[error("cutoff {cutoff} is below the weight {weight} of a generator")]
    CutoffTooSmall { cutoff: Q64, weight: Q64 },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("zero-mode eigenvalue {0} is not an integer")]
    NonIntegralWeight(Q64),
    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

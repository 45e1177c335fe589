use thiserror::Error;

use crate::operators::Axis;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("capacity exceeded: {what} = {value} is above the cap of {cap}")]
    Capacity {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("empty bond family for p = {p}: no translate of the shape fits the lattice")]
    EmptyFamily { p: usize },

    #[error("invalid interaction shape: {0}")]
    InvalidShape(String),

    #[error("site index {index} out of range for {n_sites} sites")]
    SiteOutOfRange { index: usize, n_sites: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("zero standard deviation for p = {p}, axis {axis}: Nishimori change of variables needs a positive width")]
    ZeroWidth { p: usize, axis: Axis },

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("eigendecomposition rejected: {0}")]
    Spectral(String),

    #[error("invalid axis combination: {0}")]
    InvalidAxes(String),

    #[error("invalid coupling parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;

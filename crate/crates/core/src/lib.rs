//! Exact finite-volume verification of gauge identities and order-parameter
//! bounds for quantum XYZ mixed p-spin glasses with Gaussian couplings.
//!
//! Hamiltonians are built as dense matrices and diagonalized; disorder
//! averages are taken by seeded Monte Carlo or by Gauss-Hermite quadrature;
//! classical Nishimori-line averages are computed by exact enumeration.

pub mod classical;
pub mod disorder;
pub mod error;
pub mod identities;
pub mod lattice;
pub mod model;
pub mod operators;
pub mod phase_region;
pub mod quadrature;
pub mod quantum;
pub mod reduce;

pub use classical::{ClassicalModel, ClassicalObservable};
pub use disorder::{
    nishimori_beta, nishimori_transform, sample_disorder, CouplingParams, DisorderSample,
    NishimoriData, PSpinParams,
};
pub use error::{Error, Result};
pub use lattice::{Boundary, BondFamily, InteractionShape, Lattice};
pub use model::Model;
pub use operators::{Axis, AxisTriple, DenseOperator, PauliString, SpinConfiguration};
pub use phase_region::{Membership, RatioGrid, RegionQuery};
pub use quantum::{Spectrum, ThermalState};

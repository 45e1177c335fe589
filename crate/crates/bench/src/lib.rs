//! Fixtures shared by the benchmarks.

use xyzglass_core::{AxisTriple, CouplingParams, Model, PSpinParams};

/// Open chain with a Gaussian field and Gaussian bonds on every axis.
pub fn gaussian_chain(length: usize) -> Model {
    let params = CouplingParams::new(vec![
        PSpinParams::new(1, AxisTriple::new(0.3, 0.2, 0.6), AxisTriple::new(0.8, 0.7, 1.0)),
        PSpinParams::new(2, AxisTriple::new(0.4, 0.3, 0.7), AxisTriple::new(0.9, 0.8, 1.1)),
    ])
    .expect("valid parameters");
    Model::chain(length, params).expect("valid chain")
}

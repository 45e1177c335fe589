//! A lattice, its bond families and the Gaussian coupling parameters, bundled.

use crate::classical::ClassicalModel;
use crate::disorder::{
    nishimori_beta, nishimori_transform, sample_disorder, CouplingParams, DisorderSample,
};
use crate::error::{Error, Result};
use crate::lattice::{generate_families, BondFamily, Boundary, InteractionShape, Lattice};
use crate::operators::Axis;
use crate::quadrature::QuadratureSpec;
use crate::quantum::ThermalState;

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    lattice: Lattice,
    families: Vec<BondFamily>,
    params: CouplingParams,
}

impl Model {
    pub fn new(
        lattice: Lattice,
        shapes: &[InteractionShape],
        boundary: Boundary,
        params: CouplingParams,
    ) -> Result<Self> {
        let families = generate_families(&lattice, shapes, boundary)?;
        Self::from_families(lattice, families, params)
    }

    pub fn from_families(
        lattice: Lattice,
        families: Vec<BondFamily>,
        params: CouplingParams,
    ) -> Result<Self> {
        params.check_families(&families)?;
        if let Some(&i) = families
            .iter()
            .flat_map(|f| f.bonds().iter().flatten())
            .find(|&&i| i >= lattice.volume())
        {
            return Err(Error::SiteOutOfRange {
                index: i,
                n_sites: lattice.volume(),
            });
        }
        Ok(Self {
            lattice,
            families,
            params,
        })
    }

    /// Open chain of `length` sites with a field (p = 1) and/or nearest
    /// neighbour (p = 2) term, whichever orders `params` lists.
    pub fn chain(length: usize, params: CouplingParams) -> Result<Self> {
        let lattice = Lattice::new(1, length)?;
        let shapes = params
            .orders()
            .map(|p| match p {
                1 => Ok(InteractionShape::single_site(1)),
                2 => Ok(InteractionShape::nearest_neighbor(1, 0)),
                p => Err(Error::InvalidShape(format!("no default chain shape for p = {p}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(lattice, &shapes, Boundary::Open, params)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn families(&self) -> &[BondFamily] {
        &self.families
    }

    pub fn params(&self) -> &CouplingParams {
        &self.params
    }

    pub fn n_sites(&self) -> usize {
        self.lattice.volume()
    }

    /// Same lattice and bonds with different parameters.
    pub fn with_params(&self, params: CouplingParams) -> Result<Self> {
        Self::from_families(self.lattice.clone(), self.families.clone(), params)
    }

    pub fn sample(&self, seed: u64, index: u64) -> Result<DisorderSample> {
        sample_disorder(&self.params, &self.families, seed, index)
    }

    /// Every coupling at its mean.
    pub fn mean_sample(&self) -> Result<DisorderSample> {
        DisorderSample::at_means(&self.params, &self.families)
    }

    pub fn thermal_state(&self, sample: &DisorderSample, beta: f64) -> Result<ThermalState> {
        ThermalState::from_couplings(self.n_sites(), &self.families, sample, beta)
    }

    /// The classical Nishimori-line model attached to `sample` for gauge axis `u`.
    pub fn nishimori_model(&self, sample: &DisorderSample, u: Axis) -> Result<ClassicalModel> {
        let data = nishimori_transform(sample, &self.params, u)?;
        ClassicalModel::from_nishimori(self.n_sites(), &self.families, &data)
    }

    /// `beta_p^u` for every family, in family order.
    pub fn nishimori_betas(&self, u: Axis) -> Result<Vec<f64>> {
        self.families
            .iter()
            .map(|f| nishimori_beta(&self.params, f.p(), u))
            .collect()
    }

    pub fn quadrature_spec(&self, nodes_per_dim: usize) -> Result<QuadratureSpec> {
        QuadratureSpec::from_params(&self.params, &self.families, nodes_per_dim)
    }

    /// Index of the p = 1 family, if any.
    pub fn field_family(&self) -> Option<usize> {
        self.families.iter().position(|f| f.p() == 1)
    }
}

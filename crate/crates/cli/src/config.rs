//! Run configuration: one JSON document, validated before any computation.

use serde::{Deserialize, Serialize};
use xyzglass_core::identities::{Method, Tolerances};
use xyzglass_core::lattice::QUANTUM_SITE_CAP;
use xyzglass_core::phase_region::{RatioGrid, RegionQuery, MAX_GRID_POINTS};
use xyzglass_core::{
    Axis, AxisTriple, Boundary, CouplingParams, Error, InteractionShape, Lattice, Model,
    PSpinParams,
};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub dim: usize,
    pub size: usize,
    #[serde(default)]
    pub boundary: Boundary,
}

/// Sites `x` (and optionally `y`, `z`) with a common spin axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    pub x: Vec<usize>,
    #[serde(default)]
    pub y: Option<Vec<usize>>,
    #[serde(default)]
    pub z: Option<Vec<usize>>,
    pub axis: Axis,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodConfig {
    Mc { n_samples: u64 },
    Quadrature { nodes_per_dim: usize },
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self::Mc { n_samples: 10_000 }
    }
}

impl MethodConfig {
    pub fn resolve(&self, seed: u64) -> Method {
        match *self {
            Self::Mc { n_samples } => Method::Mc { n_samples, seed },
            Self::Quadrature { nodes_per_dim } => Method::Quadrature { nodes_per_dim },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    /// Axis of the observable in both bounds.
    pub w: Axis,
    /// Second axis of the susceptibility.
    pub v: Axis,
    pub a1_samples: u64,
    /// Finite-difference step of the nonlinear susceptibility; `null` skips it.
    pub a2_step: Option<f64>,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            w: Axis::Z,
            v: Axis::Z,
            a1_samples: 2000,
            a2_step: Some(0.05),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "over", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepConfig {
    /// One point per entry of `betas`.
    #[default]
    Beta,
    /// Shift the p = 1 mean along `axis` through `values`, at the first beta.
    Mu1 { axis: Axis, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryConfig {
    pub mean: AxisTriple<f64>,
    pub std: AxisTriple<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseRegionConfig {
    pub beta_t: f64,
    #[serde(default)]
    pub queries: Vec<QueryConfig>,
    #[serde(default)]
    pub grid: Option<RatioGrid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    pub csv: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "runs".into(),
            csv: true,
        }
    }
}

fn default_betas() -> Vec<f64> {
    vec![1.0]
}

fn default_gauge() -> Axis {
    Axis::X
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub lattice: Option<LatticeConfig>,
    /// Interaction shapes; defaults to a single site for p = 1 and nearest
    /// neighbours for p = 2.
    #[serde(default)]
    pub shapes: Option<Vec<InteractionShape>>,
    #[serde(default)]
    pub couplings: Vec<PSpinParams>,
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
    #[serde(default = "default_gauge")]
    pub gauge_axis: Axis,
    #[serde(default)]
    pub observables: Vec<ObservableSpec>,
    #[serde(default)]
    pub method: MethodConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub three_point: bool,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub phase_region: Option<PhaseRegionConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    /// All defaults; enough for `selftest`.
    pub fn empty() -> Self {
        Self::from_json("{}").expect("defaults deserialize")
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn method(&self) -> Method {
        self.method.resolve(self.seed)
    }

    pub fn params(&self) -> Result<CouplingParams, CliError> {
        Ok(CouplingParams::new(self.couplings.clone())?)
    }

    /// Lattice, bonds and parameters; everything except the quantum size cap.
    pub fn model(&self) -> Result<Model, CliError> {
        let lat = self
            .lattice
            .as_ref()
            .ok_or_else(|| CliError::Config("config: missing `lattice`".into()))?;
        let lattice = Lattice::new(lat.dim, lat.size)?;
        let params = self.params()?;
        let shapes = match &self.shapes {
            Some(shapes) => shapes.clone(),
            None => {
                let mut shapes = Vec::new();
                for p in params.orders() {
                    match p {
                        1 => shapes.push(InteractionShape::single_site(lat.dim)),
                        2 => shapes.extend(InteractionShape::nearest_neighbor_all(lat.dim)),
                        p => {
                            return Err(CliError::Config(format!(
                                "config: p = {p} needs explicit `shapes`"
                            )))
                        }
                    }
                }
                shapes
            }
        };
        Ok(Model::new(lattice, &shapes, lat.boundary, params)?)
    }

    /// Model for commands that diagonalize.
    pub fn quantum_model(&self) -> Result<Model, CliError> {
        let model = self.model()?;
        if model.n_sites() > QUANTUM_SITE_CAP {
            return Err(Error::Capacity {
                what: "quantum sites",
                value: model.n_sites(),
                cap: QUANTUM_SITE_CAP,
            }
            .into());
        }
        Ok(model)
    }

    fn check_betas(&self) -> Result<(), CliError> {
        if self.betas.is_empty() {
            return Err(CliError::Config("config: `betas` is empty".into()));
        }
        if let Some(b) = self.betas.iter().find(|b| !(**b >= 0.0) || !b.is_finite()) {
            return Err(CliError::Config(format!("config: beta must be >= 0, got {b}")));
        }
        Ok(())
    }

    fn check_method(&self, model: &Model) -> Result<(), CliError> {
        match self.method {
            MethodConfig::Mc { n_samples } if n_samples < 2 => Err(CliError::Config(
                "config: Monte Carlo needs n_samples >= 2".into(),
            )),
            MethodConfig::Mc { .. } => Ok(()),
            MethodConfig::Quadrature { nodes_per_dim } => {
                model.quadrature_spec(nodes_per_dim)?.total_nodes()?;
                Ok(())
            }
        }
    }

    fn check_tolerances(&self) -> Result<(), CliError> {
        let t = &self.tolerances;
        let ok = [t.sigmas, t.quadrature, t.exact, t.max_clip_fraction]
            .iter()
            .all(|v| *v >= 0.0 && v.is_finite());
        if !ok {
            return Err(CliError::Config("config: tolerances must be finite and >= 0".into()));
        }
        Ok(())
    }

    fn check_gauge(&self, model: &Model, axes: &[Axis]) -> Result<(), CliError> {
        if axes.contains(&self.gauge_axis) {
            return Err(CliError::Config(format!(
                "config: observable axis must differ from gauge_axis {}",
                self.gauge_axis
            )));
        }
        model.params().validate_gauge_axis(self.gauge_axis)?;
        Ok(())
    }

    pub fn validate_identities(&self) -> Result<Model, CliError> {
        let model = self.quantum_model()?;
        self.check_betas()?;
        self.check_method(&model)?;
        self.check_tolerances()?;
        if self.observables.is_empty() {
            return Err(CliError::Config("config: no `observables` to verify".into()));
        }
        for obs in &self.observables {
            self.check_gauge(&model, &[obs.axis])?;
            for sites in [Some(&obs.x), obs.y.as_ref(), obs.z.as_ref()].into_iter().flatten() {
                check_sites(sites, model.n_sites())?;
            }
        }
        Ok(model)
    }

    pub fn validate_bounds(&self) -> Result<Model, CliError> {
        let model = self.quantum_model()?;
        self.check_betas()?;
        self.check_method(&model)?;
        self.check_tolerances()?;
        self.check_gauge(&model, &[self.bounds.w, self.bounds.v])?;
        if self.bounds.a1_samples < 2 {
            return Err(CliError::Config("config: a1_samples must be >= 2".into()));
        }
        if let Some(h) = self.bounds.a2_step {
            if !(h > 0.0) || !h.is_finite() {
                return Err(CliError::Config(format!("config: a2_step must be > 0, got {h}")));
            }
        }
        Ok(model)
    }

    pub fn validate_order_params(&self) -> Result<Model, CliError> {
        let model = self.quantum_model()?;
        self.check_betas()?;
        self.check_method(&model)?;
        self.check_tolerances()?;
        if let SweepConfig::Mu1 { values, .. } = &self.sweep {
            if model.params().get(1).is_none() {
                return Err(CliError::Config("config: mu1 sweep needs a p = 1 coupling".into()));
            }
            if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Config("config: mu1 sweep values must be finite".into()));
            }
        }
        Ok(model)
    }

    pub fn validate_phase_region(&self) -> Result<&PhaseRegionConfig, CliError> {
        let pr = self
            .phase_region
            .as_ref()
            .ok_or_else(|| CliError::Config("config: missing `phase_region`".into()))?;
        for q in &pr.queries {
            RegionQuery::new(q.std, q.mean, pr.beta_t)?;
        }
        if pr.queries.is_empty() && pr.grid.is_none() {
            // validates beta_t on its own
            RegionQuery::new(AxisTriple::splat(1.0), AxisTriple::splat(0.0), pr.beta_t)?;
        }
        if let Some(grid) = &pr.grid {
            if grid.len() > MAX_GRID_POINTS {
                return Err(Error::Capacity {
                    what: "phase-region grid points",
                    value: grid.len(),
                    cap: MAX_GRID_POINTS,
                }
                .into());
            }
        }
        Ok(pr)
    }
}

fn check_sites(sites: &[usize], n_sites: usize) -> Result<(), CliError> {
    if let Some(&i) = sites.iter().find(|&&i| i >= n_sites) {
        return Err(Error::SiteOutOfRange { index: i, n_sites }.into());
    }
    let mut sorted = sites.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(CliError::Config(format!("config: repeated site in {sites:?}")));
    }
    Ok(())
}

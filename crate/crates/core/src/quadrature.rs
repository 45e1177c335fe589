//! Deterministic disorder averages by tensor-product Gauss-Hermite quadrature.

use serde::{Deserialize, Serialize};

use crate::disorder::{CouplingParams, DisorderSample};
use crate::error::{Error, Result};
use crate::lattice::BondFamily;
use crate::operators::Axis;
use crate::reduce::ordered_weighted;

/// Upper bound on the total number of tensor-grid nodes.
pub const MAX_NODES: u64 = 100_000_000;

/// Nodes and weights for `E f(X)`, `X ~ N(0, 1)`; weights sum to one.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    // Newton iteration on orthonormal physicists' Hermite polynomials
    const PI_M4: f64 = 0.751_125_544_464_942_5;
    let mut t = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * t[0],
            3 => 1.91 * z - 0.91 * t[1],
            _ => 2.0 * z - t[i - 2],
        };
        let mut derivative = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (PI_M4, 0.0);
            for j in 1..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            derivative = (2.0 * nf).sqrt() * p2;
            let step = p1 / derivative;
            z -= step;
            if step.abs() <= 3e-14 {
                break;
            }
        }
        t[i] = z;
        t[n - 1 - i] = -z;
        w[i] = 2.0 / (derivative * derivative);
        w[n - 1 - i] = w[i];
    }
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut pairs: Vec<(f64, f64)> = t
        .iter()
        .zip(&w)
        .map(|(&t, &w)| (std::f64::consts::SQRT_2 * t, w / sqrt_pi))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// One Gaussian coordinate of the disorder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomDim {
    pub family: usize,
    pub bond: usize,
    pub axis: Axis,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub nodes_per_dim: usize,
    pub dims: Vec<RandomDim>,
}

impl QuadratureSpec {
    /// Every component with `Delta > 0` becomes a random dimension; the rest
    /// are fixed at their means.
    pub fn from_params(
        params: &CouplingParams,
        families: &[BondFamily],
        nodes_per_dim: usize,
    ) -> Result<Self> {
        params.check_families(families)?;
        let mut dims = Vec::new();
        for (f, (fam, t)) in families.iter().zip(params.terms()).enumerate() {
            for bond in 0..fam.len() {
                for axis in Axis::ALL {
                    if t.std[axis] > 0.0 {
                        dims.push(RandomDim {
                            family: f,
                            bond,
                            axis,
                            mean: t.mean[axis],
                            std: t.std[axis],
                        });
                    }
                }
            }
        }
        let spec = Self {
            nodes_per_dim,
            dims,
        };
        spec.total_nodes()?;
        Ok(spec)
    }

    pub fn total_nodes(&self) -> Result<u64> {
        if self.nodes_per_dim < 2 {
            return Err(Error::Domain("quadrature needs at least 2 nodes per dimension".into()));
        }
        let guard = Error::Capacity {
            what: "quadrature nodes",
            value: usize::MAX,
            cap: MAX_NODES as usize,
        };
        let exp = u32::try_from(self.dims.len()).map_err(|_| guard.clone())?;
        match (self.nodes_per_dim as u64).checked_pow(exp) {
            Some(total) if total <= MAX_NODES => Ok(total),
            Some(total) => Err(Error::Capacity {
                what: "quadrature nodes",
                value: total as usize,
                cap: MAX_NODES as usize,
            }),
            None => Err(guard),
        }
    }
}

/// Weighted averages over the grid together with the largest `|value|` seen
/// at any node.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResult {
    pub means: Vec<f64>,
    pub max_abs: Vec<f64>,
    pub nodes: u64,
}

/// `E integrand(J)` over the Gaussian dimensions of `spec`, with all other
/// couplings taken from `base`. The integrand returns a fixed-width vector.
pub fn quadrature_average<F>(
    spec: &QuadratureSpec,
    base: &DisorderSample,
    width: usize,
    integrand: F,
) -> Result<Vec<f64>>
where
    F: Fn(&DisorderSample) -> Result<Vec<f64>> + Sync,
{
    Ok(quadrature_evaluate(spec, base, width, integrand)?.means)
}

/// Like [`quadrature_average`], also reporting the node count and maxima.
pub fn quadrature_evaluate<F>(
    spec: &QuadratureSpec,
    base: &DisorderSample,
    width: usize,
    integrand: F,
) -> Result<QuadratureResult>
where
    F: Fn(&DisorderSample) -> Result<Vec<f64>> + Sync,
{
    let total = spec.total_nodes()?;
    let (nodes, weights) = gauss_hermite(spec.nodes_per_dim);
    let radix = spec.nodes_per_dim as u64;
    let (means, max_abs) = ordered_weighted(total, width, 64, |index| {
        let mut sample = base.clone();
        let mut weight = 1.0;
        let mut rest = index;
        for dim in &spec.dims {
            let k = (rest % radix) as usize;
            rest /= radix;
            weight *= weights[k];
            sample.families[dim.family].values[dim.bond][dim.axis] = dim.mean + dim.std * nodes[k];
        }
        Ok((weight, integrand(&sample)?))
    })?;
    Ok(QuadratureResult {
        means,
        max_abs,
        nodes: total,
    })
}

//! Gaussian coupling parameters, disorder sampling, and the Nishimori
//! change of variables.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::BondFamily;
use crate::operators::{Axis, AxisTriple, SpinConfiguration};

/// Mean and width of the couplings of one order `p`, per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PSpinParams {
    pub p: usize,
    pub mean: AxisTriple<f64>,
    pub std: AxisTriple<f64>,
}

impl PSpinParams {
    pub fn new(p: usize, mean: AxisTriple<f64>, std: AxisTriple<f64>) -> Self {
        Self { p, mean, std }
    }

    /// A component with zero mean and zero width is identically zero and
    /// therefore invariant under any sign flip.
    pub fn is_zero_component(&self, axis: Axis) -> bool {
        self.mean[axis] == 0.0 && self.std[axis] == 0.0
    }

    /// `mu / Delta^2`, the coefficient of `J` in the gauge-covariance
    /// exponent. Zero components contribute nothing.
    pub fn covariance_coefficient(&self, axis: Axis) -> Result<f64> {
        if self.is_zero_component(axis) {
            return Ok(0.0);
        }
        let s = self.std[axis];
        if s <= 0.0 {
            return Err(Error::ZeroWidth { p: self.p, axis });
        }
        Ok(self.mean[axis] / (s * s))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CouplingParams {
    terms: Vec<PSpinParams>,
}

impl CouplingParams {
    /// Validates and sorts by `p`.
    pub fn new(mut terms: Vec<PSpinParams>) -> Result<Self> {
        terms.sort_by_key(|t| t.p);
        for pair in terms.windows(2) {
            if pair[0].p == pair[1].p {
                return Err(Error::InvalidParams(format!("p = {} listed twice", pair[0].p)));
            }
        }
        for t in &terms {
            if t.p == 0 {
                return Err(Error::InvalidParams("p must be positive".into()));
            }
            for a in Axis::ALL {
                if !t.mean[a].is_finite() || !t.std[a].is_finite() || t.std[a] < 0.0 {
                    return Err(Error::InvalidParams(format!(
                        "p = {}, axis {a}: need finite mean and non-negative finite width",
                        t.p
                    )));
                }
            }
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[PSpinParams] {
        &self.terms
    }

    pub fn orders(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.iter().map(|t| t.p)
    }

    pub fn get(&self, p: usize) -> Option<&PSpinParams> {
        self.terms.iter().find(|t| t.p == p)
    }

    pub fn get_mut(&mut self, p: usize) -> Option<&mut PSpinParams> {
        self.terms.iter_mut().find(|t| t.p == p)
    }

    /// Mixed even model: every `p > 1` must be even.
    pub fn validate_even(&self) -> Result<()> {
        match self.terms.iter().find(|t| t.p > 1 && t.p % 2 == 1) {
            Some(t) => Err(Error::InvalidParams(format!(
                "mixed even p-spin model cannot contain p = {}",
                t.p
            ))),
            None => Ok(()),
        }
    }

    /// Whether every Hamiltonian drawn from these parameters commutes with the
    /// global flip about `w`: all odd-p components off `w` identically zero.
    pub fn z2_symmetric(&self, w: Axis) -> bool {
        self.terms
            .iter()
            .filter(|t| t.p % 2 == 1)
            .all(|t| w.others().into_iter().all(|a| t.is_zero_component(a)))
    }

    /// Every component flipped by the gauge axis `u` needs `Delta > 0`
    /// unless it is identically zero.
    pub fn validate_gauge_axis(&self, u: Axis) -> Result<()> {
        for t in &self.terms {
            for a in u.others() {
                t.covariance_coefficient(a)?;
            }
        }
        Ok(())
    }

    pub fn check_families(&self, families: &[BondFamily]) -> Result<()> {
        if families.len() != self.terms.len()
            || families.iter().zip(&self.terms).any(|(f, t)| f.p() != t.p)
        {
            return Err(Error::InvalidParams(format!(
                "bond families {:?} do not match coupling orders {:?}",
                families.iter().map(BondFamily::p).collect::<Vec<_>>(),
                self.orders().collect::<Vec<_>>()
            )));
        }
        Ok(())
    }
}

/// Realized couplings of one family: one triple per bond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyCouplings {
    pub p: usize,
    pub values: Vec<AxisTriple<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderSample {
    pub seed: u64,
    pub sample_index: u64,
    pub families: Vec<FamilyCouplings>,
}

impl DisorderSample {
    /// All couplings at their means (the `Delta = 0` sample).
    pub fn at_means(params: &CouplingParams, families: &[BondFamily]) -> Result<Self> {
        params.check_families(families)?;
        Ok(Self {
            seed: 0,
            sample_index: 0,
            families: families
                .iter()
                .zip(params.terms())
                .map(|(f, t)| FamilyCouplings {
                    p: f.p(),
                    values: vec![t.mean; f.len()],
                })
                .collect(),
        })
    }

    /// Couplings with every value zero.
    pub fn zeros(families: &[BondFamily]) -> Self {
        Self {
            seed: 0,
            sample_index: 0,
            families: families
                .iter()
                .map(|f| FamilyCouplings {
                    p: f.p(),
                    values: vec![AxisTriple::splat(0.0); f.len()],
                })
                .collect(),
        }
    }

    pub fn family(&self, p: usize) -> Option<&FamilyCouplings> {
        self.families.iter().find(|f| f.p == p)
    }

    pub fn family_mut(&mut self, p: usize) -> Option<&mut FamilyCouplings> {
        self.families.iter_mut().find(|f| f.p == p)
    }

    /// CSV audit dump: `p,bond,axis,value`.
    pub fn write_csv<W: std::io::Write>(
        &self,
        families: &[BondFamily],
        mut out: W,
    ) -> std::io::Result<()> {
        writeln!(out, "p,bond,axis,value")?;
        for (fam, coup) in families.iter().zip(&self.families) {
            for (bond, triple) in fam.bonds().iter().zip(&coup.values) {
                let label = bond
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join("-");
                for a in Axis::ALL {
                    writeln!(out, "{},{},{},{:e}", coup.p, label, a, triple[a])?;
                }
            }
        }
        Ok(())
    }
}

/// Stream for disorder sample `index` under `seed`; independent of the
/// order in which samples are drawn.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws `J ~ N(mu, Delta^2)` for every (family, bond, axis), in that
/// order. A standard normal is consumed even for `Delta = 0`, so the
/// stream layout does not depend on the widths.
pub fn sample_disorder(
    params: &CouplingParams,
    families: &[BondFamily],
    seed: u64,
    sample_index: u64,
) -> Result<DisorderSample> {
    params.check_families(families)?;
    let mut rng = sample_rng(seed, sample_index);
    let couplings = families
        .iter()
        .zip(params.terms())
        .map(|(fam, t)| FamilyCouplings {
            p: fam.p(),
            values: (0..fam.len())
                .map(|_| {
                    let mut draw = AxisTriple::splat(0.0);
                    for a in Axis::ALL {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        draw[a] = t.mean[a] + t.std[a] * z;
                    }
                    draw
                })
                .collect(),
        })
        .collect();
    Ok(DisorderSample {
        seed,
        sample_index,
        families: couplings,
    })
}

/// Log of the Gaussian density with mean `mu` and width `delta`.
pub fn gaussian_log_density(j: f64, mu: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("density width must be positive, got {delta}")));
    }
    let z = (j - mu) / delta;
    Ok(-0.5 * z * z - delta.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln())
}

/// `beta_p^u = sqrt((mu^v/Delta^v)^2 + (mu^w/Delta^w)^2)` over the two axes
/// other than `u`. Identically-zero components contribute nothing.
pub fn nishimori_beta(params: &CouplingParams, p: usize, u: Axis) -> Result<f64> {
    let t = params
        .get(p)
        .ok_or_else(|| Error::InvalidParams(format!("no couplings for p = {p}")))?;
    pspin_nishimori_beta(t, u)
}

fn pspin_nishimori_beta(t: &PSpinParams, u: Axis) -> Result<f64> {
    let mut sum = 0.0;
    for a in u.others() {
        let ratio = t.covariance_coefficient(a)? * t.std[a];
        sum += ratio * ratio;
    }
    Ok(sum.sqrt())
}

/// Nishimori variables of one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NishimoriFamily {
    pub p: usize,
    pub beta: f64,
    pub k: Vec<f64>,
    pub g: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NishimoriData {
    pub axis: Axis,
    pub families: Vec<NishimoriFamily>,
}

impl NishimoriData {
    pub fn betas(&self) -> Vec<f64> {
        self.families.iter().map(|f| f.beta).collect()
    }

    /// `beta_p * K_{X,p}` per family and bond: the classical log-weight
    /// coefficients.
    pub fn weighted_couplings(&self) -> Vec<Vec<f64>> {
        self.families
            .iter()
            .map(|f| f.k.iter().map(|k| f.beta * k).collect())
            .collect()
    }
}

/// Maps `(J^v, J^w)` of every bond to `(K^u, G^u)`.
///
/// With `beta_p^u = 0` (both means zero) the definition is taken as its
/// limit `mu^w = 0, mu^v -> 0+`: `K = J^v / Delta^v`, `G = -J^w / Delta^w`.
/// Identically-zero components are skipped (they carry no randomness).
pub fn nishimori_transform(
    sample: &DisorderSample,
    params: &CouplingParams,
    u: Axis,
) -> Result<NishimoriData> {
    let [v, w] = u.others();
    let families = sample
        .families
        .iter()
        .map(|fam| {
            let t = params
                .get(fam.p)
                .ok_or_else(|| Error::InvalidParams(format!("no couplings for p = {}", fam.p)))?;
            let beta = pspin_nishimori_beta(t, u)?;
            let cv = t.covariance_coefficient(v)?;
            let cw = t.covariance_coefficient(w)?;
            let (zero_v, zero_w) = (t.is_zero_component(v), t.is_zero_component(w));
            let (dv, dw) = (t.std[v], t.std[w]);
            let mut k = Vec::with_capacity(fam.values.len());
            let mut g = Vec::with_capacity(fam.values.len());
            for j in &fam.values {
                let (jv, jw) = (j[v], j[w]);
                let (kk, gg) = if beta > 0.0 {
                    let kk = (cv * jv + cw * jw) / beta;
                    let gg = if zero_v || zero_w {
                        0.0
                    } else {
                        (t.mean[w] * jv - t.mean[v] * jw) / (beta * dv * dw)
                    };
                    (kk, gg)
                } else {
                    let kk = if zero_v { 0.0 } else { jv / dv };
                    let gg = if zero_w { 0.0 } else { -jw / dw };
                    (kk, gg)
                };
                k.push(kk);
                g.push(gg);
            }
            Ok(NishimoriFamily {
                p: fam.p,
                beta,
                k,
                g,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NishimoriData { axis: u, families })
}

/// `J^w_{X,p} -> J^w_{X,p} tau_X` for both axes `w != u`.
pub fn gauge_transform_couplings(
    sample: &DisorderSample,
    families: &[BondFamily],
    tau: &SpinConfiguration,
    u: Axis,
) -> Result<DisorderSample> {
    if families.len() != sample.families.len() {
        return Err(Error::LengthMismatch {
            expected: families.len(),
            got: sample.families.len(),
        });
    }
    let mut out = sample.clone();
    for (fam, coup) in families.iter().zip(out.families.iter_mut()) {
        for (bond, triple) in fam.bonds().iter().zip(coup.values.iter_mut()) {
            if let Some(&i) = bond.iter().find(|&&i| i >= tau.len()) {
                return Err(Error::SiteOutOfRange {
                    index: i,
                    n_sites: tau.len(),
                });
            }
            let sign = tau.product(bond);
            for a in u.others() {
                triple[a] *= sign;
            }
        }
    }
    Ok(out)
}

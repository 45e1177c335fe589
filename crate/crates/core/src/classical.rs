//! Exact enumeration of the classical Ising model
//! `H_cl(tau, K) = -sum_p sum_X K_{X,p} tau_X` with order-dependent inverse
//! temperatures: configuration weight `exp(sum_p beta_p sum_X K_{X,p} tau_X)`.
//!
//! Configurations are bit-coded (bit `i` set means `tau_i = -1`) and walked in
//! Gray-code order inside fixed chunks, so each step updates only the bonds
//! touching the flipped site.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disorder::NishimoriData;
use crate::error::{Error, Result};
use crate::lattice::{BondFamily, CLASSICAL_SITE_CAP};
use crate::operators::SpinConfiguration;
use crate::reduce::pairwise_sum;

const CHUNK_BITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalModel {
    n_sites: usize,
    masks: Vec<Vec<u64>>,
    couplings: Vec<Vec<f64>>,
    betas: Vec<f64>,
}

/// `tau_X`, or the pair product `tau_X tau_Y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalObservable {
    Product(Vec<usize>),
    Pair(Vec<usize>, Vec<usize>),
}

impl ClassicalObservable {
    /// Bit mask of the product; `tau_X tau_Y = tau_{X symmetric-difference Y}`.
    pub fn mask(&self, n_sites: usize) -> Result<u64> {
        let single = |sites: &[usize]| -> Result<u64> {
            sites.iter().try_fold(0u64, |m, &i| {
                if i >= n_sites {
                    Err(Error::SiteOutOfRange { index: i, n_sites })
                } else {
                    Ok(m ^ (1 << i))
                }
            })
        };
        match self {
            Self::Product(x) => single(x),
            Self::Pair(x, y) => Ok(single(x)? ^ single(y)?),
        }
    }
}

impl ClassicalModel {
    pub fn new(
        n_sites: usize,
        families: &[BondFamily],
        couplings: Vec<Vec<f64>>,
        betas: Vec<f64>,
    ) -> Result<Self> {
        if n_sites > CLASSICAL_SITE_CAP {
            return Err(Error::Capacity {
                what: "classical enumeration sites",
                value: n_sites,
                cap: CLASSICAL_SITE_CAP,
            });
        }
        if couplings.len() != families.len() || betas.len() != families.len() {
            return Err(Error::LengthMismatch {
                expected: families.len(),
                got: couplings.len().min(betas.len()),
            });
        }
        for (fam, k) in families.iter().zip(&couplings) {
            if fam.len() != k.len() {
                return Err(Error::LengthMismatch {
                    expected: fam.len(),
                    got: k.len(),
                });
            }
            if let Some(&i) = fam.bonds().iter().flatten().find(|&&i| i >= n_sites) {
                return Err(Error::SiteOutOfRange { index: i, n_sites });
            }
        }
        if let Some(b) = betas.iter().find(|b| !(**b >= 0.0)) {
            return Err(Error::Domain(format!("inverse temperatures must be >= 0, got {b}")));
        }
        Ok(Self {
            n_sites,
            masks: families.iter().map(BondFamily::masks).collect(),
            couplings,
            betas,
        })
    }

    /// The Nishimori-line model `(0, K^u)` at `beta_N^u`.
    pub fn from_nishimori(
        n_sites: usize,
        families: &[BondFamily],
        data: &NishimoriData,
    ) -> Result<Self> {
        Self::new(
            n_sites,
            families,
            data.families.iter().map(|f| f.k.clone()).collect(),
            data.betas(),
        )
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn couplings(&self) -> &[Vec<f64>] {
        &self.couplings
    }

    /// `H_cl(tau, K)`; the inverse temperatures are not applied here.
    pub fn energy(&self, tau: &SpinConfiguration) -> Result<f64> {
        if tau.len() != self.n_sites {
            return Err(Error::LengthMismatch {
                expected: self.n_sites,
                got: tau.len(),
            });
        }
        let bits = tau
            .values()
            .iter()
            .enumerate()
            .fold(0u64, |b, (i, &v)| if v < 0 { b | 1 << i } else { b });
        Ok(-self
            .masks
            .iter()
            .zip(&self.couplings)
            .flat_map(|(ms, ks)| ms.iter().zip(ks))
            .map(|(&m, &k)| k * parity(bits & m))
            .sum::<f64>())
    }

    fn terms(&self) -> Vec<(u64, f64)> {
        self.masks
            .iter()
            .zip(&self.couplings)
            .zip(&self.betas)
            .flat_map(|((ms, ks), &b)| ms.iter().zip(ks).map(move |(&m, &k)| (m, b * k)))
            .filter(|&(_, c)| c != 0.0)
            .collect()
    }

    /// Exact `<tau_mask>` for each mask, in one enumeration pass.
    pub fn mask_expectations(&self, masks: &[u64]) -> Vec<f64> {
        let acc = self.enumerate(masks.len(), |bits, w, acc| {
            for (a, &m) in acc.iter_mut().zip(masks) {
                *a += w * parity(bits & m);
            }
        });
        acc
    }

    pub fn classical_expectation(&self, observable: &ClassicalObservable) -> Result<f64> {
        let mask = observable.mask(self.n_sites)?;
        Ok(self.mask_expectations(&[mask])[0])
    }

    /// `<tau_i>` for every site.
    pub fn magnetizations(&self) -> Vec<f64> {
        let masks: Vec<u64> = (0..self.n_sites).map(|i| 1 << i).collect();
        self.mask_expectations(&masks)
    }

    /// `<tau_i tau_j>` for all pairs, row-major `n x n`.
    pub fn correlation_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.n_sites;
        let flat = self.enumerate(n * n, |bits, w, acc| {
            for i in 0..n {
                let ti = spin(bits, i);
                for j in 0..n {
                    acc[i * n + j] += w * ti * spin(bits, j);
                }
            }
        });
        flat.chunks(n).map(<[f64]>::to_vec).collect()
    }

    /// Weighted sum of `observe` over all configurations, normalized by `Z`.
    fn enumerate<F>(&self, width: usize, observe: F) -> Vec<f64>
    where
        F: Fn(u64, f64, &mut [f64]) + Sync,
    {
        let n = self.n_sites;
        let terms = self.terms();
        let mut site_terms: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (t, &(m, _)) in terms.iter().enumerate() {
            for (s, list) in site_terms.iter_mut().enumerate() {
                if m >> s & 1 == 1 {
                    list.push(t);
                }
            }
        }
        let low = n.min(CHUNK_BITS);
        let n_chunks = 1u64 << (n - low);
        let walk = |chunk: u64| -> ChunkSum {
            let base = chunk << low;
            let mut signs: Vec<f64> = terms.iter().map(|&(m, _)| parity(base & m)).collect();
            let initial: f64 = terms.iter().zip(&signs).map(|(&(_, c), s)| c * s).sum();
            // pass 1: the largest log-weight, pass 2: accumulate
            let mut best = initial;
            gray_walk(low, base, &terms, &site_terms, &mut signs.clone(), initial, |_, lw| {
                best = best.max(lw)
            });
            let mut z = 0.0;
            let mut acc = vec![0.0; width];
            gray_walk(low, base, &terms, &site_terms, &mut signs, initial, |bits, lw| {
                let w = (lw - best).exp();
                z += w;
                observe(bits, w, &mut acc);
            });
            ChunkSum { log_scale: best, z, acc }
        };
        let chunks: Vec<ChunkSum> = if n_chunks > 1 {
            (0..n_chunks).into_par_iter().map(walk).collect()
        } else {
            vec![walk(0)]
        };
        let top = chunks.iter().fold(f64::NEG_INFINITY, |m, c| m.max(c.log_scale));
        let scales: Vec<f64> = chunks.iter().map(|c| (c.log_scale - top).exp()).collect();
        let z = pairwise_sum(&chunks.iter().zip(&scales).map(|(c, s)| c.z * s).collect::<Vec<_>>());
        (0..width)
            .map(|k| {
                let parts: Vec<f64> = chunks.iter().zip(&scales).map(|(c, s)| c.acc[k] * s).collect();
                pairwise_sum(&parts) / z
            })
            .collect()
    }
}

struct ChunkSum {
    log_scale: f64,
    z: f64,
    acc: Vec<f64>,
}

/// Visits the `2^bits` configurations sharing the upper bits of `base`.
fn gray_walk(
    bits: usize,
    base: u64,
    terms: &[(u64, f64)],
    site_terms: &[Vec<usize>],
    signs: &mut [f64],
    initial: f64,
    mut visit: impl FnMut(u64, f64),
) {
    let mut config = base;
    let mut log_weight = initial;
    visit(config, log_weight);
    for step in 1u64..(1 << bits) {
        let site = step.trailing_zeros() as usize;
        config ^= 1 << site;
        for &t in &site_terms[site] {
            log_weight -= 2.0 * terms[t].1 * signs[t];
            signs[t] = -signs[t];
        }
        visit(config, log_weight);
    }
}

#[inline]
fn parity(bits: u64) -> f64 {
    if bits.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
fn spin(bits: u64, i: usize) -> f64 {
    if bits >> i & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{generate_families, Boundary, InteractionShape, Lattice};

    fn chain(l: usize, with_field: bool) -> Vec<BondFamily> {
        let lat = Lattice::new(1, l).unwrap();
        let mut shapes = vec![InteractionShape::nearest_neighbor(1, 0)];
        if with_field {
            shapes.push(InteractionShape::single_site(1));
        }
        generate_families(&lat, &shapes, Boundary::Open).unwrap()
    }

    #[test]
    fn energies() {
        let fams = chain(2, false);
        let m = ClassicalModel::new(2, &fams, vec![vec![0.0]], vec![1.0]).unwrap();
        assert_eq!(m.energy(&SpinConfiguration::all_up(2)).unwrap(), 0.0);
        let m = ClassicalModel::new(2, &fams, vec![vec![0.8]], vec![1.0]).unwrap();
        assert_eq!(m.energy(&SpinConfiguration::all_up(2)).unwrap(), -0.8);
        let tau = SpinConfiguration::new(vec![1, -1]).unwrap();
        assert_eq!(m.energy(&tau).unwrap(), m.energy(&tau.flipped()).unwrap());
    }

    #[test]
    fn analytic_cases() {
        let lat = Lattice::new(1, 1).unwrap();
        let fams =
            generate_families(&lat, &[InteractionShape::single_site(1)], Boundary::Open).unwrap();
        let m = ClassicalModel::new(1, &fams, vec![vec![0.6]], vec![1.5]).unwrap();
        let obs = ClassicalObservable::Product(vec![0]);
        assert!((m.classical_expectation(&obs).unwrap() - (0.9f64).tanh()).abs() < 1e-15);

        let fams = chain(2, false);
        let m = ClassicalModel::new(2, &fams, vec![vec![-0.7]], vec![1.3]).unwrap();
        let pair = ClassicalObservable::Pair(vec![0], vec![1]);
        assert!((m.classical_expectation(&pair).unwrap() - (-0.91f64).tanh()).abs() < 1e-15);
    }

    #[test]
    fn infinite_temperature_is_uniform() {
        let fams = chain(5, true);
        let m = ClassicalModel::new(5, &fams, vec![vec![1.0; 5], vec![0.5; 4]], vec![0.0, 0.0])
            .unwrap();
        for v in m.magnetizations() {
            assert!(v.abs() < 1e-15);
        }
        let c = m.correlation_matrix();
        for (i, row) in c.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn ferromagnet_ground_state_dominates() {
        let fams = chain(6, false);
        let m = ClassicalModel::new(6, &fams, vec![vec![1.0; 5]], vec![20.0]).unwrap();
        for row in m.correlation_matrix() {
            for v in row {
                assert!((v - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn chunked_matches_single_chunk() {
        // 14 sites forces 4 chunks; compare with the transfer-free closed form
        // of an open chain: <tau_0 tau_k> = prod tanh(beta K_b)
        let l = 14;
        let fams = chain(l, false);
        let ks: Vec<f64> = (0..l - 1).map(|b| 0.3 + 0.05 * b as f64).collect();
        let m = ClassicalModel::new(l, &fams, vec![ks.clone()], vec![0.9]).unwrap();
        let c = m.correlation_matrix();
        let mut expect = 1.0;
        for k in 1..l {
            expect *= (0.9 * ks[k - 1]).tanh();
            assert!((c[0][k] - expect).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn caps_and_errors() {
        let lat = Lattice::new(1, 24).unwrap();
        let fams =
            generate_families(&lat, &[InteractionShape::single_site(1)], Boundary::Open).unwrap();
        assert!(ClassicalModel::new(25, &fams, vec![vec![0.0; 24]], vec![1.0]).is_err());
        assert!(ClassicalModel::new(24, &fams, vec![vec![0.0; 3]], vec![1.0]).is_err());
        assert!(ClassicalModel::new(24, &fams, vec![vec![0.0; 24]], vec![-1.0]).is_err());
        let m = ClassicalModel::new(24, &fams, vec![vec![0.0; 24]], vec![1.0]).unwrap();
        assert!(m
            .classical_expectation(&ClassicalObservable::Product(vec![30]))
            .is_err());
    }
}

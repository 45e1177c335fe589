//! Cubic lattices and the bond families generated from interaction shapes.
//!
//! Sites are stored in lexicographic order of their coordinates, so site `k`
//! of a `d`-dimensional lattice of linear size `L` has coordinates equal to the
//! base-`L` digits of `k`, most significant first.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default site cap for exact classical enumeration.
pub const CLASSICAL_SITE_CAP: usize = 24;

/// Site cap for dense quantum operators (Hilbert dimension `2^14`).
pub const QUANTUM_SITE_CAP: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Boundary::Open => f.write_str("open"),
            Boundary::Periodic => f.write_str("periodic"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    dim: usize,
    size: usize,
    sites: Vec<Vec<i64>>,
}

impl Lattice {
    /// Builds `[0, L-1]^d` with the default classical cap of 24 sites.
    pub fn new(dim: usize, size: usize) -> Result<Self> {
        Self::with_cap(dim, size, CLASSICAL_SITE_CAP)
    }

    pub fn with_cap(dim: usize, size: usize, cap: usize) -> Result<Self> {
        if dim == 0 || size == 0 {
            return Err(Error::Domain(format!(
                "lattice needs d >= 1 and L >= 1 (got d = {dim}, L = {size})"
            )));
        }
        let volume = u32::try_from(dim)
            .ok()
            .and_then(|d| size.checked_pow(d))
            .filter(|&v| v <= cap)
            .ok_or(Error::Capacity {
                what: "lattice volume",
                value: size.saturating_pow(dim.min(u32::MAX as usize) as u32),
                cap,
            })?;
        let sites = (0..volume)
            .map(|k| {
                let mut coords = vec![0i64; dim];
                let mut rest = k;
                for c in coords.iter_mut().rev() {
                    *c = (rest % size) as i64;
                    rest /= size;
                }
                coords
            })
            .collect();
        Ok(Self { dim, size, sites })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn volume(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[Vec<i64>] {
        &self.sites
    }

    pub fn coords(&self, index: usize) -> Option<&[i64]> {
        self.sites.get(index).map(Vec::as_slice)
    }

    /// Lexicographic index of a coordinate vector, or `None` if it lies outside.
    pub fn index_of(&self, coords: &[i64]) -> Option<usize> {
        if coords.len() != self.dim {
            return None;
        }
        let l = self.size as i64;
        coords.iter().try_fold(0usize, |acc, &c| {
            (0..l).contains(&c).then(|| acc * self.size + c as usize)
        })
    }

    fn wrap(&self, coords: &[i64]) -> usize {
        let l = self.size as i64;
        coords
            .iter()
            .fold(0usize, |acc, &c| acc * self.size + c.rem_euclid(l) as usize)
    }
}

/// A set of `p` offsets containing the origin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ShapeRepr", into = "ShapeRepr")]
pub struct InteractionShape {
    offsets: Vec<Vec<i64>>,
}

#[derive(Serialize, Deserialize)]
struct ShapeRepr {
    offsets: Vec<Vec<i64>>,
}

impl TryFrom<ShapeRepr> for InteractionShape {
    type Error = Error;

    fn try_from(repr: ShapeRepr) -> Result<Self> {
        Self::new(repr.offsets)
    }
}

impl From<InteractionShape> for ShapeRepr {
    fn from(shape: InteractionShape) -> Self {
        ShapeRepr {
            offsets: shape.offsets,
        }
    }
}

impl InteractionShape {
    pub fn new(offsets: Vec<Vec<i64>>) -> Result<Self> {
        let Some(first) = offsets.first() else {
            return Err(Error::InvalidShape("no offsets".into()));
        };
        let dim = first.len();
        if dim == 0 || offsets.iter().any(|o| o.len() != dim) {
            return Err(Error::InvalidShape(
                "offsets must share one positive dimension".into(),
            ));
        }
        if !offsets.iter().any(|o| o.iter().all(|&c| c == 0)) {
            return Err(Error::InvalidShape("origin missing".into()));
        }
        let distinct: HashSet<&Vec<i64>> = offsets.iter().collect();
        if distinct.len() != offsets.len() {
            return Err(Error::InvalidShape("duplicate offsets".into()));
        }
        Ok(Self { offsets })
    }

    /// `{0}`: the single-site shape generating the p = 1 family.
    pub fn single_site(dim: usize) -> Self {
        Self {
            offsets: vec![vec![0; dim]],
        }
    }

    /// `{0, e_axis}`: one nearest-neighbour pair direction.
    pub fn nearest_neighbor(dim: usize, axis: usize) -> Self {
        let mut step = vec![0; dim];
        step[axis] = 1;
        Self {
            offsets: vec![vec![0; dim], step],
        }
    }

    /// All `d` forward nearest-neighbour shapes.
    pub fn nearest_neighbor_all(dim: usize) -> Vec<Self> {
        (0..dim).map(|k| Self::nearest_neighbor(dim, k)).collect()
    }

    pub fn p(&self) -> usize {
        self.offsets.len()
    }

    pub fn dim(&self) -> usize {
        self.offsets[0].len()
    }

    pub fn offsets(&self) -> &[Vec<i64>] {
        &self.offsets
    }
}

/// All distinct translates `i + A_p` of the shapes of one order `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BondFamily {
    p: usize,
    bonds: Vec<Vec<usize>>,
    boundary: Boundary,
}

impl BondFamily {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn bonds(&self) -> &[Vec<usize>] {
        &self.bonds
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn len(&self) -> usize {
        self.bonds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bonds.is_empty()
    }

    /// Bonds as bitmasks over site indices (site `i` is bit `i`).
    pub fn masks(&self) -> Vec<u64> {
        self.bonds
            .iter()
            .map(|b| b.iter().fold(0u64, |m, &i| m | (1u64 << i)))
            .collect()
    }
}

pub fn generate_bonds(
    lattice: &Lattice,
    shape: &InteractionShape,
    boundary: Boundary,
) -> Result<BondFamily> {
    generate_family(lattice, std::slice::from_ref(shape), boundary)
}

/// Merges the translates of several shapes of the same order into one
/// deduplicated family. Bond order: by site, then by shape.
pub fn generate_family(
    lattice: &Lattice,
    shapes: &[InteractionShape],
    boundary: Boundary,
) -> Result<BondFamily> {
    let Some(first) = shapes.first() else {
        return Err(Error::InvalidShape("no shapes given".into()));
    };
    let p = first.p();
    if shapes.iter().any(|s| s.p() != p) {
        return Err(Error::InvalidShape(
            "shapes merged into one family must share p".into(),
        ));
    }
    if shapes.iter().any(|s| s.dim() != lattice.dim()) {
        return Err(Error::InvalidShape(format!(
            "shape dimension does not match lattice dimension {}",
            lattice.dim()
        )));
    }
    let mut seen = HashSet::new();
    let mut bonds = Vec::new();
    let mut translated = vec![0i64; lattice.dim()];
    for origin in lattice.sites() {
        for shape in shapes {
            let mut bond = Vec::with_capacity(p);
            for offset in shape.offsets() {
                for (t, (o, a)) in translated.iter_mut().zip(origin.iter().zip(offset)) {
                    *t = o + a;
                }
                let site = match boundary {
                    Boundary::Open => lattice.index_of(&translated),
                    Boundary::Periodic => Some(lattice.wrap(&translated)),
                };
                match site {
                    Some(s) => bond.push(s),
                    None => break,
                }
            }
            if bond.len() != p {
                continue;
            }
            bond.sort_unstable();
            bond.dedup();
            // a wrapped translate can fold onto itself on very small rings
            if bond.len() == p && seen.insert(bond.clone()) {
                bonds.push(bond);
            }
        }
    }
    if bonds.is_empty() {
        return Err(Error::EmptyFamily { p });
    }
    Ok(BondFamily { p, bonds, boundary })
}

/// Groups shapes by `p` and builds one family per order, sorted by `p`.
pub fn generate_families(
    lattice: &Lattice,
    shapes: &[InteractionShape],
    boundary: Boundary,
) -> Result<Vec<BondFamily>> {
    let mut orders: Vec<usize> = shapes.iter().map(InteractionShape::p).collect();
    orders.sort_unstable();
    orders.dedup();
    orders
        .into_iter()
        .map(|p| {
            let group: Vec<InteractionShape> =
                shapes.iter().filter(|s| s.p() == p).cloned().collect();
            generate_family(lattice, &group, boundary)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn volumes_and_order() {
        let chain = Lattice::new(1, 4).unwrap();
        assert_eq!(chain.volume(), 4);
        assert_eq!(chain.sites(), &[vec![0], vec![1], vec![2], vec![3]]);

        let square = Lattice::new(2, 2).unwrap();
        assert_eq!(
            square.sites(),
            &[vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        assert_eq!(Lattice::new(3, 2).unwrap().volume(), 8);
    }

    #[test]
    fn capacity_error_names_cap() {
        let err = Lattice::new(2, 5).unwrap_err();
        assert_eq!(
            err,
            Error::Capacity {
                what: "lattice volume",
                value: 25,
                cap: 24
            }
        );
        assert!(err.to_string().contains("24"));
        assert!(Lattice::with_cap(1, 15, QUANTUM_SITE_CAP).is_err());
    }

    #[test]
    fn chain_pairs_open_and_periodic() {
        let chain = Lattice::new(1, 4).unwrap();
        let pair = InteractionShape::nearest_neighbor(1, 0);
        let open = generate_bonds(&chain, &pair, Boundary::Open).unwrap();
        assert_eq!(open.bonds(), &[vec![0, 1], vec![1, 2], vec![2, 3]]);
        let ring = generate_bonds(&chain, &pair, Boundary::Periodic).unwrap();
        assert_eq!(ring.len(), 4);
        assert!(ring.bonds().contains(&vec![0, 3]));
    }

    #[test]
    fn single_site_family_is_lattice() {
        let square = Lattice::new(2, 2).unwrap();
        for boundary in [Boundary::Open, Boundary::Periodic] {
            let fam =
                generate_bonds(&square, &InteractionShape::single_site(2), boundary).unwrap();
            assert_eq!(fam.bonds(), &[vec![0], vec![1], vec![2], vec![3]]);
        }
    }

    #[test]
    fn empty_family_rejected() {
        let single = Lattice::new(1, 1).unwrap();
        let pair = InteractionShape::nearest_neighbor(1, 0);
        assert_eq!(
            generate_bonds(&single, &pair, Boundary::Open).unwrap_err(),
            Error::EmptyFamily { p: 2 }
        );
    }

    #[test]
    fn shape_validation() {
        assert!(InteractionShape::new(vec![vec![1], vec![2]]).is_err());
        assert!(InteractionShape::new(vec![vec![0], vec![0]]).is_err());
        assert!(InteractionShape::new(vec![vec![0], vec![1, 0]]).is_err());
        let s = InteractionShape::new(vec![vec![0, 0], vec![-1, 0], vec![0, 1]]).unwrap();
        assert_eq!(s.p(), 3);
    }

    #[test]
    fn merged_shapes_deduplicate() {
        // {0,1} and {0,-1} generate the same open-chain pairs
        let chain = Lattice::new(1, 4).unwrap();
        let fwd = InteractionShape::new(vec![vec![0], vec![1]]).unwrap();
        let back = InteractionShape::new(vec![vec![0], vec![-1]]).unwrap();
        let fam = generate_family(&chain, &[fwd, back], Boundary::Open).unwrap();
        assert_eq!(fam.len(), 3);
    }

    proptest! {
        #[test]
        fn periodic_nn_count(d in 1usize..=3, l in 3usize..=4) {
            prop_assume!(l.pow(d as u32) <= CLASSICAL_SITE_CAP);
            let lat = Lattice::new(d, l).unwrap();
            let fam = generate_family(
                &lat,
                &InteractionShape::nearest_neighbor_all(d),
                Boundary::Periodic,
            )
            .unwrap();
            prop_assert_eq!(fam.len(), d * lat.volume());
            for bond in fam.bonds() {
                prop_assert!(bond.windows(2).all(|w| w[0] < w[1]));
            }
            let again = generate_family(
                &lat,
                &InteractionShape::nearest_neighbor_all(d),
                Boundary::Periodic,
            )
            .unwrap();
            prop_assert_eq!(fam, again);
        }

        #[test]
        fn index_roundtrip(d in 1usize..=3, l in 1usize..=2) {
            let lat = Lattice::new(d, l).unwrap();
            for (k, c) in lat.sites().iter().enumerate() {
                prop_assert_eq!(lat.index_of(c), Some(k));
            }
        }
    }
}

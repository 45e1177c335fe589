//! Pauli operators on the `2^N` tensor-product space.
//!
//! Tensor slot order follows the lattice order: site 0 is the leftmost factor,
//! i.e. the most significant bit of a basis index. Bit value 0 is the
//! `sigma^z = +1` state, so a classical configuration `tau` maps to basis
//! index bits via `tau_i = 1 - 2 * bit_i`.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::QUANTUM_SITE_CAP;

pub(crate) const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// The two axes different from `self`, in cyclic order.
    pub fn others(self) -> [Axis; 2] {
        match self {
            Axis::X => [Axis::Y, Axis::Z],
            Axis::Y => [Axis::Z, Axis::X],
            Axis::Z => [Axis::X, Axis::Y],
        }
    }

    /// The axis different from both `a` and `b` (`a != b`).
    pub fn third(a: Axis, b: Axis) -> Option<Axis> {
        (a != b).then(|| {
            Axis::ALL
                .into_iter()
                .find(|&c| c != a && c != b)
                .expect("three axes")
        })
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(Error::InvalidAxes(format!("unknown axis {other:?}"))),
        }
    }
}

/// One value per spin axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AxisTriple<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T> AxisTriple<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn map<U>(self, mut f: impl FnMut(T) -> U) -> AxisTriple<U> {
        AxisTriple {
            x: f(self.x),
            y: f(self.y),
            z: f(self.z),
        }
    }
}

impl<T: Copy> AxisTriple<T> {
    pub fn splat(v: T) -> Self {
        Self { x: v, y: v, z: v }
    }
}

impl<T> Index<Axis> for AxisTriple<T> {
    type Output = T;

    fn index(&self, axis: Axis) -> &T {
        match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
            Axis::Z => &self.z,
        }
    }
}

impl<T> IndexMut<Axis> for AxisTriple<T> {
    fn index_mut(&mut self, axis: Axis) -> &mut T {
        match axis {
            Axis::X => &mut self.x,
            Axis::Y => &mut self.y,
            Axis::Z => &mut self.z,
        }
    }
}

/// A classical Ising configuration `tau: sites -> {+1, -1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinConfiguration(Vec<i8>);

impl SpinConfiguration {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::Domain(format!("spin value {bad} is not +1 or -1")));
        }
        Ok(Self(values))
    }

    pub fn all_up(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn all_down(n: usize) -> Self {
        Self(vec![-1; n])
    }

    /// Site `i` is `-1` iff bit `i` of `bits` is set.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        Self((0..n).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    /// `tau_X`, the product over the sites of `X`.
    pub fn product(&self, sites: &[usize]) -> f64 {
        sites.iter().fold(1.0, |acc, &i| acc * f64::from(self.0[i]))
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|v| -v).collect())
    }
}

/// `sigma_X^w` as a signed permutation: one nonzero entry per column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliString {
    n_sites: usize,
    mask: u64,
    axis: Axis,
}

impl PauliString {
    pub fn new(n_sites: usize, sites: &[usize], axis: Axis) -> Result<Self> {
        check_sites(n_sites)?;
        let mut mask = 0u64;
        for &i in sites {
            if i >= n_sites {
                return Err(Error::SiteOutOfRange { index: i, n_sites });
            }
            mask |= 1 << (n_sites - 1 - i);
        }
        Ok(Self {
            n_sites,
            mask,
            axis,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    /// Image of basis state `b`: `sigma |b> = phase |b'>`.
    #[inline]
    pub fn apply(&self, b: usize) -> (usize, Complex64) {
        let b64 = b as u64;
        let sign = if (b64 & self.mask).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        match self.axis {
            Axis::X => ((b64 ^ self.mask) as usize, Complex64::new(1.0, 0.0)),
            Axis::Z => (b, Complex64::new(sign, 0.0)),
            Axis::Y => {
                // sigma^y |0> = i |1>, sigma^y |1> = -i |0>
                let phase = match self.mask.count_ones() % 4 {
                    0 => Complex64::new(sign, 0.0),
                    1 => Complex64::new(0.0, sign),
                    2 => Complex64::new(-sign, 0.0),
                    _ => Complex64::new(0.0, -sign),
                };
                ((b64 ^ self.mask) as usize, phase)
            }
        }
    }

    /// Adds `coeff * sigma` into a dense matrix.
    pub fn accumulate_into(&self, coeff: f64, target: &mut DMatrix<Complex64>) {
        for b in 0..target.ncols() {
            let (row, phase) = self.apply(b);
            target[(row, b)] += phase * coeff;
        }
    }

    pub fn to_dense(&self) -> DenseOperator {
        let dim = 1usize << self.n_sites;
        let mut m = DMatrix::zeros(dim, dim);
        self.accumulate_into(1.0, &mut m);
        DenseOperator {
            matrix: m,
            hermitian: true,
        }
    }
}

fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites > QUANTUM_SITE_CAP {
        return Err(Error::Capacity {
            what: "quantum site count",
            value: n_sites,
            cap: QUANTUM_SITE_CAP,
        });
    }
    Ok(())
}

/// A dense `2^N x 2^N` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<Complex64>,
    hermitian: bool,
}

impl DenseOperator {
    /// Wraps a square power-of-two matrix. With `hermitian = true` the
    /// matrix must be Hermitian to `1e-12`.
    pub fn from_matrix(matrix: DMatrix<Complex64>, hermitian: bool) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: matrix.ncols(),
            });
        }
        if !dim.is_power_of_two() {
            return Err(Error::Domain(format!("dimension {dim} is not a power of two")));
        }
        let op = Self { matrix, hermitian };
        if hermitian {
            let defect = op.hermiticity_defect();
            if defect >= HERMITIAN_TOL {
                return Err(Error::NotHermitian(defect));
            }
        }
        Ok(op)
    }

    pub fn identity(n_sites: usize) -> Self {
        let dim = 1usize << n_sites;
        Self {
            matrix: DMatrix::identity(dim, dim),
            hermitian: true,
        }
    }

    pub fn zeros(n_sites: usize) -> Self {
        let dim = 1usize << n_sites;
        Self {
            matrix: DMatrix::zeros(dim, dim),
            hermitian: true,
        }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_sites(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_dims(rhs)?;
        Ok(Self {
            matrix: &self.matrix * &rhs.matrix,
            hermitian: false,
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_dims(rhs)?;
        Ok(Self {
            matrix: &self.matrix + &rhs.matrix,
            hermitian: self.hermitian && rhs.hermitian,
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.check_dims(rhs)?;
        Ok(Self {
            matrix: &self.matrix - &rhs.matrix,
            hermitian: self.hermitian && rhs.hermitian,
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            matrix: &self.matrix * s,
            hermitian: self.hermitian && s.im == 0.0,
        }
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        self.check_dims(rhs)?;
        Ok(Self {
            matrix: &self.matrix * &rhs.matrix - &rhs.matrix * &self.matrix,
            hermitian: false,
        })
    }

    /// `U A U^dagger`.
    pub fn conjugate_by(&self, unitary: &Self) -> Result<Self> {
        self.check_dims(unitary)?;
        Ok(Self {
            matrix: &unitary.matrix * &self.matrix * unitary.matrix.adjoint(),
            hermitian: self.hermitian,
        })
    }

    /// Max-norm distance to another operator.
    pub fn distance(&self, rhs: &Self) -> Result<f64> {
        self.check_dims(rhs)?;
        Ok((&self.matrix - &rhs.matrix)
            .iter()
            .fold(0.0, |m, z| m.max(z.norm())))
    }

    pub(crate) fn check_dims(&self, rhs: &Self) -> Result<()> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: rhs.dim(),
            });
        }
        Ok(())
    }
}

pub fn pauli_site(n_sites: usize, site: usize, axis: Axis) -> Result<DenseOperator> {
    Ok(PauliString::new(n_sites, &[site], axis)?.to_dense())
}

/// `sigma_X^w`; the empty set gives the identity.
pub fn pauli_product(n_sites: usize, sites: &[usize], axis: Axis) -> Result<DenseOperator> {
    Ok(PauliString::new(n_sites, sites, axis)?.to_dense())
}

/// `U_u(tau) = prod_j (sigma_j^u)^{(1 - tau_j)/2}`.
pub fn gauge_unitary(n_sites: usize, axis: Axis, tau: &SpinConfiguration) -> Result<DenseOperator> {
    if tau.len() != n_sites {
        return Err(Error::LengthMismatch {
            expected: n_sites,
            got: tau.len(),
        });
    }
    let flipped: Vec<usize> = (0..n_sites).filter(|&j| tau.values()[j] == -1).collect();
    pauli_product(n_sites, &flipped, axis)
}

/// `U_w = sigma_Lambda^w`.
pub fn global_flip(n_sites: usize, axis: Axis) -> Result<DenseOperator> {
    let all: Vec<usize> = (0..n_sites).collect();
    pauli_product(n_sites, &all, axis)
}

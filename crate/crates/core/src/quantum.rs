//! Hamiltonian assembly and thermal quantities from a dense spectral
//! decomposition.
//!
//! Every thermal quantity is evaluated in the eigenbasis with Boltzmann
//! weights taken relative to the ground energy, so `log Z` and the Duhamel
//! kernel stay finite for large `beta`.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::disorder::DisorderSample;
use crate::error::{Error, Result};
use crate::lattice::{BondFamily, QUANTUM_SITE_CAP};
use crate::operators::{global_flip, Axis, DenseOperator, PauliString};

/// Relative tolerance for reconstruction and unitarity of a spectrum.
pub const SPECTRAL_TOL: f64 = 1e-10;

/// Relative gap below which two levels count as degenerate in the Duhamel
/// kernel.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Imaginary parts of real-valued thermal quantities must stay below this.
pub const IMAG_TOL: f64 = 1e-10;

/// `H = -sum_p sum_{X in B_p} sum_w J^w_{X,p} sigma^w_X`.
pub fn build_hamiltonian(
    n_sites: usize,
    families: &[BondFamily],
    sample: &DisorderSample,
) -> Result<DenseOperator> {
    if n_sites > QUANTUM_SITE_CAP {
        return Err(Error::Capacity {
            what: "quantum site count",
            value: n_sites,
            cap: QUANTUM_SITE_CAP,
        });
    }
    if families.len() != sample.families.len() {
        return Err(Error::LengthMismatch {
            expected: families.len(),
            got: sample.families.len(),
        });
    }
    let dim = 1usize << n_sites;
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for (fam, coup) in families.iter().zip(&sample.families) {
        if fam.len() != coup.values.len() {
            return Err(Error::LengthMismatch {
                expected: fam.len(),
                got: coup.values.len(),
            });
        }
        for (bond, j) in fam.bonds().iter().zip(&coup.values) {
            for axis in Axis::ALL {
                if j[axis] != 0.0 {
                    PauliString::new(n_sites, bond, axis)?.accumulate_into(-j[axis], &mut h);
                }
            }
        }
    }
    DenseOperator::from_matrix(h, true)
}

/// Eigenvalues in ascending order with the matching unitary of columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    energies: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

impl Spectrum {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn range(&self) -> f64 {
        self.energies[self.dim() - 1] - self.energies[0]
    }

    /// `V^dagger A V`.
    pub fn to_eigenbasis(&self, op: &DenseOperator) -> Result<EigenOperator> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: op.dim(),
            });
        }
        Ok(EigenOperator(self.vectors.adjoint() * (op.matrix() * &self.vectors)))
    }

    /// `V^dagger sigma V` using the signed-permutation structure of `sigma`.
    pub fn pauli_to_eigenbasis(&self, pauli: &PauliString) -> Result<EigenOperator> {
        let dim = self.dim();
        if 1usize << pauli.n_sites() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: 1 << pauli.n_sites(),
            });
        }
        let mut applied = DMatrix::<Complex64>::zeros(dim, dim);
        for b in 0..dim {
            let (row, phase) = pauli.apply(b);
            for col in 0..dim {
                applied[(row, col)] += phase * self.vectors[(b, col)];
            }
        }
        Ok(EigenOperator(self.vectors.adjoint() * applied))
    }

    /// Diagonal of `V^dagger sigma V` in `O(dim^2)`.
    pub fn pauli_diagonal(&self, pauli: &PauliString) -> Vec<Complex64> {
        let dim = self.dim();
        (0..dim)
            .map(|n| {
                let col = self.vectors.column(n);
                (0..dim).fold(Complex64::new(0.0, 0.0), |acc, b| {
                    let (row, phase) = pauli.apply(b);
                    acc + col[row].conj() * phase * col[b]
                })
            })
            .collect()
    }
}

/// An operator expressed in the eigenbasis of some `Spectrum`.
#[derive(Debug, Clone)]
pub struct EigenOperator(pub DMatrix<Complex64>);

impl EigenOperator {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }
}

pub fn spectral_decompose(h: &DenseOperator) -> Result<Spectrum> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian(h.hermiticity_defect()));
    }
    let m = h.matrix();
    let dim = m.nrows();
    let diagonal = (0..dim).all(|j| (0..dim).all(|i| i == j || m[(i, j)] == Complex64::new(0.0, 0.0)));
    let (energies, vectors) = if diagonal {
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| m[(a, a)].re.total_cmp(&m[(b, b)].re));
        let mut v = DMatrix::zeros(dim, dim);
        for (col, &row) in order.iter().enumerate() {
            v[(row, col)] = Complex64::new(1.0, 0.0);
        }
        (order.iter().map(|&k| m[(k, k)].re).collect(), v)
    } else {
        let eig = m.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut v = DMatrix::zeros(dim, dim);
        for (col, &k) in order.iter().enumerate() {
            v.set_column(col, &eig.eigenvectors.column(k));
        }
        (order.iter().map(|&k| eig.eigenvalues[k]).collect::<Vec<f64>>(), v)
    };
    let spectrum = Spectrum { energies, vectors };
    if !diagonal {
        check_spectrum(h, &spectrum)?;
    }
    Ok(spectrum)
}

fn check_spectrum(h: &DenseOperator, s: &Spectrum) -> Result<()> {
    let dim = s.dim();
    let scale = h.max_norm().max(1.0);
    let mut scaled = s.vectors.clone();
    for (col, &e) in s.energies.iter().enumerate() {
        scaled.column_mut(col).scale_mut(e);
    }
    let recon = &scaled * s.vectors.adjoint() - h.matrix();
    let recon_err = recon.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if recon_err >= SPECTRAL_TOL * scale {
        return Err(Error::Spectral(format!(
            "reconstruction residual {recon_err:e} exceeds {:e}",
            SPECTRAL_TOL * scale
        )));
    }
    let gram = s.vectors.adjoint() * &s.vectors - DMatrix::<Complex64>::identity(dim, dim);
    let unit_err = gram.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if unit_err >= SPECTRAL_TOL {
        return Err(Error::Spectral(format!("unitarity residual {unit_err:e}")));
    }
    Ok(())
}

/// Gibbs state `e^{-beta H} / Z` held through its spectrum.
#[derive(Debug)]
pub struct ThermalState {
    spectrum: Spectrum,
    beta: f64,
    log_z: f64,
    /// Normalized Boltzmann probabilities.
    probs: Vec<f64>,
    /// `sum_n e^{-beta (E_n - E_0)}`.
    z_shifted: f64,
    kernel: OnceLock<DMatrix<f64>>,
}

impl ThermalState {
    pub fn new(spectrum: Spectrum, beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::Domain(format!("inverse temperature must be >= 0, got {beta}")));
        }
        let e0 = spectrum.ground_energy();
        let shifted: Vec<f64> = spectrum
            .energies
            .iter()
            .map(|&e| (-beta * (e - e0)).exp())
            .collect();
        let z_shifted: f64 = shifted.iter().sum();
        let log_z = z_shifted.ln() - beta * e0;
        let probs = shifted.iter().map(|w| w / z_shifted).collect();
        Ok(Self {
            spectrum,
            beta,
            log_z,
            probs,
            z_shifted,
            kernel: OnceLock::new(),
        })
    }

    /// Builds, diagonalizes and thermalizes in one go.
    pub fn from_couplings(
        n_sites: usize,
        families: &[BondFamily],
        sample: &DisorderSample,
        beta: f64,
    ) -> Result<Self> {
        let h = build_hamiltonian(n_sites, families, sample)?;
        Self::new(spectral_decompose(&h)?, beta)
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn log_partition(&self) -> f64 {
        self.log_z
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_sites(&self) -> usize {
        self.spectrum.dim().trailing_zeros() as usize
    }

    /// `psi_L = log Z / |Lambda|`.
    pub fn free_energy_density(&self, volume: usize) -> f64 {
        self.log_z / volume as f64
    }

    pub fn expectation_complex(&self, op: &EigenOperator) -> Complex64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, &p)| op.0[(n, n)] * p)
            .sum()
    }

    pub fn expectation_eigen(&self, op: &EigenOperator) -> Result<f64> {
        real_part(self.expectation_complex(op))
    }

    /// `<A> = Tr A e^{-beta H} / Z` for Hermitian `A`.
    pub fn gibbs_expectation(&self, op: &DenseOperator) -> Result<f64> {
        self.expectation_eigen(&self.spectrum.to_eigenbasis(op)?)
    }

    pub fn pauli_expectation(&self, pauli: &PauliString) -> Result<f64> {
        let diag = self.spectrum.pauli_diagonal(pauli);
        real_part(
            diag.iter()
                .zip(&self.probs)
                .map(|(d, &p)| d * p)
                .sum::<Complex64>(),
        )
    }

    /// `<o^w> = (1/|Lambda|) sum_i <sigma_i^w>`.
    pub fn order_expectation(&self, axis: Axis) -> Result<f64> {
        let n = self.n_sites();
        let mut total = 0.0;
        for i in 0..n {
            total += self.pauli_expectation(&PauliString::new(n, &[i], axis)?)?;
        }
        Ok(total / n as f64)
    }

    /// Normalized kernel `phi(E_m, E_n) / Z`.
    fn kernel(&self) -> &DMatrix<f64> {
        self.kernel.get_or_init(|| {
            let e = &self.spectrum.energies;
            let dim = e.len();
            let e0 = e[0];
            let z_shifted = self.z_shifted;
            let threshold = DEGENERACY_TOL * self.spectrum.range().max(1.0);
            DMatrix::from_fn(dim, dim, |m, n| {
                let gap = (e[m] - e[n]).abs();
                let phi = if gap < threshold {
                    (-self.beta * (0.5 * (e[m] + e[n]) - e0)).exp()
                } else {
                    let low = e[m].min(e[n]) - e0;
                    let x = self.beta * gap;
                    if x == 0.0 {
                        1.0
                    } else {
                        (-self.beta * low).exp() * (-(-x).exp_m1() / x)
                    }
                };
                phi / z_shifted
            })
        })
    }

    pub fn duhamel_complex(&self, a: &EigenOperator, b: &EigenOperator) -> Complex64 {
        let k = self.kernel();
        let dim = k.nrows();
        let mut acc = Complex64::new(0.0, 0.0);
        for n in 0..dim {
            for m in 0..dim {
                acc += a.0[(m, n)] * b.0[(n, m)] * k[(m, n)];
            }
        }
        acc
    }

    pub fn duhamel_eigen(&self, a: &EigenOperator, b: &EigenOperator) -> Result<f64> {
        real_part(self.duhamel_complex(a, b))
    }

    /// `(A, B) = int_0^1 <e^{t beta H} A e^{-t beta H} B> dt`.
    pub fn duhamel(&self, a: &DenseOperator, b: &DenseOperator) -> Result<f64> {
        let a = self.spectrum.to_eigenbasis(a)?;
        let b = self.spectrum.to_eigenbasis(b)?;
        self.duhamel_eigen(&a, &b)
    }

    pub fn truncated_duhamel_eigen(&self, a: &EigenOperator, b: &EigenOperator) -> Result<f64> {
        Ok(self.duhamel_eigen(a, b)? - self.expectation_eigen(a)? * self.expectation_eigen(b)?)
    }

    /// `(A; B) = (A, B) - <A><B>`.
    pub fn truncated_duhamel(&self, a: &DenseOperator, b: &DenseOperator) -> Result<f64> {
        let a = self.spectrum.to_eigenbasis(a)?;
        let b = self.spectrum.to_eigenbasis(b)?;
        self.truncated_duhamel_eigen(&a, &b)
    }
}

fn real_part(z: Complex64) -> Result<f64> {
    if z.im.abs() > IMAG_TOL * z.re.abs().max(1.0) {
        return Err(Error::Domain(format!(
            "expected a real thermal quantity, imaginary part {:e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// `|d<f>/d mu_1^w - beta |Lambda| (f; o^w)|`, with the derivative taken by
/// central differences shifting every p = 1 coupling on axis `w` by `+-h`.
pub fn derivative_identity_residual(
    n_sites: usize,
    families: &[BondFamily],
    sample: &DisorderSample,
    beta: f64,
    f: &DenseOperator,
    axis: Axis,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {h}")));
    }
    let field = families
        .iter()
        .position(|fam| fam.p() == 1)
        .ok_or_else(|| Error::InvalidParams("derivative identity needs a p = 1 family".into()))?;
    let shifted = |delta: f64| -> Result<f64> {
        let mut s = sample.clone();
        for j in &mut s.families[field].values {
            j[axis] += delta;
        }
        ThermalState::from_couplings(n_sites, families, &s, beta)?.gibbs_expectation(f)
    };
    let derivative = (shifted(h)? - shifted(-h)?) / (2.0 * h);

    let state = ThermalState::from_couplings(n_sites, families, sample, beta)?;
    let f_eig = state.spectrum.to_eigenbasis(f)?;
    let mut order = DMatrix::<Complex64>::zeros(state.spectrum.dim(), state.spectrum.dim());
    for i in 0..n_sites {
        order += state
            .spectrum
            .pauli_to_eigenbasis(&PauliString::new(n_sites, &[i], axis)?)?
            .0;
    }
    let order = EigenOperator(order / Complex64::new(n_sites as f64, 0.0));
    let response = beta * n_sites as f64 * state.truncated_duhamel_eigen(&f_eig, &order)?;
    Ok((derivative - response).abs())
}

/// `max |[H, U_w]|`.
pub fn z2_commutator_norm(h: &DenseOperator, axis: Axis) -> Result<f64> {
    let flip = global_flip(h.n_sites(), axis)?;
    Ok(h.commutator(&flip)?.max_norm())
}

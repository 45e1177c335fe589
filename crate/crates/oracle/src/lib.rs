//! Reference implementations that share no code with `xyzglass-core`.
//!
//! Operators are built from Kronecker products of 2x2 Pauli matrices,
//! thermal quantities from a Taylor scaling-and-squaring matrix
//! exponential, Duhamel functions by composite Simpson integration in the
//! imaginary-time variable and classical averages by direct summation over
//! `{-1, +1}^N`. Everything here is deliberately slow and simple.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 2x2 Pauli matrix; axis 0, 1, 2 = x, y, z. Basis order (up, down).
pub fn pauli(axis: usize) -> CMatrix {
    let z = c(0.0, 0.0);
    match axis {
        0 => CMatrix::from_row_slice(2, 2, &[z, c(1.0, 0.0), c(1.0, 0.0), z]),
        1 => CMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        2 => CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), z, z, c(-1.0, 0.0)]),
        _ => panic!("axis must be 0, 1 or 2"),
    }
}

/// `sigma^axis` on each of `sites` (site 0 is the leftmost tensor factor).
pub fn product_operator(n: usize, sites: &[usize], axis: usize) -> CMatrix {
    let id = CMatrix::identity(2, 2);
    let mut out = CMatrix::identity(1, 1);
    for i in 0..n {
        let factor = if sites.contains(&i) { pauli(axis) } else { id.clone() };
        out = out.kronecker(&factor);
    }
    out
}

/// `H = -sum_terms sum_axis J[axis] sigma^axis_X`.
pub fn hamiltonian(n: usize, terms: &[(Vec<usize>, [f64; 3])]) -> CMatrix {
    let dim = 1 << n;
    let mut h = CMatrix::zeros(dim, dim);
    for (sites, j) in terms {
        for (axis, &value) in j.iter().enumerate() {
            if value != 0.0 {
                h -= product_operator(n, sites, axis) * c(value, 0.0);
            }
        }
    }
    h
}

fn one_norm(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `e^{A}` by scaling and squaring with a 30-term Taylor series.
pub fn expm(a: &CMatrix) -> CMatrix {
    let norm = one_norm(a);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a * c(0.5f64.powi(squarings as i32), 0.0);
    let dim = a.nrows();
    let mut term = CMatrix::identity(dim, dim);
    let mut sum = term.clone();
    for k in 1..=30 {
        term = &term * &scaled * c(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// A lower bound on the spectrum (Gershgorin), used to keep exponentials bounded.
fn spectral_floor(h: &CMatrix) -> f64 {
    (0..h.nrows())
        .map(|i| {
            let off: f64 = (0..h.ncols()).filter(|&j| j != i).map(|j| h[(i, j)].norm()).sum();
            h[(i, i)].re - off
        })
        .fold(f64::INFINITY, f64::min)
}

/// `e^{-t (H - floor)}`.
fn boltzmann(h: &CMatrix, t: f64, floor: f64) -> CMatrix {
    let dim = h.nrows();
    let shifted = h - CMatrix::identity(dim, dim) * c(floor, 0.0);
    expm(&(shifted * c(-t, 0.0)))
}

/// `log Tr e^{-beta H}`.
pub fn log_partition(h: &CMatrix, beta: f64) -> f64 {
    let floor = spectral_floor(h);
    boltzmann(h, beta, floor).trace().re.ln() - beta * floor
}

/// `Tr(A e^{-beta H}) / Tr e^{-beta H}` (complex in general).
pub fn gibbs_expectation(h: &CMatrix, beta: f64, a: &CMatrix) -> Complex64 {
    let rho = boltzmann(h, beta, spectral_floor(h));
    (a * &rho).trace() / rho.trace()
}

/// `(A, B) = int_0^1 Tr(e^{-(1-t) beta H} A e^{-t beta H} B) / Z dt`,
/// composite Simpson with `intervals` (even) panels.
pub fn duhamel_simpson(h: &CMatrix, beta: f64, a: &CMatrix, b: &CMatrix, intervals: usize) -> Complex64 {
    assert!(intervals >= 2 && intervals % 2 == 0, "need an even number of panels");
    let floor = spectral_floor(h);
    let z = boltzmann(h, beta, floor).trace();
    let step = 1.0 / intervals as f64;
    // e^{-k step beta H} for k = 0..=intervals, built by repeated products
    let unit = boltzmann(h, step * beta, floor);
    let dim = h.nrows();
    let mut powers = vec![CMatrix::identity(dim, dim)];
    for k in 1..=intervals {
        powers.push(&powers[k - 1] * &unit);
    }
    let mut total = c(0.0, 0.0);
    for k in 0..=intervals {
        let weight = if k == 0 || k == intervals {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let value = (&powers[intervals - k] * a * &powers[k] * b).trace();
        total += value * weight;
    }
    total * (step / 3.0) / z
}

/// Classical average of `tau_observable` under weight
/// `exp(sum_terms weight * tau_X)`, summing over all `2^n` configurations.
pub fn classical_average(n: usize, terms: &[(Vec<usize>, f64)], observable: &[usize]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    let configs: Vec<Vec<f64>> = (0..1u64 << n)
        .map(|bits| (0..n).map(|i| if bits >> i & 1 == 1 { -1.0 } else { 1.0 }).collect())
        .collect();
    let log_weights: Vec<f64> = configs
        .iter()
        .map(|tau| {
            terms
                .iter()
                .map(|(sites, w)| w * sites.iter().map(|&i| tau[i]).product::<f64>())
                .sum()
        })
        .collect();
    let max = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for (tau, lw) in configs.iter().zip(&log_weights) {
        let w = (lw - max).exp();
        num += w * observable.iter().map(|&i| tau[i]).product::<f64>();
        den += w;
    }
    num / den
}

/// Probabilists' Gauss-Hermite rule by Golub-Welsch: eigenvalues of the
/// Jacobi matrix are the nodes, squared first eigenvector components the
/// weights (normalized to sum to one).
pub fn gauss_hermite_golub_welsch(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let off = (k as f64).sqrt();
        jacobi[(k - 1, k)] = off;
        jacobi[(k, k - 1)] = off;
    }
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v: DVector<f64> = eig.eigenvectors.column(k).into();
            (eig.eigenvalues[k], v[0] * v[0])
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_two_level() {
        // e^{-beta(-g sigma^x)} = cosh(beta g) + sinh(beta g) sigma^x
        let (beta, g) = (1.7, 0.9);
        let h = pauli(0) * c(-g, 0.0);
        let e = expm(&(h * c(-beta, 0.0)));
        assert!((e[(0, 0)].re - (beta * g).cosh()).abs() < 1e-12);
        assert!((e[(0, 1)].re - (beta * g).sinh()).abs() < 1e-12);
    }

    #[test]
    fn pauli_algebra() {
        let xy = pauli(0) * pauli(1);
        let iz = pauli(2) * c(0.0, 1.0);
        assert!((xy - iz).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn simpson_commuting_case() {
        // commuting A = B = sigma^z: (A, A) = <A^2> = 1
        let h = hamiltonian(1, &[(vec![0], [0.0, 0.0, 0.8])]);
        let a = pauli(2);
        let d = duhamel_simpson(&h, 2.0, &a, &a, 20);
        assert!((d.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classical_field() {
        let m = classical_average(1, &[(vec![0], 0.6)], &[0]);
        assert!((m - 0.6f64.tanh()).abs() < 1e-14);
    }

    #[test]
    fn golub_welsch_moments() {
        let (x, w) = gauss_hermite_golub_welsch(6);
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        assert!((m2 - 1.0).abs() < 1e-12 && (m4 - 3.0).abs() < 1e-12);
    }
}

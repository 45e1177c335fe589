//! Operator algebra, change of variables and reference-implementation
//! cross-checks on randomized small instances.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use xyzglass_core::disorder::{gauge_transform_couplings, DisorderSample, FamilyCouplings};
use xyzglass_core::lattice::{generate_families, BondFamily};
use xyzglass_core::operators::{gauge_unitary, pauli_product, pauli_site};
use xyzglass_core::phase_region::{
    beta2_from_ratios, sample_region, write_region_csv, Membership, RatioGrid, RegionQuery,
};
use xyzglass_core::quadrature::gauss_hermite;
use xyzglass_core::quantum::{
    build_hamiltonian, derivative_identity_residual, z2_commutator_norm, ThermalState,
};
use xyzglass_core::{
    nishimori_transform, sample_disorder, Axis, AxisTriple, Boundary, CouplingParams,
    InteractionShape, Lattice, PSpinParams, PauliString, SpinConfiguration,
};
use xyzglass_oracle as oracle;

use crate::error::CliError;
use crate::report::CheckRecord;

type Result<T> = std::result::Result<T, CliError>;

/// Instance counts and sizes of the suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sizes {
    pub algebra_instances: usize,
    pub coupling_draws: usize,
    pub duhamel_instances: usize,
    pub derivative_instances: usize,
    pub reduction_instances: usize,
    pub z2_instances: usize,
    pub region_points: usize,
    pub grid_count: usize,
}

impl Default for Sizes {
    fn default() -> Self {
        Self {
            algebra_instances: 200,
            coupling_draws: 100_000,
            duhamel_instances: 50,
            derivative_instances: 20,
            reduction_instances: 20,
            z2_instances: 20,
            region_points: 2000,
            grid_count: 50,
        }
    }
}

pub fn run_all(sizes: &Sizes, seed: u64) -> Result<Vec<CheckRecord>> {
    let mut out = vec![
        operator_algebra(sizes.algebra_instances, seed)?,
        hamiltonian_matches_reference(sizes.algebra_instances / 4, seed)?,
        gibbs_matches_reference(sizes.algebra_instances / 10, seed)?,
        change_of_variables(sizes.coupling_draws, seed)?,
        density_covariance(sizes.coupling_draws, seed)?,
        duhamel_matches_simpson(sizes.duhamel_instances, seed)?,
        derivative_identity(sizes.derivative_instances, seed, 1e-4)?,
        ising_reduction(sizes.reduction_instances, seed)?,
    ];
    out.extend(z2_symmetry(sizes.z2_instances, seed)?);
    out.extend(phase_region_properties(sizes.region_points, seed)?);
    out.push(region_grid_export(sizes.grid_count, 1.0)?);
    out.push(gauss_hermite_matches_golub_welsch()?);
    Ok(out)
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn random_axis(rng: &mut ChaCha8Rng) -> Axis {
    Axis::ALL[rng.random_range(0..3)]
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    loop {
        let s: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        if !s.is_empty() {
            return s;
        }
    }
}

/// Open or periodic chain with a field and, for `n > 1`, nearest-neighbour bonds.
fn chain(n: usize, boundary: Boundary) -> Result<Vec<BondFamily>> {
    let lat = Lattice::new(1, n)?;
    let mut shapes = vec![InteractionShape::single_site(1)];
    if n > 1 {
        shapes.push(InteractionShape::nearest_neighbor(1, 0));
    }
    Ok(generate_families(&lat, &shapes, boundary)?)
}

fn random_couplings(
    families: &[BondFamily],
    rng: &mut ChaCha8Rng,
    scale: f64,
    axes: &[Axis],
) -> DisorderSample {
    DisorderSample {
        seed: 0,
        sample_index: 0,
        families: families
            .iter()
            .map(|f| FamilyCouplings {
                p: f.p(),
                values: (0..f.len())
                    .map(|_| {
                        let mut j = AxisTriple::splat(0.0);
                        for &a in axes {
                            j[a] = scale * rng.random_range(-1.0..1.0);
                        }
                        j
                    })
                    .collect(),
            })
            .collect(),
    }
}

fn oracle_terms(families: &[BondFamily], sample: &DisorderSample) -> Vec<(Vec<usize>, [f64; 3])> {
    families
        .iter()
        .zip(&sample.families)
        .flat_map(|(f, c)| {
            f.bonds()
                .iter()
                .zip(&c.values)
                .map(|(b, j)| (b.clone(), [j.x, j.y, j.z]))
        })
        .collect()
}

fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Levi-Civita sign and third axis for `a != b`.
fn epsilon(a: Axis, b: Axis) -> (f64, Axis) {
    let c = Axis::third(a, b).expect("distinct axes");
    let cyclic = (b.index() + 3 - a.index()) % 3 == 1;
    (if cyclic { 1.0 } else { -1.0 }, c)
}

/// Commutation relations, `(sigma^w_X)^2 = 1`, the gauge conjugation rule and
/// gauge invariance of the Hamiltonian.
pub fn operator_algebra(instances: usize, seed: u64) -> Result<CheckRecord> {
    let mut rng = rng(seed, 1);
    let (mut commutator, mut square, mut conjugation, mut invariance) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..instances {
        let n = rng.random_range(1..=4);
        let (k, j) = (rng.random_range(0..n), rng.random_range(0..n));
        let (a, b) = (random_axis(&mut rng), random_axis(&mut rng));
        let sa = pauli_site(n, k, a)?;
        let sb = pauli_site(n, j, b)?;
        let comm = sa.commutator(&sb)?;
        let expected = if k == j && a != b {
            let (sign, c) = epsilon(a, b);
            pauli_site(n, j, c)?.matrix() * Complex64::new(0.0, 2.0 * sign)
        } else {
            DMatrix::zeros(1 << n, 1 << n)
        };
        commutator = commutator.max(max_diff(comm.matrix(), &expected));

        let x = random_subset(&mut rng, n);
        let w = random_axis(&mut rng);
        let sx = pauli_product(n, &x, w)?;
        square = square.max(max_diff(sx.mul(&sx)?.matrix(), &DMatrix::identity(1 << n, 1 << n)));

        let u = random_axis(&mut rng);
        let tau = SpinConfiguration::from_bits(n, rng.random_range(0..1u64 << n));
        let gauge = gauge_unitary(n, u, &tau)?;
        let sign = if w == u { 1.0 } else { tau.product(&x) };
        let rotated = sx.conjugate_by(&gauge)?;
        conjugation = conjugation.max(max_diff(rotated.matrix(), &(sx.matrix() * Complex64::new(sign, 0.0))));

        let boundary = if rng.random_bool(0.5) { Boundary::Open } else { Boundary::Periodic };
        let families = chain(n, boundary)?;
        let sample = random_couplings(&families, &mut rng, 1.5, &Axis::ALL);
        let h = build_hamiltonian(n, &families, &sample)?;
        let moved = gauge_transform_couplings(&sample, &families, &tau, u)?;
        let h_moved = build_hamiltonian(n, &families, &moved)?;
        invariance = invariance.max(h.conjugate_by(&gauge)?.distance(&h_moved)?);
    }
    let worst = commutator.max(square).max(conjugation).max(invariance);
    Ok(CheckRecord::deviation("operator_algebra", "exact", worst, 1e-12)
        .with_inputs(json!({ "instances": instances, "max_sites": 4 }))
        .with_samples(Some(seed), Some(instances as u64))
        .with_details(json!({
            "commutation": commutator,
            "square": square,
            "gauge_conjugation": conjugation,
            "hamiltonian_gauge_invariance": invariance,
        })))
}

/// Hamiltonian and Pauli products against Kronecker-product construction.
pub fn hamiltonian_matches_reference(instances: usize, seed: u64) -> Result<CheckRecord> {
    let mut rng = rng(seed, 2);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let n = rng.random_range(1..=4);
        let boundary = if rng.random_bool(0.5) { Boundary::Open } else { Boundary::Periodic };
        let families = chain(n, boundary)?;
        let sample = random_couplings(&families, &mut rng, 1.5, &Axis::ALL);
        let h = build_hamiltonian(n, &families, &sample)?;
        worst = worst.max(max_diff(h.matrix(), &oracle::hamiltonian(n, &oracle_terms(&families, &sample))));
        let x = random_subset(&mut rng, n);
        let w = random_axis(&mut rng);
        let ours = pauli_product(n, &x, w)?;
        worst = worst.max(max_diff(ours.matrix(), &oracle::product_operator(n, &x, w.index())));
    }
    Ok(CheckRecord::deviation("hamiltonian_vs_kronecker", "oracle", worst, 1e-12)
        .with_inputs(json!({ "instances": instances }))
        .with_samples(Some(seed), Some(instances as u64)))
}

/// Partition function and Gibbs expectations against a matrix exponential.
pub fn gibbs_matches_reference(instances: usize, seed: u64) -> Result<CheckRecord> {
    let mut rng = rng(seed, 3);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let n = rng.random_range(1..=3);
        let families = chain(n, Boundary::Open)?;
        let sample = random_couplings(&families, &mut rng, 1.0, &Axis::ALL);
        let beta = rng.random_range(0.0..3.0);
        let state = ThermalState::from_couplings(n, &families, &sample, beta)?;
        let h = oracle::hamiltonian(n, &oracle_terms(&families, &sample));
        worst = worst.max((state.log_partition() - oracle::log_partition(&h, beta)).abs());
        let x = random_subset(&mut rng, n);
        let op = pauli_product(n, &x, random_axis(&mut rng))?;
        let reference = oracle::gibbs_expectation(&h, beta, op.matrix());
        worst = worst.max((state.gibbs_expectation(&op)? - reference.re).abs());
        worst = worst.max(reference.im.abs());
    }
    Ok(CheckRecord::deviation("gibbs_vs_matrix_exponential", "oracle", worst, 1e-10)
        .with_inputs(json!({ "instances": instances }))
        .with_samples(Some(seed), Some(instances as u64)))
}

fn random_pair_params(rng: &mut ChaCha8Rng, u: Axis) -> Result<CouplingParams> {
    let mut mean = AxisTriple::splat(0.0);
    let mut std = AxisTriple::splat(0.0);
    for a in u.others() {
        mean[a] = rng.random_range(-2.0..2.0);
        std[a] = rng.random_range(0.1..3.0);
    }
    mean[u] = rng.random_range(-1.0..1.0);
    std[u] = rng.random_range(0.0..1.0);
    Ok(CouplingParams::new(vec![PSpinParams::new(1, mean, std)])?)
}

fn standardized(j: f64, mu: f64, delta: f64) -> f64 {
    (j - mu) / delta
}

/// `(K - beta)^2 + G^2 = ((J^v - mu^v)/Delta^v)^2 + ((J^w - mu^w)/Delta^w)^2`
/// on random parameters and Gaussian draws.
pub fn change_of_variables(draws: usize, seed: u64) -> Result<CheckRecord> {
    let mut rng = rng(seed, 4);
    let families = chain(1, Boundary::Open)?;
    let mut worst = 0.0f64;
    for k in 0..draws {
        let u = random_axis(&mut rng);
        let params = random_pair_params(&mut rng, u)?;
        let sample = sample_disorder(&params, &families, seed, k as u64)?;
        let nd = nishimori_transform(&sample, &params, u)?;
        let f = &nd.families[0];
        let t = &params.terms()[0];
        let j = sample.families[0].values[0];
        let [v, w] = u.others();
        let rhs = standardized(j[v], t.mean[v], t.std[v]).powi(2)
            + standardized(j[w], t.mean[w], t.std[w]).powi(2);
        let lhs = (f.k[0] - f.beta).powi(2) + f.g[0].powi(2);
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(CheckRecord::deviation("change_of_variables", "exact", worst, 1e-12)
        .with_inputs(json!({ "draws": draws }))
        .with_samples(Some(seed), Some(draws as u64)))
}

fn log_density(j: f64, mu: f64, delta: f64) -> f64 {
    let z = (j - mu) / delta;
    -0.5 * z * z - delta.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

/// `P(tau J^v) P(tau J^w) = P(J^v) P(J^w) exp(beta K (tau - 1))`, compared
/// through logarithms: far in the tails the densities themselves are
/// subnormal and carry no relative precision.
pub fn density_covariance(draws: usize, seed: u64) -> Result<CheckRecord> {
    let mut rng = rng(seed, 5);
    let families = chain(1, Boundary::Open)?;
    let mut worst = 0.0f64;
    for k in 0..draws {
        let u = random_axis(&mut rng);
        let params = random_pair_params(&mut rng, u)?;
        let sample = sample_disorder(&params, &families, seed ^ 0x5eed, k as u64)?;
        let tau = if rng.random_bool(0.5) { -1.0 } else { 1.0 };
        let nd = nishimori_transform(&sample, &params, u)?;
        let f = &nd.families[0];
        let t = &params.terms()[0];
        let j = sample.families[0].values[0];
        let [v, w] = u.others();
        let lhs = log_density(tau * j[v], t.mean[v], t.std[v]) + log_density(tau * j[w], t.mean[w], t.std[w]);
        let rhs = log_density(j[v], t.mean[v], t.std[v])
            + log_density(j[w], t.mean[w], t.std[w])
            + f.beta * f.k[0] * (tau - 1.0);
        worst = worst.max((lhs - rhs).exp_m1().abs());
    }
    Ok(CheckRecord::deviation("density_covariance", "exact", worst, 1e-10)
        .with_inputs(json!({ "draws": draws, "relative": true }))
        .with_samples(Some(seed), Some(draws as u64)))
}

/// Spectral Duhamel function against Simpson integration (200 panels).
pub fn duhamel_matches_simpson(instances: usize, seed: u64) -> Result<CheckRecord> {
    let mut rng = rng(seed, 6);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let n = rng.random_range(1..=3);
        let families = chain(n, Boundary::Open)?;
        let sample = random_couplings(&families, &mut rng, 1.0, &Axis::ALL);
        let beta = rng.random_range(0.1..2.0);
        let state = ThermalState::from_couplings(n, &families, &sample, beta)?;
        let h = oracle::hamiltonian(n, &oracle_terms(&families, &sample));
        let a = pauli_product(n, &random_subset(&mut rng, n), random_axis(&mut rng))?;
        let b = pauli_product(n, &random_subset(&mut rng, n), random_axis(&mut rng))?;
        let reference = oracle::duhamel_simpson(&h, beta, a.matrix(), b.matrix(), 200);
        let ours = state.duhamel_complex(
            &state.spectrum().to_eigenbasis(&a)?,
            &state.spectrum().to_eigenbasis(&b)?,
        );
        worst = worst.max((ours - reference).norm());
    }
    Ok(CheckRecord::deviation("duhamel_vs_simpson", "oracle", worst, 1e-7)
        .with_inputs(json!({ "instances": instances, "panels": 200, "max_sites": 3 }))
        .with_samples(Some(seed), Some(instances as u64)))
}

/// Central difference in the uniform field against `beta |Lambda|` times the
/// truncated Duhamel function.
pub fn derivative_identity(instances: usize, seed: u64, h: f64) -> Result<CheckRecord> {
    let mut rng = rng(seed, 7);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let n = rng.random_range(1..=3);
        let families = chain(n, Boundary::Open)?;
        let sample = random_couplings(&families, &mut rng, 1.0, &Axis::ALL);
        let beta = rng.random_range(0.2..2.0);
        let f = pauli_product(n, &random_subset(&mut rng, n), random_axis(&mut rng))?;
        let axis = random_axis(&mut rng);
        let r = derivative_identity_residual(n, &families, &sample, beta, &f, axis, h)?;
        worst = worst.max(r);
    }
    Ok(CheckRecord::deviation("derivative_identity", "exact", worst, 1e-6)
        .with_inputs(json!({ "instances": instances, "step": h }))
        .with_samples(Some(seed), Some(instances as u64)))
}

/// Couplings on a single axis `w`: quantum expectations of `sigma^w_X` equal
/// brute-force classical averages of `tau_X`.
pub fn ising_reduction(instances: usize, seed: u64) -> Result<CheckRecord> {
    let mut rng = rng(seed, 8);
    let mut worst = 0.0f64;
    let mut sizes = Vec::with_capacity(instances);
    for k in 0..instances {
        let w = Axis::ALL[k % 3];
        // the z basis is diagonal, so larger systems stay cheap there
        let max_n = if w == Axis::Z { 10 } else { 8 };
        let n = rng.random_range(2..=max_n);
        sizes.push(n);
        let boundary = if rng.random_bool(0.5) { Boundary::Open } else { Boundary::Periodic };
        let families = chain(n, boundary)?;
        let sample = random_couplings(&families, &mut rng, 1.2, &[w]);
        let beta = rng.random_range(0.2..2.0);
        let state = ThermalState::from_couplings(n, &families, &sample, beta)?;
        let terms: Vec<(Vec<usize>, f64)> = oracle_terms(&families, &sample)
            .into_iter()
            .map(|(x, j)| (x, beta * j[w.index()]))
            .collect();
        for _ in 0..3 {
            let x = random_subset(&mut rng, n);
            let q = state.pauli_expectation(&PauliString::new(n, &x, w)?)?;
            worst = worst.max((q - oracle::classical_average(n, &terms, &x)).abs());
        }
    }
    Ok(CheckRecord::deviation("ising_reduction", "oracle", worst, 1e-10)
        .with_inputs(json!({ "instances": instances, "sizes": sizes }))
        .with_samples(Some(seed), Some(instances as u64)))
}

/// The global flip about `w` commutes with H exactly when the symmetry
/// condition on the couplings holds.
pub fn z2_symmetry(instances: usize, seed: u64) -> Result<Vec<CheckRecord>> {
    let mut rng = rng(seed, 9);
    let (mut symmetric_worst, mut violating_best) = (0.0f64, f64::INFINITY);
    let mut agree = true;
    for k in 0..instances {
        let w = Axis::ALL[k % 3];
        let n = rng.random_range(2..=4);
        let lattice = Lattice::new(1, n)?;
        let shapes = [InteractionShape::single_site(1), InteractionShape::nearest_neighbor(1, 0)];
        let symmetric = k % 2 == 0;
        let mut field_mean = AxisTriple::splat(0.0);
        let mut field_std = AxisTriple::splat(0.0);
        field_mean[w] = rng.random_range(-1.0..1.0);
        field_std[w] = rng.random_range(0.5..1.5);
        if !symmetric {
            let off = w.others()[rng.random_range(0..2)];
            field_mean[off] = rng.random_range(0.5..1.0);
            field_std[off] = rng.random_range(0.5..1.0);
        }
        let bond = PSpinParams::new(
            2,
            AxisTriple::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            AxisTriple::new(rng.random_range(0.5..1.5), rng.random_range(0.5..1.5), rng.random_range(0.5..1.5)),
        );
        let params = CouplingParams::new(vec![PSpinParams::new(1, field_mean, field_std), bond])?;
        let families = generate_families(&lattice, &shapes, Boundary::Open)?;
        let sample = sample_disorder(&params, &families, seed, k as u64)?;
        let h = build_hamiltonian(n, &families, &sample)?;
        let norm = z2_commutator_norm(&h, w)?;
        agree &= params.z2_symmetric(w) == symmetric;
        if symmetric {
            symmetric_worst = symmetric_worst.max(norm);
        } else {
            violating_best = violating_best.min(norm);
        }
    }
    Ok(vec![
        CheckRecord::deviation("z2_commutator_symmetric", "exact", symmetric_worst, 1e-12)
            .with_inputs(json!({ "instances": instances.div_ceil(2) }))
            .with_samples(Some(seed), None)
            .with_details(json!({ "condition_matches_construction": agree })),
        CheckRecord::new(
            "z2_commutator_violating",
            "exact",
            violating_best,
            1e-3,
            violating_best > 1e-3 && agree,
        )
        .with_inputs(json!({ "instances": instances / 2, "assertion": "value > tolerance" }))
        .with_samples(Some(seed), None),
    ])
}

fn permute(r: &AxisTriple<f64>, perm: [usize; 3]) -> AxisTriple<f64> {
    let v = [r.x, r.y, r.z];
    AxisTriple::new(v[perm[0]], v[perm[1]], v[perm[2]])
}

/// Permutation symmetry, ratio-only dependence, monotone exit along rays and
/// the closed-form membership cases.
pub fn phase_region_properties(points: usize, seed: u64) -> Result<Vec<CheckRecord>> {
    let mut rng = rng(seed, 10);
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let (mut symmetric, mut scaling, mut monotone) = (true, true, true);
    for _ in 0..points {
        let beta_t = rng.random_range(0.3..3.0);
        let mean = AxisTriple::new(
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
        );
        let std = AxisTriple::new(
            rng.random_range(0.2..2.0),
            rng.random_range(0.2..2.0),
            rng.random_range(0.2..2.0),
        );
        let q = RegionQuery::new(std, mean, beta_t)?;
        let m = q.membership();
        let r = q.ratios();
        let flags = [m.in_s.x, m.in_s.y, m.in_s.z];
        for perm in PERMS {
            let pm = Membership::from_ratios(&permute(&r, perm), beta_t);
            symmetric &= [pm.in_s.x, pm.in_s.y, pm.in_s.z] == [flags[perm[0]], flags[perm[1]], flags[perm[2]]];
        }
        let c = rng.random_range(0.1..10.0);
        let scaled = RegionQuery::new(std.map(|s| s * c), mean.map(|m| m * c), beta_t)?;
        scaling &= scaled.membership() == m;

        // a ray from a point in the union, outward along one ratio
        let axis = random_axis(&mut rng);
        let mut base = AxisTriple::new(
            rng.random_range(-0.3..0.3),
            rng.random_range(-0.3..0.3),
            rng.random_range(-0.3..0.3),
        )
        .map(|v| v * beta_t);
        base[axis] = 0.0;
        let direction = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let mut flips = 0;
        let mut prev = Membership::from_ratios(&base, beta_t).in_union;
        for k in 1..=400 {
            let mut p = base;
            p[axis] = direction * 3.0 * beta_t * k as f64 / 400.0;
            let now = Membership::from_ratios(&p, beta_t).in_union;
            flips += (now != prev) as usize;
            prev = now;
        }
        monotone &= Membership::from_ratios(&base, beta_t).in_union && flips == 1;
    }

    let bt = 1.3;
    let origin = Membership::from_ratios(&AxisTriple::splat(0.0), bt);
    let huge = Membership::from_ratios(&AxisTriple::new(100.0, 0.0, 0.0), bt);
    let boundary = Membership::from_ratios(&AxisTriple::new(0.0, bt, 0.0), bt);
    let three_four_five = beta2_from_ratios(&AxisTriple::new(0.0, 3.0, 4.0), Axis::X);
    let diagonal = beta2_from_ratios(&AxisTriple::splat(0.7), Axis::Y);
    let outside = Membership::from_ratios(&AxisTriple::splat(bt / 2f64.sqrt()), bt);
    let one = Membership::from_ratios(&AxisTriple::new(0.0, 0.8 * bt, 0.8 * bt), bt);
    let closed_form = origin.in_s == AxisTriple::splat(true)
        && origin.in_union
        && huge.in_s == AxisTriple::splat(false)
        && !huge.in_union
        && !boundary.in_s.x
        && !boundary.in_s.z
        && (three_four_five - 5.0).abs() < 1e-15
        && (diagonal - 0.7 * 2f64.sqrt()).abs() < 1e-15
        && !outside.in_union
        && one.in_s == AxisTriple::new(true, false, false)
        && one.in_union;

    let rec = |name: &str, ok: bool| {
        CheckRecord::new(name, "exact", if ok { 0.0 } else { 1.0 }, 0.0, ok)
            .with_inputs(json!({ "points": points }))
            .with_samples(Some(seed), Some(points as u64))
    };
    Ok(vec![
        rec("region_permutation_symmetry", symmetric),
        rec("region_ratio_only", scaling),
        rec("region_monotone_exit", monotone),
        CheckRecord::new("region_closed_form_cases", "exact", if closed_form { 0.0 } else { 1.0 }, 0.0, closed_form),
    ])
}

/// Exports a `count^3` grid to an in-memory CSV and checks its shape.
pub fn region_grid_export(count: usize, beta_t: f64) -> Result<CheckRecord> {
    let grid = RatioGrid::cube(-2.0, 2.0, count);
    let rows = sample_region(&grid, beta_t)?;
    let mut buf = Vec::new();
    write_region_csv(&rows, &mut buf).map_err(|e| CliError::io("<memory>", e))?;
    let lines = buf.iter().filter(|&&b| b == b'\n').count();
    let ok = rows.len() == grid.len() && lines == grid.len() + 1;
    Ok(CheckRecord::new("region_grid_export", "exact", (lines as f64 - 1.0 - grid.len() as f64).abs(), 0.0, ok)
        .with_inputs(json!({ "count_per_axis": count, "beta_t": beta_t }))
        .with_details(json!({ "rows": rows.len(), "in_union": rows.iter().filter(|r| r.membership.in_union).count() })))
}

/// Gauss-Hermite nodes and weights against Golub-Welsch.
pub fn gauss_hermite_matches_golub_welsch() -> Result<CheckRecord> {
    let mut worst = 0.0f64;
    for n in [2, 5, 12, 16, 24] {
        let (x, w) = gauss_hermite(n);
        let (xr, wr) = oracle::gauss_hermite_golub_welsch(n);
        for k in 0..n {
            worst = worst.max((x[k] - xr[k]).abs()).max((w[k] - wr[k]).abs());
        }
    }
    Ok(CheckRecord::deviation("gauss_hermite_vs_golub_welsch", "oracle", worst, 1e-10)
        .with_inputs(json!({ "nodes": [2, 5, 12, 16, 24] })))
}

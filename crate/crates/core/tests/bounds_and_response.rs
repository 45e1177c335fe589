//! Bound chains, linear response, classical reductions and symmetries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xyzglass_core::classical::ClassicalModel;
use xyzglass_core::disorder::{nishimori_transform, CouplingParams, PSpinParams};
use xyzglass_core::identities::{
    a2_nonlinear_susceptibility, disorder_average, finite_size_order_parameters,
    magnetization_bound_check, susceptibility_bound_check, Method, StepKind, Tolerances,
};
use xyzglass_core::operators::pauli_product;
use xyzglass_core::quantum::{build_hamiltonian, derivative_identity_residual, z2_commutator_norm};
use xyzglass_core::reduce::Moments;
use xyzglass_core::{Axis, AxisTriple, Boundary, InteractionShape, Lattice, Model, PauliString};

fn term(p: usize, mean: [f64; 3], std: [f64; 3]) -> PSpinParams {
    PSpinParams::new(
        p,
        AxisTriple::new(mean[0], mean[1], mean[2]),
        AxisTriple::new(std[0], std[1], std[2]),
    )
}

/// Field along `z` only, all bond axes Gaussian.
fn field_chain(n: usize, field: f64) -> Model {
    let params = CouplingParams::new(vec![
        term(1, [0.0, 0.0, field], [0.0, 0.0, 1.0]),
        term(2, [0.3, 0.4, 0.7], [0.8, 0.9, 1.0]),
    ])
    .unwrap();
    Model::chain(n, params).unwrap()
}

fn mc(n_samples: u64, seed: u64) -> Method {
    Method::Mc { n_samples, seed }
}

#[test]
fn magnetization_chain_holds() {
    let tol = Tolerances::default();
    for (n, field, beta) in [(2, 0.8, 1.0), (3, 0.5, 1.5)] {
        let m = field_chain(n, field);
        let r = magnetization_bound_check(&m, beta, Axis::Z, Axis::X, &mc(4000, 5), &tol).unwrap();
        for s in &r.steps {
            assert!(s.holds, "{s:?}");
        }
        assert!(r.passed && !r.under_sampled, "{r:?}");
        // the bound is informative but not saturated
        assert!(r.lhs > 0.05 && r.rhs > r.lhs);
    }
}

#[test]
fn magnetization_chain_quadrature_is_exact_on_equalities() {
    let params = CouplingParams::new(vec![
        term(1, [3.0, 0.0, 0.5], [0.0, 0.0, 1.3]),
        term(2, [2.0, 0.6, 0.9], [0.0, 1.04, 1.43]),
    ])
    .unwrap();
    let m = Model::chain(2, params).unwrap();
    let tol = Tolerances::default();
    let q = Method::Quadrature { nodes_per_dim: 16 };
    let r = magnetization_bound_check(&m, 1.0, Axis::Z, Axis::X, &q, &tol).unwrap();
    assert!(r.passed, "{r:?}");
    for s in r.steps.iter().filter(|s| s.kind == StepKind::Statistical) {
        if s.relation == xyzglass_core::identities::Relation::Equal {
            assert!((s.lhs - s.rhs).abs() < 1e-8, "{s:?}");
        }
    }
}

#[test]
fn magnetization_chain_at_infinite_temperature() {
    let m = field_chain(2, 0.8);
    let r = magnetization_bound_check(&m, 0.0, Axis::Z, Axis::X, &mc(500, 1), &Tolerances::default())
        .unwrap();
    assert!(r.lhs < 1e-15);
    assert!(r.passed);
}

#[test]
fn susceptibility_chain_holds() {
    let tol = Tolerances::default();
    let m = field_chain(3, 0.6);
    for (v, w, u) in [(Axis::Z, Axis::Z, Axis::X), (Axis::X, Axis::Z, Axis::Y)] {
        let r = susceptibility_bound_check(&m, 1.2, v, w, u, &mc(3000, 9), &tol).unwrap();
        for s in &r.steps {
            assert!(s.holds, "{s:?}");
        }
        assert!(r.passed, "{r:?}");
        let max_step = r.steps.iter().find(|s| s.label.starts_with("max_ij")).unwrap();
        assert!(max_step.lhs <= 2.0 && max_step.lhs > 0.0, "{max_step:?}");
    }
}

#[test]
fn susceptibility_small_beta() {
    // chi ~ beta * (sum of infinite-temperature correlations) / N; the bound
    // carries at least 2 beta from the diagonal
    let m = field_chain(2, 0.6);
    let beta = 1e-3;
    let r = susceptibility_bound_check(&m, beta, Axis::Z, Axis::Z, Axis::X, &mc(200, 2), &Tolerances::default())
        .unwrap();
    assert!((r.lhs - beta).abs() < 1e-2 * beta, "{}", r.lhs);
    assert!(r.rhs >= 2.0 * beta);
    assert!(r.passed);
}

#[test]
fn derivative_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let m = field_chain(3, 0.4);
    for k in 0..10 {
        let sample = m.sample(3, k).unwrap();
        let beta = rng.random_range(0.2..2.0);
        let axis = Axis::ALL[k as usize % 3];
        let site = k as usize % 3;
        let f = pauli_product(3, &[site], Axis::ALL[(k as usize + 1) % 3]).unwrap();
        let r = derivative_identity_residual(3, m.families(), &sample, beta, &f, axis, 1e-4)
            .unwrap();
        assert!(r < 1e-6, "instance {k}: {r:e}");
    }
}

#[test]
fn ising_quantum_matches_classical() {
    let params = CouplingParams::new(vec![
        term(1, [0.0, 0.0, 0.3], [0.0, 0.0, 1.0]),
        term(2, [0.0, 0.0, 0.5], [0.0, 0.0, 1.0]),
    ])
    .unwrap();
    for n in [2, 5, 8] {
        let m = Model::chain(n, params.clone()).unwrap();
        let beta = 0.9;
        let s = m.sample(4, n as u64).unwrap();
        let state = m.thermal_state(&s, beta).unwrap();
        let couplings = s
            .families
            .iter()
            .map(|f| f.values.iter().map(|j| j.z).collect())
            .collect();
        let classical =
            ClassicalModel::new(n, m.families(), couplings, vec![beta; m.families().len()]).unwrap();
        let mags = classical.magnetizations();
        let corr = classical.correlation_matrix();
        for i in 0..n {
            let q = state.pauli_expectation(&PauliString::new(n, &[i], Axis::Z).unwrap()).unwrap();
            assert!((q - mags[i]).abs() < 1e-10);
            let j = (i + 1) % n;
            let pair = PauliString::new(n, &[i, j], Axis::Z).unwrap();
            if i != j {
                assert!((state.pauli_expectation(&pair).unwrap() - corr[i][j]).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn classical_nishimori_identity_by_quadrature() {
    let params = CouplingParams::new(vec![
        term(1, [0.0, 0.0, 0.5], [0.0, 0.0, 1.2]),
        term(2, [0.0, 0.3, 0.4], [0.0, 1.0, 1.3]),
    ])
    .unwrap();
    let m = Model::chain(2, params).unwrap();
    let q = Method::Quadrature { nodes_per_dim: 24 };
    let avg = disorder_average(&m, &q, 6, |s| {
        let c = m.nishimori_model(s, Axis::X)?;
        let t = c.magnetizations();
        let p = c.correlation_matrix()[0][1];
        Ok(vec![t[0], t[0] * t[0], t[1], t[1] * t[1], p, p * p])
    })
    .unwrap();
    for k in [0, 2, 4] {
        assert!((avg.mean(k) - avg.mean(k + 1)).abs() < 1e-8, "{k}: {} {}", avg.mean(k), avg.mean(k + 1));
        assert!(avg.mean(k) > 0.05);
    }
}

#[test]
fn nishimori_variables_are_independent_unit_gaussians() {
    let params = CouplingParams::new(vec![term(1, [0.2, 0.7, -0.4], [0.5, 1.3, 0.8])]).unwrap();
    let m = Model::chain(1, params.clone()).unwrap();
    let beta = xyzglass_core::nishimori_beta(&params, 1, Axis::X).unwrap();
    let (mut k, mut g, mut kg) = (Moments::default(), Moments::default(), Moments::default());
    for i in 0..100_000 {
        let d = nishimori_transform(&m.sample(8, i).unwrap(), &params, Axis::X).unwrap();
        let (kk, gg) = (d.families[0].k[0], d.families[0].g[0]);
        k.push(kk);
        g.push(gg);
        kg.push((kk - beta) * gg);
    }
    assert!((k.mean - beta).abs() < 4.0 * k.std_error());
    assert!(g.mean.abs() < 4.0 * g.std_error());
    assert!(kg.mean.abs() < 4.0 * kg.std_error());
    assert!((k.variance() - 1.0).abs() < 0.02 && (g.variance() - 1.0).abs() < 0.02);
}

#[test]
fn pressure_is_convex_in_the_uniform_field() {
    let m = field_chain(3, 0.0);
    let field = m.field_family().unwrap();
    for k in 0..5 {
        let base = m.sample(21, k).unwrap();
        let psi = |h: f64| {
            let mut s = base.clone();
            s.families[field].values.iter_mut().for_each(|j| j.z += h);
            m.thermal_state(&s, 1.3).unwrap().free_energy_density(3)
        };
        let h = 0.05;
        for x in [-0.5, 0.0, 0.4] {
            assert!(psi(x + h) - 2.0 * psi(x) + psi(x - h) > -1e-12);
        }
    }
}

#[test]
fn z2_symmetry_condition() {
    let lat = Lattice::new(1, 3).unwrap();
    let shapes = [InteractionShape::single_site(1), InteractionShape::nearest_neighbor(1, 0)];
    let symmetric = CouplingParams::new(vec![
        term(1, [0.0, 0.0, 0.7], [0.0, 0.0, 1.0]),
        term(2, [0.3, 0.4, 0.7], [0.8, 0.9, 1.0]),
    ])
    .unwrap();
    let m = Model::new(lat.clone(), &shapes, Boundary::Open, symmetric.clone()).unwrap();
    assert!(symmetric.z2_symmetric(Axis::Z));
    assert!(!symmetric.z2_symmetric(Axis::X));
    let s = m.sample(2, 0).unwrap();
    let h = build_hamiltonian(3, m.families(), &s).unwrap();
    assert!(z2_commutator_norm(&h, Axis::Z).unwrap() < 1e-12);
    assert!(z2_commutator_norm(&h, Axis::X).unwrap() > 1e-3);
}

#[test]
fn symmetric_even_model_has_zero_magnetization() {
    let params = CouplingParams::new(vec![term(2, [0.3, 0.4, 0.7], [0.8, 0.9, 1.0])]).unwrap();
    let m = Model::chain(4, params).unwrap();
    let op = finite_size_order_parameters(&m, 1.4, &mc(50, 3)).unwrap();
    for a in Axis::ALL {
        assert!(op.magnetization[a].mean.abs() < 1e-12);
        assert!(op.overlap[a].mean >= op.magnetization[a].mean.powi(2));
    }
    let op = finite_size_order_parameters(&field_chain(3, 0.7), 1.4, &mc(200, 3)).unwrap();
    assert!(op.magnetization.z.mean > 0.05);
    for a in Axis::ALL {
        assert!(op.overlap[a].mean >= op.magnetization[a].mean.powi(2));
    }
}

#[test]
fn ferromagnet_nonlinear_susceptibility_is_non_positive() {
    let params = CouplingParams::new(vec![
        term(1, [0.0; 3], [0.0; 3]),
        term(2, [0.0, 0.0, 1.0], [0.0; 3]),
    ])
    .unwrap();
    let m = Model::chain(4, params).unwrap();
    let tol = Tolerances::default();
    for beta in [0.3, 0.8, 1.5] {
        let r = a2_nonlinear_susceptibility(&m, beta, Axis::Z, Axis::Z, 0.02, &mc(2, 0), &tol)
            .unwrap();
        assert!(r.third_difference.mean <= 1e-8, "{r:?}");
        assert!(r.third_difference.mean < -1e-3);
        assert!(r.second_vanishes);
    }
}


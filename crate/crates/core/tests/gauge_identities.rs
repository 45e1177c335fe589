//! Disorder-averaged gauge identities on tiny systems.

use xyzglass_core::disorder::{CouplingParams, PSpinParams};
use xyzglass_core::identities::{
    duhamel_identities, one_point_identity, three_point_identity, two_point_identities, Method,
    Tolerances,
};
use xyzglass_core::{Axis, AxisTriple, Model};

fn term(p: usize, mean: [f64; 3], std: [f64; 3]) -> PSpinParams {
    PSpinParams::new(
        p,
        AxisTriple::new(mean[0], mean[1], mean[2]),
        AxisTriple::new(std[0], std[1], std[2]),
    )
}

/// One site, field only; `J^x` fixed at `jx`, `(J^y, J^z)` Gaussian.
fn one_site(jx: f64) -> Model {
    let params = CouplingParams::new(vec![term(1, [jx, 0.5, 0.8], [0.0, 1.0, 1.2])]).unwrap();
    Model::chain(1, params).unwrap()
}

/// Two sites: `J^x` fixed everywhere, `(J^y, J^z)` Gaussian on the bond and
/// a Gaussian field along `z`; four random dimensions.
fn two_site() -> Model {
    let params = CouplingParams::new(vec![
        term(1, [3.0, 0.0, 0.5], [0.0, 0.0, 1.3]),
        term(2, [2.0, 0.6, 0.9], [0.0, 1.04, 1.43]),
    ])
    .unwrap();
    Model::chain(2, params).unwrap()
}

#[test]
fn one_site_quadrature() {
    let m = one_site(2.5);
    let tol = Tolerances::default();
    let q = Method::Quadrature { nodes_per_dim: 24 };
    for w in [Axis::Y, Axis::Z] {
        for beta in [0.5, 1.3, 2.0] {
            let one = one_point_identity(&m, beta, &[0], w, Axis::X, &q, &tol).unwrap();
            assert!(one.residual.mean.abs() < 1e-8, "{w} {beta}: {one:?}");
            // the identity is not vacuous
            assert!(one.quantum.mean.abs() > 1e-2);
            let [d, t] = duhamel_identities(&m, beta, &[0], &[0], w, Axis::X, &q, &tol).unwrap();
            assert!(d.residual.mean.abs() < 1e-8 && t.residual.mean.abs() < 1e-8);
            assert!(t.quantum.mean.abs() > 1e-3);
            let [a, b] = two_point_identities(&m, beta, &[0], &[0], w, Axis::X, &q, &tol).unwrap();
            assert!(a.residual.mean.abs() < 1e-8 && b.residual.mean.abs() < 1e-8);
        }
    }
}

#[test]
fn quadrature_residual_converges_geometrically() {
    // A small spectator coupling puts singularities of the thermal average
    // close to the real axis; the residual is then pure quadrature error.
    let m = one_site(0.4);
    let tol = Tolerances::default();
    let residual = |nodes| {
        let q = Method::Quadrature { nodes_per_dim: nodes };
        one_point_identity(&m, 1.3, &[0], Axis::Y, Axis::X, &q, &tol)
            .unwrap()
            .residual
            .mean
            .abs()
    };
    let (r24, r48, r96) = (residual(24), residual(48), residual(96));
    assert!(r48 < 1e-2 * r24 && r96 < 1e-2 * r48, "{r24:e} {r48:e} {r96:e}");
    assert!(r96 < 1e-10);
}

#[test]
fn two_site_quadrature() {
    let m = two_site();
    let tol = Tolerances::default();
    let q = Method::Quadrature { nodes_per_dim: 16 };
    let beta = 1.1;
    for w in [Axis::Y, Axis::Z] {
        let one = one_point_identity(&m, beta, &[0], w, Axis::X, &q, &tol).unwrap();
        assert!(one.passed, "{one:?}");
        let pair = one_point_identity(&m, beta, &[0, 1], w, Axis::X, &q, &tol).unwrap();
        assert!(pair.passed, "{pair:?}");
        for r in two_point_identities(&m, beta, &[0], &[1], w, Axis::X, &q, &tol).unwrap() {
            assert!(r.passed, "{r:?}");
        }
        for r in duhamel_identities(&m, beta, &[0], &[1], w, Axis::X, &q, &tol).unwrap() {
            assert!(r.passed, "{r:?}");
        }
        let three =
            three_point_identity(&m, beta, [&[0], &[1], &[0, 1]], w, Axis::X, &q, &tol).unwrap();
        assert!(three.passed, "{three:?}");
    }
}

#[test]
fn identities_fail_off_the_gauge_structure() {
    // observable along the gauge axis is rejected rather than silently wrong
    let m = one_site(2.5);
    let tol = Tolerances::default();
    let q = Method::Quadrature { nodes_per_dim: 8 };
    assert!(one_point_identity(&m, 1.0, &[0], Axis::X, Axis::X, &q, &tol).is_err());
    // a non-Gaussian (fixed, nonzero) component on a gauge-transformed axis is rejected
    let params = CouplingParams::new(vec![term(1, [0.4, 0.5, 0.8], [1.0, 0.0, 1.2])]).unwrap();
    let m = Model::chain(1, params).unwrap();
    assert!(one_point_identity(&m, 1.0, &[0], Axis::Z, Axis::X, &q, &tol).is_err());
}

#[test]
fn commuting_duhamel_reduces_to_two_point() {
    // all couplings along z: sigma^z commutes with H
    let params = CouplingParams::new(vec![
        term(1, [0.0, 0.0, 0.4], [0.0, 0.0, 1.0]),
        term(2, [0.0, 0.0, 0.7], [0.0, 0.0, 0.9]),
    ])
    .unwrap();
    let m = Model::chain(2, params).unwrap();
    let tol = Tolerances::default();
    let q = Method::Quadrature { nodes_per_dim: 10 };
    let [_, joint] = two_point_identities(&m, 0.9, &[0], &[1], Axis::Z, Axis::X, &q, &tol).unwrap();
    let [duhamel, _] = duhamel_identities(&m, 0.9, &[0], &[1], Axis::Z, Axis::X, &q, &tol).unwrap();
    assert!((joint.residual.mean - duhamel.residual.mean).abs() < 1e-10);
    assert!((joint.quantum.mean - duhamel.quantum.mean).abs() < 1e-10);
}

#[test]
fn paired_estimator_beats_unpaired() {
    let params = CouplingParams::new(vec![
        term(1, [0.2, 0.3, 0.5], [0.7, 0.8, 1.0]),
        term(2, [0.3, 0.4, 0.6], [0.9, 0.8, 1.0]),
    ])
    .unwrap();
    let m = Model::chain(2, params).unwrap();
    let tol = Tolerances::default();
    let mc = Method::Mc {
        n_samples: 4000,
        seed: 2024,
    };
    let r = one_point_identity(&m, 1.2, &[0], Axis::Z, Axis::X, &mc, &tol).unwrap();
    let ratio = r.variance_ratio.unwrap();
    assert!(ratio < 1.0, "variance ratio {ratio}");
    assert!(r.passed, "{r:?}");
}

#[test]
fn monte_carlo_two_site() {
    let params = CouplingParams::new(vec![
        term(1, [0.2, 0.3, 0.5], [0.7, 0.8, 1.0]),
        term(2, [0.3, 0.4, 0.6], [0.9, 0.8, 1.0]),
    ])
    .unwrap();
    let m = Model::chain(2, params).unwrap();
    let tol = Tolerances::default();
    let mc = Method::Mc {
        n_samples: 20_000,
        seed: 7,
    };
    for (w, u) in [(Axis::Z, Axis::X), (Axis::X, Axis::Y), (Axis::Y, Axis::Z)] {
        let one = one_point_identity(&m, 1.0, &[1], w, u, &mc, &tol).unwrap();
        assert!(one.passed, "{one:?}");
        for r in two_point_identities(&m, 1.0, &[0], &[1], w, u, &mc, &tol).unwrap() {
            assert!(r.passed, "{r:?}");
        }
        for r in duhamel_identities(&m, 1.0, &[0], &[1], w, u, &mc, &tol).unwrap() {
            assert!(r.passed, "{r:?}");
        }
    }
}

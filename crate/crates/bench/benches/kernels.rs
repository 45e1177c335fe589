use std::hint::black_box;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use xyzglass_bench::gaussian_chain;
use xyzglass_core::identities::{one_point_identity, Method, Tolerances};
use xyzglass_core::quantum::{build_hamiltonian, spectral_decompose};
use xyzglass_core::{Axis, PauliString};

fn spectral(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral_decompose");
    for n in [2, 4, 6, 8] {
        let model = gaussian_chain(n);
        let sample = model.sample(1, 0).unwrap();
        let h = build_hamiltonian(n, model.families(), &sample).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| {
            b.iter(|| spectral_decompose(black_box(h)).unwrap())
        });
    }
    group.finish();
}

fn classical(c: &mut Criterion) {
    let mut group = c.benchmark_group("classical_enumeration");
    for n in [8, 12, 16] {
        let model = gaussian_chain(n);
        let sample = model.sample(1, 0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &sample, |b, s| {
            b.iter(|| model.nishimori_model(black_box(s), Axis::X).unwrap().correlation_matrix())
        });
    }
    group.finish();
}

fn duhamel(c: &mut Criterion) {
    let mut group = c.benchmark_group("duhamel");
    for n in [2, 4, 6] {
        let model = gaussian_chain(n);
        let sample = model.sample(1, 0).unwrap();
        let state = model.thermal_state(&sample, 1.0).unwrap();
        let a = state.spectrum().pauli_to_eigenbasis(&PauliString::new(n, &[0], Axis::Z).unwrap()).unwrap();
        let b = state.spectrum().pauli_to_eigenbasis(&PauliString::new(n, &[n - 1], Axis::Z).unwrap()).unwrap();
        group.bench_function(BenchmarkId::from_parameter(n), |bench| {
            bench.iter(|| state.truncated_duhamel_eigen(black_box(&a), black_box(&b)).unwrap())
        });
    }
    group.finish();
}

fn paired_identity(c: &mut Criterion) {
    let model = gaussian_chain(4);
    let method = Method::Mc { n_samples: 256, seed: 3 };
    let tol = Tolerances::default();
    c.bench_function("one_point_identity_4_sites_256_samples", |b| {
        b.iter(|| one_point_identity(&model, 0.9, &[0], Axis::Z, Axis::X, &method, &tol).unwrap())
    });
}

criterion_group!(benches, spectral, classical, duhamel, paired_identity);
criterion_main!(benches);

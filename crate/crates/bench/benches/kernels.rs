use criterion::{black_box, criterion_group, criterion_main, Criterion};
use uhlmann_bench::{four_band, four_band_matrix, haldane};
use uhlmann_core::linalg::DEFAULT_DEGENERACY_TOL;
use uhlmann_core::{first_thermal_uc, hermitian_eig, second_thermal_uc, Beta, GridSpec, Hamiltonian, BETA_INF};

fn eig_4x4(c: &mut Criterion) {
    let m = four_band_matrix();
    c.bench_function("hermitian_eig 4x4", |b| b.iter(|| hermitian_eig(black_box(&m), DEFAULT_DEGENERACY_TOL).unwrap()));
}

fn haldane_grid(c: &mut Criterion) {
    let model = haldane();
    let grid = GridSpec::uniform(model.manifold(), 64).unwrap();
    let mut g = c.benchmark_group("haldane 64x64");
    g.sample_size(20);
    g.bench_function("n_U zero temperature", |b| b.iter(|| first_thermal_uc(&model, BETA_INF, &grid).unwrap()));
    g.bench_function("n_U beta R0 = 5", |b| b.iter(|| first_thermal_uc(&model, Beta::Finite(5.0 / 6.0), &grid).unwrap()));
    g.finish();
}

fn four_band_small(c: &mut Criterion) {
    let model = four_band();
    let grid = GridSpec::uniform(model.manifold(), 8).unwrap();
    let mut g = c.benchmark_group("four-band 8^4");
    g.sample_size(10);
    g.bench_function("n_U^(2) zero temperature", |b| b.iter(|| second_thermal_uc(&model, BETA_INF, &grid).unwrap()));
    g.finish();
}

criterion_group!(benches, eig_4x4, haldane_grid, four_band_small);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use mopr::{
    bessel_stepline, forward, int, moment_table, nn_from_marginals_general_r, nn_from_marginals_r2,
    nn_grid_oracle_r2, random_pair, random_system, stepline_from_nn, FreeParameter, SweepCheck,
};

fn forward_bessel(c: &mut Criterion) {
    let mut group = c.benchmark_group("forward_bessel");
    for n in [5usize, 10, 20] {
        let level0 = bessel_stepline(&int(0), &int(0), 2 * n + 1).unwrap();
        let free = FreeParameter::raw_seed(int(1));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| forward(black_box(&level0), &free, n).unwrap())
        });
    }
    group.finish();
}

fn inverse_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("inverse_sweep_r2");
    for n in [4usize, 8, 12] {
        let (mu1, mu2) = random_pair(1, n + 2, 6).unwrap();
        let m1 = mu1.recurrence(n + 1, 1).unwrap();
        let m2 = mu2.recurrence(n + 1, 2).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| {
                let grid = nn_from_marginals_r2(black_box(&m1), &m2, n).unwrap();
                stepline_from_nn(&grid, n).unwrap()
            })
        });
    }
    group.finish();

    let sys = random_system(1, 3, 6, 6).unwrap();
    let margs: Vec<_> = sys.iter().enumerate().map(|(i, m)| m.recurrence(5, i + 1).unwrap()).collect();
    c.bench_function("inverse_sweep_r3_len4", |b| {
        b.iter(|| nn_from_marginals_general_r(black_box(&margs), 4, SweepCheck::Off).unwrap())
    });
}

fn moment_oracle(c: &mut Criterion) {
    let (mu1, mu2) = random_pair(1, 8, 6).unwrap();
    let moments = moment_table(&[mu1, mu2], 16).unwrap();
    c.bench_function("moment_oracle_r2_len5", |b| {
        b.iter(|| nn_grid_oracle_r2(black_box(&moments), 5).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = forward_bessel, inverse_sweep, moment_oracle
}
criterion_main!(benches);

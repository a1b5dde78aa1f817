use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sweep_core::oracle::confinement::{brute_force_t_star_with, check_confinement_with};
use sweep_core::study::{study_alpha, Range};
use sweep_core::velocity::v_one_cycle;
use sweep_core::{Execution, SearchParams};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn reference() -> SearchParams {
    SearchParams::new(100.0, 10.0, 1.0, 1.0).unwrap()
}

fn alpha_study(c: &mut Criterion) {
    let base = reference();
    let grid = Range::new(1.0, 1000.0, 1.0).unwrap();
    let mut g = c.benchmark_group("study_alpha");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| study_alpha(black_box(&base), &grid, exec).unwrap())
        });
    }
    g.finish();
}

fn confinement(c: &mut Criterion) {
    let p = reference();
    let vs = v_one_cycle(&p);
    let mut g = c.benchmark_group("check_confinement_1e6");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| check_confinement_with(black_box(vs), &p, 1_000_000, exec))
        });
    }
    g.finish();
}

fn brute_force(c: &mut Criterion) {
    let p = reference();
    let vs = v_one_cycle(&p);
    let mut g = c.benchmark_group("brute_force_t_star_1e6");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| brute_force_t_star_with(black_box(vs), &p, 1_000_000, exec))
        });
    }
    g.finish();
}

criterion_group!(benches, alpha_study, confinement, brute_force);
criterion_main!(benches);

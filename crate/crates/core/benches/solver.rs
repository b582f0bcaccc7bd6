//! Parallel and sequential forest search on the shipped benchmarks and on
//! batches of generated problems.

use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use slstr_core::constraints::Problem;
use slstr_core::oracle::{gen_random_problem, GenParams};
use slstr_core::par::PARALLEL_AVAILABLE;
use slstr_core::solver::{max_model_bound, solve, SolverConfig};
use slstr_core::websec::load_benchmark;

fn modes() -> Vec<(&'static str, bool)> {
    let mut m = vec![("sequential", false)];
    if PARALLEL_AVAILABLE {
        m.push(("parallel", true));
    }
    m
}

fn config(parallel: bool, int_bound: Option<u64>) -> SolverConfig {
    SolverConfig {
        parallel,
        int_bound,
        ..SolverConfig::default()
    }
}

fn generated(extended: bool, count: usize) -> Vec<Problem> {
    (1u64..)
        .map(|seed| {
            let params = GenParams {
                alphabet_size: 1 + (seed % 3) as usize,
                max_atoms: if extended { 3 } else { 5 },
                max_states: 3,
                max_sources: 2,
                extended,
            };
            gen_random_problem(seed, &params)
        })
        .filter(|p| extended || max_model_bound(p).is_ok_and(|b| b <= 12))
        .take(count)
        .collect()
}

fn websec(c: &mut Criterion) {
    let mut group = c.benchmark_group("websec");
    group
        .sample_size(10)
        .measurement_time(Duration::from_secs(20));
    for name in ["ex_cacm", "ex_corrected", "ex_mxss1"] {
        let (p, _) = load_benchmark(name).expect("shipped benchmark");
        for (mode, parallel) in modes() {
            let cfg = config(parallel, None);
            group.bench_with_input(BenchmarkId::new(mode, name), &p, |b, p| {
                b.iter(|| solve(p, &cfg).expect("solves"))
            });
        }
    }
    group.finish();
}

fn random_batches(c: &mut Criterion) {
    let mut group = c.benchmark_group("generated");
    group.sample_size(10);
    let batches = [
        ("string-only", generated(false, 100), None),
        ("extended", generated(true, 50), Some(8)),
    ];
    for (name, problems, bound) in &batches {
        for (mode, parallel) in modes() {
            let cfg = config(parallel, *bound);
            group.bench_with_input(BenchmarkId::new(mode, name), problems, |b, ps| {
                b.iter(|| {
                    ps.iter()
                        .filter(|p| solve(p, &cfg).expect("solves").is_sat())
                        .count()
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, websec, random_batches);
criterion_main!(benches);

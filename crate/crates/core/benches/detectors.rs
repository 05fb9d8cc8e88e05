//! Parallel vs sequential timings of the main detectors.
//!
//! With the default `parallel` feature each workload runs twice: on the global
//! rayon pool and inside a one-thread pool. `--no-default-features` benches the
//! plain sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use sticky_lab::catalog::by_name;
use sticky_lab::convergence::{detect_sticky, sticky_cauchy};
use sticky_lab::doubleseq::{double_cluster_candidates, ClusterPolicy, DoubleSequenceOracle};
use sticky_lab::funcspace::ResolutionSchedule;
use sticky_lab::humps::{banach_steinhaus_experiment, AlphaSchedule};
use sticky_lab::seqspace::{ls_cauchy, seq_schedule, TailedSequence};

type Workload = Box<dyn Fn() + Send + Sync>;

fn workloads() -> Vec<(&'static str, Workload)> {
    let coarse = ResolutionSchedule::coarse();
    let bump = by_name("scaled-bump-exp").unwrap();
    let lim = bump.label.pointwise_limit.clone().unwrap();
    let front = by_name("indicator-front").unwrap();
    let grid = DoubleSequenceOracle::new(|i, j| {
        let x = i as f64 / j as f64;
        x * (-x).exp()
    });
    let s = coarse.clone();
    vec![
        (
            "detect_sticky/scaled-bump-exp",
            Box::new(move || drop(black_box(detect_sticky(&bump, &lim, &s).unwrap()))),
        ),
        (
            "sticky_cauchy/indicator-front",
            Box::new(move || drop(black_box(sticky_cauchy(&front, &coarse).unwrap()))),
        ),
        (
            "banach_steinhaus/i6",
            Box::new(|| {
                drop(black_box(
                    banach_steinhaus_experiment(6, &[64, 256, 1024], AlphaSchedule::NOverLog)
                        .unwrap(),
                ))
            }),
        ),
        (
            "cluster_candidates/256",
            Box::new(move || {
                drop(black_box(
                    double_cluster_candidates(&grid, &ClusterPolicy::default()).unwrap(),
                ))
            }),
        ),
        (
            "ls_cauchy/unit",
            Box::new(|| {
                drop(black_box(
                    ls_cauchy(&TailedSequence::unit, &seq_schedule()).unwrap(),
                ))
            }),
        ),
    ]
}

fn bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("detectors");
    g.sample_size(10);
    for (name, work) in workloads() {
        if sticky_lab::par::is_parallel() {
            g.bench_function(BenchmarkId::new("rayon", name), |b| b.iter(&work));
            let one = rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .unwrap();
            g.bench_function(BenchmarkId::new("one-thread", name), |b| {
                b.iter(|| one.install(&work))
            });
        } else {
            g.bench_function(BenchmarkId::new("sequential", name), |b| b.iter(&work));
        }
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);

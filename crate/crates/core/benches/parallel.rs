//! Sequential against parallel execution of the batch-parallel operations.
//! Build with `--no-default-features` to see the sequential fallback alone.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use gridposet::chains::balanced_partition_with;
use gridposet::extremal::{max_p_free_with, pipeline_bound_with, CapMode, DEFAULT_FREE_BUDGET};
use gridposet::grid::GridShape;
use gridposet::patterns::{extremal_weight_with, Pattern, DEFAULT_EXTREMAL_BUDGET};
use gridposet::poset::Poset;
use gridposet::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn max_free(c: &mut Criterion) {
    let mut group = c.benchmark_group("max_p_free");
    group.sample_size(10);
    for (poset_name, p) in [("V", Poset::v()), ("K", Poset::k())] {
        let shape = GridShape::uniform(2, 6).unwrap();
        for (mode, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(mode, format!("{poset_name} [2]^6")), &exec, |b, &exec| {
                b.iter(|| max_p_free_with(&shape, &p, DEFAULT_FREE_BUDGET, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline_bound");
    group.sample_size(10);
    let p = Poset::k();
    for (k, n) in [(2, 6), (3, 3)] {
        let shape = GridShape::uniform(k, n).unwrap();
        for (mode, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(mode, format!("K [{k}]^{n}")), &exec, |b, &exec| {
                b.iter(|| pipeline_bound_with(&shape, &p, CapMode::ExactSearch, DEFAULT_FREE_BUDGET, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn extremal(c: &mut Criterion) {
    let mut group = c.benchmark_group("extremal_weight");
    group.sample_size(10);
    let id = Pattern::identity(2, 2).unwrap();
    for (mode, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(mode, "I2 m=4"), &exec, |b, &exec| {
            b.iter(|| extremal_weight_with(4, &id, DEFAULT_EXTREMAL_BUDGET, exec).unwrap())
        });
    }
    group.finish();
}

fn balanced(c: &mut Criterion) {
    let mut group = c.benchmark_group("balanced_partition");
    group.sample_size(10);
    for (k, n) in [(2, 12), (3, 7)] {
        let shape = GridShape::uniform(k, n).unwrap();
        for (mode, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(mode, format!("[{k}]^{n}")), &exec, |b, &exec| {
                b.iter(|| balanced_partition_with(&shape, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, max_free, pipeline, extremal, balanced);
criterion_main!(benches);

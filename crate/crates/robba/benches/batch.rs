use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use robba::harness::{run_suite_with, Config, Exec, Suite};

fn batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    let cfg = Config {
        p: 5,
        samples: 50,
        ..Config::default()
    };
    for suite in [Suite::Operators, Suite::Reciprocity] {
        for (name, exec) in [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)] {
            group.bench_with_input(BenchmarkId::new(suite.name(), name), &exec, |b, &exec| {
                b.iter(|| black_box(run_suite_with(suite, &cfg, exec).unwrap()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, batch);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use frontlab_bench::short_run;
use frontlab_core::simulate::run;

fn stepper(c: &mut Criterion) {
    let mut group = c.benchmark_group("imex_run");
    group.sample_size(10);
    for half_length in [50.0, 100.0, 200.0] {
        let cfg = short_run(half_length, 10.0);
        group.throughput(Throughput::Elements(cfg.grid().len() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(half_length), &cfg, |b, cfg| b.iter(|| run(cfg)));
    }
    group.finish();
}

criterion_group!(benches, stepper);
criterion_main!(benches);

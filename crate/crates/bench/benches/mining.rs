use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use retrograde_bench::bench_store;
use retrograde_core::analysis::constraint_usage_by_year;
use retrograde_core::miner::mine_updates;

fn mining_bench(c: &mut Criterion) {
    let (_dir, store) = bench_store(500, 20);
    let names: Vec<String> = store.package_names().map(String::from).collect();

    let mut group = c.benchmark_group("mine");
    group.throughput(Throughput::Elements(names.len() as u64));
    group.bench_function("500pkg-x20", |b| {
        b.iter_batched(
            || (),
            |_| {
                let mut total = 0usize;
                for name in &names {
                    let history = store.history(name).unwrap();
                    total += mine_updates(black_box(&history)).updates.len();
                }
                black_box(total)
            },
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

fn usage_bench(c: &mut Criterion) {
    let (_dir, store) = bench_store(500, 20);
    c.bench_function("constraint-usage/500pkg-x20", |b| {
        b.iter(|| black_box(constraint_usage_by_year(black_box(&store), None)))
    });
}

criterion_group!(benches, mining_bench, usage_bench);
criterion_main!(benches);

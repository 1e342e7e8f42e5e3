use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use fmm_core::data;
use fmm_core::mobility::{
    build_fuzzy_system, default_classes, default_labels, run_mobility, MobilityParams, Model,
};
use fmm_core::netsim::ConnectivitySnapshot;
use fmm_core::Point;

fn bench_fuzzy_evaluate(c: &mut Criterion) {
    let map = data::bundled_map();
    let rules = data::bundled_rules(&map);
    let system = build_fuzzy_system(&map, &rules, 0, &default_labels());
    c.bench_function("fuzzy_evaluate_72_rules", |b| {
        b.iter(|| system.evaluate(black_box(9.3), black_box(Point::new(4100.0, 5600.0))))
    });
}

fn bench_shortest_path(c: &mut Criterion) {
    let map = data::bundled_map();
    // opposite corners of the grid
    let (src, dst) = (0, map.graph.vertex_count() - 1);
    c.bench_function("shortest_path_corner_to_corner", |b| {
        b.iter(|| map.graph.shortest_path(black_box(src), black_box(dst)))
    });
}

fn bench_snapshot_build(c: &mut Criterion) {
    let positions: Vec<Point> = (0..50)
        .map(|i| Point::new((i * 137 % 100) as f64 * 100.0, (i * 61 % 100) as f64 * 100.0))
        .collect();
    c.bench_function("connectivity_snapshot_50_nodes", |b| {
        b.iter(|| ConnectivitySnapshot::build(0.0, black_box(&positions), 250.0))
    });
}

fn bench_short_run(c: &mut Criterion) {
    let map = data::bundled_map();
    let rules = data::bundled_rules(&map);
    let params = MobilityParams {
        model: Model::Fmm,
        area: (10_000.0, 10_000.0),
        node_count: 30,
        classes: default_classes(),
        class_mix: vec![1.0 / 3.0; 3],
        pause_range: (10.0, 300.0),
        warmup: 60.0,
        duration: 120.0,
        dt: 1.0,
        snapshot_interval: 1.0,
        secs_per_hour: 150.0,
        labels: default_labels(),
    };
    c.bench_function("mobility_run_30_nodes_120s", |b| {
        b.iter_batched(
            || params.clone(),
            |p| run_mobility(&p, &map, &rules, 1).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(
    benches,
    bench_fuzzy_evaluate,
    bench_shortest_path,
    bench_snapshot_build,
    bench_short_run
);
criterion_main!(benches);

use std::hint::black_box;

use bpp_bench::fixture;
use bpp_core::heuristic::estimate;
use bpp_core::{find_possible_actions, plan, progress, PlannerConfig};
use criterion::{criterion_group, criterion_main, Criterion};

const INSTANCES: &[(&str, &str)] = &[
    ("countdown", "countdown-ex1"),
    ("countdown", "countdown-3c"),
    ("chopping", "chopping-t127"),
    ("ibw", "ibw-tower4"),
    ("ibw", "ibw-tower5"),
    ("mixers", "mixers-one"),
    ("mixers", "mixers-truck-away"),
];

fn search(c: &mut Criterion) {
    let mut g = c.benchmark_group("plan");
    for &(d, p) in INSTANCES {
        let f = fixture(d, p);
        let cfg = PlannerConfig::new(f.problem.bound);
        g.bench_function(p, |b| b.iter(|| plan(&f.bat, black_box(&f.init), &f.problem.goal, &cfg).unwrap()));
    }
    g.finish();
}

fn components(c: &mut Criterion) {
    let f = fixture("ibw", "ibw-tower5");
    let actions = find_possible_actions(&f.init, &f.bat).unwrap();
    c.bench_function("ground/ibw-tower5", |b| b.iter(|| find_possible_actions(black_box(&f.init), &f.bat).unwrap()));
    c.bench_function("progress/ibw-tower5", |b| {
        b.iter(|| {
            for a in &actions {
                black_box(progress(&f.init, &f.bat, a).unwrap());
            }
        })
    });
    c.bench_function("estimate/ibw-tower5", |b| {
        b.iter(|| estimate(&f.bat, &f.problem.goal, f.problem.bound, 1, black_box(&f.init)).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = search, components
}
criterion_main!(benches);

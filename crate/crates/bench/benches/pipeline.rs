use criterion::{criterion_group, criterion_main, Criterion};
use echogeo_bench::{record, stepped_trace};
use echogeo_core::cochlea::{detect_crossings, filterbank_apply, CochleagramPipeline};
use echogeo_core::glint::{default_penalty, optimal_segmentation};

fn cochlea(c: &mut Criterion) {
    let ts = record(&[0.0, 0.035], 3e-3);
    let p = CochleagramPipeline::default();
    let mut g = c.benchmark_group("cochlea");
    g.sample_size(10);
    g.bench_function("filterbank 161 channels", |b| b.iter(|| filterbank_apply(&ts, &p.filterbank).unwrap()));
    let bank = filterbank_apply(&ts, &p.filterbank).unwrap();
    g.bench_function("crossings", |b| b.iter(|| detect_crossings(&bank, &p.crossings).unwrap()));
    g.bench_function("full cochleagram", |b| b.iter(|| p.run(&ts).unwrap()));
    g.finish();
}

fn change_points(c: &mut Criterion) {
    let mut g = c.benchmark_group("change points");
    for n in [20, 200, 2000] {
        let y = stepped_trace(n);
        let penalty = default_penalty(&y);
        g.bench_function(format!("segmentation n={n}"), |b| b.iter(|| optimal_segmentation(&y, penalty, 2)));
    }
    g.finish();
}

criterion_group!(benches, cochlea, change_points);
criterion_main!(benches);

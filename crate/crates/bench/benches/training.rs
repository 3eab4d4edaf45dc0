use criterion::{criterion_group, criterion_main, Criterion};
use echogeo_bench::synthetic_set;
use echogeo_core::nn::{train, ArchOptions, Architecture, TrainConfig};

fn one_epoch(c: &mut Criterion, arch: Architecture, channels: usize, bins: usize, n: usize) {
    let opts = ArchOptions::default();
    let shape = arch.input_shape(channels, bins, &opts);
    let set = synthetic_set(n, &shape, arch.classes());
    let cfg = TrainConfig { epochs: 1, batch_size: 32, loss: arch.loss(), ..TrainConfig::default() };
    let net = arch.build(channels, bins, &opts, 1).unwrap();
    c.bench_function(&format!("{arch} epoch of {n}"), |b| {
        b.iter(|| {
            let mut net = net.clone();
            train(&mut net, &set, None, &cfg).unwrap()
        })
    });
}

fn training(c: &mut Criterion) {
    one_epoch(c, Architecture::Cnn, 161, 250, 32);
    one_epoch(c, Architecture::Rnn, 161, 250, 32);
    one_epoch(c, Architecture::Gs, 161, 5, 640);
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = training
}
criterion_main!(benches);

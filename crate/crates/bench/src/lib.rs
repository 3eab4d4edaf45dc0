//! Shared fixtures for the benchmarks.

use echogeo_core::echo::{simulate_scene, Broadcast, EchoModelConstants, SonarGeometry, Target, Window};
use echogeo_core::nn::{LabeledSet, Tensor};
use echogeo_core::TimeSeries;

/// Noisy echo record of a target 1 m away.
pub fn record(offsets: &[f64], duration: f64) -> TimeSeries {
    let b = Broadcast::new(duration, Window::Welch).expect("valid broadcast");
    let t = Target::new(offsets.to_vec()).expect("valid target");
    simulate_scene(&b, &t, &SonarGeometry::default(), &EchoModelConstants::default(), Some(20.0), 1)
        .expect("scene simulates")
}

/// Batch of `n` pseudo-random inputs of per-sample `shape` with cyclic labels.
pub fn synthetic_set(n: usize, shape: &[usize], classes: usize) -> LabeledSet {
    let mut full = vec![n];
    full.extend(shape);
    let len: usize = full.iter().product();
    // cheap deterministic fill in [-1, 1)
    let data = (0..len).map(|i| ((i as u64).wrapping_mul(2_654_435_761) % 2000) as f64 / 1000.0 - 1.0).collect();
    let x = Tensor::new(full, data).expect("length matches shape");
    LabeledSet::new(x, (0..n).map(|i| i % classes).collect(), classes).expect("labels in range")
}

/// Estimate trace with two plateaus and rounding noise.
pub fn stepped_trace(n: usize) -> Vec<f64> {
    (0..n).map(|i| if i < n / 2 { 5.0 } else { 16.0 } + ((i * 7) % 3) as f64 - 1.0).collect()
}

#![allow(dead_code)]

/// Residual sum of squares of the least-squares line through `y`, by the
/// normal equations on centered coordinates.
pub fn line_rss(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    if y.len() < 2 {
        return 0.0;
    }
    let mx = (n - 1.0) / 2.0;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (i, v) in y.iter().enumerate() {
        let dx = i as f64 - mx;
        sxx += dx * dx;
        sxy += dx * (v - my);
    }
    let slope = sxy / sxx;
    y.iter().enumerate().map(|(i, v)| (v - my - slope * (i as f64 - mx)).powi(2)).sum()
}

/// Every segmentation with segments of at least `min_seg` points, scored by
/// total line RSS plus `penalty` per break. Returns the best breaks, the best
/// score, and the runner-up score (to detect ties).
pub fn brute_force_segmentation(y: &[f64], penalty: f64, min_seg: usize) -> (Vec<usize>, f64, f64) {
    fn walk(
        y: &[f64],
        start: usize,
        penalty: f64,
        min_seg: usize,
        breaks: &mut Vec<usize>,
        acc: f64,
        best: &mut (Vec<usize>, f64, f64),
    ) {
        let n = y.len();
        let close = acc + line_rss(&y[start..]);
        if close < best.1 {
            best.2 = best.1;
            *best = (breaks.clone(), close, best.1);
        } else if close < best.2 {
            best.2 = close;
        }
        for b in start + min_seg..=n.saturating_sub(min_seg) {
            breaks.push(b);
            walk(y, b, penalty, min_seg, breaks, acc + line_rss(&y[start..b]) + penalty, best);
            breaks.pop();
        }
    }
    let mut best = (Vec::new(), f64::INFINITY, f64::INFINITY);
    walk(y, 0, penalty, min_seg, &mut Vec::new(), 0.0, &mut best);
    best
}

/// Noiseless piecewise-constant sequence from an alphabet of four classes.
pub fn piecewise_case(rng: &mut impl rand::Rng, n: usize) -> Vec<usize> {
    let mut alphabet: Vec<usize> = (0..32).collect();
    let (alphabet, _) = alphabet.partial_shuffle(rng, 4);
    let n_breaks = rng.random_range(0..=2);
    let mut cuts: Vec<usize> = (0..n_breaks).map(|_| rng.random_range(1..n)).collect();
    cuts.sort();
    cuts.dedup();
    let mut out = Vec::with_capacity(n);
    let mut value = alphabet[rng.random_range(0..4)];
    for i in 0..n {
        if cuts.contains(&i) {
            value = alphabet[rng.random_range(0..4)];
        }
        out.push(value);
    }
    out
}

use rand::seq::SliceRandom;

/// Echo record of a target at 1 m with glints at `offsets` (m).
pub fn record(offsets: &[f64], duration: f64, snr_db: Option<f64>, seed: u64) -> echogeo_core::TimeSeries {
    use echogeo_core::echo::*;
    let b = Broadcast::new(duration, Window::Welch).unwrap();
    let t = Target::new(offsets.to_vec()).unwrap();
    simulate_scene(&b, &t, &SonarGeometry::default(), &EchoModelConstants::default(), snr_db, seed).unwrap()
}

/// Notch spacing (Hz) of a two-glint cochleagram, read off the mean
/// column profile over mid-echo bins.
pub fn measured_notch_spacing(cg: &echogeo_core::Cochleagram) -> Option<f64> {
    use echogeo_core::cochlea::{notch_spacing, ripple_profile};
    notch_spacing(&ripple_profile(cg, 50..150), &cg.center_freqs, 2e3, 30e3)
}

/// Two-path interference nulls sit 1/Δt apart, Δt = 2d/c.
pub fn interference_spacing(d: f64) -> f64 {
    echogeo_core::EchoModelConstants::default().speed_of_sound / (2.0 * d)
}

//! FFT-backed signal helpers shared by the echo and cochlea modules.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

pub fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// Forward FFT of a real signal zero-padded to `len`.
pub fn rfft_padded(planner: &mut FftPlanner<f64>, x: &[f64], len: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(len, Complex64::new(0.0, 0.0));
    planner.plan_fft_forward(len).process(&mut buf);
    buf
}

/// Inverse FFT scaled by 1/len.
pub fn ifft(planner: &mut FftPlanner<f64>, mut spec: Vec<Complex64>) -> Vec<Complex64> {
    let len = spec.len();
    planner.plan_fft_inverse(len).process(&mut spec);
    let scale = 1.0 / len as f64;
    for v in &mut spec {
        *v *= scale;
    }
    spec
}

/// Magnitude of the analytic signal.
pub fn analytic_envelope(planner: &mut FftPlanner<f64>, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let len = next_pow2(n);
    let mut spec = rfft_padded(planner, x, len);
    let half = len / 2;
    for (k, v) in spec.iter_mut().enumerate() {
        if k == 0 || (len > 1 && k == half) {
            continue;
        } else if k < half {
            *v *= 2.0;
        } else {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    let analytic = ifft(planner, spec);
    analytic[..n].iter().map(|c| c.norm()).collect()
}

/// Cross-correlation r[l] = Σ x[n + l]·y[n] for lags 0..x.len().
pub fn cross_correlate(planner: &mut FftPlanner<f64>, x: &[f64], y: &[f64]) -> Vec<f64> {
    let len = next_pow2(x.len() + y.len());
    let fx = rfft_padded(planner, x, len);
    let fy = rfft_padded(planner, y, len);
    let prod: Vec<Complex64> = fx.iter().zip(&fy).map(|(a, b)| a * b.conj()).collect();
    ifft(planner, prod)[..x.len()].iter().map(|c| c.re).collect()
}

/// Index of the largest element; first one wins on ties.
pub fn argmax(x: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in x.iter().enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { end } else { start + step * i as f64 }).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn envelope_of_tone_burst_is_flat() {
        let mut planner = FftPlanner::new();
        let x: Vec<f64> = (0..4096).map(|n| 0.7 * (2.0 * PI * 0.0625 * n as f64).cos()).collect();
        let env = analytic_envelope(&mut planner, &x);
        for &e in &env[500..3500] {
            assert!((e - 0.7).abs() < 1e-3);
        }
    }

    #[test]
    fn correlation_peak_at_shift() {
        let mut planner = FftPlanner::new();
        let y: Vec<f64> = (0..64).map(|n| ((n * 37 % 11) as f64) - 5.0).collect();
        let mut x = vec![0.0; 300];
        x[123..123 + 64].copy_from_slice(&y);
        let r = cross_correlate(&mut planner, &x, &y);
        assert_eq!(argmax(&r), Some(123));
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(3.0, 70.0, 24);
        assert_eq!(v.len(), 24);
        assert_eq!(v[0], 3.0);
        assert_eq!(v[23], 70.0);
        assert!((v[1] - v[0] - 67.0 / 23.0).abs() < 1e-12);
    }
}

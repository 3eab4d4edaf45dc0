//! Spectral ripple of overlapping glint echoes, read off a cochleagram.
//!
//! Two copies of an echo separated by Δt interfere with notches every
//! 1/Δt Hz. In dB the column profile is 10·log10(2 + 2cos 2πfΔt) plus a
//! smooth envelope, so its dominant periodicity along the CF axis is the
//! notch spacing.

use std::f64::consts::PI;
use std::ops::Range;

use super::spectrogram::Cochleagram;

/// Mean over `bins` of every channel.
pub fn ripple_profile(cg: &Cochleagram, bins: Range<usize>) -> Vec<f64> {
    let bins = bins.start.min(cg.n_bins)..bins.end.min(cg.n_bins);
    let n = bins.len().max(1) as f64;
    (0..cg.n_channels).map(|c| cg.row(c)[bins.clone()].iter().sum::<f64>() / n).collect()
}

/// Residual of a least-squares polynomial of degree 2 in the channel index.
fn detrend(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let x: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 / (n.max(2) - 1) as f64 - 1.0).collect();
    // normal equations for [1, x, x²]
    let mut m = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for (xi, yi) in x.iter().zip(y) {
        let p = [1.0, *xi, xi * xi];
        for a in 0..3 {
            r[a] += p[a] * yi;
            for b in 0..3 {
                m[a][b] += p[a] * p[b];
            }
        }
    }
    let c = solve3(m, r).unwrap_or([y.iter().sum::<f64>() / n as f64, 0.0, 0.0]);
    x.iter().zip(y).map(|(xi, yi)| yi - (c[0] + c[1] * xi + c[2] * xi * xi)).collect()
}

fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in 0..3 {
                    m[row][k] -= f * m[col][k];
                }
                r[row] -= f * r[col];
            }
        }
    }
    Some([r[0] / m[0][0], r[1] / m[1][1], r[2] / m[2][2]])
}

/// Spectral periodicity of a column profile, in Hz: the spacing in
/// `min_hz..=max_hz` maximizing the tapered, detrended periodogram.
/// `None` when the profile is flat.
pub fn notch_spacing(profile: &[f64], center_freqs: &[f64], min_hz: f64, max_hz: f64) -> Option<f64> {
    let n = profile.len();
    if n < 8 || center_freqs.len() != n || !(min_hz > 0.0 && max_hz > min_hz) {
        return None;
    }
    let resid = detrend(profile);
    let taper: Vec<f64> = (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos()).collect();
    let y: Vec<f64> = resid.iter().zip(&taper).map(|(r, w)| r * w).collect();
    if y.iter().all(|v| v.abs() < 1e-12) {
        return None;
    }
    let power = |spacing: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (v, f) in y.iter().zip(center_freqs) {
            let ph = 2.0 * PI * f / spacing;
            re += v * ph.cos();
            im += v * ph.sin();
        }
        re * re + im * im
    };
    // uniform grid in ripple "quefrency" 1/Δf, then golden-section refine
    let steps = 2000;
    let (qlo, qhi) = (1.0 / max_hz, 1.0 / min_hz);
    let q_at = |k: usize| qlo + (qhi - qlo) * k as f64 / steps as f64;
    let best = (0..=steps).max_by(|&a, &b| power(1.0 / q_at(a)).total_cmp(&power(1.0 / q_at(b))))?;
    let (mut a, mut b) = (q_at(best.saturating_sub(1)), q_at((best + 1).min(steps)));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if power(1.0 / c) > power(1.0 / d) {
            b = d;
        } else {
            a = c;
        }
    }
    Some(2.0 / (a + b))
}

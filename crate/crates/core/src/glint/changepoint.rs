//! Penalized piecewise-linear segmentation of a class-estimate sequence and
//! the verification rules that turn raw breaks into glint-pair boundaries.

use serde::{Deserialize, Serialize};

/// Variance of rounding a real value to an integer class; floors the noise
/// estimate so noiseless traces still carry a positive penalty.
pub const QUANTIZATION_VARIANCE: f64 = 1.0 / 12.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePointConfig {
    /// Shortest segment the fit may use; two points pin a line.
    pub min_segment: usize,
    /// A verified point must start this many windows within `tolerance` of
    /// their mode.
    pub min_run: usize,
    /// Candidates at most this many windows after a verified point are dropped.
    pub separation: usize,
    pub tolerance: usize,
    /// Fixed penalty per break; `None` uses σ̂²·ln n.
    pub penalty: Option<f64>,
}

impl Default for ChangePointConfig {
    fn default() -> Self {
        ChangePointConfig { min_segment: 2, min_run: 5, separation: 2, tolerance: 1, penalty: None }
    }
}

/// Least-squares line cost of any contiguous range, from prefix sums.
pub struct LinearCost {
    s: [Vec<f64>; 5],
}

impl LinearCost {
    pub fn new(y: &[f64]) -> Self {
        let mut s: [Vec<f64>; 5] = Default::default();
        for v in s.iter_mut() {
            v.push(0.0);
        }
        for (i, &v) in y.iter().enumerate() {
            let x = i as f64;
            for (k, term) in [x, x * x, v, v * v, x * v].into_iter().enumerate() {
                let last = *s[k].last().unwrap();
                s[k].push(last + term);
            }
        }
        LinearCost { s }
    }

    /// Residual sum of squares of the best line through `y[a..b]`.
    pub fn cost(&self, a: usize, b: usize) -> f64 {
        let n = (b - a) as f64;
        let d = |k: usize| self.s[k][b] - self.s[k][a];
        let (sx, sxx, sy, syy, sxy) = (d(0), d(1), d(2), d(3), d(4));
        let vy = syy - sy * sy / n;
        if b - a < 2 {
            return vy.max(0.0);
        }
        let vx = sxx - sx * sx / n;
        let cxy = sxy - sx * sy / n;
        (vy - cxy * cxy / vx).max(0.0)
    }
}

/// Robust noise variance from first differences (MAD), floored.
pub fn noise_variance(y: &[f64]) -> f64 {
    if y.len() < 3 {
        return QUANTIZATION_VARIANCE;
    }
    let diffs: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let med = median(&diffs);
    let dev: Vec<f64> = diffs.iter().map(|d| (d - med).abs()).collect();
    let sigma = 1.4826 * median(&dev) / std::f64::consts::SQRT_2;
    (sigma * sigma).max(QUANTIZATION_VARIANCE)
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

pub fn default_penalty(y: &[f64]) -> f64 {
    noise_variance(y) * (y.len().max(2) as f64).ln()
}

/// Optimal segmentation under cost + `penalty` per break, by dynamic
/// programming with PELT pruning. Returns the break indices (each the first
/// index of a new segment) and the minimized objective.
pub fn optimal_segmentation(y: &[f64], penalty: f64, min_segment: usize) -> (Vec<usize>, f64) {
    let n = y.len();
    let m = min_segment.max(1);
    if n < 2 * m {
        return (Vec::new(), LinearCost::new(y).cost(0, n));
    }
    let cost = LinearCost::new(y);
    let mut f = vec![f64::INFINITY; n + 1];
    let mut last = vec![0usize; n + 1];
    f[0] = -penalty;
    // (start, time from which it is discarded)
    let mut candidates: Vec<(usize, usize)> = vec![(0, usize::MAX)];
    for t in m..=n {
        if t >= 2 * m {
            candidates.push((t - m, usize::MAX));
        }
        candidates.retain(|&(_, dead)| t < dead);
        for &(s, _) in &candidates {
            if t - s < m || !f[s].is_finite() {
                continue;
            }
            let v = f[s] + cost.cost(s, t) + penalty;
            if v < f[t] {
                f[t] = v;
                last[t] = s;
            }
        }
        // A start that already loses to t stays beaten once t can itself be
        // a start, i.e. m samples later.
        for c in candidates.iter_mut() {
            if t - c.0 >= m && f[c.0] + cost.cost(c.0, t) > f[t] + 1e-12 * (1.0 + f[t].abs()) {
                c.1 = c.1.min(t + m);
            }
        }
    }
    let mut breaks = Vec::new();
    let mut t = n;
    while t > 0 {
        let s = last[t];
        if s > 0 {
            breaks.push(s);
        }
        t = s;
    }
    breaks.reverse();
    (breaks, f[n])
}

/// Most frequent value; ties go to the smaller one.
pub fn mode(values: &[usize]) -> Option<usize> {
    let mut counts = std::collections::BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_insert(0usize) += 1;
    }
    let best = counts.values().copied().max()?;
    counts.into_iter().find(|&(_, c)| c == best).map(|(v, _)| v)
}

/// Breaks of the penalized fit that survive verification: not within
/// `separation` windows of an earlier verified point, starting a run of
/// `min_run` windows within `tolerance` of the run's mode, and changing the
/// mode relative to the preceding segment.
pub fn detect_change_points(classes: &[usize], cfg: &ChangePointConfig) -> Vec<usize> {
    let n = classes.len();
    if n < cfg.min_run.max(2) {
        return Vec::new();
    }
    let y: Vec<f64> = classes.iter().map(|&c| c as f64).collect();
    let penalty = cfg.penalty.unwrap_or_else(|| default_penalty(&y));
    let (candidates, _) = optimal_segmentation(&y, penalty, cfg.min_segment);
    verify(classes, &candidates, cfg)
}

pub fn verify(classes: &[usize], candidates: &[usize], cfg: &ChangePointConfig) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for &c in candidates {
        if kept.last().is_some_and(|&k| c - k <= cfg.separation) {
            continue;
        }
        if c + cfg.min_run > classes.len() {
            continue;
        }
        let run = &classes[c..c + cfg.min_run];
        let run_mode = mode(run).expect("run is nonempty");
        if run.iter().any(|&v| v.abs_diff(run_mode) > cfg.tolerance) {
            continue;
        }
        let before = mode(&classes[kept.last().copied().unwrap_or(0)..c]);
        if before == Some(run_mode) {
            continue;
        }
        kept.push(c);
    }
    kept
}

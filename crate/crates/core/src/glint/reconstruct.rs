use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::changepoint::{detect_change_points, mode, ChangePointConfig};
use super::trace::{sliding_estimate, EstimateTrace};
use super::GsClassGrid;
use crate::cochlea::Cochleagram;
use crate::error::Result;
use crate::nn::Network;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Window range [start, end).
    pub start: usize,
    pub end: usize,
    pub class: usize,
    /// Grid spacing of `class` (m).
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub trace: EstimateTrace,
    pub change_points: Vec<usize>,
    pub segments: Vec<Segment>,
    pub glint_count: usize,
    /// Inferred glint offsets from the first glint (m).
    pub offsets: Vec<f64>,
}

/// Splits the trace at the change points, summarizes each segment by its
/// modal class, and chains the nonzero spacings into glint offsets.
pub fn reconstruct(trace: &EstimateTrace, change_points: &[usize], grid: &GsClassGrid) -> ReconstructionReport {
    let n = trace.len();
    let mut bounds = vec![0];
    bounds.extend(change_points.iter().copied().filter(|&c| c > 0 && c < n));
    bounds.push(n);
    let segments: Vec<Segment> = bounds
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let class = mode(&trace.classes[w[0]..w[1]]).expect("segment is nonempty");
            Segment { start: w[0], end: w[1], class, spacing: grid.spacing(class) }
        })
        .collect();
    let mut offsets = vec![0.0];
    for s in segments.iter().filter(|s| s.class != 0) {
        offsets.push(offsets.last().unwrap() + s.spacing);
    }
    ReconstructionReport {
        trace: trace.clone(),
        change_points: bounds[1..bounds.len() - 1].to_vec(),
        glint_count: offsets.len(),
        offsets,
        segments,
    }
}

/// Sliding estimate, change-point detection, and reconstruction in one go.
pub fn analyze(
    cg: &Cochleagram,
    net: &Network,
    window: usize,
    grid: &GsClassGrid,
    cfg: &ChangePointConfig,
) -> Result<ReconstructionReport> {
    let trace = sliding_estimate(cg, net, window)?;
    let cps = detect_change_points(&trace.classes, cfg);
    Ok(reconstruct(&trace, &cps, grid))
}

impl ReconstructionReport {
    /// Estimate curve as CSV: window, start bin, class, spacing in mm.
    pub fn trace_csv(&self, grid: &GsClassGrid) -> String {
        let mut s = String::from("window,start_bin,class,spacing_mm,change_point\n");
        for (i, (&c, &b)) in self.trace.classes.iter().zip(&self.trace.window_starts).enumerate() {
            let cp = u8::from(self.change_points.contains(&i));
            writeln!(s, "{i},{b},{c},{:.4},{cp}", grid.spacing(c) * 1e3).unwrap();
        }
        s
    }
}

use serde::{Deserialize, Serialize};

use crate::dsp::linspace;
use crate::error::{Error, Result};

/// Glint-spacing classes: evenly spaced spacings from 0 upward, each with
/// its ripple interval Δf = c / (2d).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsClassGrid {
    pub spacings: Vec<f64>,
    pub speed_of_sound: f64,
}

impl Default for GsClassGrid {
    fn default() -> Self {
        GsClassGrid::new(32, 0.07, 343.0).expect("default grid is valid")
    }
}

impl GsClassGrid {
    pub fn new(n_classes: usize, max_spacing: f64, speed_of_sound: f64) -> Result<Self> {
        if n_classes < 2 || !(max_spacing > 0.0) || !(speed_of_sound > 0.0) {
            return Err(Error::param("grid needs ≥ 2 classes, a positive span and a positive c"));
        }
        Ok(GsClassGrid { spacings: linspace(0.0, max_spacing, n_classes), speed_of_sound })
    }

    pub fn n_classes(&self) -> usize {
        self.spacings.len()
    }

    pub fn step(&self) -> f64 {
        self.spacings[1] - self.spacings[0]
    }

    pub fn spacing(&self, class: usize) -> f64 {
        self.spacings[class]
    }

    /// Notch spacing in Hz; infinite for the zero-spacing class.
    pub fn ripple_interval(&self, class: usize) -> f64 {
        ripple_interval(self.spacings[class], self.speed_of_sound)
    }

    /// Class whose spacing is nearest `d` (clamped to the grid).
    pub fn nearest(&self, d: f64) -> usize {
        let k = ((d - self.spacings[0]) / self.step()).round();
        k.clamp(0.0, (self.n_classes() - 1) as f64) as usize
    }

    /// Label of a sorted offset list: class of the first spacing, 0 for a
    /// single glint or coincident glints.
    pub fn label_for_offsets(&self, offsets: &[f64]) -> usize {
        match offsets {
            [a, b, ..] => self.nearest(b - a),
            _ => 0,
        }
    }
}

pub fn ripple_interval(spacing: f64, speed_of_sound: f64) -> f64 {
    if spacing == 0.0 {
        f64::INFINITY
    } else {
        speed_of_sound / (2.0 * spacing)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let g = GsClassGrid::default();
        assert_eq!(g.n_classes(), 32);
        assert_eq!(g.spacing(0), 0.0);
        assert_eq!(g.spacing(31), 0.07);
        assert!((g.step() - 0.07 / 31.0).abs() < 1e-15);
        assert!(g.ripple_interval(0).is_infinite());
    }

    #[test]
    fn round_trip_and_ripple_mapping() {
        let g = GsClassGrid::default();
        for k in 0..32 {
            assert_eq!(g.nearest(g.spacing(k)), k);
        }
        for k in 1..32 {
            let r = g.ripple_interval(k) * 2.0 * g.spacing(k) / g.speed_of_sound;
            assert!((r - 1.0).abs() < 1e-12);
            if k > 1 {
                assert!(g.ripple_interval(k) < g.ripple_interval(k - 1));
            }
        }
    }

    #[test]
    fn figure_spacings_snap() {
        let g = GsClassGrid::default();
        assert_eq!(g.nearest(0.0111), 5);
        assert_eq!(g.nearest(0.0368), 16);
        assert!((g.spacing(5) * 1e3 - 11.290).abs() < 1e-3);
        assert_eq!(g.nearest(-1.0), 0);
        assert_eq!(g.nearest(1.0), 31);
    }
}

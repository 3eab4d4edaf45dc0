use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_DURATION_S: f64 = 0.5e-3;
pub const MAX_DURATION_S: f64 = 10e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// Parabolic taper, zero at both ends.
    #[default]
    Welch,
    Rect,
}

impl Window {
    /// Weight of sample `n` out of `len`.
    pub fn weight(self, n: usize, len: usize) -> f64 {
        match self {
            Window::Rect => 1.0,
            Window::Welch => {
                if len < 2 {
                    return 1.0;
                }
                let half = (len - 1) as f64 / 2.0;
                let u = (n as f64 - half) / half;
                1.0 - u * u
            }
        }
    }
}

/// Linear FM downsweep emitted by the sonar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Broadcast {
    pub duration: f64,
    pub f_start: f64,
    pub f_end: f64,
    pub sample_rate: f64,
    pub window: Window,
    #[serde(skip)]
    pub samples: Vec<f64>,
}

impl Broadcast {
    /// 100 → 20 kHz sweep sampled at 1 MHz.
    pub fn new(duration: f64, window: Window) -> Result<Self> {
        Self::with_band(duration, 100e3, 20e3, 1e6, window)
    }

    pub fn with_band(duration: f64, f_start: f64, f_end: f64, sample_rate: f64, window: Window) -> Result<Self> {
        if !(MIN_DURATION_S - 1e-12..=MAX_DURATION_S + 1e-12).contains(&duration) {
            return Err(Error::param(format!("broadcast duration {:.4} ms outside [0.5, 10] ms", duration * 1e3)));
        }
        if f_start <= f_end || f_end <= 0.0 {
            return Err(Error::param("broadcast must be a downsweep with positive frequencies"));
        }
        if f_start >= sample_rate / 2.0 {
            return Err(Error::param("sweep start exceeds the Nyquist frequency"));
        }
        let len = (duration * sample_rate).round() as usize;
        let rate = (f_end - f_start) / duration;
        let samples = (0..len)
            .map(|n| {
                let t = n as f64 / sample_rate;
                let phase = 2.0 * PI * (f_start * t + 0.5 * rate * t * t);
                window.weight(n, len) * phase.sin()
            })
            .collect();
        Ok(Broadcast { duration, f_start, f_end, sample_rate, window, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn instantaneous_frequency(&self, t: f64) -> f64 {
        self.f_start + (self.f_end - self.f_start) * t / self.duration
    }

    /// Time at which the sweep passes `freq`.
    pub fn time_at_frequency(&self, freq: f64) -> f64 {
        self.duration * (self.f_start - freq) / (self.f_start - self.f_end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_count_and_window_endpoints() {
        let b = Broadcast::new(3e-3, Window::Welch).unwrap();
        assert_eq!(b.len(), 3000);
        assert_eq!(b.samples[0], 0.0);
        assert!(b.samples[2999].abs() < 1e-15);
        assert_eq!(Window::Welch.weight(0, 3000), 0.0);
        assert_eq!(Window::Welch.weight(2999, 3000), 0.0);
    }

    #[test]
    fn midpoint_frequency() {
        let b = Broadcast::new(1e-3, Window::Welch).unwrap();
        assert!((b.instantaneous_frequency(0.5e-3) - 60e3).abs() < 1e-9);
        assert!((b.time_at_frequency(60e3) - 0.5e-3).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range_duration() {
        assert!(matches!(Broadcast::new(0.4e-3, Window::Welch), Err(Error::Parameter(_))));
        assert!(matches!(Broadcast::new(10.5e-3, Window::Rect), Err(Error::Parameter(_))));
        assert!(Broadcast::new(0.5e-3, Window::Rect).is_ok());
        assert!(Broadcast::new(10e-3, Window::Rect).is_ok());
    }

    /// Short-time zero-crossing frequency tracks the downsweep.
    #[test]
    fn energy_follows_descending_line() {
        let b = Broadcast::new(3e-3, Window::Rect).unwrap();
        let mut last = f64::INFINITY;
        for seg in 0..6 {
            let start = seg * 500;
            let chunk = &b.samples[start..start + 500];
            let crossings = chunk.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
            let est = crossings as f64 / 2.0 / 500e-6;
            let t_mid = (start as f64 + 250.0) / 1e6;
            let expected = b.instantaneous_frequency(t_mid);
            assert!((est - expected).abs() / expected < 0.03, "seg {seg}: {est} vs {expected}");
            assert!(est < last);
            last = est;
        }
    }
}

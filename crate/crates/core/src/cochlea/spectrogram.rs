use serde::{Deserialize, Serialize};

use super::filterbank::ChannelBankOutput;
use crate::error::{Error, Result};

/// Energy-by-band framing and onset-anchored window extraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrogramConfig {
    /// Frame length in samples (0.128 ms at 1 MHz).
    pub window: usize,
    /// Frame hop in samples (0.008 ms at 1 MHz).
    pub hop: usize,
    /// Dynamic range kept below the maximum, dB.
    pub floor_db: f64,
    /// Time bins in the extracted window.
    pub bins: usize,
    /// Frames kept ahead of the detected onset.
    pub margin: usize,
    /// Onset = first frame where this fraction of channels exceed `onset_level`.
    pub onset_fraction: f64,
    pub onset_level: f64,
    /// Samples before the aligned echo onset where framing starts. Equal to
    /// `margin` frames so a noise floor that trips the onset rule at once
    /// still leaves the echo `margin` frames in.
    pub pre_onset: usize,
}

impl Default for SpectrogramConfig {
    fn default() -> Self {
        SpectrogramConfig {
            window: 128,
            hop: 8,
            floor_db: 60.0,
            bins: 250,
            margin: 25,
            onset_fraction: 0.5,
            onset_level: -0.5,
            pre_onset: 200,
        }
    }
}

/// Normalized time–frequency matrix, channel-major with CF ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Cochleagram {
    pub n_channels: usize,
    pub n_bins: usize,
    pub values: Vec<f64>,
    /// Seconds per time bin.
    pub time_bin: f64,
    pub center_freqs: Vec<f64>,
}

impl Cochleagram {
    pub fn new(
        n_channels: usize,
        n_bins: usize,
        values: Vec<f64>,
        time_bin: f64,
        center_freqs: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != n_channels * n_bins {
            return Err(Error::Shape { expected: vec![n_channels, n_bins], actual: vec![values.len()] });
        }
        if center_freqs.len() != n_channels {
            return Err(Error::data("one centre frequency per channel required"));
        }
        Ok(Cochleagram { n_channels, n_bins, values, time_bin, center_freqs })
    }

    pub fn get(&self, channel: usize, bin: usize) -> f64 {
        self.values[channel * self.n_bins + bin]
    }

    pub fn row(&self, channel: usize) -> &[f64] {
        &self.values[channel * self.n_bins..(channel + 1) * self.n_bins]
    }

    /// All channels at one time bin.
    pub fn column(&self, bin: usize) -> Vec<f64> {
        (0..self.n_channels).map(|c| self.get(c, bin)).collect()
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Bins `start..start + len`.
    pub fn crop(&self, start: usize, len: usize) -> Result<Cochleagram> {
        if start + len > self.n_bins {
            return Err(Error::param(format!("crop {}..{} exceeds {} bins", start, start + len, self.n_bins)));
        }
        let values = (0..self.n_channels).flat_map(|c| self.row(c)[start..start + len].iter().copied()).collect();
        Cochleagram::new(self.n_channels, len, values, self.time_bin, self.center_freqs.clone())
    }

    /// Affine map of the values onto [−1, 1].
    pub fn normalized(&self) -> Cochleagram {
        let mut out = self.clone();
        normalize_in_place(&mut out.values);
        out
    }

    /// Consecutive non-overlapping windows of `width` bins.
    pub fn windows(&self, width: usize) -> Vec<Cochleagram> {
        (0..self.n_bins / width).map(|w| self.crop(w * width, width).expect("window in range")).collect()
    }

    /// Time-major sequence: `steps` steps, each the concatenation of
    /// `n_bins / steps` consecutive columns.
    pub fn to_sequence(&self, steps: usize) -> Result<(Vec<f64>, usize)> {
        if steps == 0 || !self.n_bins.is_multiple_of(steps) {
            return Err(Error::param(format!("{} bins do not split into {steps} steps", self.n_bins)));
        }
        let per = self.n_bins / steps;
        let feat = per * self.n_channels;
        let mut out = Vec::with_capacity(steps * feat);
        for s in 0..steps {
            for b in s * per..(s + 1) * per {
                out.extend((0..self.n_channels).map(|c| self.get(c, b)));
            }
        }
        Ok((out, feat))
    }
}

pub(crate) fn normalize_in_place(values: &mut [f64]) {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(hi > lo) {
        values.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let scale = 2.0 / (hi - lo);
    for v in values.iter_mut() {
        *v = ((*v - lo) * scale - 1.0).clamp(-1.0, 1.0);
    }
}

pub fn frame_count(n_samples: usize, window: usize, hop: usize) -> usize {
    if n_samples < window || hop == 0 {
        0
    } else {
        (n_samples - window) / hop + 1
    }
}

/// Band energy per frame, in dB with the configured floor, normalized to
/// [−1, 1], and cut to `bins` frames starting `margin` frames ahead of the
/// echo onset.
pub fn spectrogram(bank: &ChannelBankOutput, cfg: &SpectrogramConfig) -> Result<Cochleagram> {
    let n = bank.n_samples();
    let start = bank.aligned_onset.map_or(0, |o| o.saturating_sub(cfg.pre_onset));
    let frames = frame_count(n.saturating_sub(start), cfg.window, cfg.hop);
    if frames == 0 {
        return Err(Error::data(format!(
            "signal of {} samples is shorter than one {}-sample window",
            n - start,
            cfg.window
        )));
    }
    let n_ch = bank.n_channels();

    let mut db = vec![0.0; n_ch * frames];
    for (c, ch) in bank.channels.iter().enumerate() {
        let seg = &ch[start..];
        let mut prefix = Vec::with_capacity(seg.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &v in seg {
            acc += v * v;
            prefix.push(acc);
        }
        for k in 0..frames {
            let a = k * cfg.hop;
            let e = (prefix[a + cfg.window] - prefix[a]).max(0.0);
            db[c * frames + k] = 10.0 * (e + 1e-300).log10();
        }
    }
    let floor = |vals: &mut [f64]| {
        let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for v in vals.iter_mut() {
            *v = v.max(max - cfg.floor_db);
        }
    };
    floor(&mut db);
    let mut norm = db.clone();
    normalize_in_place(&mut norm);

    let needed = (cfg.onset_fraction * n_ch as f64).ceil() as usize;
    let onset = (0..frames)
        .find(|&k| (0..n_ch).filter(|&c| norm[c * frames + k] > cfg.onset_level).count() >= needed)
        .unwrap_or(0);
    let anchor = onset.saturating_sub(cfg.margin);

    let pad = db.iter().copied().fold(f64::INFINITY, f64::min);
    let mut values = Vec::with_capacity(n_ch * cfg.bins);
    for c in 0..n_ch {
        for k in anchor..anchor + cfg.bins {
            values.push(if k < frames { db[c * frames + k] } else { pad });
        }
    }
    floor(&mut values);
    normalize_in_place(&mut values);
    Cochleagram::new(n_ch, cfg.bins, values, cfg.hop as f64 / bank.sample_rate, bank.center_freqs.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn framing_arithmetic() {
        assert_eq!(frame_count(2128, 128, 8), 251);
        assert_eq!(frame_count(127, 128, 8), 0);
        assert_eq!(frame_count(128, 128, 8), 1);
    }

    #[test]
    fn output_spans_unit_interval() {
        let channels: Vec<Vec<f64>> = (0..8)
            .map(|c| (0..4000).map(|n| ((n * (c + 3)) as f64 * 0.01).sin() * (n as f64 / 4000.0)).collect())
            .collect();
        let bank = ChannelBankOutput {
            center_freqs: (0..8).map(|c| 20e3 + 500.0 * c as f64).collect(),
            sample_rate: 1e6,
            channels,
            crossings: None,
            aligned_onset: Some(600),
        };
        let cfg = SpectrogramConfig::default();
        let cg = spectrogram(&bank, &cfg).unwrap();
        assert_eq!((cg.n_channels, cg.n_bins), (8, 250));
        assert_eq!(cg.min_max(), (-1.0, 1.0));
        assert!((cg.time_bin - 8e-6).abs() < 1e-18);
    }

    #[test]
    fn too_short_is_an_error() {
        let bank = ChannelBankOutput {
            center_freqs: vec![20e3],
            sample_rate: 1e6,
            channels: vec![vec![1.0; 100]],
            crossings: None,
            aligned_onset: None,
        };
        assert!(matches!(spectrogram(&bank, &SpectrogramConfig::default()), Err(Error::Data(_))));
    }

    #[test]
    fn normalization_is_idempotent() {
        let cg = Cochleagram::new(2, 3, vec![-4.0, 0.5, 2.0, 7.0, 3.3, -1.0], 8e-6, vec![1.0, 2.0]).unwrap();
        let once = cg.normalized();
        let twice = once.normalized();
        assert_eq!(once.min_max(), (-1.0, 1.0));
        for (a, b) in once.values.iter().zip(&twice.values) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn sequence_reshape() {
        // 2 channels × 4 bins, values = 10·channel + bin
        let vals: Vec<f64> = (0..2).flat_map(|c| (0..4).map(move |b| (10 * c + b) as f64)).collect();
        let cg = Cochleagram::new(2, 4, vals, 8e-6, vec![1.0, 2.0]).unwrap();
        let (seq, feat) = cg.to_sequence(4).unwrap();
        assert_eq!(feat, 2);
        assert_eq!(seq, vec![0.0, 10.0, 1.0, 11.0, 2.0, 12.0, 3.0, 13.0]);
        let (seq, feat) = cg.to_sequence(2).unwrap();
        assert_eq!(feat, 4);
        assert_eq!(seq[..4], [0.0, 10.0, 1.0, 11.0]);
        assert!(cg.to_sequence(3).is_err());
        let w = cg.windows(2);
        assert_eq!(w.len(), 2);
        assert_eq!(w[1].row(1), &[12.0, 13.0]);
    }
}

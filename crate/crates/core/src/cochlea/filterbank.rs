use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dapgf::FilterbankSpec;
use crate::echo::TimeSeries;
use crate::error::{Error, Result};

/// Per-channel threshold crossings on the broadcast and on the echo.
///
/// `broadcast` and `echo` are the corrected tables used for dechirping;
/// `*_raw` hold what the threshold detector actually saw. `None` flags a
/// channel as missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingTable {
    pub broadcast_raw: Vec<Option<usize>>,
    pub echo_raw: Vec<Option<usize>>,
    pub broadcast: Vec<Option<usize>>,
    pub echo: Vec<Option<usize>>,
    /// Per-channel thresholds used for the two searches.
    pub broadcast_threshold: Vec<f64>,
    pub echo_threshold: Vec<f64>,
    /// Median echo − broadcast delay over channels with both raw crossings.
    pub median_delay: Option<f64>,
}

impl CrossingTable {
    /// Corrected echo − broadcast delay per channel.
    pub fn delays(&self) -> Vec<Option<i64>> {
        self.broadcast
            .iter()
            .zip(&self.echo)
            .map(|(b, e)| Some(e.as_ref()?.to_owned() as i64 - *b.as_ref()? as i64))
            .collect()
    }
}

/// Filterbank output: one row per channel, CF ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelBankOutput {
    pub center_freqs: Vec<f64>,
    pub sample_rate: f64,
    pub channels: Vec<Vec<f64>>,
    pub crossings: Option<CrossingTable>,
    /// Sample index where every channel's echo onset sits after dechirping.
    pub aligned_onset: Option<usize>,
}

impl ChannelBankOutput {
    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn n_samples(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    /// Index of the channel whose CF is closest to `freq`.
    pub fn channel_for(&self, freq: f64) -> Option<usize> {
        self.center_freqs
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - freq).abs().total_cmp(&(b.1 - freq).abs()))
            .map(|(i, _)| i)
    }
}

/// Runs every DAPGF channel over the series.
pub fn filterbank_apply(ts: &TimeSeries, spec: &FilterbankSpec) -> Result<ChannelBankOutput> {
    if (ts.sample_rate - spec.sample_rate).abs() > 1e-9 * spec.sample_rate {
        return Err(Error::param(format!(
            "sample rate {} Hz does not match filterbank rate {} Hz",
            ts.sample_rate, spec.sample_rate
        )));
    }
    let filters = spec.design()?;
    let channels = filters.par_iter().map(|f| f.apply(&ts.samples)).collect();
    Ok(ChannelBankOutput {
        center_freqs: spec.center_freqs(),
        sample_rate: spec.sample_rate,
        channels,
        crossings: None,
        aligned_onset: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp;
    use crate::echo::{Broadcast, Window};
    use std::f64::consts::PI;

    #[test]
    fn tone_peaks_in_matching_channel() {
        let x: Vec<f64> = (0..6000).map(|n| (2.0 * PI * 60e3 * n as f64 / 1e6).sin()).collect();
        let ts = TimeSeries::new(x, 1e6).unwrap();
        let bank = filterbank_apply(&ts, &FilterbankSpec::default()).unwrap();
        let levels: Vec<f64> = bank.channels.iter().map(|c| dsp::rms(&c[3000..])).collect();
        let best = dsp::argmax(&levels).unwrap();
        assert_eq!(bank.center_freqs[best], 60e3);
    }

    #[test]
    fn silence_in_silence_out() {
        let ts = TimeSeries::new(vec![0.0; 1000], 1e6).unwrap();
        let bank = filterbank_apply(&ts, &FilterbankSpec::default()).unwrap();
        assert_eq!(bank.n_channels(), 161);
        assert_eq!(bank.n_samples(), 1000);
        assert!(bank.channels.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn sample_rate_mismatch() {
        let ts = TimeSeries::new(vec![0.0; 10], 500e3).unwrap();
        assert!(matches!(filterbank_apply(&ts, &FilterbankSpec::default()), Err(Error::Parameter(_))));
    }

    /// The sweep reaches CF f at t = D·(100k − f)/80k, so envelope peaks
    /// move later as CF drops.
    #[test]
    fn chirp_envelope_peaks_ordered_by_cf() {
        let b = Broadcast::new(3e-3, Window::Welch).unwrap();
        let mut x = b.samples.clone();
        x.resize(6000, 0.0);
        let ts = TimeSeries::new(x, 1e6).unwrap();
        let bank = filterbank_apply(&ts, &FilterbankSpec::default()).unwrap();
        let mut planner = rustfft::FftPlanner::new();
        let peaks: Vec<usize> =
            bank.channels.iter().map(|c| dsp::argmax(&dsp::analytic_envelope(&mut planner, c)).unwrap()).collect();
        // compare every 10th channel (5 kHz apart ≈ 190 µs of sweep)
        for pair in peaks.iter().step_by(10).collect::<Vec<_>>().windows(2) {
            assert!(pair[0] > pair[1], "{pair:?}");
        }
        let mid = bank.channel_for(60e3).unwrap();
        let gd = crate::cochlea::design_dapgf(60e3, &FilterbankSpec::default()).unwrap().group_delay(60e3);
        let t_expected = (b.time_at_frequency(60e3) + gd) * 1e6;
        assert!((peaks[mid] as f64 - t_expected).abs() < 100.0, "{} vs {t_expected}", peaks[mid]);
    }
}

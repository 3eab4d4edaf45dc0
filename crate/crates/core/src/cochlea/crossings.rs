//! Threshold crossings on the broadcast and echo responses of each channel,
//! and dechirping by per-channel left shifts.

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::filterbank::{ChannelBankOutput, CrossingTable};
use crate::dsp;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Threshold {
    /// One amplitude for broadcast and echo alike.
    Absolute { level: f64 },
    /// Fraction of the bank-wide peak envelope, taken separately over the
    /// broadcast responses and over the echo search region.
    Relative { fraction: f64 },
    /// Fraction of each channel's own broadcast peak and own echo-region
    /// peak. Insensitive to the channel's gain.
    PerChannel { fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingConfig {
    pub threshold: Threshold,
    /// Dead time after a channel's broadcast crossing before echo search.
    pub blanking_s: f64,
    /// Largest deviation (samples) from the median delay a raw echo crossing
    /// may have before it is replaced by broadcast crossing + median delay.
    pub tolerance: usize,
    /// CF of the dechirp reference channel.
    pub reference_freq: f64,
}

impl Default for CrossingConfig {
    fn default() -> Self {
        CrossingConfig {
            threshold: Threshold::PerChannel { fraction: 0.1 },
            blanking_s: 3e-3,
            tolerance: 8,
            reference_freq: 100e3,
        }
    }
}

/// First index ≥ `from` where `env` rises to `thr`; the envelope must have
/// been below `thr` at some point at or after `from` first.
fn rising_crossing(env: &[f64], from: usize, thr: f64) -> Option<usize> {
    let mut armed = false;
    for (i, &v) in env.iter().enumerate().skip(from) {
        if v < thr {
            armed = true;
        } else if armed {
            return Some(i);
        }
    }
    None
}

fn first_at_or_above(env: &[f64], thr: f64) -> Option<usize> {
    env.iter().position(|&v| v >= thr)
}

const FILL_NEIGHBOURS: usize = 8;

/// Fills missing crossings from a least-squares line through the nearest
/// valid channels. Linear FM makes crossing time locally linear in CF; the
/// fit is local because the window taper bends the curve near the band edges.
fn fill_by_line(cfs: &[f64], raw: &[Option<usize>]) -> Vec<Option<usize>> {
    let valid: Vec<usize> = (0..raw.len()).filter(|&i| raw[i].is_some()).collect();
    if valid.len() < 2 {
        return raw.to_vec();
    }
    (0..raw.len())
        .map(|i| {
            raw[i].or_else(|| {
                let mut near = valid.clone();
                near.sort_by_key(|&j| (j as isize - i as isize).unsigned_abs());
                near.truncate(FILL_NEIGHBOURS);
                let n = near.len() as f64;
                let mx = near.iter().map(|&j| cfs[j]).sum::<f64>() / n;
                let my = near.iter().map(|&j| raw[j].unwrap() as f64).sum::<f64>() / n;
                let sxx: f64 = near.iter().map(|&j| (cfs[j] - mx).powi(2)).sum();
                let sxy: f64 = near.iter().map(|&j| (cfs[j] - mx) * (raw[j].unwrap() as f64 - my)).sum();
                let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
                Some((my + slope * (cfs[i] - mx)).round().max(0.0) as usize)
            })
        })
        .collect()
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

/// Finds broadcast and echo crossings on every channel's analytic envelope.
///
/// Broadcast crossings missing on weak edge channels are filled from a
/// linear fit over CF. Echo crossings are then corrected so that each
/// channel's echo − broadcast delay stays within `tolerance` samples of the
/// median delay.
pub fn detect_crossings(bank: &ChannelBankOutput, cfg: &CrossingConfig) -> Result<CrossingTable> {
    let envelopes: Vec<Vec<f64>> =
        bank.channels.par_iter().map_init(FftPlanner::new, |planner, ch| dsp::analytic_envelope(planner, ch)).collect();
    detect_crossings_from_envelopes(bank, &envelopes, cfg)
}

/// Echo-region peaks this far below the broadcast peak are treated as
/// silence, so filter ringdown or rounding residue never yields an echo.
const ECHO_FLOOR: f64 = 1e-6;

fn peak(x: &[f64]) -> f64 {
    x.iter().copied().fold(0.0, f64::max)
}

pub fn detect_crossings_from_envelopes(
    bank: &ChannelBankOutput,
    envelopes: &[Vec<f64>],
    cfg: &CrossingConfig,
) -> Result<CrossingTable> {
    let n_ch = envelopes.len();
    let blank = (cfg.blanking_s * bank.sample_rate).round() as usize;
    let global_peak = envelopes.iter().map(|e| peak(e)).fold(0.0, f64::max);
    let fraction = match cfg.threshold {
        Threshold::Absolute { level } if !(level > 0.0) => {
            return Err(Error::param("crossing threshold must be positive"));
        }
        Threshold::Absolute { .. } => 1.0,
        Threshold::Relative { fraction } | Threshold::PerChannel { fraction } => {
            if !(fraction > 0.0 && fraction < 1.0) {
                return Err(Error::param("relative threshold must lie in (0, 1)"));
            }
            fraction
        }
    };

    let broadcast_threshold: Vec<f64> = match cfg.threshold {
        Threshold::Absolute { level } => vec![level; n_ch],
        Threshold::Relative { .. } => vec![fraction * global_peak; n_ch],
        Threshold::PerChannel { .. } => envelopes.iter().map(|e| fraction * peak(e)).collect(),
    };
    let broadcast_raw: Vec<Option<usize>> = envelopes
        .iter()
        .zip(&broadcast_threshold)
        .map(|(e, &t)| if t > 0.0 { first_at_or_above(e, t) } else { None })
        .collect();
    let broadcast = fill_by_line(&bank.center_freqs, &broadcast_raw);

    let region_peak: Vec<f64> =
        envelopes.iter().zip(&broadcast).map(|(e, b)| b.and_then(|b| e.get(b + blank..)).map_or(0.0, peak)).collect();
    let echo_threshold: Vec<f64> = match cfg.threshold {
        Threshold::Absolute { level } => vec![level; n_ch],
        Threshold::Relative { .. } => vec![fraction * region_peak.iter().copied().fold(0.0, f64::max); n_ch],
        Threshold::PerChannel { .. } => region_peak.iter().map(|p| fraction * p).collect(),
    };
    let echo_raw: Vec<Option<usize>> = envelopes
        .iter()
        .zip(&broadcast)
        .zip(echo_threshold.iter().zip(&region_peak))
        .map(
            |((e, b), (&t, &p))| {
                if t > 0.0 && p > ECHO_FLOOR * global_peak {
                    rising_crossing(e, (*b)? + blank, t)
                } else {
                    None
                }
            },
        )
        .collect();

    let mut delays: Vec<f64> = broadcast_raw
        .iter()
        .zip(&echo_raw)
        .filter_map(|(b, e)| Some(e.as_ref().copied()? as f64 - b.as_ref().copied()? as f64))
        .collect();
    let median_delay = median(&mut delays);

    let echo = match median_delay {
        None => vec![None; envelopes.len()],
        Some(md) => broadcast
            .iter()
            .zip(&echo_raw)
            .map(|(b, e)| {
                let b = (*b)? as f64;
                let expected = b + md;
                Some(match e {
                    Some(e) if (*e as f64 - expected).abs() <= cfg.tolerance as f64 => *e,
                    _ => expected.round() as usize,
                })
            })
            .collect(),
    };

    Ok(CrossingTable { broadcast_raw, echo_raw, broadcast, echo, broadcast_threshold, echo_threshold, median_delay })
}

/// Left-shifts each channel by (its echo crossing − reference echo crossing)
/// so that echo onsets line up; vacated samples are zero.
pub fn dechirp(bank: &ChannelBankOutput, crossings: &CrossingTable, reference_freq: f64) -> Result<ChannelBankOutput> {
    let r = bank.channel_for(reference_freq).ok_or_else(|| Error::Dechirp("empty filterbank".into()))?;
    let reference = crossings.echo.get(r).copied().flatten().ok_or_else(|| {
        Error::Dechirp(format!("no echo crossing on the {:.1} kHz reference channel", bank.center_freqs[r] / 1e3))
    })?;
    let n = bank.n_samples();
    let channels = bank
        .channels
        .iter()
        .zip(shifts(crossings, reference))
        .map(|(ch, shift)| shift_left(ch, shift.unwrap_or(0), n))
        .collect();
    Ok(ChannelBankOutput {
        center_freqs: bank.center_freqs.clone(),
        sample_rate: bank.sample_rate,
        channels,
        crossings: Some(crossings.clone()),
        aligned_onset: Some(reference),
    })
}

/// Shift applied to each channel; `None` for channels without an echo
/// crossing, which are left in place.
pub fn shifts(crossings: &CrossingTable, reference: usize) -> Vec<Option<i64>> {
    crossings.echo.iter().map(|e| e.map(|e| e as i64 - reference as i64)).collect()
}

fn shift_left(x: &[f64], shift: i64, n: usize) -> Vec<f64> {
    (0..n as i64)
        .map(|i| {
            let src = i + shift;
            if (0..n as i64).contains(&src) {
                x[src as usize]
            } else {
                0.0
            }
        })
        .collect()
}

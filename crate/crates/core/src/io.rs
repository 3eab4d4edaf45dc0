//! Raw little-endian f32 arrays with JSON sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cochlea::{Cochleagram, FilterbankSpec};
use crate::echo::{Target, TimeSeries};
use crate::error::{Error, Result};

pub fn write_f32(path: &Path, values: &[f64]) -> Result<()> {
    let bytes: Vec<u8> = values.iter().flat_map(|&v| (v as f32).to_le_bytes()).collect();
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_f32(path: &Path) -> Result<Vec<f64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() % 4 != 0 {
        return Err(Error::data(format!("{}: length {} is not a multiple of 4", path.display(), bytes.len())));
    }
    Ok(bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64).collect())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::data(format!("{}: {e}", path.display())))
}

/// `x.f32` → `x.json`.
pub fn sidecar_path(data: &Path) -> PathBuf {
    data.with_extension("json")
}

/// Rounds through f32, the storage precision.
pub fn quantize(values: &mut [f64]) {
    for v in values {
        *v = *v as f32 as f64;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesMeta {
    pub sample_rate: f64,
    pub seed: u64,
    pub target: Target,
    /// `None` when noise was off.
    pub snr_db: Option<f64>,
    pub broadcast_duration: f64,
}

pub fn write_time_series(path: &Path, ts: &TimeSeries, meta: &TimeSeriesMeta) -> Result<()> {
    write_f32(path, &ts.samples)?;
    write_json(&sidecar_path(path), meta)
}

pub fn read_time_series(path: &Path) -> Result<(TimeSeries, TimeSeriesMeta)> {
    let meta: TimeSeriesMeta = read_json(&sidecar_path(path))?;
    let ts = TimeSeries::new(read_f32(path)?, meta.sample_rate)?;
    Ok((ts, meta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CochleagramMeta {
    #[serde(rename = "T")]
    pub n_bins: usize,
    pub n_channels: usize,
    pub time_bin_s: f64,
    pub f_low: f64,
    pub f_high: f64,
    pub step: f64,
}

impl CochleagramMeta {
    pub fn of(cg: &Cochleagram) -> Self {
        let f = &cg.center_freqs;
        CochleagramMeta {
            n_bins: cg.n_bins,
            n_channels: cg.n_channels,
            time_bin_s: cg.time_bin,
            f_low: f.first().copied().unwrap_or(0.0),
            f_high: f.last().copied().unwrap_or(0.0),
            step: if f.len() > 1 { f[1] - f[0] } else { 0.0 },
        }
    }

    pub fn center_freqs(&self) -> Vec<f64> {
        (0..self.n_channels).map(|i| self.f_low + self.step * i as f64).collect()
    }
}

pub fn write_cochleagram(path: &Path, cg: &Cochleagram) -> Result<()> {
    write_f32(path, &cg.values)?;
    write_json(&sidecar_path(path), &CochleagramMeta::of(cg))
}

/// Reads the matrix and its shape; `extra` sidecar fields are ignored.
pub fn read_cochleagram(path: &Path) -> Result<Cochleagram> {
    let meta: CochleagramMeta = read_json(&sidecar_path(path))?;
    Cochleagram::new(meta.n_channels, meta.n_bins, read_f32(path)?, meta.time_bin_s, meta.center_freqs())
}

/// Sidecar check used when a cochleagram came from the default bank.
pub fn matches_filterbank(meta: &CochleagramMeta, spec: &FilterbankSpec) -> bool {
    meta.n_channels == spec.channel_count()
        && (meta.f_low - spec.f_low).abs() < 1e-6
        && (meta.step - spec.step).abs() < 1e-6
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cochleagram_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cfs: Vec<f64> = (0..3).map(|i| 20e3 + 500.0 * i as f64).collect();
        let mut vals: Vec<f64> = (0..12).map(|i| (i as f64 * 0.37).sin()).collect();
        quantize(&mut vals);
        let cg = Cochleagram::new(3, 4, vals, 8e-6, cfs).unwrap();
        let p = dir.path().join("a.f32");
        write_cochleagram(&p, &cg).unwrap();
        let back = read_cochleagram(&p).unwrap();
        assert_eq!(back.values, cg.values);
        assert_eq!(back.center_freqs, cg.center_freqs);
        assert_eq!(back.time_bin, cg.time_bin);
        let meta: serde_json::Value = read_json(&sidecar_path(&p)).unwrap();
        assert_eq!(meta["T"], 4);
    }

    #[test]
    fn truncated_file_is_a_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.f32");
        fs::write(&p, [0u8; 6]).unwrap();
        assert!(matches!(read_f32(&p), Err(Error::Data(_))));
    }
}

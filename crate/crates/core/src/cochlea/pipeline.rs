use serde::{Deserialize, Serialize};

use super::crossings::{dechirp, detect_crossings, CrossingConfig};
use super::dapgf::FilterbankSpec;
use super::filterbank::{filterbank_apply, CrossingTable};
use super::spectrogram::{spectrogram, Cochleagram, SpectrogramConfig};
use crate::echo::TimeSeries;
use crate::error::Result;

/// Time series → filterbank → crossings → dechirp → cochleagram.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CochleagramPipeline {
    pub filterbank: FilterbankSpec,
    pub crossings: CrossingConfig,
    pub spectrogram: SpectrogramConfig,
}

/// Cochleagram plus the intermediate crossing table.
#[derive(Debug, Clone)]
pub struct CochleagramRun {
    pub cochleagram: Cochleagram,
    pub crossings: CrossingTable,
    pub aligned_onset: usize,
}

impl CochleagramPipeline {
    pub fn run(&self, ts: &TimeSeries) -> Result<Cochleagram> {
        Ok(self.run_detailed(ts)?.cochleagram)
    }

    pub fn run_detailed(&self, ts: &TimeSeries) -> Result<CochleagramRun> {
        let bank = filterbank_apply(ts, &self.filterbank)?;
        let crossings = detect_crossings(&bank, &self.crossings)?;
        let aligned = dechirp(&bank, &crossings, self.crossings.reference_freq)?;
        drop(bank);
        let cochleagram = spectrogram(&aligned, &self.spectrogram)?;
        Ok(CochleagramRun { cochleagram, crossings, aligned_onset: aligned.aligned_onset.unwrap_or(0) })
    }
}

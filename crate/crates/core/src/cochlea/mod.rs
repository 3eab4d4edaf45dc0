//! DAPGF cochlear filterbank, crossing detection, dechirping, and the
//! energy-by-band auditory spectrogram.

pub mod crossings;
pub mod dapgf;
pub mod filterbank;
pub mod pipeline;
pub mod ripple;
pub mod spectrogram;

pub use crossings::{dechirp, detect_crossings, CrossingConfig, Threshold};
pub use dapgf::{design_dapgf, DapgfFilter, FilterbankSpec};
pub use filterbank::{filterbank_apply, ChannelBankOutput, CrossingTable};
pub use pipeline::{CochleagramPipeline, CochleagramRun};
pub use ripple::{notch_spacing, ripple_profile};
pub use spectrogram::{frame_count, spectrogram, Cochleagram, SpectrogramConfig};

//! Target geometry from a cochleagram: per-window glint-spacing estimates,
//! change points in the estimate sequence, and per-pair spacings.

mod changepoint;
mod grid;
mod reconstruct;
mod trace;

pub use changepoint::{
    default_penalty, detect_change_points, mode, noise_variance, optimal_segmentation, verify, ChangePointConfig,
    LinearCost, QUANTIZATION_VARIANCE,
};
pub use grid::{ripple_interval, GsClassGrid};
pub use reconstruct::{analyze, reconstruct, ReconstructionReport, Segment};
pub use trace::{sliding_estimate, EstimateTrace};

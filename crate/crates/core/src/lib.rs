//! Echo simulation, cochlear front end, and neural glint analysis for
//! FM bat-sonar target geometry.
//!
//! The pipeline runs: [`echo`] synthesizes a broadcast and its multi-glint
//! echo, [`cochlea`] turns the record into a dechirped, normalized
//! cochleagram, [`nn`] classifies glint count or glint spacing, and
//! [`glint`] strings per-window spacing estimates into a target geometry.

// `!(x > 0.0)` is the deliberate way to reject NaN along with bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cochlea;
pub mod dataset;
pub mod dsp;
pub mod echo;
pub mod error;
pub mod experiment;
pub mod glint;
pub mod io;
pub mod metrics;
pub mod nn;

pub use cochlea::{Cochleagram, CochleagramPipeline, FilterbankSpec};
pub use echo::{Broadcast, EchoModelConstants, SonarGeometry, Target, TimeSeries};
pub use error::{Error, Result};

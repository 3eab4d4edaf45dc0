use serde::{Deserialize, Serialize};

use crate::cochlea::Cochleagram;
use crate::error::{Error, Result};
use crate::nn::{ArchOptions, Architecture, Network};

/// Spacing-class estimate of each non-overlapping window of a cochleagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateTrace {
    pub classes: Vec<usize>,
    pub window_starts: Vec<usize>,
    pub window: usize,
}

impl EstimateTrace {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Classifies every `window`-bin slice of `cg` with the spacing network.
/// The network input must be `window × channels`.
pub fn sliding_estimate(cg: &Cochleagram, net: &Network, window: usize) -> Result<EstimateTrace> {
    let expected = vec![window, cg.n_channels];
    if net.input_shape != expected {
        return Err(Error::Shape { expected: net.input_shape.clone(), actual: expected });
    }
    if window == 0 || cg.n_bins < window {
        return Err(Error::data(format!("cochleagram of {} bins holds no {window}-bin window", cg.n_bins)));
    }
    let windows = cg.windows(window);
    let refs: Vec<&Cochleagram> = windows.iter().collect();
    let x = Architecture::Gs.batch(&refs, &ArchOptions::default())?;
    let classes = net.predict(&x, 64)?;
    Ok(EstimateTrace { window_starts: (0..classes.len()).map(|i| i * window).collect(), classes, window })
}

//! Network presets for glint-count classification and glint-spacing
//! estimation, and the matching cochleagram → tensor conversions.

use serde::{Deserialize, Serialize};

use super::loss::LossKind;
use super::network::{LayerSpec, Network};
use super::tensor::Tensor;
use crate::cochlea::Cochleagram;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// Convolutional glint-count classifier on whole cochleagrams.
    Cnn,
    /// LSTM glint-count classifier on cochleagram column sequences.
    Rnn,
    /// LSTM glint-spacing classifier on five-bin windows.
    Gs,
}

impl std::str::FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cnn" => Ok(Architecture::Cnn),
            "rnn" => Ok(Architecture::Rnn),
            "gs" => Ok(Architecture::Gs),
            _ => Err(Error::param(format!("unknown architecture {s:?} (cnn, rnn, gs)"))),
        }
    }
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Architecture::Cnn => "cnn",
            Architecture::Rnn => "rnn",
            Architecture::Gs => "gs",
        })
    }
}

/// Tunable sizes of the presets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchOptions {
    /// Filters of the four conv blocks.
    pub cnn_filters: Vec<usize>,
    pub cnn_kernel: usize,
    pub cnn_dropout: f64,
    /// Units of the three stacked LSTMs.
    pub lstm_units: Vec<usize>,
    pub lstm_dropout: f64,
    /// Sequence length the classifier RNN reads a cochleagram as.
    pub rnn_steps: usize,
}

impl Default for ArchOptions {
    fn default() -> Self {
        ArchOptions {
            cnn_filters: vec![4, 8, 16, 32],
            cnn_kernel: 3,
            cnn_dropout: 0.5,
            lstm_units: vec![128, 64, 32],
            lstm_dropout: 0.3,
            rnn_steps: 250,
        }
    }
}

/// conv → batch norm → relu → 2×2 max pool per block, then dropout,
/// flatten, dense, softmax.
pub fn cnn_specs(filters: &[usize], kernel: usize, dropout: f64, classes: usize) -> Vec<LayerSpec> {
    let mut s = Vec::new();
    for &f in filters {
        s.extend([
            LayerSpec::Conv2d { filters: f, kernel },
            LayerSpec::BatchNorm,
            LayerSpec::Relu,
            LayerSpec::MaxPool2d,
        ]);
    }
    s.extend([
        LayerSpec::Dropout { p: dropout },
        LayerSpec::Flatten,
        LayerSpec::Dense { units: classes },
        LayerSpec::Softmax,
    ]);
    s
}

/// Stacked sequence-returning LSTMs with batch norm and dropout between
/// them, then flatten, dense, sigmoid.
pub fn rnn_specs(units: &[usize], dropout: f64, classes: usize) -> Vec<LayerSpec> {
    let mut s = Vec::new();
    for (i, &u) in units.iter().enumerate() {
        s.push(LayerSpec::Lstm { units: u, return_sequences: true });
        if i + 1 < units.len() {
            s.extend([LayerSpec::BatchNorm, LayerSpec::Dropout { p: dropout }]);
        }
    }
    s.extend([LayerSpec::Flatten, LayerSpec::Dense { units: classes }, LayerSpec::Sigmoid]);
    s
}

impl Architecture {
    pub fn classes(self) -> usize {
        match self {
            Architecture::Cnn | Architecture::Rnn => 4,
            Architecture::Gs => 32,
        }
    }

    pub fn loss(self) -> LossKind {
        match self {
            Architecture::Cnn => LossKind::cross_entropy(),
            Architecture::Rnn | Architecture::Gs => LossKind::BinaryCrossEntropy,
        }
    }

    /// Per-sample input shape for cochleagrams of `channels × bins`.
    pub fn input_shape(self, channels: usize, bins: usize, opts: &ArchOptions) -> Vec<usize> {
        match self {
            Architecture::Cnn => vec![1, channels, bins],
            Architecture::Rnn => vec![opts.rnn_steps, channels * bins / opts.rnn_steps.max(1)],
            Architecture::Gs => vec![bins, channels],
        }
    }

    pub fn specs(self, opts: &ArchOptions) -> Vec<LayerSpec> {
        match self {
            Architecture::Cnn => cnn_specs(&opts.cnn_filters, opts.cnn_kernel, opts.cnn_dropout, self.classes()),
            Architecture::Rnn | Architecture::Gs => rnn_specs(&opts.lstm_units, opts.lstm_dropout, self.classes()),
        }
    }

    pub fn build(self, channels: usize, bins: usize, opts: &ArchOptions, seed: u64) -> Result<Network> {
        Network::build(&self.input_shape(channels, bins, opts), &self.specs(opts), seed)
    }

    /// Flattened network input of one cochleagram.
    pub fn encode(self, cg: &Cochleagram, opts: &ArchOptions) -> Result<Vec<f64>> {
        match self {
            Architecture::Cnn => Ok(cg.values.clone()),
            Architecture::Rnn => Ok(cg.to_sequence(opts.rnn_steps)?.0),
            Architecture::Gs => Ok(cg.to_sequence(cg.n_bins)?.0),
        }
    }

    /// Batch tensor of several cochleagrams of equal size.
    pub fn batch(self, cgs: &[&Cochleagram], opts: &ArchOptions) -> Result<Tensor> {
        let first = cgs.first().ok_or_else(|| Error::data("no cochleagrams to encode"))?;
        let mut shape = vec![cgs.len()];
        shape.extend(self.input_shape(first.n_channels, first.n_bins, opts));
        let mut data = Vec::with_capacity(shape.iter().product());
        for cg in cgs {
            if (cg.n_channels, cg.n_bins) != (first.n_channels, first.n_bins) {
                return Err(Error::data("cochleagrams in a batch must share one size"));
            }
            data.extend(self.encode(cg, opts)?);
        }
        Tensor::new(shape, data)
    }
}

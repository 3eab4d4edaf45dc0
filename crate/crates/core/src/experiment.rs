//! Glue between corpora and networks: labeled tensors, training runs, and
//! their scores.

use serde::{Deserialize, Serialize};

use crate::dataset::{CorpusKind, Dataset, Split};
use crate::error::{Error, Result};
use crate::metrics::ConfusionMatrix;
use crate::nn::{evaluate, train, ArchOptions, Architecture, History, LabeledSet, Network, TrainConfig};
use crate::Cochleagram;

/// Glint-count samples of one split, labeled `count − 1`.
pub fn classify_set(ds: &Dataset, split: Split, arch: Architecture, opts: &ArchOptions) -> Result<LabeledSet> {
    if ds.manifest.config.kind == CorpusKind::Gs || arch == Architecture::Gs {
        return Err(Error::data("glint-count training needs a classify or eval corpus and a cnn or rnn"));
    }
    let idx = ds.manifest.indices(split);
    if idx.is_empty() {
        return Err(Error::data(format!("corpus has no {split:?} samples")));
    }
    let cgs: Vec<&Cochleagram> = idx.iter().map(|&i| &ds.cochleagrams[i]).collect();
    let labels = idx.iter().map(|&i| ds.manifest.samples[i].label_glint_count - 1).collect();
    LabeledSet::new(arch.batch(&cgs, opts)?, labels, arch.classes())
}

/// Windows of a spacing corpus labeled with their spacing class.
pub fn gs_set(ds: &Dataset) -> Result<LabeledSet> {
    if ds.manifest.config.kind != CorpusKind::Gs {
        return Err(Error::data("spacing training needs a gs corpus"));
    }
    let windows = ds.gs_windows();
    let refs: Vec<&Cochleagram> = windows.iter().map(|(c, _)| c).collect();
    let x = Architecture::Gs.batch(&refs, &ArchOptions::default())?;
    let classes = ds.manifest.config.grid.n_classes();
    LabeledSet::new(x, windows.iter().map(|w| w.1).collect(), classes)
}

/// Options that reproduce the encoding a network expects.
pub fn options_for(arch: Architecture, net: &Network) -> ArchOptions {
    let mut opts = ArchOptions::default();
    if arch == Architecture::Rnn {
        opts.rnn_steps = net.input_shape[0];
    }
    opts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub loss: f64,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
}

pub fn score(net: &Network, set: &LabeledSet, arch: Architecture) -> Result<Scores> {
    let (loss, accuracy) = evaluate(net, set, &arch.loss(), 64)?;
    let predicted = net.predict(&set.inputs, 64)?;
    Ok(Scores { loss, accuracy, confusion: ConfusionMatrix::new(&set.labels, &predicted, set.classes)? })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierRun {
    pub seed: u64,
    pub history: History,
    pub validation: Scores,
    pub eval: Option<Scores>,
}

/// Trains a glint-count classifier on the train split, scoring the
/// validation split and, if given, a held-out corpus. `cfg.seed` seeds both
/// initialization and shuffling.
pub fn train_classifier(
    corpus: &Dataset,
    held_out: Option<&Dataset>,
    arch: Architecture,
    opts: &ArchOptions,
    cfg: &TrainConfig,
) -> Result<(Network, ClassifierRun)> {
    let train_set = classify_set(corpus, Split::Train, arch, opts)?;
    let val_set = classify_set(corpus, Split::Validation, arch, opts)?;
    let (ch, bins) = shape_of(corpus)?;
    let mut net = arch.build(ch, bins, opts, cfg.seed)?;
    let cfg = TrainConfig { loss: arch.loss(), ..cfg.clone() };
    let history = train(&mut net, &train_set, Some(&val_set), &cfg)?;
    let validation = score(&net, &val_set, arch)?;
    let eval =
        held_out.map(|ds| classify_set(ds, Split::Eval, arch, opts).and_then(|s| score(&net, &s, arch))).transpose()?;
    let run = ClassifierRun { seed: cfg.seed, history, validation, eval };
    Ok((net, run))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingRun {
    pub seed: u64,
    pub history: History,
    /// Inference-mode scores on the training windows.
    pub train: Scores,
}

pub fn train_spacing(corpus: &Dataset, opts: &ArchOptions, cfg: &TrainConfig) -> Result<(Network, SpacingRun)> {
    let set = gs_set(corpus)?;
    let window = corpus.manifest.config.recipe.gs_window;
    let (ch, _) = shape_of(corpus)?;
    let mut net = Architecture::Gs.build(ch, window, opts, cfg.seed)?;
    let cfg = TrainConfig { loss: Architecture::Gs.loss(), ..cfg.clone() };
    let history = train(&mut net, &set, None, &cfg)?;
    let train = score(&net, &set, Architecture::Gs)?;
    Ok((net, SpacingRun { seed: cfg.seed, history, train }))
}

fn shape_of(ds: &Dataset) -> Result<(usize, usize)> {
    ds.cochleagrams.first().map(|c| (c.n_channels, c.n_bins)).ok_or_else(|| Error::data("corpus is empty"))
}

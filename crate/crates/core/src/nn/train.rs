use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::{one_hot, LossKind};
use super::network::{argmax_rows, Network};
use super::optim::{Optimizer, OptimizerKind};
use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    /// Seeds the mini-batch shuffling.
    pub seed: u64,
    pub loss: LossKind,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 32,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::default(),
            seed: 0,
            loss: LossKind::cross_entropy(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::param("batch size must be at least 1"));
        }
        if !(self.learning_rate >= 0.0) {
            return Err(Error::param("learning rate must be non-negative"));
        }
        Ok(())
    }
}

/// Inputs stacked along the batch axis with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub inputs: Tensor,
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl LabeledSet {
    pub fn new(inputs: Tensor, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if inputs.batch() != labels.len() {
            return Err(Error::data(format!("{} inputs but {} labels", inputs.batch(), labels.len())));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::data(format!("label {l} outside {classes} classes")));
        }
        Ok(LabeledSet { inputs, labels, classes })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Batch-averaged over the epoch in training mode.
    pub train_loss: f64,
    pub train_accuracy: f64,
    /// Inference mode, after the epoch.
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochStats>,
}

impl History {
    pub fn last(&self) -> Option<&EpochStats> {
        self.epochs.last()
    }
}

/// Loss and accuracy in inference mode.
pub fn evaluate(net: &Network, set: &LabeledSet, loss: &LossKind, batch: usize) -> Result<(f64, f64)> {
    if set.is_empty() {
        return Err(Error::data("cannot evaluate an empty set"));
    }
    let idx: Vec<usize> = (0..set.len()).collect();
    let (mut total, mut correct) = (0.0, 0usize);
    for chunk in idx.chunks(batch.max(1)) {
        let y = net.infer(&set.inputs.gather(chunk))?;
        let labels: Vec<usize> = chunk.iter().map(|&i| set.labels[i]).collect();
        total += loss.value(&y, &one_hot(&labels, set.classes))? * chunk.len() as f64;
        correct += argmax_rows(&y).iter().zip(&labels).filter(|(a, b)| a == b).count();
    }
    Ok((total / set.len() as f64, correct as f64 / set.len() as f64))
}

/// Mini-batch training with seeded shuffling. Deterministic given the
/// network seed and `cfg.seed`.
pub fn train(net: &mut Network, data: &LabeledSet, val: Option<&LabeledSet>, cfg: &TrainConfig) -> Result<History> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::data("training set is empty"));
    }
    if net.output_shape != [data.classes] {
        return Err(Error::data(format!(
            "network outputs {:?} but the data has {} classes",
            net.output_shape, data.classes
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut opt = Optimizer::new(cfg.optimizer.clone(), cfg.learning_rate);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = History::default();
    net.zero_grad();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let (mut loss_sum, mut correct) = (0.0, 0usize);
        for chunk in order.chunks(cfg.batch_size) {
            let x = data.inputs.gather(chunk);
            let labels: Vec<usize> = chunk.iter().map(|&i| data.labels[i]).collect();
            let (y, tape) = net.forward_train(&x)?;
            let (loss, grad) = cfg.loss.value_and_grad(&y, &one_hot(&labels, data.classes))?;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, loss });
            }
            loss_sum += loss * chunk.len() as f64;
            correct += argmax_rows(&y).iter().zip(&labels).filter(|(a, b)| a == b).count();
            net.backward(tape, grad)?;
            opt.step(net.params_mut());
            net.zero_grad();
        }
        let (val_loss, val_accuracy) = match val {
            Some(v) if !v.is_empty() => {
                let (l, a) = evaluate(net, v, &cfg.loss, cfg.batch_size.max(32))?;
                (Some(l), Some(a))
            }
            _ => (None, None),
        };
        history.epochs.push(EpochStats {
            epoch,
            train_loss: loss_sum / data.len() as f64,
            train_accuracy: correct as f64 / data.len() as f64,
            val_loss,
            val_accuracy,
        });
    }
    Ok(history)
}

//! Classification losses and their gradients with respect to the network
//! output.

use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use crate::error::{Error, Result};

const CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossKind {
    /// −(1/N) Σₙ Σᵢ wᵢ tₙᵢ ln yₙᵢ over softmax outputs; unit weights if `None`.
    WeightedCrossEntropy { weights: Option<Vec<f64>> },
    /// −(1/N) Σₙ Σᵢ [tₙᵢ ln yₙᵢ + (1−tₙᵢ) ln(1−yₙᵢ)] over sigmoid outputs.
    BinaryCrossEntropy,
}

impl LossKind {
    pub fn cross_entropy() -> Self {
        LossKind::WeightedCrossEntropy { weights: None }
    }

    pub fn value(&self, y: &Tensor, t: &Tensor) -> Result<f64> {
        match self {
            LossKind::WeightedCrossEntropy { weights } => weighted_cross_entropy(y, t, weights.as_deref()),
            LossKind::BinaryCrossEntropy => binary_cross_entropy(y, t),
        }
    }

    /// Loss and dL/dy.
    pub fn value_and_grad(&self, y: &Tensor, t: &Tensor) -> Result<(f64, Tensor)> {
        let loss = self.value(y, t)?;
        let n = y.batch() as f64;
        let k = y.sample_len();
        let mut g = Tensor::zeros(&y.shape);
        match self {
            LossKind::WeightedCrossEntropy { weights } => {
                for (i, ((gv, &yv), &tv)) in g.data.iter_mut().zip(&y.data).zip(&t.data).enumerate() {
                    let w = weights.as_ref().map_or(1.0, |w| w[i % k]);
                    if yv >= CLAMP && tv != 0.0 {
                        *gv = -w * tv / (n * yv);
                    }
                }
            }
            LossKind::BinaryCrossEntropy => {
                for ((gv, &yv), &tv) in g.data.iter_mut().zip(&y.data).zip(&t.data) {
                    let mut d = 0.0;
                    if yv >= CLAMP {
                        d -= tv / yv;
                    }
                    if 1.0 - yv >= CLAMP {
                        d += (1.0 - tv) / (1.0 - yv);
                    }
                    *gv = d / n;
                }
            }
        }
        Ok((loss, g))
    }
}

fn check(y: &Tensor, t: &Tensor) -> Result<()> {
    if y.shape != t.shape || y.shape.len() != 2 {
        return Err(Error::Shape { expected: y.shape.clone(), actual: t.shape.clone() });
    }
    Ok(())
}

pub fn weighted_cross_entropy(y: &Tensor, t: &Tensor, weights: Option<&[f64]>) -> Result<f64> {
    check(y, t)?;
    let k = y.shape[1];
    if let Some(w) = weights {
        if w.len() != k {
            return Err(Error::param(format!("{} class weights for {k} classes", w.len())));
        }
    }
    let mut s = 0.0;
    for (i, (&yv, &tv)) in y.data.iter().zip(&t.data).enumerate() {
        if tv != 0.0 {
            let w = weights.map_or(1.0, |w| w[i % k]);
            s += w * tv * yv.clamp(CLAMP, 1.0).ln();
        }
    }
    Ok(-s / y.batch() as f64)
}

pub fn binary_cross_entropy(y: &Tensor, t: &Tensor) -> Result<f64> {
    check(y, t)?;
    let mut s = 0.0;
    for (&yv, &tv) in y.data.iter().zip(&t.data) {
        if tv != 0.0 {
            s += tv * yv.clamp(CLAMP, 1.0).ln();
        }
        if tv != 1.0 {
            s += (1.0 - tv) * (1.0 - yv).clamp(CLAMP, 1.0).ln();
        }
    }
    Ok(-s / y.batch() as f64)
}

pub fn one_hot(labels: &[usize], classes: usize) -> Tensor {
    let mut t = Tensor::zeros(&[labels.len(), classes]);
    for (row, &l) in t.data.chunks_exact_mut(classes).zip(labels) {
        row[l] = 1.0;
    }
    t
}

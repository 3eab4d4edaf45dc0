use serde::{Deserialize, Serialize};

use super::layers::Param;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd { momentum: f64 },
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Default for OptimizerKind {
    fn default() -> Self {
        OptimizerKind::Adam { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Per-parameter optimizer state, aligned with the trainable parameters in
/// declaration order.
#[derive(Debug, Clone)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    moments: Vec<(Vec<f64>, Vec<f64>)>,
    steps: i32,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, learning_rate: f64) -> Self {
        Optimizer { kind, learning_rate, moments: Vec::new(), steps: 0 }
    }

    pub fn step(&mut self, params: Vec<&mut Param>) {
        let mut params: Vec<&mut Param> = params.into_iter().filter(|p| p.trainable).collect();
        if self.moments.is_empty() {
            self.moments = params.iter().map(|p| (vec![0.0; p.len()], vec![0.0; p.len()])).collect();
        }
        self.steps += 1;
        let lr = self.learning_rate;
        for (p, (m, v)) in params.iter_mut().zip(&mut self.moments) {
            match self.kind {
                OptimizerKind::Sgd { momentum } => {
                    for ((w, g), m) in p.value.iter_mut().zip(&p.grad).zip(m.iter_mut()) {
                        *m = momentum * *m - lr * g;
                        *w += *m;
                    }
                }
                OptimizerKind::Adam { beta1, beta2, eps } => {
                    let c1 = 1.0 - beta1.powi(self.steps);
                    let c2 = 1.0 - beta2.powi(self.steps);
                    for (((w, g), m), v) in p.value.iter_mut().zip(&p.grad).zip(m.iter_mut()).zip(v.iter_mut()) {
                        *m = beta1 * *m + (1.0 - beta1) * g;
                        *v = beta2 * *v + (1.0 - beta2) * g * g;
                        *w -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                    }
                }
            }
        }
    }
}

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::*;
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Serializable description of one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv2d { filters: usize, kernel: usize },
    BatchNorm,
    Relu,
    MaxPool2d,
    Dropout { p: f64 },
    Lstm { units: usize, return_sequences: bool },
    Flatten,
    Dense { units: usize },
    Softmax,
    Sigmoid,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv2d(Conv2d),
    BatchNorm(BatchNorm),
    Relu(Relu),
    MaxPool2d(MaxPool2d),
    Dropout(Dropout),
    Lstm(Lstm),
    Flatten(Flatten),
    Dense(Dense),
    Softmax(Softmax),
    Sigmoid(Sigmoid),
}

impl LayerSpec {
    /// Instantiates the layer for per-sample input `shape`; returns it with
    /// its per-sample output shape.
    pub fn build(&self, shape: &[usize], rng: &mut ChaCha8Rng) -> Result<(Layer, Vec<usize>)> {
        let bad = |what: &str| Error::data(format!("{what} cannot follow per-sample shape {shape:?}"));
        Ok(match *self {
            LayerSpec::Conv2d { filters, kernel } => {
                let [c, h, w] = shape else { return Err(bad("conv2d")) };
                (Layer::Conv2d(Conv2d::new(*c, filters, kernel, rng)?), vec![filters, *h, *w])
            }
            LayerSpec::BatchNorm => (Layer::BatchNorm(BatchNorm::new(BatchNorm::features_of(shape)?)), shape.to_vec()),
            LayerSpec::Relu => (Layer::Relu(Relu), shape.to_vec()),
            LayerSpec::MaxPool2d => (Layer::MaxPool2d(MaxPool2d), MaxPool2d::output_shape(shape)?),
            LayerSpec::Dropout { p } => {
                if !(0.0..1.0).contains(&p) {
                    return Err(Error::param(format!("dropout rate {p} outside [0, 1)")));
                }
                (Layer::Dropout(Dropout { p }), shape.to_vec())
            }
            LayerSpec::Lstm { units, return_sequences } => {
                let [t, d] = shape else { return Err(bad("lstm")) };
                let out = if return_sequences { vec![*t, units] } else { vec![units] };
                (Layer::Lstm(Lstm::new(*d, units, return_sequences, rng)), out)
            }
            LayerSpec::Flatten => (Layer::Flatten(Flatten), vec![shape.iter().product()]),
            LayerSpec::Dense { units } => {
                let [n] = shape else { return Err(bad("dense")) };
                (Layer::Dense(Dense::new(*n, units, rng)), vec![units])
            }
            LayerSpec::Softmax | LayerSpec::Sigmoid => {
                let [_] = shape else { return Err(bad("an output activation")) };
                let layer = if *self == LayerSpec::Softmax { Layer::Softmax(Softmax) } else { Layer::Sigmoid(Sigmoid) };
                (layer, shape.to_vec())
            }
        })
    }
}

impl Layer {
    pub fn forward(&self, x: &Tensor, rng: Option<&mut ChaCha8Rng>) -> Result<(Tensor, Cache)> {
        match self {
            Layer::Conv2d(l) => l.forward(x, rng),
            Layer::BatchNorm(l) => l.forward(x, rng),
            Layer::Relu(l) => l.forward(x, rng),
            Layer::MaxPool2d(l) => l.forward(x, rng),
            Layer::Dropout(l) => l.forward(x, rng),
            Layer::Lstm(l) => l.forward(x, rng),
            Layer::Flatten(l) => l.forward(x, rng),
            Layer::Dense(l) => l.forward(x, rng),
            Layer::Softmax(l) => l.forward(x, rng),
            Layer::Sigmoid(l) => l.forward(x, rng),
        }
    }

    /// Accumulates parameter gradients; returns dL/dx when `need_dx`.
    pub fn backward(&mut self, cache: Cache, dy: Tensor, need_dx: bool) -> Result<Option<Tensor>> {
        Ok(match self {
            Layer::Conv2d(l) => return l.backward(cache, dy, need_dx),
            Layer::Dense(l) => return l.backward(cache, dy, need_dx),
            Layer::Lstm(l) => return l.backward(cache, dy, need_dx),
            Layer::BatchNorm(l) => Some(l.backward(cache, dy)?),
            Layer::Relu(l) => Some(l.backward(cache, dy)?),
            Layer::MaxPool2d(l) => Some(l.backward(cache, dy)?),
            Layer::Dropout(l) => Some(l.backward(cache, dy)?),
            Layer::Flatten(l) => Some(l.backward(cache, dy)?),
            Layer::Softmax(l) => Some(l.backward(cache, dy)?),
            Layer::Sigmoid(l) => Some(l.backward(cache, dy)?),
        })
    }

    pub fn params(&self) -> Vec<&Param> {
        match self {
            Layer::Conv2d(l) => vec![&l.weight, &l.bias],
            Layer::Dense(l) => vec![&l.weight, &l.bias],
            Layer::Lstm(l) => vec![&l.kernel, &l.recurrent, &l.bias],
            Layer::BatchNorm(l) => vec![&l.gamma, &l.beta, &l.running_mean, &l.running_var],
            _ => Vec::new(),
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        match self {
            Layer::Conv2d(l) => vec![&mut l.weight, &mut l.bias],
            Layer::Dense(l) => vec![&mut l.weight, &mut l.bias],
            Layer::Lstm(l) => vec![&mut l.kernel, &mut l.recurrent, &mut l.bias],
            Layer::BatchNorm(l) => vec![&mut l.gamma, &mut l.beta, &mut l.running_mean, &mut l.running_var],
            _ => Vec::new(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }
}

/// Layer stack with a fixed per-sample input shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub input_shape: Vec<usize>,
    pub specs: Vec<LayerSpec>,
    pub layers: Vec<Layer>,
    pub output_shape: Vec<usize>,
    pub seed: u64,
    rng: ChaCha8Rng,
}

/// Caches of one training-mode forward pass.
#[derive(Debug)]
pub struct Tape {
    caches: Vec<Cache>,
}

impl Network {
    /// Builds and initializes the stack; weights and the dropout stream are
    /// both derived from `seed`.
    pub fn build(input_shape: &[usize], specs: &[LayerSpec], seed: u64) -> Result<Network> {
        let mut init = ChaCha8Rng::seed_from_u64(seed);
        let mut shape = input_shape.to_vec();
        let mut layers = Vec::with_capacity(specs.len());
        for spec in specs {
            let (layer, out) = spec.build(&shape, &mut init)?;
            layers.push(layer);
            shape = out;
        }
        Ok(Network {
            input_shape: input_shape.to_vec(),
            specs: specs.to_vec(),
            layers,
            output_shape: shape,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0xd1b5_4a32_d192_ed03),
        })
    }

    /// Restarts the dropout stream.
    pub fn reseed_dropout(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    fn check_input(&self, x: &Tensor) -> Result<()> {
        if x.shape.len() != self.input_shape.len() + 1 || x.shape[1..] != self.input_shape[..] {
            let mut expected = vec![x.batch()];
            expected.extend(&self.input_shape);
            return Err(Error::Shape { expected, actual: x.shape.clone() });
        }
        Ok(())
    }

    /// Inference-mode forward: dropout is the identity and batch norm uses
    /// running statistics.
    pub fn infer(&self, x: &Tensor) -> Result<Tensor> {
        self.check_input(x)?;
        let mut h = x.clone();
        for layer in &self.layers {
            h = layer.forward(&h, None)?.0;
        }
        Ok(h)
    }

    /// Training-mode forward. Batch-norm running statistics are updated.
    pub fn forward_train(&mut self, x: &Tensor) -> Result<(Tensor, Tape)> {
        self.check_input(x)?;
        let mut h = x.clone();
        let mut caches = Vec::with_capacity(self.layers.len());
        for layer in &mut self.layers {
            let (y, cache) = layer.forward(&h, Some(&mut self.rng))?;
            if let Layer::BatchNorm(bn) = layer {
                bn.update_running(&cache);
            }
            caches.push(cache);
            h = y;
        }
        Ok((h, Tape { caches }))
    }

    /// Back-propagates dL/d(output), accumulating into parameter gradients.
    pub fn backward(&mut self, tape: Tape, grad: Tensor) -> Result<()> {
        let mut g = grad;
        // the first layer's input gradient is never needed
        for (i, (layer, cache)) in self.layers.iter_mut().zip(tape.caches).enumerate().rev() {
            match layer.backward(cache, g, i > 0)? {
                Some(dx) => g = dx,
                None => break,
            }
        }
        Ok(())
    }

    /// dL/dx for the input, for gradient checks.
    pub fn backward_to_input(&mut self, tape: Tape, grad: Tensor) -> Result<Tensor> {
        let mut g = grad;
        for (layer, cache) in self.layers.iter_mut().zip(tape.caches).rev() {
            g = layer.backward(cache, g, true)?.expect("input gradient requested");
        }
        Ok(g)
    }

    pub fn zero_grad(&mut self) {
        for p in self.params_mut() {
            p.grad.iter_mut().for_each(|g| *g = 0.0);
        }
    }

    pub fn params(&self) -> Vec<&Param> {
        self.layers.iter().flat_map(|l| l.params()).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }

    /// Total parameter count including batch-norm running statistics.
    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    pub fn trainable_param_count(&self) -> usize {
        self.params().iter().filter(|p| p.trainable).map(|p| p.len()).sum()
    }

    pub fn layer_param_counts(&self) -> Vec<usize> {
        self.layers.iter().map(Layer::param_count).collect()
    }

    /// Argmax class per sample, evaluated in batches of `batch`.
    pub fn predict(&self, x: &Tensor, batch: usize) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(x.batch());
        let idx: Vec<usize> = (0..x.batch()).collect();
        for chunk in idx.chunks(batch.max(1)) {
            let y = self.infer(&x.gather(chunk))?;
            out.extend(argmax_rows(&y));
        }
        Ok(out)
    }
}

pub fn argmax_rows(y: &Tensor) -> Vec<usize> {
    let k = y.sample_len();
    y.data.chunks_exact(k).map(|r| crate::dsp::argmax(r).unwrap_or(0)).collect()
}

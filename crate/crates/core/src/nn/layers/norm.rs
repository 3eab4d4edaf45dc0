use rand_chacha::ChaCha8Rng;

use super::simple::missing;
use super::{Cache, Param};
use crate::error::{Error, Result};
use crate::nn::tensor::Tensor;

/// Batch normalization over the channel axis of (B, C, H, W) inputs and the
/// last axis of (B, T, F) or (B, F) inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub gamma: Param,
    pub beta: Param,
    pub running_mean: Param,
    pub running_var: Param,
    pub momentum: f64,
    pub eps: f64,
}

#[derive(Debug)]
pub struct NormCache {
    xhat: Vec<f64>,
    inv_std: Vec<f64>,
    mean: Vec<f64>,
    var: Vec<f64>,
}

/// (outer, features, inner) such that index = (o·F + f)·inner + i.
fn layout(shape: &[usize]) -> Result<(usize, usize, usize)> {
    match *shape {
        [b, c, h, w] => Ok((b, c, h * w)),
        [b, t, f] => Ok((b * t, f, 1)),
        [b, f] => Ok((b, f, 1)),
        _ => Err(Error::data(format!("batchnorm cannot normalize shape {shape:?}"))),
    }
}

impl BatchNorm {
    pub fn new(features: usize) -> Self {
        BatchNorm {
            gamma: Param::filled("gamma", vec![features], 1.0, true),
            beta: Param::filled("beta", vec![features], 0.0, true),
            running_mean: Param::filled("moving_mean", vec![features], 0.0, false),
            running_var: Param::filled("moving_variance", vec![features], 1.0, false),
            momentum: 0.9,
            eps: 1e-3,
        }
    }

    /// Feature count of a per-sample shape.
    pub fn features_of(sample_shape: &[usize]) -> Result<usize> {
        match sample_shape {
            [c, _, _] => Ok(*c),
            [_, f] | [f] => Ok(*f),
            _ => Err(Error::data(format!("batchnorm cannot normalize shape {sample_shape:?}"))),
        }
    }

    pub fn forward(&self, x: &Tensor, rng: Option<&mut ChaCha8Rng>) -> Result<(Tensor, Cache)> {
        let (outer, nf, inner) = layout(&x.shape)?;
        if nf != self.gamma.len() {
            return Err(Error::data(format!("batchnorm has {} features, input has {nf}", self.gamma.len())));
        }
        let mut y = x.clone();
        if rng.is_none() {
            for o in 0..outer {
                for f in 0..nf {
                    let s = 1.0 / (self.running_var.value[f] + self.eps).sqrt();
                    let (g, b, m) = (self.gamma.value[f], self.beta.value[f], self.running_mean.value[f]);
                    for v in &mut y.data[(o * nf + f) * inner..][..inner] {
                        *v = g * (*v - m) * s + b;
                    }
                }
            }
            return Ok((y, Cache::None));
        }
        let count = (outer * inner) as f64;
        let mut mean = vec![0.0; nf];
        let mut var = vec![0.0; nf];
        for o in 0..outer {
            for (f, m) in mean.iter_mut().enumerate() {
                *m += x.data[(o * nf + f) * inner..][..inner].iter().sum::<f64>();
            }
        }
        mean.iter_mut().for_each(|m| *m /= count);
        for o in 0..outer {
            for f in 0..nf {
                var[f] += x.data[(o * nf + f) * inner..][..inner].iter().map(|v| (v - mean[f]).powi(2)).sum::<f64>();
            }
        }
        var.iter_mut().for_each(|v| *v /= count);
        let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + self.eps).sqrt()).collect();
        let mut xhat = x.data.clone();
        for o in 0..outer {
            for f in 0..nf {
                let base = (o * nf + f) * inner;
                for i in base..base + inner {
                    xhat[i] = (x.data[i] - mean[f]) * inv_std[f];
                    y.data[i] = self.gamma.value[f] * xhat[i] + self.beta.value[f];
                }
            }
        }
        Ok((y, Cache::Norm(NormCache { xhat, inv_std, mean, var })))
    }

    /// Folds the batch statistics of a training forward into the running
    /// averages.
    pub fn update_running(&mut self, cache: &Cache) {
        if let Cache::Norm(c) = cache {
            let m = self.momentum;
            for f in 0..c.mean.len() {
                self.running_mean.value[f] = m * self.running_mean.value[f] + (1.0 - m) * c.mean[f];
                self.running_var.value[f] = m * self.running_var.value[f] + (1.0 - m) * c.var[f];
            }
        }
    }

    pub fn backward(&mut self, cache: Cache, dy: Tensor) -> Result<Tensor> {
        let Cache::Norm(NormCache { xhat, inv_std, .. }) = cache else { return Err(missing("batchnorm")) };
        let (outer, nf, inner) = layout(&dy.shape)?;
        let count = (outer * inner) as f64;
        let mut sum_dy = vec![0.0; nf];
        let mut sum_dy_xhat = vec![0.0; nf];
        for o in 0..outer {
            for f in 0..nf {
                let base = (o * nf + f) * inner;
                for i in base..base + inner {
                    sum_dy[f] += dy.data[i];
                    sum_dy_xhat[f] += dy.data[i] * xhat[i];
                }
            }
        }
        for f in 0..nf {
            self.gamma.grad[f] += sum_dy_xhat[f];
            self.beta.grad[f] += sum_dy[f];
        }
        let mut dx = dy;
        for o in 0..outer {
            for f in 0..nf {
                let scale = self.gamma.value[f] * inv_std[f] / count;
                let base = (o * nf + f) * inner;
                for i in base..base + inner {
                    dx.data[i] = scale * (count * dx.data[i] - sum_dy[f] - xhat[i] * sum_dy_xhat[f]);
                }
            }
        }
        Ok(dx)
    }
}

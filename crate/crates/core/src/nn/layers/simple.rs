use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Cache, Param};
use crate::error::{Error, Result};
use crate::nn::tensor::{gemm, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct Relu;

impl Relu {
    pub fn forward(&self, x: &Tensor, rng: Option<&mut ChaCha8Rng>) -> Result<(Tensor, Cache)> {
        let mut y = x.clone();
        super::relu_in_place(&mut y.data);
        let cache = match rng {
            Some(_) => Cache::Mask(x.data.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect()),
            None => Cache::None,
        };
        Ok((y, cache))
    }

    pub fn backward(&mut self, cache: Cache, mut dy: Tensor) -> Result<Tensor> {
        let Cache::Mask(mask) = cache else { return Err(missing("relu")) };
        dy.data.iter_mut().zip(&mask).for_each(|(g, m)| *g *= m);
        Ok(dy)
    }
}

/// 2×2 max pooling with stride 2; odd trailing rows/columns are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxPool2d;

impl MaxPool2d {
    pub fn output_shape(input: &[usize]) -> Result<Vec<usize>> {
        match input {
            [c, h, w] if *h >= 2 && *w >= 2 => Ok(vec![*c, h / 2, w / 2]),
            _ => Err(Error::data(format!("maxpool needs a (C, H≥2, W≥2) input, got {input:?}"))),
        }
    }

    pub fn forward(&self, x: &Tensor, rng: Option<&mut ChaCha8Rng>) -> Result<(Tensor, Cache)> {
        x.expect_rank(4, "maxpool")?;
        let (b, c, h, w) = (x.shape[0], x.shape[1], x.shape[2], x.shape[3]);
        let (oh, ow) = (h / 2, w / 2);
        let mut y = Tensor::zeros(&[b, c, oh, ow]);
        let mut arg = vec![0usize; y.len()];
        let mut o = 0;
        for plane in 0..b * c {
            let base = plane * h * w;
            for i in 0..oh {
                for j in 0..ow {
                    let mut best = base + 2 * i * w + 2 * j;
                    for (di, dj) in [(0, 1), (1, 0), (1, 1)] {
                        let idx = base + (2 * i + di) * w + 2 * j + dj;
                        if x.data[idx] > x.data[best] {
                            best = idx;
                        }
                    }
                    y.data[o] = x.data[best];
                    arg[o] = best;
                    o += 1;
                }
            }
        }
        let cache = if rng.is_some() { Cache::Indices(arg, x.shape.clone()) } else { Cache::None };
        Ok((y, cache))
    }

    pub fn backward(&mut self, cache: Cache, dy: Tensor) -> Result<Tensor> {
        let Cache::Indices(arg, shape) = cache else { return Err(missing("maxpool")) };
        let mut dx = Tensor::zeros(&shape);
        for (g, &i) in dy.data.iter().zip(&arg) {
            dx.data[i] += g;
        }
        Ok(dx)
    }
}

/// Inverted dropout: kept units are scaled by 1/(1−p) during training.
#[derive(Debug, Clone, PartialEq)]
pub struct Dropout {
    pub p: f64,
}

impl Dropout {
    pub fn forward(&self, x: &Tensor, rng: Option<&mut ChaCha8Rng>) -> Result<(Tensor, Cache)> {
        let Some(rng) = rng else { return Ok((x.clone(), Cache::None)) };
        let keep = 1.0 / (1.0 - self.p);
        let mask: Vec<f64> = (0..x.len()).map(|_| if rng.random::<f64>() >= self.p { keep } else { 0.0 }).collect();
        let mut y = x.clone();
        y.data.iter_mut().zip(&mask).for_each(|(v, m)| *v *= m);
        Ok((y, Cache::Mask(mask)))
    }

    pub fn backward(&mut self, cache: Cache, dy: Tensor) -> Result<Tensor> {
        Relu.backward(cache, dy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Flatten;

impl Flatten {
    pub fn forward(&self, x: &Tensor, _rng: Option<&mut ChaCha8Rng>) -> Result<(Tensor, Cache)> {
        let y = x.clone().reshape(vec![x.batch(), x.sample_len()])?;
        Ok((y, Cache::Shape(x.shape.clone())))
    }

    pub fn backward(&mut self, cache: Cache, dy: Tensor) -> Result<Tensor> {
        let Cache::Shape(shape) = cache else { return Err(missing("flatten")) };
        dy.reshape(shape)
    }
}

/// Fully connected layer, `y = x·W + b` with W of shape (in, out).
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Param,
    pub bias: Param,
}

impl Dense {
    pub fn new(inputs: usize, units: usize, rng: &mut ChaCha8Rng) -> Self {
        Dense {
            weight: Param::glorot("kernel", vec![inputs, units], inputs, units, rng),
            bias: Param::filled("bias", vec![units], 0.0, true),
        }
    }

    fn dims(&self) -> (usize, usize) {
        (self.weight.shape[0], self.weight.shape[1])
    }

    pub fn forward(&self, x: &Tensor, rng: Option<&mut ChaCha8Rng>) -> Result<(Tensor, Cache)> {
        let (n_in, n_out) = self.dims();
        if x.shape.len() != 2 || x.shape[1] != n_in {
            return Err(Error::Shape { expected: vec![x.batch(), n_in], actual: x.shape.clone() });
        }
        let b = x.batch();
        let mut y = Tensor::zeros(&[b, n_out]);
        for row in y.data.chunks_exact_mut(n_out) {
            row.copy_from_slice(&self.bias.value);
        }
        gemm(false, false, b, n_out, n_in, 1.0, &x.data, &self.weight.value, 1.0, &mut y.data);
        let cache = if rng.is_some() { Cache::Input(x.clone()) } else { Cache::None };
        Ok((y, cache))
    }

    pub fn backward(&mut self, cache: Cache, dy: Tensor, need_dx: bool) -> Result<Option<Tensor>> {
        let Cache::Input(x) = cache else { return Err(missing("dense")) };
        let (n_in, n_out) = self.dims();
        let b = x.batch();
        gemm(true, false, n_in, n_out, b, 1.0, &x.data, &dy.data, 1.0, &mut self.weight.grad);
        for row in dy.data.chunks_exact(n_out) {
            self.bias.grad.iter_mut().zip(row).for_each(|(g, d)| *g += d);
        }
        if !need_dx {
            return Ok(None);
        }
        let mut dx = Tensor::zeros(&[b, n_in]);
        gemm(false, true, b, n_in, n_out, 1.0, &dy.data, &self.weight.value, 0.0, &mut dx.data);
        Ok(Some(dx))
    }
}

/// Row-wise softmax over the last axis of a (B, K) input.
#[derive(Debug, Clone, PartialEq)]
pub struct Softmax;

impl Softmax {
    pub fn forward(&self, x: &Tensor, _rng: Option<&mut ChaCha8Rng>) -> Result<(Tensor, Cache)> {
        x.expect_rank(2, "softmax")?;
        let k = x.shape[1];
        let mut y = x.clone();
        for row in y.data.chunks_exact_mut(k) {
            let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut s = 0.0;
            for v in row.iter_mut() {
                *v = (*v - m).exp();
                s += *v;
            }
            row.iter_mut().for_each(|v| *v /= s);
        }
        Ok((y.clone(), Cache::Output(y)))
    }

    pub fn backward(&mut self, cache: Cache, mut dy: Tensor) -> Result<Tensor> {
        let Cache::Output(y) = cache else { return Err(missing("softmax")) };
        let k = y.shape[1];
        for (g, yr) in dy.data.chunks_exact_mut(k).zip(y.data.chunks_exact(k)) {
            let dot: f64 = g.iter().zip(yr).map(|(a, b)| a * b).sum();
            g.iter_mut().zip(yr).for_each(|(gi, yi)| *gi = yi * (*gi - dot));
        }
        Ok(dy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sigmoid;

impl Sigmoid {
    pub fn forward(&self, x: &Tensor, _rng: Option<&mut ChaCha8Rng>) -> Result<(Tensor, Cache)> {
        let mut y = x.clone();
        y.data.iter_mut().for_each(|v| *v = sigmoid(*v));
        Ok((y.clone(), Cache::Output(y)))
    }

    pub fn backward(&mut self, cache: Cache, mut dy: Tensor) -> Result<Tensor> {
        let Cache::Output(y) = cache else { return Err(missing("sigmoid")) };
        dy.data.iter_mut().zip(&y.data).for_each(|(g, s)| *g *= s * (1.0 - s));
        Ok(dy)
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn missing(layer: &str) -> Error {
    Error::data(format!("{layer} backward called without a training-mode forward"))
}

//! Layer implementations. Each layer's `forward` takes `Some(rng)` in
//! training mode and returns its output with whatever `backward` needs.

mod conv;
mod lstm;
mod norm;
mod simple;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use conv::Conv2d;
pub use lstm::Lstm;
pub use norm::BatchNorm;
pub use simple::{Dense, Dropout, Flatten, MaxPool2d, Relu, Sigmoid, Softmax};

use super::tensor::Tensor;

/// A parameter tensor and its accumulated gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: &'static str,
    pub shape: Vec<usize>,
    pub value: Vec<f64>,
    pub grad: Vec<f64>,
    /// Running statistics are stored and checkpointed but not optimized.
    pub trainable: bool,
}

impl Param {
    pub fn new(name: &'static str, shape: Vec<usize>, value: Vec<f64>, trainable: bool) -> Self {
        let n = value.len();
        debug_assert_eq!(n, shape.iter().product::<usize>());
        Param { name, shape, value, grad: vec![0.0; n], trainable }
    }

    pub fn filled(name: &'static str, shape: Vec<usize>, v: f64, trainable: bool) -> Self {
        let n = shape.iter().product();
        Param::new(name, shape, vec![v; n], trainable)
    }

    /// Glorot-uniform initialization.
    pub fn glorot(name: &'static str, shape: Vec<usize>, fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let n = shape.iter().product();
        let value = (0..n).map(|_| rng.random_range(-limit..limit)).collect();
        Param::new(name, shape, value, true)
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }
}

/// What a layer keeps from forward for its backward pass.
#[derive(Debug, Default)]
pub enum Cache {
    #[default]
    None,
    Conv(conv::ConvCache),
    Norm(norm::NormCache),
    Lstm(lstm::LstmCache),
    Mask(Vec<f64>),
    Indices(Vec<usize>, Vec<usize>),
    Input(Tensor),
    Output(Tensor),
    Shape(Vec<usize>),
}

pub(crate) fn relu_in_place(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

use rand_chacha::ChaCha8Rng;

use super::simple::missing;
use super::{Cache, Param};
use crate::error::{Error, Result};
use crate::nn::tensor::{gemm, Tensor};

/// 2-D convolution, stride 1, zero "same" padding, odd square kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d {
    /// (filters, in_channels, k, k)
    pub weight: Param,
    pub bias: Param,
}

#[derive(Debug)]
pub struct ConvCache {
    cols: Vec<Vec<f64>>,
    in_shape: Vec<usize>,
}

impl Conv2d {
    pub fn new(in_channels: usize, filters: usize, kernel: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        if kernel.is_multiple_of(2) || filters == 0 {
            return Err(Error::param("conv2d needs an odd kernel and at least one filter"));
        }
        let kk = kernel * kernel;
        Ok(Conv2d {
            weight: Param::glorot(
                "kernel",
                vec![filters, in_channels, kernel, kernel],
                in_channels * kk,
                filters * kk,
                rng,
            ),
            bias: Param::filled("bias", vec![filters], 0.0, true),
        })
    }

    fn dims(&self) -> (usize, usize, usize) {
        (self.weight.shape[0], self.weight.shape[1], self.weight.shape[2])
    }

    /// (C, H, W) → (C·k·k, H·W) patch matrix of one sample.
    fn im2col(&self, x: &[f64], h: usize, w: usize, cols: &mut [f64]) {
        let (_, c, k) = self.dims();
        let pad = k / 2;
        let hw = h * w;
        for ch in 0..c {
            let plane = &x[ch * hw..(ch + 1) * hw];
            for ki in 0..k {
                for kj in 0..k {
                    let row = &mut cols[((ch * k + ki) * k + kj) * hw..][..hw];
                    for y in 0..h {
                        let out = &mut row[y * w..(y + 1) * w];
                        let sy = y as isize + ki as isize - pad as isize;
                        if sy < 0 || sy >= h as isize {
                            out.fill(0.0);
                            continue;
                        }
                        let src = &plane[sy as usize * w..(sy as usize + 1) * w];
                        let shift = kj as isize - pad as isize;
                        for (xo, o) in out.iter_mut().enumerate() {
                            let sx = xo as isize + shift;
                            *o = if sx >= 0 && sx < w as isize { src[sx as usize] } else { 0.0 };
                        }
                    }
                }
            }
        }
    }

    fn col2im(&self, cols: &[f64], h: usize, w: usize, dx: &mut [f64]) {
        let (_, c, k) = self.dims();
        let pad = k / 2;
        let hw = h * w;
        for ch in 0..c {
            let plane = &mut dx[ch * hw..(ch + 1) * hw];
            for ki in 0..k {
                for kj in 0..k {
                    let row = &cols[((ch * k + ki) * k + kj) * hw..][..hw];
                    for y in 0..h {
                        let sy = y as isize + ki as isize - pad as isize;
                        if sy < 0 || sy >= h as isize {
                            continue;
                        }
                        let dst = &mut plane[sy as usize * w..(sy as usize + 1) * w];
                        let shift = kj as isize - pad as isize;
                        for (xo, g) in row[y * w..(y + 1) * w].iter().enumerate() {
                            let sx = xo as isize + shift;
                            if sx >= 0 && sx < w as isize {
                                dst[sx as usize] += g;
                            }
                        }
                    }
                }
            }
        }
    }

    pub fn forward(&self, x: &Tensor, rng: Option<&mut ChaCha8Rng>) -> Result<(Tensor, Cache)> {
        x.expect_rank(4, "conv2d")?;
        let (f, c, k) = self.dims();
        if x.shape[1] != c {
            return Err(Error::Shape { expected: vec![x.batch(), c, x.shape[2], x.shape[3]], actual: x.shape.clone() });
        }
        let (b, h, w) = (x.shape[0], x.shape[2], x.shape[3]);
        let (hw, ckk) = (h * w, c * k * k);
        let training = rng.is_some();
        let mut y = Tensor::zeros(&[b, f, h, w]);
        let mut kept = Vec::new();
        let mut cols = vec![0.0; ckk * hw];
        for n in 0..b {
            self.im2col(x.sample(n), h, w, &mut cols);
            let out = &mut y.data[n * f * hw..(n + 1) * f * hw];
            for (row, &bias) in out.chunks_exact_mut(hw).zip(&self.bias.value) {
                row.fill(bias);
            }
            gemm(false, false, f, hw, ckk, 1.0, &self.weight.value, &cols, 1.0, out);
            if training {
                kept.push(cols.clone());
            }
        }
        let cache =
            if training { Cache::Conv(ConvCache { cols: kept, in_shape: x.shape.clone() }) } else { Cache::None };
        Ok((y, cache))
    }

    pub fn backward(&mut self, cache: Cache, dy: Tensor, need_dx: bool) -> Result<Option<Tensor>> {
        let Cache::Conv(ConvCache { cols, in_shape }) = cache else { return Err(missing("conv2d")) };
        let (f, c, k) = self.dims();
        let (b, h, w) = (in_shape[0], in_shape[2], in_shape[3]);
        let (hw, ckk) = (h * w, c * k * k);
        let mut dx = need_dx.then(|| Tensor::zeros(&in_shape));
        let mut dcols = if need_dx { vec![0.0; ckk * hw] } else { Vec::new() };
        for n in 0..b {
            let g = &dy.data[n * f * hw..(n + 1) * f * hw];
            gemm(false, true, f, ckk, hw, 1.0, g, &cols[n], 1.0, &mut self.weight.grad);
            for (db, row) in self.bias.grad.iter_mut().zip(g.chunks_exact(hw)) {
                *db += row.iter().sum::<f64>();
            }
            if let Some(dx) = dx.as_mut() {
                gemm(true, false, ckk, hw, f, 1.0, &self.weight.value, g, 0.0, &mut dcols);
                self.col2im(&dcols, h, w, &mut dx.data[n * c * hw..(n + 1) * c * hw]);
            }
        }
        Ok(dx)
    }
}

use rand_chacha::ChaCha8Rng;

use super::simple::{missing, sigmoid};
use super::{Cache, Param};
use crate::error::{Error, Result};
use crate::nn::tensor::{gemm, Tensor};

/// Long short-term memory over (B, T, D) inputs. Gates are packed
/// [input, forget, cell, output], each `units` wide.
#[derive(Debug, Clone, PartialEq)]
pub struct Lstm {
    /// (D, 4U)
    pub kernel: Param,
    /// (U, 4U)
    pub recurrent: Param,
    /// (4U)
    pub bias: Param,
    pub return_sequences: bool,
}

#[derive(Debug)]
pub struct LstmCache {
    x: Tensor,
    /// Post-activation gates per step, (T, B, 4U).
    gates: Vec<f64>,
    /// Cell state per step, (T, B, U).
    cell: Vec<f64>,
    /// tanh of the cell state per step.
    cell_tanh: Vec<f64>,
    /// Hidden state per step.
    hidden: Vec<f64>,
}

impl Lstm {
    pub fn new(inputs: usize, units: usize, return_sequences: bool, rng: &mut ChaCha8Rng) -> Self {
        let mut bias = Param::filled("bias", vec![4 * units], 0.0, true);
        bias.value[units..2 * units].fill(1.0);
        Lstm {
            kernel: Param::glorot("kernel", vec![inputs, 4 * units], inputs, 4 * units, rng),
            recurrent: Param::glorot("recurrent_kernel", vec![units, 4 * units], units, 4 * units, rng),
            bias,
            return_sequences,
        }
    }

    pub fn units(&self) -> usize {
        self.recurrent.shape[0]
    }

    pub fn inputs(&self) -> usize {
        self.kernel.shape[0]
    }

    pub fn forward(&self, x: &Tensor, rng: Option<&mut ChaCha8Rng>) -> Result<(Tensor, Cache)> {
        x.expect_rank(3, "lstm")?;
        let (b, t, d) = (x.shape[0], x.shape[1], x.shape[2]);
        let u = self.units();
        let g4 = 4 * u;
        if d != self.inputs() {
            return Err(Error::Shape { expected: vec![b, t, self.inputs()], actual: x.shape.clone() });
        }
        // input projection for all steps at once: rows (b, t)
        let mut xw = vec![0.0; b * t * g4];
        gemm(false, false, b * t, g4, d, 1.0, &x.data, &self.kernel.value, 0.0, &mut xw);

        let mut gates = vec![0.0; t * b * g4];
        let mut cell = vec![0.0; t * b * u];
        let mut cell_tanh = vec![0.0; t * b * u];
        let mut hidden = vec![0.0; t * b * u];
        let mut h_prev = vec![0.0; b * u];
        let mut c_prev = vec![0.0; b * u];
        for s in 0..t {
            let a = &mut gates[s * b * g4..(s + 1) * b * g4];
            for n in 0..b {
                let row = &mut a[n * g4..(n + 1) * g4];
                row.copy_from_slice(&xw[(n * t + s) * g4..(n * t + s + 1) * g4]);
                row.iter_mut().zip(&self.bias.value).for_each(|(v, bb)| *v += bb);
            }
            if s > 0 {
                gemm(false, false, b, g4, u, 1.0, &h_prev, &self.recurrent.value, 1.0, a);
            }
            let c = &mut cell[s * b * u..(s + 1) * b * u];
            let ct = &mut cell_tanh[s * b * u..(s + 1) * b * u];
            let h = &mut hidden[s * b * u..(s + 1) * b * u];
            for n in 0..b {
                let row = &mut a[n * g4..(n + 1) * g4];
                for j in 0..u {
                    let i = sigmoid(row[j]);
                    let f = sigmoid(row[u + j]);
                    let g = row[2 * u + j].tanh();
                    let o = sigmoid(row[3 * u + j]);
                    row[j] = i;
                    row[u + j] = f;
                    row[2 * u + j] = g;
                    row[3 * u + j] = o;
                    let k = n * u + j;
                    c[k] = f * c_prev[k] + i * g;
                    ct[k] = c[k].tanh();
                    h[k] = o * ct[k];
                }
            }
            h_prev.copy_from_slice(h);
            c_prev.copy_from_slice(c);
        }

        let y = if self.return_sequences {
            let mut y = Tensor::zeros(&[b, t, u]);
            for s in 0..t {
                for n in 0..b {
                    y.data[(n * t + s) * u..(n * t + s + 1) * u]
                        .copy_from_slice(&hidden[(s * b + n) * u..(s * b + n + 1) * u]);
                }
            }
            y
        } else {
            Tensor::new(vec![b, u], h_prev)?
        };
        let cache = match rng {
            Some(_) => Cache::Lstm(LstmCache { x: x.clone(), gates, cell, cell_tanh, hidden }),
            None => Cache::None,
        };
        Ok((y, cache))
    }

    pub fn backward(&mut self, cache: Cache, dy: Tensor, need_dx: bool) -> Result<Option<Tensor>> {
        let Cache::Lstm(LstmCache { x, gates, cell, cell_tanh, hidden }) = cache else {
            return Err(missing("lstm"));
        };
        let (b, t, d) = (x.shape[0], x.shape[1], x.shape[2]);
        let u = self.units();
        let g4 = 4 * u;
        let mut da_all = vec![0.0; b * t * g4];
        let mut da = vec![0.0; b * g4];
        let mut dh_next = vec![0.0; b * u];
        let mut dc_next = vec![0.0; b * u];
        for s in (0..t).rev() {
            let a = &gates[s * b * g4..(s + 1) * b * g4];
            let ct = &cell_tanh[s * b * u..(s + 1) * b * u];
            for n in 0..b {
                for j in 0..u {
                    let k = n * u + j;
                    let mut dh = dh_next[k];
                    if self.return_sequences {
                        dh += dy.data[(n * t + s) * u + j];
                    } else if s == t - 1 {
                        dh += dy.data[k];
                    }
                    let row = &a[n * g4..(n + 1) * g4];
                    let (i, f, g, o) = (row[j], row[u + j], row[2 * u + j], row[3 * u + j]);
                    let c_prev = if s > 0 { cell[(s - 1) * b * u + k] } else { 0.0 };
                    let dc = dh * o * (1.0 - ct[k] * ct[k]) + dc_next[k];
                    dc_next[k] = dc * f;
                    let out = &mut da[n * g4..(n + 1) * g4];
                    out[j] = dc * g * i * (1.0 - i);
                    out[u + j] = dc * c_prev * f * (1.0 - f);
                    out[2 * u + j] = dc * i * (1.0 - g * g);
                    out[3 * u + j] = dh * ct[k] * o * (1.0 - o);
                }
            }
            if s > 0 {
                let h_prev = &hidden[(s - 1) * b * u..s * b * u];
                gemm(true, false, u, g4, b, 1.0, h_prev, &da, 1.0, &mut self.recurrent.grad);
                gemm(false, true, b, u, g4, 1.0, &da, &self.recurrent.value, 0.0, &mut dh_next);
            }
            for n in 0..b {
                da_all[(n * t + s) * g4..(n * t + s + 1) * g4].copy_from_slice(&da[n * g4..(n + 1) * g4]);
            }
        }
        gemm(true, false, d, g4, b * t, 1.0, &x.data, &da_all, 1.0, &mut self.kernel.grad);
        for row in da_all.chunks_exact(g4) {
            self.bias.grad.iter_mut().zip(row).for_each(|(g, v)| *g += v);
        }
        if !need_dx {
            return Ok(None);
        }
        let mut dx = Tensor::zeros(&[b, t, d]);
        gemm(false, true, b * t, d, g4, 1.0, &da_all, &self.kernel.value, 0.0, &mut dx.data);
        Ok(Some(dx))
    }
}

//! Central finite-difference checks of analytic gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::loss::LossKind;
use super::network::{LayerSpec, Network};
use super::tensor::Tensor;
use crate::error::Result;

const H: f64 = 1e-5;
const DROPOUT_SEED: u64 = 77;
/// Entries probed per tensor; smaller tensors are probed in full.
const PROBES: usize = 40;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

pub fn random_tensor(shape: &[usize], rng: &mut ChaCha8Rng, scale: f64) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(-scale..scale)).collect())
        .expect("length matches shape")
}

fn picks(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if n <= PROBES {
        (0..n).collect()
    } else {
        (0..PROBES).map(|_| rng.random_range(0..n)).collect()
    }
}

/// Worst relative error between the analytic input and parameter gradients
/// of Σ r ⊙ net(x) and their central differences, for random `x` and `r`.
/// Training-mode forward passes; dropout masks are held fixed.
pub fn network_gradient_error(input: &[usize], specs: &[LayerSpec], batch: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Network::build(input, specs, seed)?;
    let mut shape = vec![batch];
    shape.extend(input);
    let x = random_tensor(&shape, &mut rng, 1.0);
    let mut out_shape = vec![batch];
    out_shape.extend(&net.output_shape);
    let r = random_tensor(&out_shape, &mut rng, 1.0);

    let objective = |net: &mut Network, x: &Tensor| -> Result<f64> {
        net.reseed_dropout(DROPOUT_SEED);
        let (y, _) = net.forward_train(x)?;
        Ok(y.data.iter().zip(&r.data).map(|(a, b)| a * b).sum())
    };

    net.reseed_dropout(DROPOUT_SEED);
    net.zero_grad();
    let (_, tape) = net.forward_train(&x)?;
    let dx = net.backward_to_input(tape, r.clone())?;
    let mut worst: f64 = 0.0;

    for i in picks(x.len(), &mut rng) {
        let mut xp = x.clone();
        xp.data[i] += H;
        let mut xm = x.clone();
        xm.data[i] -= H;
        let num = (objective(&mut net, &xp)? - objective(&mut net, &xm)?) / (2.0 * H);
        worst = worst.max(rel_err(dx.data[i], num));
    }
    let grads: Vec<(usize, Vec<f64>)> =
        net.params().iter().enumerate().filter(|(_, p)| p.trainable).map(|(k, p)| (k, p.grad.clone())).collect();
    for (k, grad) in grads {
        for i in picks(grad.len(), &mut rng) {
            let orig = net.params()[k].value[i];
            net.params_mut()[k].value[i] = orig + H;
            let fp = objective(&mut net, &x)?;
            net.params_mut()[k].value[i] = orig - H;
            let fm = objective(&mut net, &x)?;
            net.params_mut()[k].value[i] = orig;
            worst = worst.max(rel_err(grad[i], (fp - fm) / (2.0 * H)));
        }
    }
    Ok(worst)
}

/// Worst relative error of the loss gradient with respect to the
/// predictions `y`.
pub fn loss_gradient_error(loss: &LossKind, y: &Tensor, t: &Tensor) -> Result<f64> {
    let (_, g) = loss.value_and_grad(y, t)?;
    let mut worst: f64 = 0.0;
    for i in 0..y.len() {
        let mut yp = y.clone();
        yp.data[i] += H;
        let mut ym = y.clone();
        ym.data[i] -= H;
        let num = (loss.value(&yp, t)? - loss.value(&ym, t)?) / (2.0 * H);
        worst = worst.max(rel_err(g.data[i], num));
    }
    Ok(worst)
}

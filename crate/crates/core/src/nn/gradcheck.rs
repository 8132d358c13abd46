//! Central finite-difference checks of every layer's backward pass, run in
//! 64-bit.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::network::{Network, Trace};
use super::train::bce_loss;
use super::{LayerSpec, Shape};

pub const GRADCHECK_TOLERANCE: f64 = 1e-4;

const STEP: f64 = 1e-5;
// gradients smaller than this are compared in absolute terms
const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerCheck {
    pub kind: &'static str,
    pub max_rel_error: f64,
    /// Number of gradient entries compared.
    pub checked: usize,
}

impl LayerCheck {
    pub fn passed(&self) -> bool {
        self.max_rel_error < GRADCHECK_TOLERANCE
    }
}

fn rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Values bounded away from zero, so ReLU kinks are never straddled.
fn away_from_zero(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let m = rng.gen_range(0.05..1.0);
            if rng.gen_bool(0.5) { m } else { -m }
        })
        .collect()
}

/// Distinct values at least 0.01 apart, so pooling maxima are unambiguous.
fn well_separated(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|i| i as f64 * 0.02 - n as f64 * 0.01).collect();
    v.shuffle(rng);
    v.iter().map(|x| x + rng.gen_range(-0.004..0.004)).collect()
}

/// Checks one layer under the loss Σ r·y for a random projection r, over
/// its parameters and its input.
fn check_single(net: &mut Network<f64>, input: &mut [f64], rng: &mut ChaCha8Rng) -> (f64, usize) {
    let r = uniform(rng, net.output_shape().len(), -1.0, 1.0);
    let mut trace = Trace::default();
    let loss = |net: &Network<f64>, x: &[f64], trace: &mut Trace<f64>| -> f64 {
        let y = net.forward(x, trace).expect("shapes fixed");
        y.iter().zip(&r).map(|(a, b)| a * b).sum()
    };
    loss(net, input, &mut trace);
    let mut grads = net.zero_grads();
    let dinput = net
        .backward(&mut trace, 1, &r, &mut grads, true)
        .expect("input gradient requested");

    let mut worst = 0.0f64;
    let mut checked = 0;
    for i in 0..input.len() {
        let orig = input[i];
        input[i] = orig + STEP;
        let up = loss(net, input, &mut trace);
        input[i] = orig - STEP;
        let down = loss(net, input, &mut trace);
        input[i] = orig;
        worst = worst.max(rel_error(dinput[i], (up - down) / (2.0 * STEP)));
        checked += 1;
    }
    let (w, c) = check_params(net, &grads, |net, trace| loss(net, input, trace));
    (worst.max(w), checked + c)
}

/// Compares `grads` against central differences of `loss` over every parameter.
fn check_params(
    net: &mut Network<f64>,
    grads: &super::network::Grads<f64>,
    mut loss: impl FnMut(&Network<f64>, &mut Trace<f64>) -> f64,
) -> (f64, usize) {
    let mut trace = Trace::default();
    let mut worst = 0.0f64;
    let mut checked = 0;
    for layer in 0..net.params().len() {
        for which in 0..2 {
            let len = if which == 0 {
                net.params()[layer].weight.len()
            } else {
                net.params()[layer].bias.len()
            };
            for i in 0..len {
                let orig = *param_mut(net, layer, which, i);
                *param_mut(net, layer, which, i) = orig + STEP;
                let up = loss(net, &mut trace);
                *param_mut(net, layer, which, i) = orig - STEP;
                let down = loss(net, &mut trace);
                *param_mut(net, layer, which, i) = orig;
                let analytic = if which == 0 {
                    grads.layers[layer].weight[i]
                } else {
                    grads.layers[layer].bias[i]
                };
                worst = worst.max(rel_error(analytic, (up - down) / (2.0 * STEP)));
                checked += 1;
            }
        }
    }
    (worst, checked)
}

fn param_mut(net: &mut Network<f64>, layer: usize, which: usize, i: usize) -> &mut f64 {
    let p = &mut net.params_mut()[layer];
    if which == 0 {
        &mut p.weight[i]
    } else {
        &mut p.bias[i]
    }
}

fn random_network(input: Shape, layers: Vec<LayerSpec>, rng: &mut ChaCha8Rng) -> Network<f64> {
    let mut net = Network::new(input, layers).expect("valid random shapes");
    for p in net.params_mut() {
        for x in p.weight.iter_mut().chain(p.bias.iter_mut()) {
            *x = rng.gen_range(-0.5..0.5);
        }
    }
    net
}

fn check_kind(kind: &'static str, rng: &mut ChaCha8Rng) -> (f64, usize) {
    match kind {
        "conv2d" => {
            let (kh, kw) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
            let input = Shape::new(kh + rng.gen_range(0..4), kw + rng.gen_range(0..4), rng.gen_range(1..=3));
            let layer = LayerSpec::Conv2d {
                filters: rng.gen_range(1..=3),
                kernel: (kh, kw),
                stride: rng.gen_range(1..=2),
            };
            let mut net = random_network(input, vec![layer], rng);
            let mut x = uniform(rng, input.len(), -1.0, 1.0);
            check_single(&mut net, &mut x, rng)
        }
        "maxpool2d" => {
            let (ph, pw) = (rng.gen_range(1..=2), rng.gen_range(1..=3));
            let input = Shape::new(ph + rng.gen_range(0..4), pw + rng.gen_range(0..4), rng.gen_range(1..=3));
            let mut net = random_network(input, vec![LayerSpec::pool(ph, pw)], rng);
            let mut x = well_separated(rng, input.len());
            check_single(&mut net, &mut x, rng)
        }
        "relu" => {
            let input = Shape::new(rng.gen_range(1..4), rng.gen_range(1..4), rng.gen_range(1..4));
            let mut net = random_network(input, vec![LayerSpec::Relu], rng);
            let mut x = away_from_zero(rng, input.len());
            check_single(&mut net, &mut x, rng)
        }
        "flatten" => {
            let input = Shape::new(rng.gen_range(1..4), rng.gen_range(1..4), rng.gen_range(1..4));
            let mut net = random_network(input, vec![LayerSpec::Flatten], rng);
            let mut x = uniform(rng, input.len(), -1.0, 1.0);
            check_single(&mut net, &mut x, rng)
        }
        "dense" => {
            let input = Shape::new(1, 1, rng.gen_range(1..=8));
            let layer = LayerSpec::Dense {
                units: rng.gen_range(1..=5),
            };
            let mut net = random_network(input, vec![layer], rng);
            let mut x = uniform(rng, input.len(), -1.0, 1.0);
            check_single(&mut net, &mut x, rng)
        }
        "sigmoid" => {
            let input = Shape::new(1, rng.gen_range(1..4), rng.gen_range(1..4));
            let mut net = random_network(input, vec![LayerSpec::Sigmoid], rng);
            let mut x = uniform(rng, input.len(), -3.0, 3.0);
            check_single(&mut net, &mut x, rng)
        }
        "network" => check_network(rng),
        _ => unreachable!(),
    }
}

/// Whole stack under mean binary cross-entropy over a two-sample batch,
/// through the fused sigmoid/BCE gradient used in training.
fn check_network(rng: &mut ChaCha8Rng) -> (f64, usize) {
    let input = Shape::new(rng.gen_range(5..=7), rng.gen_range(5..=7), rng.gen_range(2..=4));
    let layers = vec![
        LayerSpec::conv(3, 1, 1),
        LayerSpec::Relu,
        LayerSpec::conv(2, 2, 2),
        LayerSpec::Relu,
        LayerSpec::pool(2, 2),
        LayerSpec::Flatten,
        LayerSpec::Dense { units: 4 },
        LayerSpec::Relu,
        LayerSpec::Dense { units: 1 },
        LayerSpec::Sigmoid,
    ];
    let mut net = random_network(input, layers, rng);
    let batch: Vec<(Vec<f64>, f64)> = (0..2)
        .map(|_| (uniform(rng, input.len(), 0.0, 1.0), if rng.gen_bool(0.5) { 1.0 } else { 0.0 }))
        .collect();
    let mut trace = Trace::default();
    let mut grads = net.zero_grads();
    for (x, y) in &batch {
        net.forward(x, &mut trace).expect("shapes fixed");
        net.bce_backward(&mut trace, *y, 0.5, &mut grads).expect("sigmoid head");
    }
    check_params(&mut net, &grads, |net, trace| {
        batch
            .iter()
            .map(|(x, y)| bce_loss(net.forward(x, trace).expect("shapes fixed")[0], *y))
            .sum::<f64>()
            / batch.len() as f64
    })
}

const KINDS: [&str; 7] = ["conv2d", "maxpool2d", "relu", "flatten", "dense", "sigmoid", "network"];

/// Runs `configs` random configurations of every layer kind (plus a whole
/// network under BCE) and reports the worst relative error per kind.
pub fn gradcheck_suite(seed: u64, configs: usize) -> Vec<LayerCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<LayerCheck> = KINDS
        .iter()
        .map(|&kind| LayerCheck {
            kind,
            max_rel_error: 0.0,
            checked: 0,
        })
        .collect();
    for _ in 0..configs {
        for check in &mut out {
            let (worst, n) = check_kind(check.kind, &mut rng);
            check.max_rel_error = check.max_rel_error.max(worst);
            check.checked += n;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_for_a_few_seeds() {
        for seed in [0, 7] {
            for c in gradcheck_suite(seed, 3) {
                assert!(c.passed(), "{c:?}");
                assert!(c.checked > 0);
            }
        }
    }

    #[test]
    fn detects_a_wrong_gradient() {
        assert!(rel_error(1.0, 1.01) > GRADCHECK_TOLERANCE);
        assert!(rel_error(0.0, 0.0) == 0.0);
    }
}

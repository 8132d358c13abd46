use super::network::{Grads, Network};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerKind {
    /// β₁ = 0.9, β₂ = 0.999, ε = 1e-8.
    Adam,
    SgdMomentum { momentum: f64 },
}

impl OptimizerKind {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Adam => "adam",
            OptimizerKind::SgdMomentum { .. } => "sgd-momentum",
        }
    }
}

const BETA1: f32 = 0.9;
const BETA2: f32 = 0.999;
const EPS: f32 = 1e-8;

/// Optimizer state: first/second moments for Adam, velocity for SGD.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f32,
    step: i32,
    first: Vec<Vec<f32>>,
    second: Vec<Vec<f32>>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, net: &Network<f32>) -> Self {
        let zeros: Vec<Vec<f32>> = net
            .params()
            .iter()
            .flat_map(|p| [vec![0.0; p.weight.len()], vec![0.0; p.bias.len()]])
            .collect();
        Optimizer {
            kind,
            lr: lr as f32,
            step: 0,
            second: if kind == OptimizerKind::Adam { zeros.clone() } else { Vec::new() },
            first: zeros,
        }
    }

    pub fn step(&mut self, net: &mut Network<f32>, grads: &Grads<f32>) {
        self.step += 1;
        let params = net
            .params_mut()
            .iter_mut()
            .flat_map(|p| [&mut p.weight, &mut p.bias]);
        match self.kind {
            OptimizerKind::Adam => {
                let c1 = 1.0 - BETA1.powi(self.step);
                let c2 = 1.0 - BETA2.powi(self.step);
                for (((p, g), m), v) in params
                    .zip(grads.tensors())
                    .zip(&mut self.first)
                    .zip(&mut self.second)
                {
                    for (((p, &g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                        *m = BETA1 * *m + (1.0 - BETA1) * g;
                        *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                        *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + EPS);
                    }
                }
            }
            OptimizerKind::SgdMomentum { momentum } => {
                let mu = momentum as f32;
                for ((p, g), vel) in params.zip(grads.tensors()).zip(&mut self.first) {
                    for ((p, &g), vel) in p.iter_mut().zip(g).zip(vel.iter_mut()) {
                        *vel = mu * *vel - self.lr * g;
                        *p += *vel;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{LayerSpec, Shape};

    #[test]
    fn first_adam_step_moves_by_learning_rate() {
        let mut net: Network<f32> =
            Network::new(Shape::new(1, 1, 2), vec![LayerSpec::Dense { units: 1 }]).unwrap();
        let mut grads = net.zero_grads();
        grads.layers[0].weight = vec![0.5, -2.0];
        grads.layers[0].bias = vec![0.0];
        let mut opt = Optimizer::new(OptimizerKind::Adam, 0.01, &net);
        opt.step(&mut net, &grads);
        let w = &net.params()[0].weight;
        assert!((w[0] + 0.01).abs() < 1e-6);
        assert!((w[1] - 0.01).abs() < 1e-6);
        assert_eq!(net.params()[0].bias[0], 0.0);
    }

    #[test]
    fn sgd_momentum_accumulates_velocity() {
        let mut net: Network<f32> =
            Network::new(Shape::new(1, 1, 1), vec![LayerSpec::Dense { units: 1 }]).unwrap();
        let mut grads = net.zero_grads();
        grads.layers[0].weight = vec![1.0];
        let mut opt = Optimizer::new(OptimizerKind::SgdMomentum { momentum: 0.5 }, 0.1, &net);
        opt.step(&mut net, &grads);
        opt.step(&mut net, &grads);
        assert!((net.params()[0].weight[0] + 0.25).abs() < 1e-7);
    }
}

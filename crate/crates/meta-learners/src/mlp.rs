use demand_core::{task_rng, StreamDomain};
use rand::Rng;
use serde::{Deserialize, Serialize};

use info_design::SupervisionTarget;

use crate::MetaError;

/// One dense layer, weights row-major `[out_dim x in_dim]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl DenseLayer {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            w: vec![0.0; in_dim * out_dim],
            b: vec![0.0; out_dim],
        }
    }
}

/// Rectifier MLP with a 2-dimensional linear output head (theta0, theta1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<DenseLayer>,
}

impl MlpModel {
    /// Uniform init on +-sqrt(6 / (fan_in + fan_out)), biases zero.
    pub fn new(input_dim: usize, hidden_width: usize, hidden_depth: usize, seed: u64) -> Self {
        let mut rng = task_rng(seed, StreamDomain::ModelInit, 0);
        let mut dims = vec![input_dim];
        dims.extend(std::iter::repeat(hidden_width).take(hidden_depth));
        dims.push(2);
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for win in dims.windows(2) {
            let (fan_in, fan_out) = (win[0], win[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let mut layer = DenseLayer::zeros(fan_in, fan_out);
            for w in layer.w.iter_mut() {
                *w = rng.gen_range(-limit..=limit);
            }
            layers.push(layer);
        }
        Self { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    /// A same-shape model with all parameters zero (gradient / moment
    /// buffers).
    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| DenseLayer::zeros(l.in_dim, l.out_dim))
                .collect(),
        }
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.w.iter().chain(l.b.iter()))
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.w.iter_mut().chain(l.b.iter_mut()))
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }
}

fn affine(layer: &DenseLayer, x: &[f64], out: &mut Vec<f64>) {
    out.clear();
    for (row, &b) in layer.w.chunks_exact(layer.in_dim).zip(&layer.b) {
        let dot: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum();
        out.push(b + dot);
    }
}

/// Deterministic affine-rectifier composition; returns (theta0, theta1).
pub fn mlp_forward(model: &MlpModel, input: &[f64]) -> Result<[f64; 2], MetaError> {
    if input.len() != model.input_dim() {
        return Err(MetaError::DimensionMismatch {
            expected: model.input_dim(),
            got: input.len(),
        });
    }
    let mut cur = input.to_vec();
    let mut next = Vec::new();
    let last = model.layers.len() - 1;
    for (i, layer) in model.layers.iter().enumerate() {
        affine(layer, &cur, &mut next);
        if i < last {
            for v in next.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok([cur[0], cur[1]])
}

/// Forward pass keeping post-activation values per layer (for backprop).
fn forward_cached(model: &MlpModel, input: &[f64]) -> Vec<Vec<f64>> {
    let mut acts: Vec<Vec<f64>> = Vec::with_capacity(model.layers.len() + 1);
    acts.push(input.to_vec());
    let last = model.layers.len() - 1;
    for (i, layer) in model.layers.iter().enumerate() {
        let mut out = Vec::with_capacity(layer.out_dim);
        affine(layer, acts.last().unwrap(), &mut out);
        if i < last {
            for v in out.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        acts.push(out);
    }
    acts
}

/// Weighted squared loss of one task and its exact parameter gradient via
/// reverse accumulation. The gradient is scaled by `scale` (used to
/// average over a minibatch) and accumulated into `grad`.
///
/// Loss: `sum_t w_t (D_t - (out0 + p_t * out1))^2`.
pub fn mlp_backward(
    model: &MlpModel,
    input: &[f64],
    targets: &[SupervisionTarget],
    scale: f64,
    grad: &mut MlpModel,
) -> Result<f64, MetaError> {
    if input.len() != model.input_dim() {
        return Err(MetaError::DimensionMismatch {
            expected: model.input_dim(),
            got: input.len(),
        });
    }
    let acts = forward_cached(model, input);
    let out = acts.last().unwrap();
    let mut loss = 0.0;
    let (mut g0, mut g1) = (0.0, 0.0);
    for t in targets {
        let pred = out[0] + t.price * out[1];
        let r = pred - t.demand;
        loss += t.weight * r * r;
        g0 += 2.0 * t.weight * r;
        g1 += 2.0 * t.weight * r * t.price;
    }

    let mut delta = vec![g0 * scale, g1 * scale];
    let mut next_delta: Vec<f64> = Vec::new();
    for (i, layer) in model.layers.iter().enumerate().rev() {
        let a_in = &acts[i];
        let glayer = &mut grad.layers[i];
        for (o, &d) in delta.iter().enumerate() {
            glayer.b[o] += d;
            let row = &mut glayer.w[o * layer.in_dim..(o + 1) * layer.in_dim];
            for (gw, &a) in row.iter_mut().zip(a_in) {
                *gw += d * a;
            }
        }
        if i > 0 {
            // Propagate through the rectifier: post-activation 0 means the
            // unit was clamped, so it carries no gradient.
            next_delta.clear();
            next_delta.resize(layer.in_dim, 0.0);
            for (o, &d) in delta.iter().enumerate() {
                let row = &layer.w[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (nd, &w) in next_delta.iter_mut().zip(row) {
                    *nd += d * w;
                }
            }
            for (nd, &a) in next_delta.iter_mut().zip(a_in) {
                if a <= 0.0 {
                    *nd = 0.0;
                }
            }
            std::mem::swap(&mut delta, &mut next_delta);
        }
    }
    Ok(loss)
}

/// Adam optimizer state (first/second moments with bias correction).
#[derive(Debug, Clone)]
pub struct AdamState {
    m: MlpModel,
    v: MlpModel,
    t: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl AdamState {
    pub fn new(model: &MlpModel) -> Self {
        Self {
            m: model.zeros_like(),
            v: model.zeros_like(),
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step(&mut self, model: &mut MlpModel, grad: &MlpModel, lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (((p, g), m), v) in model
            .params_mut()
            .zip(grad.params())
            .zip(self.m.params_mut())
            .zip(self.v.params_mut())
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_give_zero_output() {
        let model = MlpModel::new(3, 4, 2, 0).zeros_like();
        assert_eq!(mlp_forward(&model, &[1.0, -2.0, 0.5]).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn hand_computed_tiny_network() {
        // 1 input -> 2 hidden (ReLU) -> 2 outputs, weights set by hand.
        let model = MlpModel {
            layers: vec![
                DenseLayer {
                    in_dim: 1,
                    out_dim: 2,
                    w: vec![2.0, -3.0],
                    b: vec![0.5, 1.0],
                },
                DenseLayer {
                    in_dim: 2,
                    out_dim: 2,
                    w: vec![1.0, 1.0, -1.0, 0.5],
                    b: vec![0.0, 0.25],
                },
            ],
        };
        // x = 1: hidden pre = (2.5, -2) -> post = (2.5, 0)
        // out0 = 2.5, out1 = -2.5 + 0.25 = -2.25
        assert_eq!(mlp_forward(&model, &[1.0]).unwrap(), [2.5, -2.25]);
        // x = -1: hidden pre = (-1.5, 4) -> post = (0, 4)
        // out0 = 4, out1 = 2 + 0.25 = 2.25
        assert_eq!(mlp_forward(&model, &[-1.0]).unwrap(), [4.0, 2.25]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let model = MlpModel::new(3, 4, 1, 0);
        assert_eq!(
            mlp_forward(&model, &[1.0, 2.0]),
            Err(MetaError::DimensionMismatch { expected: 3, got: 2 })
        );
    }

    #[test]
    fn zero_targets_zero_predictions_zero_gradient() {
        let model = MlpModel::new(2, 3, 1, 1).zeros_like();
        let mut grad = model.zeros_like();
        let targets = [SupervisionTarget {
            price: 1.0,
            demand: 0.0,
            weight: 1.0,
        }];
        let loss = mlp_backward(&model, &[0.3, -0.4], &targets, 1.0, &mut grad).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.params().all(|&g| g == 0.0));
    }

    #[test]
    fn single_linear_layer_matches_least_squares_gradient() {
        // No hidden layers: out = W x + b, so the parameter gradient is
        // the classic least-squares gradient 2 w r (d out/d param).
        let model = MlpModel {
            layers: vec![DenseLayer {
                in_dim: 2,
                out_dim: 2,
                w: vec![0.3, -0.2, 0.1, 0.4],
                b: vec![0.05, -0.1],
            }],
        };
        let x = [1.5, -0.7];
        let t = SupervisionTarget {
            price: 2.0,
            demand: 1.0,
            weight: 0.7,
        };
        let mut grad = model.zeros_like();
        mlp_backward(&model, &x, &[t], 1.0, &mut grad).unwrap();

        let out = mlp_forward(&model, &x).unwrap();
        let r = out[0] + t.price * out[1] - t.demand;
        let want_b = [2.0 * t.weight * r, 2.0 * t.weight * r * t.price];
        assert!((grad.layers[0].b[0] - want_b[0]).abs() < 1e-12);
        assert!((grad.layers[0].b[1] - want_b[1]).abs() < 1e-12);
        for j in 0..2 {
            assert!((grad.layers[0].w[j] - want_b[0] * x[j]).abs() < 1e-12);
            assert!((grad.layers[0].w[2 + j] - want_b[1] * x[j]).abs() < 1e-12);
        }
    }
}

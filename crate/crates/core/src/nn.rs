//! Small dense feed-forward networks with exact reverse-mode gradients.
//!
//! Parameters live in one flat buffer so optimizers and penalties can treat a
//! network as a plain vector. The layout is, for every hidden layer in order,
//! the weight matrix (row-major, `outputs x inputs`) followed by the bias, then
//! the output weights and finally the output bias.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{HazardError, Result};

const SELU_SCALE: f64 = 1.0507;
const SELU_ALPHA: f64 = 1.67326;
const LEAKY_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Activation {
    Atan,
    Elu { alpha: f64 },
    LeakyRelu,
    LogLog,
    Relu,
    Selu,
    Tanh,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Atan => x.atan(),
            Activation::Elu { alpha } => {
                if x > 0.0 {
                    x
                } else {
                    alpha * x.exp_m1()
                }
            }
            Activation::LeakyRelu => {
                if x > 0.0 {
                    x
                } else {
                    LEAKY_SLOPE * x
                }
            }
            Activation::LogLog => -(-x.exp()).exp_m1(),
            Activation::Relu => x.max(0.0),
            Activation::Selu => {
                if x > 0.0 {
                    SELU_SCALE * x
                } else {
                    SELU_SCALE * SELU_ALPHA * x.exp_m1()
                }
            }
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative of [`apply`](Self::apply); at the kink of the piecewise
    /// kinds the left branch is used, so `Relu` has slope 0 at 0.
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Atan => 1.0 / (1.0 + x * x),
            Activation::Elu { alpha } => {
                if x > 0.0 {
                    1.0
                } else {
                    alpha * x.exp()
                }
            }
            Activation::LeakyRelu => {
                if x > 0.0 {
                    1.0
                } else {
                    LEAKY_SLOPE
                }
            }
            Activation::LogLog => (x - x.exp()).exp(),
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Selu => {
                if x > 0.0 {
                    SELU_SCALE
                } else {
                    SELU_SCALE * SELU_ALPHA * x.exp()
                }
            }
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
        }
    }
}

/// Shape of one hidden layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub width: usize,
    pub activation: Activation,
    #[serde(default)]
    pub dropout: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HiddenLayer {
    inputs: usize,
    outputs: usize,
    activation: Activation,
    dropout: f64,
    offset: usize,
}

impl HiddenLayer {
    fn weights_len(&self) -> usize {
        self.inputs * self.outputs
    }

    fn bias_offset(&self) -> usize {
        self.offset + self.weights_len()
    }

    fn end(&self) -> usize {
        self.bias_offset() + self.outputs
    }
}

/// One interval's risk network: hidden dense layers with activation and
/// dropout, followed by a linear scalar output.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalNetwork {
    input_dim: usize,
    layers: Vec<HiddenLayer>,
    params: Vec<f64>,
}

/// Intermediates of one forward pass, enough to replay the gradient.
#[derive(Debug, Clone)]
pub struct Tape {
    param_len: usize,
    /// Input to each hidden layer, then the input to the output layer.
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    /// Per-unit dropout scale (0 or 1/(1-rate)); empty when no mask was drawn.
    masks: Vec<Vec<f64>>,
}

impl IntervalNetwork {
    /// He-normal weights and zero biases.
    pub fn new<R: Rng + ?Sized>(input_dim: usize, hidden: &[LayerSpec], rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(input_dim, hidden)?;
        let mut fan_in = input_dim;
        for layer in net.layers.clone() {
            let w = init_he_normal(layer.outputs, fan_in, rng)?;
            net.params[layer.offset..layer.bias_offset()].copy_from_slice(&w);
            fan_in = layer.outputs;
        }
        let out = init_he_normal(1, fan_in, rng)?;
        let off = net.output_offset();
        net.params[off..off + fan_in].copy_from_slice(&out);
        Ok(net)
    }

    pub fn zeros(input_dim: usize, hidden: &[LayerSpec]) -> Result<Self> {
        if input_dim == 0 {
            return Err(HazardError::InvalidInput("network input dimension must be positive".into()));
        }
        let mut layers = Vec::with_capacity(hidden.len());
        let mut offset = 0;
        let mut inputs = input_dim;
        for spec in hidden {
            if spec.width == 0 {
                return Err(HazardError::InvalidInput("hidden layer width must be positive".into()));
            }
            if !(0.0..1.0).contains(&spec.dropout) {
                return Err(HazardError::InvalidInput(format!("dropout rate {} not in [0, 1)", spec.dropout)));
            }
            if let Activation::Elu { alpha } = spec.activation {
                if !(alpha > 0.0) {
                    return Err(HazardError::InvalidInput(format!("elu alpha {alpha} must be positive")));
                }
            }
            let layer = HiddenLayer {
                inputs,
                outputs: spec.width,
                activation: spec.activation,
                dropout: spec.dropout,
                offset,
            };
            offset = layer.end();
            inputs = spec.width;
            layers.push(layer);
        }
        let params = vec![0.0; offset + inputs + 1];
        Ok(Self { input_dim, layers, params })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        self.layers
            .iter()
            .map(|l| LayerSpec { width: l.outputs, activation: l.activation, dropout: l.dropout })
            .collect()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// `true` for weight entries, `false` for biases.
    pub fn weight_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.params.len()];
        for l in &self.layers {
            mask[l.offset..l.bias_offset()].iter_mut().for_each(|m| *m = true);
        }
        let off = self.output_offset();
        let last = self.last_width();
        mask[off..off + last].iter_mut().for_each(|m| *m = true);
        mask
    }

    fn last_width(&self) -> usize {
        self.layers.last().map_or(self.input_dim, |l| l.outputs)
    }

    fn output_offset(&self) -> usize {
        self.layers.last().map_or(0, |l| l.end())
    }

    /// Eval-mode output without recording a tape.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        for l in &self.layers {
            let w = &self.params[l.offset..l.bias_offset()];
            let b = &self.params[l.bias_offset()..l.end()];
            cur = (0..l.outputs)
                .map(|o| l.activation.apply(dot(&w[o * l.inputs..(o + 1) * l.inputs], &cur) + b[o]))
                .collect();
        }
        Ok(self.output(&cur))
    }

    fn output(&self, last: &[f64]) -> f64 {
        let off = self.output_offset();
        let n = last.len();
        dot(&self.params[off..off + n], last) + self.params[off + n]
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(HazardError::DimensionMismatch { expected: self.input_dim, got: x.len() });
        }
        Ok(())
    }

    /// Forward pass. In train mode each hidden unit is dropped with the layer's
    /// rate and survivors are scaled by `1 / (1 - rate)`; eval mode draws nothing.
    pub fn forward<R: Rng + ?Sized>(&self, x: &[f64], mode: Mode, rng: &mut R) -> Result<(f64, Tape)> {
        self.check_input(x)?;
        let mut inputs = Vec::with_capacity(self.layers.len() + 1);
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut masks = Vec::with_capacity(self.layers.len());
        let mut cur = x.to_vec();
        for l in &self.layers {
            let w = &self.params[l.offset..l.bias_offset()];
            let b = &self.params[l.bias_offset()..l.end()];
            let z: Vec<f64> = (0..l.outputs)
                .map(|o| dot(&w[o * l.inputs..(o + 1) * l.inputs], &cur) + b[o])
                .collect();
            let mut a: Vec<f64> = z.iter().map(|&v| l.activation.apply(v)).collect();
            let mask = if mode == Mode::Train && l.dropout > 0.0 {
                let keep = 1.0 - l.dropout;
                let m: Vec<f64> = (0..l.outputs)
                    .map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
                    .collect();
                a.iter_mut().zip(&m).for_each(|(v, s)| *v *= s);
                m
            } else {
                Vec::new()
            };
            inputs.push(std::mem::replace(&mut cur, a));
            pre.push(z);
            masks.push(mask);
        }
        let risk = self.output(&cur);
        inputs.push(cur);
        Ok((risk, Tape { param_len: self.params.len(), inputs, pre, masks }))
    }

    /// Accumulates `upstream * d(risk)/d(params)` for the pass recorded in `tape`.
    pub fn backward(&self, tape: &Tape, upstream: f64, grad: &mut [f64]) -> Result<()> {
        if tape.param_len != self.params.len()
            || tape.inputs.len() != self.layers.len() + 1
            || grad.len() != self.params.len()
        {
            return Err(HazardError::StaleTape(format!(
                "tape for {} params / {} layers, network has {} / {}",
                tape.param_len,
                tape.inputs.len().saturating_sub(1),
                self.params.len(),
                self.layers.len()
            )));
        }
        if upstream == 0.0 {
            return Ok(());
        }
        let off = self.output_offset();
        let last = &tape.inputs[self.layers.len()];
        let n = last.len();
        for (g, a) in grad[off..off + n].iter_mut().zip(last) {
            *g += upstream * a;
        }
        grad[off + n] += upstream;
        // d(risk)/d(activation output) of the last hidden layer
        let mut delta: Vec<f64> = self.params[off..off + n].iter().map(|w| upstream * w).collect();
        for (k, l) in self.layers.iter().enumerate().rev() {
            let mask = &tape.masks[k];
            let z = &tape.pre[k];
            let dz: Vec<f64> = (0..l.outputs)
                .map(|o| {
                    let m = if mask.is_empty() { 1.0 } else { mask[o] };
                    delta[o] * m * l.activation.derivative(z[o])
                })
                .collect();
            let input = &tape.inputs[k];
            for o in 0..l.outputs {
                if dz[o] == 0.0 {
                    continue;
                }
                let row = l.offset + o * l.inputs;
                for (g, a) in grad[row..row + l.inputs].iter_mut().zip(input) {
                    *g += dz[o] * a;
                }
                grad[l.bias_offset() + o] += dz[o];
            }
            if k > 0 {
                let w = &self.params[l.offset..l.bias_offset()];
                let mut next = vec![0.0; l.inputs];
                for o in 0..l.outputs {
                    if dz[o] == 0.0 {
                        continue;
                    }
                    for (nx, wv) in next.iter_mut().zip(&w[o * l.inputs..(o + 1) * l.inputs]) {
                        *nx += dz[o] * wv;
                    }
                }
                delta = next;
            }
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `outputs x fan_in` weights drawn i.i.d. from `Normal(0, 2 / fan_in)`, row-major.
pub fn init_he_normal<R: Rng + ?Sized>(outputs: usize, fan_in: usize, rng: &mut R) -> Result<Vec<f64>> {
    if fan_in == 0 {
        return Err(HazardError::InvalidInput("fan_in must be at least 1".into()));
    }
    let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("finite std");
    Ok((0..outputs * fan_in).map(|_| normal.sample(rng)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

/// Optimizer state for one parameter vector.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, n_params: usize) -> Result<Self> {
        if !(lr > 0.0) || !lr.is_finite() {
            return Err(HazardError::InvalidInput(format!("learning rate {lr} must be positive")));
        }
        let buf = if kind == OptimizerKind::Adam { n_params } else { 0 };
        Ok(Self {
            kind,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; buf],
            v: vec![0.0; buf],
            step: 0,
        })
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(HazardError::DimensionMismatch { expected: params.len(), got: grads.len() });
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(HazardError::Diverged { epoch: self.step as usize, lr: self.lr });
        }
        self.step += 1;
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grads) {
                    *p -= self.lr * g;
                }
            }
            OptimizerKind::Adam => {
                if self.m.len() != params.len() {
                    return Err(HazardError::DimensionMismatch { expected: self.m.len(), got: params.len() });
                }
                let t = self.step as i32;
                let c1 = 1.0 - self.beta1.powi(t);
                let c2 = 1.0 - self.beta2.powi(t);
                for i in 0..params.len() {
                    let g = grads[i];
                    self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
                    self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
                    let m_hat = self.m[i] / c1;
                    let v_hat = self.v[i] / c2;
                    params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyNorm {
    /// Lasso, `lambda * sum |w|`.
    L1,
    /// Ridge, `lambda * sum w^2`.
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Penalty {
    pub lambda: f64,
    pub norm: PenaltyNorm,
}

impl Penalty {
    pub fn none() -> Self {
        Self { lambda: 0.0, norm: PenaltyNorm::L2 }
    }

    pub fn value_and_grad(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let all = vec![true; params.len()];
        self.masked_value_and_grad(params, &all)
    }

    /// Penalty restricted to entries where `mask` is set; other entries get zero gradient.
    pub fn masked_value_and_grad(&self, params: &[f64], mask: &[bool]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; params.len()];
        if self.lambda == 0.0 {
            return (0.0, grad);
        }
        let mut value = 0.0;
        for ((p, g), &on) in params.iter().zip(grad.iter_mut()).zip(mask) {
            if !on {
                continue;
            }
            match self.norm {
                PenaltyNorm::L2 => {
                    value += p * p;
                    *g = 2.0 * self.lambda * p;
                }
                PenaltyNorm::L1 => {
                    value += p.abs();
                    *g = if *p > 0.0 {
                        self.lambda
                    } else if *p < 0.0 {
                        -self.lambda
                    } else {
                        0.0
                    };
                }
            }
        }
        (self.lambda * value, grad)
    }
}

/// Serialized form of a network: layer shapes, activations and row-major arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDoc {
    pub input_dim: usize,
    pub hidden: Vec<LayerDoc>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDoc {
    pub inputs: usize,
    pub outputs: usize,
    pub activation: Activation,
    pub dropout: f64,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl From<&IntervalNetwork> for NetworkDoc {
    fn from(net: &IntervalNetwork) -> Self {
        let hidden = net
            .layers
            .iter()
            .map(|l| LayerDoc {
                inputs: l.inputs,
                outputs: l.outputs,
                activation: l.activation,
                dropout: l.dropout,
                weights: net.params[l.offset..l.bias_offset()].to_vec(),
                bias: net.params[l.bias_offset()..l.end()].to_vec(),
            })
            .collect();
        let off = net.output_offset();
        let n = net.last_width();
        NetworkDoc {
            input_dim: net.input_dim,
            hidden,
            output_weights: net.params[off..off + n].to_vec(),
            output_bias: net.params[off + n],
        }
    }
}

impl TryFrom<NetworkDoc> for IntervalNetwork {
    type Error = HazardError;

    fn try_from(doc: NetworkDoc) -> Result<Self> {
        let specs: Vec<LayerSpec> = doc
            .hidden
            .iter()
            .map(|l| LayerSpec { width: l.outputs, activation: l.activation, dropout: l.dropout })
            .collect();
        let mut net = IntervalNetwork::zeros(doc.input_dim, &specs)?;
        for (layer, l) in net.layers.clone().iter().zip(&doc.hidden) {
            if l.inputs != layer.inputs || l.weights.len() != layer.weights_len() || l.bias.len() != layer.outputs {
                return Err(HazardError::InvalidInput("layer arrays do not match declared shapes".into()));
            }
            net.params[layer.offset..layer.bias_offset()].copy_from_slice(&l.weights);
            net.params[layer.bias_offset()..layer.end()].copy_from_slice(&l.bias);
        }
        let off = net.output_offset();
        let n = net.last_width();
        if doc.output_weights.len() != n {
            return Err(HazardError::DimensionMismatch { expected: n, got: doc.output_weights.len() });
        }
        net.params[off..off + n].copy_from_slice(&doc.output_weights);
        net.params[off + n] = doc.output_bias;
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const ALL: [Activation; 7] = [
        Activation::Atan,
        Activation::Elu { alpha: 0.1 },
        Activation::LeakyRelu,
        Activation::LogLog,
        Activation::Relu,
        Activation::Selu,
        Activation::Tanh,
    ];

    #[test]
    fn activation_table_values() {
        assert_eq!(Activation::Relu.apply(-1.0), 0.0);
        assert!((Activation::Selu.apply(1.0) - 1.0507).abs() < 1e-12);
        assert_eq!(Activation::Elu { alpha: 0.1 }.apply(0.0), 0.0);
        assert!((Activation::LeakyRelu.apply(-2.0) + 0.02).abs() < 1e-15);
        assert!((Activation::LogLog.apply(0.3) - (1.0 - (-(0.3f64).exp()).exp())).abs() < 1e-15);
        assert!((Activation::Selu.apply(-1.0) - 1.0507 * 1.67326 * ((-1.0f64).exp() - 1.0)).abs() < 1e-12);
        assert_eq!(Activation::Relu.derivative(0.0), 0.0);
    }

    #[test]
    fn activation_derivatives_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-6;
        for act in ALL {
            for _ in 0..20 {
                let x: f64 = rng.gen_range(-3.0..3.0);
                if x.abs() < 1e-5 {
                    continue;
                }
                let fd = (act.apply(x + h) - act.apply(x - h)) / (2.0 * h);
                let an = act.derivative(x);
                let rel = (fd - an).abs() / an.abs().max(1e-8);
                assert!(rel < 1e-6 || (fd - an).abs() < 1e-9, "{act:?} at {x}: fd {fd} vs {an}");
            }
        }
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = IntervalNetwork::zeros(3, &[LayerSpec { width: 4, activation: Activation::Tanh, dropout: 0.0 }]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (r, _) = net.forward(&[1.0, -2.0, 3.0], Mode::Train, &mut rng).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn hand_composed_single_unit() {
        let mut net = IntervalNetwork::zeros(1, &[LayerSpec { width: 1, activation: Activation::Relu, dropout: 0.0 }]).unwrap();
        // [w, b, out_w, out_b]
        net.params_mut().copy_from_slice(&[1.0, 0.0, 3.0, 0.0]);
        assert_eq!(net.predict(&[2.0]).unwrap(), 6.0);
    }

    #[test]
    fn dimension_mismatch() {
        let net = IntervalNetwork::zeros(2, &[]).unwrap();
        assert!(matches!(net.predict(&[1.0]), Err(HazardError::DimensionMismatch { .. })));
    }

    #[test]
    fn zero_dropout_train_equals_eval() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = [LayerSpec { width: 5, activation: Activation::Selu, dropout: 0.0 }];
        let net = IntervalNetwork::new(3, &spec, &mut rng).unwrap();
        let x = [0.3, -1.0, 2.0];
        let (t, _) = net.forward(&x, Mode::Train, &mut rng).unwrap();
        assert_eq!(t, net.predict(&x).unwrap());
    }

    #[test]
    fn dropout_expectation_matches_eval() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // single hidden layer so the output is linear in the mask
        let spec = [LayerSpec { width: 8, activation: Activation::Elu { alpha: 0.5 }, dropout: 0.3 }];
        let mut net = IntervalNetwork::new(2, &spec, &mut rng).unwrap();
        let n = net.n_params();
        net.params_mut()[n - 1] = 1.0;
        let x = [0.7, 1.3];
        let eval = net.predict(&x).unwrap();
        let reps = 20_000;
        let mean: f64 = (0..reps)
            .map(|_| net.forward(&x, Mode::Train, &mut rng).unwrap().0)
            .sum::<f64>()
            / reps as f64;
        assert!((mean - eval).abs() / eval.abs() < 0.02, "{mean} vs {eval}");
    }

    #[test]
    fn linear_gradient_is_upstream_times_input() {
        let net = IntervalNetwork::zeros(2, &[]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (_, tape) = net.forward(&[3.0, -4.0], Mode::Eval, &mut rng).unwrap();
        let mut g = vec![0.0; net.n_params()];
        net.backward(&tape, 0.5, &mut g).unwrap();
        assert_eq!(g, vec![1.5, -2.0, 0.5]);
        let mut z = vec![0.0; net.n_params()];
        net.backward(&tape, 0.0, &mut z).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stale_tape_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = IntervalNetwork::new(2, &[LayerSpec { width: 3, activation: Activation::Tanh, dropout: 0.0 }], &mut rng).unwrap();
        let b = IntervalNetwork::new(2, &[], &mut rng).unwrap();
        let (_, tape) = a.forward(&[1.0, 1.0], Mode::Eval, &mut rng).unwrap();
        let mut g = vec![0.0; b.n_params()];
        assert!(matches!(b.backward(&tape, 1.0, &mut g), Err(HazardError::StaleTape(_))));
    }

    fn finite_difference_check(spec: &[LayerSpec], seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = IntervalNetwork::new(3, spec, &mut rng).unwrap();
        for p in net.params_mut() {
            *p += rng.gen_range(-0.1..0.1);
        }
        let x = [0.4, -0.9, 1.7];
        let mut mask_rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let (_, tape) = net.forward(&x, Mode::Train, &mut mask_rng).unwrap();
        let mut g = vec![0.0; net.n_params()];
        net.backward(&tape, 1.0, &mut g).unwrap();
        let h = 1e-6;
        for k in 0..net.n_params() {
            let mut plus = net.clone();
            plus.params_mut()[k] += h;
            let mut minus = net.clone();
            minus.params_mut()[k] -= h;
            // replay the same dropout mask
            let fp = plus.forward(&x, Mode::Train, &mut ChaCha8Rng::seed_from_u64(seed + 100)).unwrap().0;
            let fm = minus.forward(&x, Mode::Train, &mut ChaCha8Rng::seed_from_u64(seed + 100)).unwrap().0;
            let fd = (fp - fm) / (2.0 * h);
            let err = (fd - g[k]).abs() / g[k].abs().max(fd.abs()).max(1e-3);
            assert!(err < 1e-5, "param {k}: fd {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        let smooth = [Activation::Tanh, Activation::Atan, Activation::LogLog, Activation::Selu, Activation::Elu { alpha: 0.7 }];
        for (s, act) in smooth.iter().enumerate() {
            for depth in 1..=4 {
                let spec: Vec<LayerSpec> = (0..depth)
                    .map(|d| LayerSpec { width: 3 + d, activation: *act, dropout: if d % 2 == 0 { 0.2 } else { 0.0 } })
                    .collect();
                finite_difference_check(&spec, (s * 10 + depth) as u64);
            }
        }
    }

    #[test]
    fn he_normal_variance_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let w = init_he_normal(12_500, 8, &mut rng).unwrap();
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / w.len() as f64;
        assert!((var - 0.25).abs() / 0.25 < 0.05, "variance {var}");
        let a = init_he_normal(4, 3, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = init_he_normal(4, 3, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a, b);
        assert!(init_he_normal(1, 0, &mut rng).is_err());
        let net = IntervalNetwork::new(3, &[LayerSpec { width: 4, activation: Activation::Relu, dropout: 0.0 }], &mut rng).unwrap();
        let mask = net.weight_mask();
        assert!(net.params().iter().zip(&mask).filter(|(_, &m)| !m).all(|(p, _)| *p == 0.0));
    }

    #[test]
    fn optimizers() {
        let mut p = vec![1.0];
        let mut sgd = Optimizer::new(OptimizerKind::Sgd, 0.1, 1).unwrap();
        sgd.step(&mut p, &[2.0]).unwrap();
        assert!((p[0] - 0.8).abs() < 1e-15);

        let mut q = vec![1.0, 1.0];
        let mut adam = Optimizer::new(OptimizerKind::Adam, 0.01, 2).unwrap();
        adam.step(&mut q, &[5.0, -0.3]).unwrap();
        assert!((q[0] - 0.99).abs() < 1e-8);
        assert!((q[1] - 1.01).abs() < 1e-8);

        for kind in [OptimizerKind::Sgd, OptimizerKind::Adam] {
            let mut r = vec![0.5, -0.5];
            let mut opt = Optimizer::new(kind, 0.1, 2).unwrap();
            opt.step(&mut r, &[0.0, 0.0]).unwrap();
            assert_eq!(r, vec![0.5, -0.5]);
            assert!(matches!(opt.step(&mut r, &[f64::NAN, 0.0]), Err(HazardError::Diverged { .. })));
        }
        assert!(Optimizer::new(OptimizerKind::Sgd, 0.0, 1).is_err());
    }

    #[test]
    fn penalties() {
        let zero = Penalty { lambda: 0.0, norm: PenaltyNorm::L1 };
        assert_eq!(zero.value_and_grad(&[1.0, 2.0]), (0.0, vec![0.0, 0.0]));
        let ridge = Penalty { lambda: 1.0, norm: PenaltyNorm::L2 };
        assert_eq!(ridge.value_and_grad(&[1.0, -2.0]), (5.0, vec![2.0, -4.0]));
        let lasso = Penalty { lambda: 1.0, norm: PenaltyNorm::L1 };
        assert_eq!(lasso.value_and_grad(&[1.0, -2.0, 0.0]), (3.0, vec![1.0, -1.0, 0.0]));
        let (v, g) = ridge.masked_value_and_grad(&[1.0, 3.0], &[true, false]);
        assert_eq!((v, g), (1.0, vec![2.0, 0.0]));
    }

    #[test]
    fn doc_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let spec = [
            LayerSpec { width: 4, activation: Activation::Elu { alpha: 0.1 }, dropout: 0.2 },
            LayerSpec { width: 2, activation: Activation::LeakyRelu, dropout: 0.0 },
        ];
        let net = IntervalNetwork::new(3, &spec, &mut rng).unwrap();
        let json = serde_json::to_string(&NetworkDoc::from(&net)).unwrap();
        let back = IntervalNetwork::try_from(serde_json::from_str::<NetworkDoc>(&json).unwrap()).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.layer_specs(), spec.to_vec());
    }
}

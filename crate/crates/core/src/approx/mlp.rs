use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::check_len;
use crate::{Error, Result};

/// Fully connected network with `tanh` hidden layers and a linear output.
///
/// Parameters live in one flat vector, layer by layer: the `out x in`
/// weight matrix in row-major order followed by the `out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Per-layer activations of the last forward pass plus backprop scratch.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

impl Workspace {
    pub fn new(net: &Mlp) -> Self {
        let widest = net.sizes.iter().copied().max().unwrap_or(0);
        Self {
            acts: net.sizes.iter().map(|&n| vec![0.0; n]).collect(),
            delta: vec![0.0; widest],
            delta_prev: vec![0.0; widest],
        }
    }

    /// Output of the last forward pass.
    pub fn output(&self) -> &[f64] {
        self.acts.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

pub(crate) fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
}

impl Mlp {
    /// Glorot-uniform weights `U(+-sqrt(6 / (n_in + n_out)))`, zero biases.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        let mut offset = 0;
        for w in sizes.windows(2) {
            let (n_in, n_out) = (w[0], w[1]);
            let limit = libm::sqrt(6.0 / (n_in + n_out) as f64);
            for p in &mut net.params[offset..offset + n_in * n_out] {
                *p = rng.random_range(-limit..limit);
            }
            offset += (n_in + 1) * n_out;
        }
        Ok(net)
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidConfig("an MLP needs at least two non-empty layers"));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            params: vec![0.0; param_count(sizes)],
        })
    }

    pub fn from_params(sizes: &[usize], params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        check_len("MLP parameters", net.params.len(), params.len())?;
        net.params = params;
        Ok(net)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        self.sizes[self.sizes.len() - 1]
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        check_len("MLP input", self.input_dim(), input.len())?;
        let mut ws = Workspace::new(self);
        Ok(self.forward_into(input, &mut ws).to_vec())
    }

    /// Forward pass that keeps every activation in `ws` for a later [`Mlp::backward`].
    pub fn forward_into<'w>(&self, input: &[f64], ws: &'w mut Workspace) -> &'w [f64] {
        debug_assert_eq!(input.len(), self.input_dim());
        ws.acts[0].copy_from_slice(input);
        let last = self.sizes.len() - 2;
        let mut offset = 0;
        for (layer, w) in self.sizes.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = &self.params[offset..offset + n_in * n_out];
            let biases = &self.params[offset + n_in * n_out..offset + (n_in + 1) * n_out];
            let (prev, rest) = ws.acts.split_at_mut(layer + 1);
            let a_in = &prev[layer];
            let a_out = &mut rest[0];
            for (o, out) in a_out.iter_mut().enumerate() {
                let row = &weights[o * n_in..(o + 1) * n_in];
                let z = biases[o] + row.iter().zip(a_in).map(|(w, a)| w * a).sum::<f64>();
                *out = if layer == last { z } else { libm::tanh(z) };
            }
            offset += (n_in + 1) * n_out;
        }
        ws.output()
    }

    /// Adds `scale * d(out_grad . output) / d(params)` into `grad`, using the
    /// activations stored by the preceding [`Mlp::forward_into`].
    pub fn backward(&self, ws: &mut Workspace, out_grad: &[f64], scale: f64, grad: &mut [f64]) {
        debug_assert_eq!(out_grad.len(), self.output_dim());
        debug_assert_eq!(grad.len(), self.params.len());
        let n_layers = self.sizes.len() - 1;
        ws.delta[..out_grad.len()].copy_from_slice(out_grad);
        let mut offset_end = self.params.len();
        for layer in (0..n_layers).rev() {
            let (n_in, n_out) = (self.sizes[layer], self.sizes[layer + 1]);
            let offset = offset_end - (n_in + 1) * n_out;
            let a_in = &ws.acts[layer];
            let (g_w, g_b) = grad[offset..offset_end].split_at_mut(n_in * n_out);
            for o in 0..n_out {
                let d = scale * ws.delta[o];
                g_b[o] += d;
                if d != 0.0 {
                    for (g, a) in g_w[o * n_in..(o + 1) * n_in].iter_mut().zip(a_in) {
                        *g += d * a;
                    }
                }
            }
            if layer > 0 {
                let weights = &self.params[offset..offset + n_in * n_out];
                for j in 0..n_in {
                    ws.delta_prev[j] = 0.0;
                }
                for o in 0..n_out {
                    let d = ws.delta[o];
                    for (acc, w) in ws.delta_prev[..n_in].iter_mut().zip(&weights[o * n_in..(o + 1) * n_in]) {
                        *acc += w * d;
                    }
                }
                for j in 0..n_in {
                    let a = a_in[j];
                    ws.delta_prev[j] *= 1.0 - a * a;
                }
                core::mem::swap(&mut ws.delta, &mut ws.delta_prev);
            }
            offset_end = offset;
        }
    }

    /// Gradient of a scalar-output network with respect to every parameter.
    pub fn value_grad(&self, input: &[f64]) -> Result<Vec<f64>> {
        check_len("value network output", 1, self.output_dim())?;
        check_len("MLP input", self.input_dim(), input.len())?;
        let mut ws = Workspace::new(self);
        let mut grad = vec![0.0; self.params.len()];
        self.forward_into(input, &mut ws);
        self.backward(&mut ws, &[1.0], 1.0, &mut grad);
        Ok(grad)
    }
}

//! Fully connected ReLU network with a shifted-sigmoid output layer.

use serde::{Deserialize, Serialize};

use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProxyArch {
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub input_dim: usize,
    pub output_dim: usize,
}

impl ProxyArch {
    /// Three hidden layers of width 16 for a design space of `n_params`.
    pub fn default_for(n_params: usize) -> Self {
        Self::new(n_params, 3, 16)
    }

    pub fn new(n_params: usize, hidden_layers: usize, hidden_width: usize) -> Self {
        Self {
            hidden_layers,
            hidden_width,
            input_dim: 3 + n_params,
            output_dim: 6,
        }
    }

    /// Layer widths from input to output.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.input_dim];
        s.extend(std::iter::repeat_n(self.hidden_width, self.hidden_layers));
        s.push(self.output_dim);
        s
    }

    pub fn param_count(&self) -> usize {
        self.sizes().windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Weights and biases stored flat: for each layer, the `out × in` weight
/// matrix row-major followed by the bias vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub arch: ProxyArch,
    pub params: Vec<f64>,
}

/// Activations kept from a forward pass for the backward pass; buffers are
/// reused across calls.
#[derive(Default)]
pub(crate) struct Tape {
    /// Input to each layer (post-activation of the previous one).
    inputs: Vec<Vec<f64>>,
    /// Pre-activation of each layer.
    pre: Vec<Vec<f64>>,
    pub out: Vec<f64>,
    dz: Vec<f64>,
    da: Vec<f64>,
}

impl Mlp {
    pub fn zeros(arch: ProxyArch) -> Self {
        Self {
            arch,
            params: vec![0.0; arch.param_count()],
        }
    }

    /// He-normal hidden weights, zero biases.
    pub fn random(arch: ProxyArch, rng: &mut RngStream) -> Self {
        let mut mlp = Self::zeros(arch);
        let sizes = arch.sizes();
        let mut off = 0;
        for (l, w) in sizes.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let last = l + 2 == sizes.len();
            let std = if last {
                (1.0 / n_in as f64).sqrt()
            } else {
                (2.0 / n_in as f64).sqrt()
            };
            for p in &mut mlp.params[off..off + n_in * n_out] {
                *p = std * rng.normal();
            }
            off += n_in * n_out + n_out;
        }
        mlp
    }

    /// `(offset, inputs, outputs)` of each layer within `params`.
    pub fn layer_offsets(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        let mut off = 0;
        for w in self.arch.sizes().windows(2) {
            out.push((off, w[0], w[1]));
            off += w[0] * w[1] + w[1];
        }
        out
    }

    /// Network output in `(-1, 1)` per component.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut a = x.to_vec();
        let layers = self.layer_offsets();
        let n_layers = layers.len();
        for (l, &(off, n_in, n_out)) in layers.iter().enumerate() {
            let w = &self.params[off..off + n_in * n_out];
            let b = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
            let mut z = b.to_vec();
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &w[o * n_in..(o + 1) * n_in];
                *zo += row.iter().zip(&a).map(|(wi, ai)| wi * ai).sum::<f64>();
            }
            if l + 1 < n_layers {
                for v in &mut z {
                    *v = v.max(0.0);
                }
            } else {
                for v in &mut z {
                    *v = 2.0 * sigmoid(*v) - 1.0;
                }
            }
            a = z;
        }
        a
    }

    pub(crate) fn forward_tape(&self, x: &[f64], tape: &mut Tape) {
        let layers = self.layer_offsets();
        let n_layers = layers.len();
        tape.inputs.resize_with(n_layers, Vec::new);
        tape.pre.resize_with(n_layers, Vec::new);
        tape.inputs[0].clear();
        tape.inputs[0].extend_from_slice(x);
        for (l, &(off, n_in, n_out)) in layers.iter().enumerate() {
            let w = &self.params[off..off + n_in * n_out];
            let b = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
            let z = &mut tape.pre[l];
            z.clear();
            z.extend_from_slice(b);
            let a = &tape.inputs[l];
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &w[o * n_in..(o + 1) * n_in];
                *zo += row.iter().zip(a).map(|(wi, ai)| wi * ai).sum::<f64>();
            }
            if l + 1 < n_layers {
                let next = &mut tape.inputs[l + 1];
                next.clear();
                next.extend(tape.pre[l].iter().map(|v| v.max(0.0)));
            } else {
                tape.out.clear();
                tape.out.extend(tape.pre[l].iter().map(|v| 2.0 * sigmoid(*v) - 1.0));
            }
        }
    }

    /// Accumulate `∂(cot · y)/∂params` into `grad` (if given) and return
    /// `∂(cot · y)/∂x`, for the pass recorded in `tape`.
    pub(crate) fn backward_tape<'t>(&self, tape: &'t mut Tape, cot: &[f64], mut grad: Option<&mut [f64]>) -> &'t [f64] {
        let layers = self.layer_offsets();
        let n_layers = layers.len();
        // y = 2σ(z) − 1, dy/dz = 2σ(1 − σ)
        tape.dz.clear();
        tape.dz.extend(tape.pre[n_layers - 1].iter().zip(cot).map(|(z, c)| {
            let s = sigmoid(*z);
            c * 2.0 * s * (1.0 - s)
        }));
        for l in (0..n_layers).rev() {
            let (off, n_in, n_out) = layers[l];
            let a = &tape.inputs[l];
            let w = &self.params[off..off + n_in * n_out];
            let dz = &tape.dz;
            if let Some(g) = grad.as_deref_mut() {
                for o in 0..n_out {
                    if dz[o] == 0.0 {
                        continue;
                    }
                    let row = &mut g[off + o * n_in..off + (o + 1) * n_in];
                    for (gi, ai) in row.iter_mut().zip(a) {
                        *gi += dz[o] * ai;
                    }
                    g[off + n_in * n_out + o] += dz[o];
                }
            }
            tape.da.clear();
            tape.da.resize(n_in, 0.0);
            for o in 0..n_out {
                if dz[o] == 0.0 {
                    continue;
                }
                let row = &w[o * n_in..(o + 1) * n_in];
                for (d, wi) in tape.da.iter_mut().zip(row) {
                    *d += wi * dz[o];
                }
            }
            if l > 0 {
                let pre = &tape.pre[l - 1];
                tape.dz.clear();
                tape.dz
                    .extend(tape.da.iter().zip(pre).map(|(d, z)| if *z > 0.0 { *d } else { 0.0 }));
            }
        }
        &tape.da
    }
}

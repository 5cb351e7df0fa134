//! Hand-written dueling Q-network.
//!
//! A shared ReLU trunk feeds two linear heads: a scalar state value and
//! per-action advantages. The network output recenters the advantages,
//! `Q(s, a) = V(s) + A(s, a) - mean(A(s, .))`, which pins the head
//! decomposition so the two heads cannot drift by an additive constant.
//!
//! Forward, backward, and the optimizer are explicit loops over plain
//! `Vec<f64>` buffers; gradient correctness is enforced by a central
//! finite-difference oracle in the tests.

use rand::Rng;

use crate::error::{Error, Result};

/// One dense layer; `w` is row-major `[rows x cols]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Layer {
    fn xavier<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Layer {
        let limit = (6.0 / (rows + cols) as f64).sqrt();
        Layer {
            rows,
            cols,
            w: (0..rows * cols)
                .map(|_| rng.gen_range(-limit..limit))
                .collect(),
            b: vec![0.0; rows],
        }
    }

    fn zeroed(rows: usize, cols: usize) -> Layer {
        Layer {
            rows,
            cols,
            w: vec![0.0; rows * cols],
            b: vec![0.0; rows],
        }
    }

    fn forward(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for row in 0..self.rows {
            let weights = &self.w[row * self.cols..(row + 1) * self.cols];
            let sum: f64 = weights.iter().zip(input).map(|(w, x)| w * x).sum();
            out.push(sum + self.b[row]);
        }
    }
}

/// Gradient buffer for one layer, same shapes as the layer.
#[derive(Clone, Debug)]
pub struct LayerGrads {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

/// Gradients for every parameter of a [`QNetwork`], accumulated across
/// backward calls.
#[derive(Clone, Debug)]
pub struct Grads {
    pub trunk: Vec<LayerGrads>,
    pub value_head: LayerGrads,
    pub advantage_head: LayerGrads,
}

impl Grads {
    /// Flattened in the same order as [`QNetwork::params_mut`].
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in self
            .trunk
            .iter()
            .chain([&self.value_head, &self.advantage_head])
        {
            out.extend_from_slice(&layer.w);
            out.extend_from_slice(&layer.b);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QNetwork {
    pub state_dim: usize,
    pub action_dim: usize,
    pub hidden: Vec<usize>,
    pub trunk: Vec<Layer>,
    pub value_head: Layer,
    pub advantage_head: Layer,
}

impl QNetwork {
    /// Xavier-initialized network with the given trunk widths.
    pub fn new<R: Rng + ?Sized>(
        state_dim: usize,
        action_dim: usize,
        hidden: &[usize],
        rng: &mut R,
    ) -> Result<Self> {
        Self::check_shape(state_dim, action_dim, hidden)?;
        let mut trunk = Vec::with_capacity(hidden.len());
        let mut input = state_dim;
        for &width in hidden {
            trunk.push(Layer::xavier(width, input, rng));
            input = width;
        }
        Ok(QNetwork {
            state_dim,
            action_dim,
            hidden: hidden.to_vec(),
            trunk,
            value_head: Layer::xavier(1, input, rng),
            advantage_head: Layer::xavier(action_dim, input, rng),
        })
    }

    /// All-zero weights; useful for tests that need known outputs.
    pub fn zeroed(state_dim: usize, action_dim: usize, hidden: &[usize]) -> Result<Self> {
        Self::check_shape(state_dim, action_dim, hidden)?;
        let mut trunk = Vec::with_capacity(hidden.len());
        let mut input = state_dim;
        for &width in hidden {
            trunk.push(Layer::zeroed(width, input));
            input = width;
        }
        Ok(QNetwork {
            state_dim,
            action_dim,
            hidden: hidden.to_vec(),
            trunk,
            value_head: Layer::zeroed(1, input),
            advantage_head: Layer::zeroed(action_dim, input),
        })
    }

    fn check_shape(state_dim: usize, action_dim: usize, hidden: &[usize]) -> Result<()> {
        if state_dim == 0 || action_dim == 0 {
            return Err(Error::DimensionMismatch(
                "state and action dimensions must be positive".into(),
            ));
        }
        if hidden.is_empty() || hidden.contains(&0) {
            return Err(Error::DimensionMismatch(
                "trunk needs at least one hidden layer of positive width".into(),
            ));
        }
        Ok(())
    }

    /// Q-values for every action.
    pub fn forward(&self, state: &[f64]) -> Result<Vec<f64>> {
        let trace = self.forward_trace(state)?;
        Ok(trace.q)
    }

    fn forward_trace(&self, state: &[f64]) -> Result<Trace> {
        if state.len() != self.state_dim {
            return Err(Error::DimensionMismatch(format!(
                "state has {} dims, network expects {}",
                state.len(),
                self.state_dim
            )));
        }
        // activations[0] is the input; each later entry is post-ReLU.
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(self.trunk.len() + 1);
        activations.push(state.to_vec());
        let mut scratch = Vec::new();
        for layer in &self.trunk {
            layer.forward(activations.last().unwrap(), &mut scratch);
            for z in &mut scratch {
                if *z < 0.0 {
                    *z = 0.0;
                }
            }
            activations.push(scratch.clone());
        }
        let top = activations.last().unwrap();
        let mut value_out = Vec::new();
        self.value_head.forward(top, &mut value_out);
        let value = value_out[0];
        let mut advantage = Vec::new();
        self.advantage_head.forward(top, &mut advantage);
        let mean_adv: f64 = advantage.iter().sum::<f64>() / self.action_dim as f64;
        let q = advantage.iter().map(|a| value + a - mean_adv).collect();
        Ok(Trace {
            activations,
            advantage,
            q,
        })
    }

    /// Accumulates dJ/dparams into `grads` for the scalar
    /// `J = sum_a dq[a] * Q(state, a)`.
    pub fn backward(&self, state: &[f64], dq: &[f64], grads: &mut Grads) -> Result<()> {
        if dq.len() != self.action_dim {
            return Err(Error::DimensionMismatch(format!(
                "dq has {} entries, network has {} actions",
                dq.len(),
                self.action_dim
            )));
        }
        let trace = self.forward_trace(state)?;
        let top = trace.activations.last().unwrap();

        // Dueling aggregation: dJ/dV = sum(dq); dJ/dA_i = dq_i - mean(dq).
        let dq_sum: f64 = dq.iter().sum();
        let dvalue = dq_sum;
        let dadv: Vec<f64> = dq
            .iter()
            .map(|g| g - dq_sum / self.action_dim as f64)
            .collect();

        // Heads are linear in the trunk output.
        let mut dtop = vec![0.0; top.len()];
        for (col, slot) in dtop.iter_mut().enumerate() {
            *slot += dvalue * self.value_head.w[col];
        }
        for (row, &da) in dadv.iter().enumerate() {
            grads.advantage_head.b[row] += da;
            for (col, &t) in top.iter().enumerate() {
                grads.advantage_head.w[row * top.len() + col] += da * t;
                dtop[col] += da * self.advantage_head.w[row * top.len() + col];
            }
        }
        grads.value_head.b[0] += dvalue;
        for (col, &t) in top.iter().enumerate() {
            grads.value_head.w[col] += dvalue * t;
        }

        // Trunk, newest layer first. ReLU gradient masks on the stored
        // post-activation: zero output means the unit was clamped.
        let mut dout = dtop;
        for (layer_idx, layer) in self.trunk.iter().enumerate().rev() {
            let output = &trace.activations[layer_idx + 1];
            let input = &trace.activations[layer_idx];
            for (d, &o) in dout.iter_mut().zip(output) {
                if o == 0.0 {
                    *d = 0.0;
                }
            }
            let layer_grads = &mut grads.trunk[layer_idx];
            let mut dinput = vec![0.0; input.len()];
            for row in 0..layer.rows {
                let d = dout[row];
                if d == 0.0 {
                    continue;
                }
                layer_grads.b[row] += d;
                let weights = &layer.w[row * layer.cols..(row + 1) * layer.cols];
                for (col, (&x, &w)) in input.iter().zip(weights).enumerate() {
                    layer_grads.w[row * layer.cols + col] += d * x;
                    dinput[col] += d * w;
                }
            }
            dout = dinput;
        }
        Ok(())
    }

    pub fn zero_grads(&self) -> Grads {
        let layer_zeros = |layer: &Layer| LayerGrads {
            w: vec![0.0; layer.w.len()],
            b: vec![0.0; layer.b.len()],
        };
        Grads {
            trunk: self.trunk.iter().map(layer_zeros).collect(),
            value_head: layer_zeros(&self.value_head),
            advantage_head: layer_zeros(&self.advantage_head),
        }
    }

    /// Every parameter, in the fixed flattening order (trunk layers in
    /// depth order, then the value head, then the advantage head; weights
    /// before biases within a layer).
    pub fn params_mut(&mut self) -> Vec<&mut f64> {
        let mut out = Vec::new();
        let mut layers: Vec<&mut Layer> = self.trunk.iter_mut().collect();
        layers.push(&mut self.value_head);
        layers.push(&mut self.advantage_head);
        for layer in layers {
            out.extend(layer.w.iter_mut());
            out.extend(layer.b.iter_mut());
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.trunk
            .iter()
            .chain([&self.value_head, &self.advantage_head])
            .map(|l| l.w.len() + l.b.len())
            .sum()
    }

    /// Copies this network's weights into `target` (a target-network
    /// sync). Shapes must match exactly.
    pub fn sync_into(&self, target: &mut QNetwork) -> Result<()> {
        if self.state_dim != target.state_dim
            || self.action_dim != target.action_dim
            || self.hidden != target.hidden
        {
            return Err(Error::DimensionMismatch(
                "cannot sync networks of different shapes".into(),
            ));
        }
        target.trunk.clone_from(&self.trunk);
        target.value_head.clone_from(&self.value_head);
        target.advantage_head.clone_from(&self.advantage_head);
        Ok(())
    }
}

struct Trace {
    activations: Vec<Vec<f64>>,
    #[allow(dead_code)]
    advantage: Vec<f64>,
    q: Vec<f64>,
}

//! Q-learning machinery: the dueling network, replay pool, action
//! policy, TD updates, and checkpointing. Everything here works on plain
//! `f64` state vectors, so the same code trains on the reconfiguration
//! environment and on small synthetic MDPs in tests.

pub mod checkpoint;
pub mod net;
pub mod policy;
pub mod replay;

pub use net::{Grads, QNetwork};
pub use replay::{ReplayPool, Transition};

use crate::error::{Error, Result};

/// Default hidden widths of the Q-network trunk.
pub const DEFAULT_HIDDEN: [usize; 3] = [16, 8, 8];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimizerKind {
    /// Plain stochastic gradient descent.
    Sgd,
    /// Adaptive moments (beta1 0.9, beta2 0.999, eps 1e-8).
    Adam,
}

impl OptimizerKind {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adam" => Ok(OptimizerKind::Adam),
            other => Err(Error::InvalidHyperparam(format!(
                "unknown optimizer {other:?}, expected \"sgd\" or \"adam\""
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    /// Mean squared TD error.
    Squared,
    /// Huber at delta = 1, for outlier-heavy reward scales.
    Huber,
}

impl LossKind {
    pub fn name(&self) -> &'static str {
        match self {
            LossKind::Squared => "squared",
            LossKind::Huber => "huber",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "squared" => Ok(LossKind::Squared),
            "huber" => Ok(LossKind::Huber),
            other => Err(Error::InvalidHyperparam(format!(
                "unknown loss {other:?}, expected \"squared\" or \"huber\""
            ))),
        }
    }
}

/// Training hyperparameters.
///
/// `epsilon` follows the greedy-probability convention: it is the chance
/// of exploiting (acting greedily), not of exploring. Set
/// `epsilon_is_explore` to flip to the more common convention.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub epsilon_is_explore: bool,
    pub replay_capacity: usize,
    pub batch_size: usize,
    /// Updates between target-network weight copies.
    pub target_sync_every: usize,
    /// Environment steps between gradient updates.
    pub update_every_steps: usize,
    pub optimizer: OptimizerKind,
    pub loss: LossKind,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            learning_rate: 0.001,
            gamma: 0.7,
            epsilon: 0.7,
            epsilon_is_explore: false,
            replay_capacity: 50_000,
            batch_size: 32,
            target_sync_every: 200,
            update_every_steps: 5,
            optimizer: OptimizerKind::Sgd,
            loss: LossKind::Squared,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidHyperparam(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidHyperparam(format!(
                "gamma must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::InvalidHyperparam(format!(
                "epsilon must lie in [0, 1], got {}",
                self.epsilon
            )));
        }
        for (name, value) in [
            ("replay_capacity", self.replay_capacity),
            ("batch_size", self.batch_size),
            ("target_sync_every", self.target_sync_every),
            ("update_every_steps", self.update_every_steps),
        ] {
            if value == 0 {
                return Err(Error::InvalidHyperparam(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    /// Probability of acting greedily, under either epsilon convention.
    pub fn exploit_probability(&self) -> f64 {
        if self.epsilon_is_explore {
            1.0 - self.epsilon
        } else {
            self.epsilon
        }
    }
}

/// Optimizer state sized lazily to the network's parameter count.
#[derive(Clone, Debug, Default)]
pub struct OptimizerState {
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    step: u64,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// One TD update over a replay batch: computes the dueling-network TD
/// loss against the frozen target, backpropagates, and applies the
/// optimizer step. Returns the pre-step loss.
pub fn td_update(
    net: &mut QNetwork,
    target: &QNetwork,
    batch: &[Transition],
    hyper: &Hyperparams,
    opt: &mut OptimizerState,
) -> Result<f64> {
    hyper.validate()?;
    if batch.is_empty() {
        return Err(Error::TrainingFault("empty update batch".into()));
    }
    if net.state_dim != target.state_dim || net.action_dim != target.action_dim {
        return Err(Error::DimensionMismatch(
            "online and target networks disagree on shape".into(),
        ));
    }
    let scale = 1.0 / batch.len() as f64;
    let mut grads = net.zero_grads();
    let mut loss = 0.0;
    let mut dq = vec![0.0; net.action_dim];
    for t in batch {
        if t.action >= net.action_dim {
            return Err(Error::TrainingFault(format!(
                "transition action {} outside the action set of {}",
                t.action, net.action_dim
            )));
        }
        let q = net.forward(&t.state)?;
        let y = if t.terminal {
            t.reward
        } else {
            let q_next = target.forward(&t.next_state)?;
            let best = match &t.next_legal {
                Some(mask) => masked_max(&q_next, mask)?,
                None => q_next.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            };
            t.reward + hyper.gamma * best
        };
        let diff = q[t.action] - y;
        let (sample_loss, dloss) = match hyper.loss {
            LossKind::Squared => (diff * diff, 2.0 * diff),
            LossKind::Huber => {
                if diff.abs() <= 1.0 {
                    (0.5 * diff * diff, diff)
                } else {
                    (diff.abs() - 0.5, diff.signum())
                }
            }
        };
        loss += sample_loss * scale;
        dq.fill(0.0);
        dq[t.action] = dloss * scale;
        net.backward(&t.state, &dq, &mut grads)?;
    }
    if !loss.is_finite() {
        return Err(Error::TrainingFault(format!(
            "non-finite TD loss ({loss}); aborting before the weights degrade"
        )));
    }
    apply_step(net, &grads, hyper, opt)?;
    Ok(loss)
}

fn masked_max(q: &[f64], mask: &[bool]) -> Result<f64> {
    if q.len() != mask.len() {
        return Err(Error::DimensionMismatch(format!(
            "legality mask covers {} actions, expected {}",
            mask.len(),
            q.len()
        )));
    }
    q.iter()
        .zip(mask)
        .filter(|(_, &legal)| legal)
        .map(|(&v, _)| v)
        .fold(None, |best: Option<f64>, v| {
            Some(best.map_or(v, |b| b.max(v)))
        })
        .ok_or_else(|| Error::TrainingFault("legality mask permits no action".into()))
}

fn apply_step(
    net: &mut QNetwork,
    grads: &Grads,
    hyper: &Hyperparams,
    opt: &mut OptimizerState,
) -> Result<()> {
    let flat_grads = grads.flat();
    let mut params = net.params_mut();
    if params.len() != flat_grads.len() {
        return Err(Error::DimensionMismatch(
            "gradient buffer does not match the network".into(),
        ));
    }
    match hyper.optimizer {
        OptimizerKind::Sgd => {
            for (p, g) in params.iter_mut().zip(&flat_grads) {
                **p -= hyper.learning_rate * g;
            }
        }
        OptimizerKind::Adam => {
            if opt.first_moment.len() != flat_grads.len() {
                opt.first_moment = vec![0.0; flat_grads.len()];
                opt.second_moment = vec![0.0; flat_grads.len()];
                opt.step = 0;
            }
            opt.step += 1;
            let bias1 = 1.0 - ADAM_BETA1.powi(opt.step as i32);
            let bias2 = 1.0 - ADAM_BETA2.powi(opt.step as i32);
            for (i, (p, g)) in params.iter_mut().zip(&flat_grads).enumerate() {
                let m = &mut opt.first_moment[i];
                let v = &mut opt.second_moment[i];
                *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                let m_hat = *m / bias1;
                let v_hat = *v / bias2;
                **p -= hyper.learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPS);
            }
        }
    }
    Ok(())
}

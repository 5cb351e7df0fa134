//! Reconfiguration environment: states pair a workload mix with the
//! store's current index config; actions switch structures or nudge one
//! parameter along its axis.
//!
//! An episode fixes the workload, starts from a random config, and walks
//! until it revisits a config it has already held, so no episode can run
//! longer than the config space plus one step. Rewards compare the
//! throughput of the new config against the previous one on the same
//! operation stream, log-compressed, minus a flat charge whenever the
//! config actually changed.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use crate::bench::{BenchMode, Bencher};
use crate::error::{Error, Result};
use crate::index::{IndexConfig, StructureKind, StructureRegistry};
use crate::workload::{generate, OpStream, WorkloadSpec};

/// Reward shaping defaults: `k` compresses throughput deltas, `c_switch`
/// charges for any config change.
pub const DEFAULT_REWARD_K: f64 = 100.0;
pub const DEFAULT_SWITCH_COST: f64 = 0.1;

/// Piecewise reward: zero for an unchanged config; otherwise the
/// log-compressed throughput gain (zero when throughput did not improve)
/// minus the switch charge.
pub fn reward_eval(p_t: f64, p_prev: f64, switched: bool, k: f64, c_switch: f64) -> Result<f64> {
    for (name, value) in [("p_t", p_t), ("p_prev", p_prev)] {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::RewardDomain(format!(
                "{name} must be finite and positive, got {value}"
            )));
        }
    }
    if !k.is_finite() || k <= 0.0 {
        return Err(Error::RewardDomain(format!("k must be positive, got {k}")));
    }
    if !c_switch.is_finite() || c_switch < 0.0 {
        return Err(Error::RewardDomain(format!(
            "c_switch must be non-negative, got {c_switch}"
        )));
    }
    // An unchanged configuration scores 0 outright; r_time only applies
    // to a change, and even a losing change still pays the switch cost.
    if !switched {
        return Ok(0.0);
    }
    let r_time = if p_t > p_prev {
        ((p_t - p_prev) / k + 1.0).ln()
    } else {
        0.0
    };
    Ok(r_time - c_switch)
}

/// Environment state: the workload mix, a one-hot over the three
/// structure kinds, and each registered axis normalized to [0, 1]
/// (inactive structures' slots are zero).
#[derive(Clone, Debug, PartialEq)]
pub struct EnvState {
    pub workload: [f64; 5],
    pub kind_onehot: [f64; 3],
    pub param_norm: Vec<f64>,
}

impl EnvState {
    pub fn from_parts(
        registry: &StructureRegistry,
        workload: [f64; 5],
        config: &IndexConfig,
    ) -> Result<Self> {
        registry.validate_config(config)?;
        let mut kind_onehot = [0.0; 3];
        kind_onehot[config.kind.index()] = 1.0;
        let mut param_norm = vec![0.0; registry.total_axes()];
        let offset = registry.slot_offset(config.kind)?;
        let structure = registry.by_kind(config.kind).expect("validated above");
        for (axis_idx, (axis, &pos)) in structure.axes().iter().zip(&config.params).enumerate() {
            let span = axis.values.len() - 1;
            param_norm[offset + axis_idx] = if span == 0 {
                0.0
            } else {
                pos as f64 / span as f64
            };
        }
        Ok(EnvState {
            workload,
            kind_onehot,
            param_norm,
        })
    }

    /// Flat vector: workload, then one-hot, then parameter block.
    pub fn encode(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        out.extend_from_slice(&self.workload);
        out.extend_from_slice(&self.kind_onehot);
        out.extend_from_slice(&self.param_norm);
        out
    }

    pub fn dim(&self) -> usize {
        8 + self.param_norm.len()
    }

    /// Recovers the config (and workload mix) this state encodes.
    pub fn decode(&self, registry: &StructureRegistry) -> Result<([f64; 5], IndexConfig)> {
        let kind_idx = self
            .kind_onehot
            .iter()
            .position(|&x| (x - 1.0).abs() < 1e-9)
            .ok_or_else(|| Error::EnvUsage("state has no active structure flag".into()))?;
        if self
            .kind_onehot
            .iter()
            .filter(|&&x| x.abs() >= 1e-9)
            .count()
            != 1
        {
            return Err(Error::EnvUsage("structure flags are not one-hot".into()));
        }
        let kind = StructureKind::ALL[kind_idx];
        let structure = registry.by_kind(kind).ok_or_else(|| {
            Error::EnvUsage(format!(
                "state names unregistered structure {}",
                kind.name()
            ))
        })?;
        if self.param_norm.len() != registry.total_axes() {
            return Err(Error::DimensionMismatch(format!(
                "state has {} parameter slots, registry has {}",
                self.param_norm.len(),
                registry.total_axes()
            )));
        }
        let offset = registry.slot_offset(kind)?;
        let mut params = Vec::with_capacity(structure.axes().len());
        for (axis_idx, axis) in structure.axes().iter().enumerate() {
            let span = (axis.values.len() - 1) as f64;
            let norm = self.param_norm[offset + axis_idx];
            let pos = (norm * span).round();
            if !(0.0..=span).contains(&pos) || (norm * span - pos).abs() > 1e-9 {
                return Err(Error::EnvUsage(format!(
                    "parameter slot {axis_idx} of {} does not sit on the grid: {norm}",
                    kind.name()
                )));
            }
            params.push(pos as usize);
        }
        Ok((self.workload, IndexConfig::new(kind, params)))
    }

    pub fn state_dim(registry: &StructureRegistry) -> usize {
        8 + registry.total_axes()
    }
}

/// Fixed action set: keep, switch to one of the three kinds, or move one
/// parameter axis a single grid step. Axis slots beyond a structure's
/// axes are masked at runtime, and moves off the end of an axis clamp.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    Keep,
    SwitchStructure(StructureKind),
    ParamUp(usize),
    ParamDown(usize),
}

impl Action {
    /// Action indices cover every registry with `max_axes` axes.
    pub fn count(max_axes: usize) -> usize {
        4 + 2 * max_axes
    }

    pub fn from_index(index: usize, max_axes: usize) -> Option<Action> {
        match index {
            0 => Some(Action::Keep),
            1..=3 => Some(Action::SwitchStructure(StructureKind::ALL[index - 1])),
            _ => {
                let slot = index - 4;
                let axis = slot / 2;
                if axis >= max_axes {
                    return None;
                }
                Some(if slot % 2 == 0 {
                    Action::ParamUp(axis)
                } else {
                    Action::ParamDown(axis)
                })
            }
        }
    }

    pub fn to_index(&self) -> usize {
        match self {
            Action::Keep => 0,
            Action::SwitchStructure(kind) => 1 + kind.index(),
            Action::ParamUp(axis) => 4 + 2 * axis,
            Action::ParamDown(axis) => 5 + 2 * axis,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Action::Keep => "keep".into(),
            Action::SwitchStructure(kind) => format!("switch-{}", kind.name()),
            Action::ParamUp(axis) => format!("up-{axis}"),
            Action::ParamDown(axis) => format!("down-{axis}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub next_state: EnvState,
    pub reward: f64,
    pub terminal: bool,
}

#[derive(Clone, Debug)]
pub struct EnvConfig {
    pub reward_k: f64,
    pub switch_cost: f64,
    pub mode: BenchMode,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            reward_k: DEFAULT_REWARD_K,
            switch_cost: DEFAULT_SWITCH_COST,
            mode: BenchMode::Simulated,
        }
    }
}

struct Episode {
    stream_spec: WorkloadSpec,
    state: EnvState,
    config: IndexConfig,
    /// Configs this episode has already held; revisiting one ends it.
    appeared: Vec<IndexConfig>,
    p_prev: f64,
    terminal: bool,
}

/// The reconfiguration environment. One instance can run many episodes;
/// throughput lookups are memoized per workload spec in Simulated mode.
pub struct Env {
    bencher: Bencher,
    cfg: EnvConfig,
    episode: Option<Episode>,
    cache_spec: Option<WorkloadSpec>,
    cache_stream: Option<OpStream>,
    cache: BTreeMap<IndexConfig, f64>,
    bench_runs: usize,
}

impl Env {
    pub fn new(bencher: Bencher, cfg: EnvConfig) -> Self {
        Env {
            bencher,
            cfg,
            episode: None,
            cache_spec: None,
            cache_stream: None,
            cache: BTreeMap::new(),
            bench_runs: 0,
        }
    }

    pub fn registry(&self) -> &Arc<StructureRegistry> {
        self.bencher.registry()
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn state_dim(&self) -> usize {
        EnvState::state_dim(self.registry())
    }

    pub fn action_count(&self) -> usize {
        Action::count(self.registry().max_axes())
    }

    pub fn max_axes(&self) -> usize {
        self.registry().max_axes()
    }

    /// Longest possible episode: every config once, plus the revisit.
    pub fn episode_bound(&self) -> usize {
        self.registry().config_space_size() + 1
    }

    /// How many times a benchmark actually ran (cache misses only).
    pub fn bench_runs(&self) -> usize {
        self.bench_runs
    }

    pub fn state(&self) -> Option<&EnvState> {
        self.episode.as_ref().map(|ep| &ep.state)
    }

    pub fn current_config(&self) -> Option<&IndexConfig> {
        self.episode.as_ref().map(|ep| &ep.config)
    }

    /// Starts an episode on `spec` from a uniformly random kind and grid
    /// point. Clears any previous episode's appeared list.
    pub fn reset<R: Rng + ?Sized>(&mut self, spec: &WorkloadSpec, rng: &mut R) -> Result<EnvState> {
        spec.validate()?;
        let config = self.registry().random_config(rng);
        self.begin_episode(spec, config)
    }

    /// Starts an episode from a chosen configuration (rollout probes,
    /// exhaustive sweeps) instead of a random one.
    pub fn reset_to(&mut self, spec: &WorkloadSpec, config: &IndexConfig) -> Result<EnvState> {
        spec.validate()?;
        self.registry().validate_config(config)?;
        self.begin_episode(spec, config.clone())
    }

    fn begin_episode(&mut self, spec: &WorkloadSpec, config: IndexConfig) -> Result<EnvState> {
        if self.cache_spec.as_ref() != Some(spec) {
            self.cache_stream = Some(generate(spec)?);
            self.cache.clear();
            self.cache_spec = Some(spec.clone());
        }
        let p_prev = self.throughput(&config)?;
        let state = EnvState::from_parts(self.registry(), spec.vector(), &config)?;
        self.episode = Some(Episode {
            stream_spec: spec.clone(),
            state: state.clone(),
            config,
            appeared: Vec::new(),
            p_prev,
            terminal: false,
        });
        Ok(state)
    }

    /// Applies `action` to the current config. Masked axes, clamped edge
    /// moves, and same-config switches leave the config unchanged, which
    /// immediately re-enters the appeared list and ends the episode.
    pub fn step(&mut self, action: Action) -> Result<StepOutcome> {
        let registry = Arc::clone(self.registry());
        let episode = self
            .episode
            .as_ref()
            .ok_or_else(|| Error::EnvUsage("step before reset".into()))?;
        if episode.terminal {
            return Err(Error::EnvUsage("step on a finished episode".into()));
        }
        let old_config = episode.config.clone();
        let old_p = episode.p_prev;
        let workload = episode.state.workload;

        let new_config = apply_action(&registry, &old_config, action)?;
        let switched = new_config != old_config;
        let p_t = if switched {
            self.throughput(&new_config)?
        } else {
            old_p
        };
        let reward = reward_eval(
            p_t,
            old_p,
            switched,
            self.cfg.reward_k,
            self.cfg.switch_cost,
        )?;
        let next_state = EnvState::from_parts(&registry, workload, &new_config)?;

        let episode = self.episode.as_mut().expect("episode checked above");
        episode.appeared.push(old_config);
        let terminal = episode.appeared.contains(&new_config);
        episode.config = new_config;
        episode.state = next_state.clone();
        episode.p_prev = p_t;
        episode.terminal = terminal;
        Ok(StepOutcome {
            next_state,
            reward,
            terminal,
        })
    }

    /// Per-action legality for the current state: switches to registered
    /// kinds and moves on axes the current structure actually has.
    pub fn legal_mask(&self) -> Result<Vec<bool>> {
        let episode = self
            .episode
            .as_ref()
            .ok_or_else(|| Error::EnvUsage("no active episode".into()))?;
        Ok(self.legal_mask_for(&episode.config))
    }

    pub fn legal_mask_for(&self, config: &IndexConfig) -> Vec<bool> {
        let registry = self.registry();
        let axes = registry
            .by_kind(config.kind)
            .map(|s| s.axes().len())
            .unwrap_or(0);
        let mut mask = vec![false; self.action_count()];
        mask[Action::Keep.to_index()] = true;
        for kind in registry.kinds() {
            mask[Action::SwitchStructure(kind).to_index()] = true;
        }
        for axis in 0..axes {
            mask[Action::ParamUp(axis).to_index()] = true;
            mask[Action::ParamDown(axis).to_index()] = true;
        }
        mask
    }

    /// Throughput of `config` on the active spec's stream, memoized in
    /// Simulated mode.
    fn throughput(&mut self, config: &IndexConfig) -> Result<f64> {
        if self.cfg.mode == BenchMode::Simulated {
            if let Some(&hit) = self.cache.get(config) {
                return Ok(hit);
            }
        }
        let stream = self
            .cache_stream
            .as_ref()
            .ok_or_else(|| Error::EnvUsage("no active workload".into()))?;
        let result = self.bencher.run(config, stream, self.cfg.mode)?;
        self.bench_runs += 1;
        if self.cfg.mode == BenchMode::Simulated {
            self.cache.insert(config.clone(), result.throughput);
        }
        Ok(result.throughput)
    }

    /// The spec of the episode in progress.
    pub fn active_spec(&self) -> Option<&WorkloadSpec> {
        self.episode.as_ref().map(|ep| &ep.stream_spec)
    }
}

/// The config reached by `action` from `config`; unchanged configs are
/// how no-ops (masked axes, clamps, redundant switches) surface.
fn apply_action(
    registry: &StructureRegistry,
    config: &IndexConfig,
    action: Action,
) -> Result<IndexConfig> {
    match action {
        Action::Keep => Ok(config.clone()),
        Action::SwitchStructure(kind) => {
            if registry.by_kind(kind).is_none() {
                return Ok(config.clone());
            }
            // Switching lands on the target's default parameters, even
            // when the target is the current kind.
            registry.default_config(kind)
        }
        Action::ParamUp(axis) | Action::ParamDown(axis) => {
            let structure = registry
                .by_kind(config.kind)
                .ok_or_else(|| Error::InvalidConfig("config kind not registered".into()))?;
            if axis >= structure.axes().len() {
                return Ok(config.clone());
            }
            let mut params = config.params.clone();
            let len = structure.axes()[axis].values.len();
            params[axis] = match action {
                Action::ParamUp(_) => (params[axis] + 1).min(len - 1),
                _ => params[axis].saturating_sub(1),
            };
            Ok(IndexConfig::new(config.kind, params))
        }
    }
}

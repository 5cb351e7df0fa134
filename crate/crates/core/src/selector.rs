//! Extracting the best configuration from a trained policy.
//!
//! The selector rolls the greedy policy out from random starting
//! configurations and keeps a running maximum over the return recorded
//! at each visited configuration. The candidate check happens at the
//! top of every loop iteration, before the step, so a configuration is
//! credited with the return accumulated on arrival; the episode then
//! ends as usual when a configuration repeats. Rollouts exploit only:
//! selection evaluates the policy, it does not learn.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bench::{cost::CostModel, BenchMode, Bencher};
use crate::env::{Action, Env, EnvConfig};
use crate::error::{Error, Result};
use crate::index::{IndexConfig, StructureRegistry};
use crate::rl::policy::greedy_action;
use crate::rl::QNetwork;

/// Rollout schedule and return accounting for a selection run.
#[derive(Clone, Debug)]
pub struct SelectConfig {
    pub episodes: usize,
    /// Discount applied per step when accumulating returns.
    pub gamma: f64,
    /// Literal undiscounted accumulation (R = R + r) instead of the
    /// default gamma-weighted return.
    pub undiscounted: bool,
    pub env: EnvConfig,
    pub seed: u64,
}

impl Default for SelectConfig {
    fn default() -> Self {
        SelectConfig {
            episodes: 0,
            gamma: crate::rl::Hyperparams::default().gamma,
            undiscounted: false,
            env: EnvConfig::default(),
            seed: 42,
        }
    }
}

impl SelectConfig {
    /// Episode count giving every configuration a ~98% chance of
    /// appearing as an initial state (six draws per config).
    pub fn default_episodes(registry: &StructureRegistry) -> usize {
        6 * registry.config_space_size()
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::Selection(
                "selection needs at least one episode to record a candidate".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Selection(format!(
                "gamma must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Outcome of a selection run.
#[derive(Clone, Debug)]
pub struct SelectionResult {
    pub optimal_config: IndexConfig,
    /// Highest return recorded at any visited configuration.
    pub max_return: f64,
    pub episodes_run: usize,
    /// Best recorded return per configuration visited at a loop top.
    pub visited: BTreeMap<IndexConfig, f64>,
    /// Best (config, return) pair of each episode. Reporting extension;
    /// `optimal_config` depends only on the running maximum above.
    pub episode_best: Vec<(IndexConfig, f64)>,
}

/// Greedy rollouts from random initial configurations; returns the
/// configuration whose recorded arrival return was maximal.
pub fn select_optimal(
    net: &QNetwork,
    registry: Arc<StructureRegistry>,
    spec: &crate::workload::WorkloadSpec,
    cfg: &SelectConfig,
) -> Result<SelectionResult> {
    cfg.validate()?;
    let bencher = Bencher::new(
        Arc::clone(&registry),
        Arc::new(CostModel::embedded().clone()),
    );
    let mut env = Env::new(bencher, cfg.env.clone());
    if net.state_dim != env.state_dim() || net.action_dim != env.action_count() {
        return Err(Error::DimensionMismatch(format!(
            "checkpoint is {}x{}, environment expects {}x{}",
            net.state_dim,
            net.action_dim,
            env.state_dim(),
            env.action_count()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut max_return = f64::NEG_INFINITY;
    let mut optimal: Option<IndexConfig> = None;
    let mut visited: BTreeMap<IndexConfig, f64> = BTreeMap::new();
    let mut episode_best = Vec::with_capacity(cfg.episodes);

    for _ in 0..cfg.episodes {
        let mut state = env.reset(spec, &mut rng)?;
        let mut ret = 0.0;
        let mut step = 0u32;
        let mut best_here: Option<(IndexConfig, f64)> = None;
        loop {
            let config = env.current_config().expect("episode active").clone();
            // Candidate check precedes the step: the config is credited
            // with the return accumulated on arrival.
            if ret > max_return {
                max_return = ret;
                optimal = Some(config.clone());
            }
            visited
                .entry(config.clone())
                .and_modify(|best| *best = best.max(ret))
                .or_insert(ret);
            if best_here.as_ref().map_or(true, |(_, b)| ret > *b) {
                best_here = Some((config, ret));
            }

            let q = net.forward(&state.encode())?;
            let action_index = greedy_action(&q, &env.legal_mask()?)?;
            let action = Action::from_index(action_index, env.max_axes())
                .expect("greedy picks in-range actions");
            let outcome = env.step(action)?;
            let weight = if cfg.undiscounted {
                1.0
            } else {
                cfg.gamma.powi(step as i32)
            };
            ret += weight * outcome.reward;
            step += 1;
            state = outcome.next_state;
            if outcome.terminal {
                break;
            }
        }
        episode_best.push(best_here.expect("every episode visits its start"));
    }

    Ok(SelectionResult {
        optimal_config: optimal.expect("at least one episode ran"),
        max_return,
        episodes_run: cfg.episodes,
        visited,
        episode_best,
    })
}

/// One row of the selected-vs-baselines comparison.
#[derive(Clone, Debug)]
pub struct ComparisonRow {
    pub label: String,
    pub config: IndexConfig,
    pub throughput: f64,
    /// Percent throughput gain of the selected config over this row.
    pub selected_gain_pct: f64,
}

/// Benchmarks the selected configuration and each baseline on the
/// identical operation stream; the first row is always the selection.
pub fn select_report(
    result: &SelectionResult,
    registry: Arc<StructureRegistry>,
    spec: &crate::workload::WorkloadSpec,
    baselines: &[IndexConfig],
    mode: BenchMode,
) -> Result<Vec<ComparisonRow>> {
    let bencher = Bencher::new(
        Arc::clone(&registry),
        Arc::new(CostModel::embedded().clone()),
    );
    let mut configs = vec![result.optimal_config.clone()];
    configs.extend_from_slice(baselines);
    let results = bencher.compare(&configs, spec, mode)?;
    let selected_throughput = results[0].throughput;
    let mut rows = Vec::with_capacity(results.len());
    for (i, (config, bench)) in configs.iter().zip(&results).enumerate() {
        let label = if i == 0 {
            "selected".to_string()
        } else {
            config.kind.name().to_string()
        };
        rows.push(ComparisonRow {
            label,
            config: config.clone(),
            throughput: bench.throughput,
            selected_gain_pct: (selected_throughput - bench.throughput) / bench.throughput * 100.0,
        });
    }
    Ok(rows)
}

//! Benchmark runner: scores an index config against an operation stream.
//!
//! Measured mode executes the stream against a real index instance and
//! reports wall-clock throughput. Simulated mode walks the same stream
//! through the analytic [`CostModel`](cost::CostModel) instead, which is
//! deterministic and fast enough to sit inside a training loop. Both
//! modes preload `record_count` records before the stream starts.

pub mod cost;

pub use cost::CostModel;

use std::hint::black_box;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::index::{IndexConfig, Key, StructureRegistry, DEFAULT_CAPACITY};
use crate::workload::{generate, Op, OpStream, WorkloadSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchMode {
    Measured,
    Simulated,
}

impl BenchMode {
    pub fn name(&self) -> &'static str {
        match self {
            BenchMode::Measured => "measured",
            BenchMode::Simulated => "simulated",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "measured" | "meas" => Ok(BenchMode::Measured),
            "simulated" | "sim" => Ok(BenchMode::Simulated),
            other => Err(Error::Bench(format!(
                "unknown mode {other:?}, expected \"measured\" or \"simulated\""
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchResult {
    pub mode: BenchMode,
    /// Operations per second over the whole stream.
    pub throughput: f64,
    /// Wall clock in Measured mode; summed model cost in Simulated mode.
    pub elapsed: Duration,
    pub op_count: u64,
    /// Executed operations in kind order.
    pub kind_counts: [u64; 5],
}

/// Shared benching context: which structures exist, what they cost, and
/// how many entries a store instance may hold.
#[derive(Clone)]
pub struct Bencher {
    registry: Arc<StructureRegistry>,
    cost: Arc<CostModel>,
    capacity: usize,
}

impl Bencher {
    pub fn new(registry: Arc<StructureRegistry>, cost: Arc<CostModel>) -> Self {
        Bencher {
            registry,
            cost,
            capacity: DEFAULT_CAPACITY,
        }
    }

    pub fn with_capacity(mut self, capacity: usize) -> Self {
        self.capacity = capacity;
        self
    }

    pub fn registry(&self) -> &Arc<StructureRegistry> {
        &self.registry
    }

    pub fn cost_model(&self) -> &CostModel {
        &self.cost
    }

    /// Scores one config against a pre-generated stream.
    pub fn run(
        &self,
        config: &IndexConfig,
        stream: &OpStream,
        mode: BenchMode,
    ) -> Result<BenchResult> {
        if stream.is_empty() {
            return Err(Error::Bench("operation stream is empty".into()));
        }
        self.registry.validate_config(config)?;
        match mode {
            BenchMode::Simulated => self.run_simulated(config, stream),
            BenchMode::Measured => self.run_measured(config, stream),
        }
    }

    /// Generates the spec's stream and scores one config against it.
    pub fn run_spec(
        &self,
        config: &IndexConfig,
        spec: &WorkloadSpec,
        mode: BenchMode,
    ) -> Result<BenchResult> {
        let stream = generate(spec)?;
        self.run(config, &stream, mode)
    }

    /// Scores several configs against the identical stream.
    pub fn compare(
        &self,
        configs: &[IndexConfig],
        spec: &WorkloadSpec,
        mode: BenchMode,
    ) -> Result<Vec<BenchResult>> {
        let stream = generate(spec)?;
        configs
            .iter()
            .map(|config| self.run(config, &stream, mode))
            .collect()
    }

    fn run_simulated(&self, config: &IndexConfig, stream: &OpStream) -> Result<BenchResult> {
        let values = self.registry.resolve(config)?;
        let mut n = stream.record_count;
        let mut total = 0.0f64;
        for op in &stream.ops {
            total += self.cost.op_cost(config.kind, &values, op, n);
            if matches!(op, Op::Insert { .. }) {
                n += 1;
            }
        }
        let op_count = stream.len() as u64;
        Ok(BenchResult {
            mode: BenchMode::Simulated,
            throughput: op_count as f64 / total,
            elapsed: Duration::from_secs_f64(total),
            op_count,
            kind_counts: stream.kind_counts(),
        })
    }

    fn run_measured(&self, config: &IndexConfig, stream: &OpStream) -> Result<BenchResult> {
        let records =
            (0..stream.record_count).map(|id| (Key::from_id(id), stream.preload_value(id)));
        let mut index = self
            .registry
            .build_with_records(config, records, self.capacity)?;
        let start = Instant::now();
        for (i, op) in stream.ops.iter().enumerate() {
            match op {
                Op::Read { key_id } => {
                    black_box(index.read(&Key::from_id(*key_id)));
                }
                Op::Update { key_id } => {
                    black_box(index.update(&Key::from_id(*key_id), stream.value_for(i)));
                }
                Op::Scan { key_id, len } => {
                    black_box(index.scan(&Key::from_id(*key_id), *len as usize));
                }
                Op::Insert { key_id } => {
                    index.insert(Key::from_id(*key_id), stream.value_for(i))?;
                }
                Op::Rmw { key_id } => {
                    black_box(index.rmw(&Key::from_id(*key_id), stream.value_for(i)));
                }
            }
        }
        let elapsed = start.elapsed();
        let op_count = stream.len() as u64;
        Ok(BenchResult {
            mode: BenchMode::Measured,
            throughput: op_count as f64 / elapsed.as_secs_f64().max(f64::MIN_POSITIVE),
            elapsed,
            op_count,
            kind_counts: stream.kind_counts(),
        })
    }
}

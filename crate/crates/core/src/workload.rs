//! YCSB-style workload specification and operation stream generation.
//!
//! A [`WorkloadSpec`] fixes the operation mix, key distribution, and
//! sizes; [`generate`] expands it into a concrete [`OpStream`] that every
//! benchmark of that spec replays identically. Workload files are TOML
//! with a single `[workload]` section.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::index::{Value, DEFAULT_VALUE_BYTES};

pub const DEFAULT_OP_COUNT: u64 = 2_000;
pub const DEFAULT_RECORD_COUNT: u64 = 10_000;
pub const DEFAULT_SCAN_LEN: u32 = 100;
pub const DEFAULT_ZIPF_THETA: f64 = 0.99;
pub const DEFAULT_WORKLOAD_SEED: u64 = 42;

/// Proportions may drift from exactly 1.0 by float accumulation; anything
/// beyond this is a spec error.
pub const PROPORTION_SUM_TOLERANCE: f64 = 1e-9;

/// The five operation kinds, in the fixed order used by proportion
/// vectors, state encodings, and reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpKind {
    Read,
    Update,
    Scan,
    Insert,
    Rmw,
}

impl OpKind {
    pub const ALL: [OpKind; 5] = [
        OpKind::Read,
        OpKind::Update,
        OpKind::Scan,
        OpKind::Insert,
        OpKind::Rmw,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            OpKind::Read => "read",
            OpKind::Update => "update",
            OpKind::Scan => "scan",
            OpKind::Insert => "insert",
            OpKind::Rmw => "rmw",
        }
    }

    pub fn index(&self) -> usize {
        match self {
            OpKind::Read => 0,
            OpKind::Update => 1,
            OpKind::Scan => 2,
            OpKind::Insert => 3,
            OpKind::Rmw => 4,
        }
    }

    /// Single-letter tag for compact labels; `m` keeps rmw distinct from
    /// read.
    pub fn tag(&self) -> char {
        match self {
            OpKind::Read => 'r',
            OpKind::Update => 'u',
            OpKind::Scan => 's',
            OpKind::Insert => 'i',
            OpKind::Rmw => 'm',
        }
    }
}

/// Distribution of keys chosen for read/update/scan/rmw operations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KeyDist {
    Uniform,
    /// Skewed toward low key ids; `theta` in (0, 1).
    Zipfian {
        theta: f64,
    },
}

/// Declarative workload description. `proportions` follows the
/// [`OpKind::ALL`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct WorkloadSpec {
    pub proportions: [f64; 5],
    pub op_count: u64,
    pub record_count: u64,
    pub key_dist: KeyDist,
    pub scan_len: u32,
    pub value_len: usize,
    pub seed: u64,
}

impl WorkloadSpec {
    /// Spec with the given mix and every other field at its default.
    pub fn from_proportions(proportions: [f64; 5]) -> Result<Self> {
        let spec = WorkloadSpec {
            proportions,
            op_count: DEFAULT_OP_COUNT,
            record_count: DEFAULT_RECORD_COUNT,
            key_dist: KeyDist::Zipfian {
                theta: DEFAULT_ZIPF_THETA,
            },
            scan_len: DEFAULT_SCAN_LEN,
            value_len: DEFAULT_VALUE_BYTES,
            seed: DEFAULT_WORKLOAD_SEED,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// 100% of a single operation kind. Each kind gets its own fixed
    /// stream seed so the five pure workloads stay distinct but stable.
    pub fn pure(kind: OpKind) -> Self {
        let mut proportions = [0.0; 5];
        proportions[kind.index()] = 1.0;
        let mut spec = Self::from_proportions(proportions).expect("pure mix is valid");
        spec.seed = 1000 + kind.index() as u64;
        spec
    }

    pub fn validate(&self) -> Result<()> {
        for (kind, &p) in OpKind::ALL.iter().zip(&self.proportions) {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidWorkload(format!(
                    "{} proportion must be finite and non-negative, got {p}",
                    kind.name()
                )));
            }
        }
        let sum: f64 = self.proportions.iter().sum();
        if (sum - 1.0).abs() > PROPORTION_SUM_TOLERANCE {
            return Err(Error::InvalidWorkload(format!(
                "proportions must sum to 1, got {sum}"
            )));
        }
        if self.op_count == 0 {
            return Err(Error::InvalidWorkload("op_count must be positive".into()));
        }
        if self.record_count == 0 {
            return Err(Error::InvalidWorkload(
                "record_count must be positive".into(),
            ));
        }
        if let KeyDist::Zipfian { theta } = self.key_dist {
            if !(theta > 0.0 && theta < 1.0) {
                return Err(Error::InvalidWorkload(format!(
                    "zipfian theta must lie in (0, 1), got {theta}"
                )));
            }
        }
        if self.scan_len == 0 {
            return Err(Error::InvalidWorkload("scan_len must be positive".into()));
        }
        if self.value_len == 0 {
            return Err(Error::InvalidWorkload("value_len must be positive".into()));
        }
        Ok(())
    }

    /// The proportion vector, the workload half of an environment state.
    pub fn vector(&self) -> [f64; 5] {
        self.proportions
    }

    /// Compact label for reports, percentages in kind order.
    pub fn label(&self) -> String {
        let mut out = String::new();
        for (kind, &p) in OpKind::ALL.iter().zip(&self.proportions) {
            if !out.is_empty() {
                out.push('-');
            }
            let _ = write!(out, "{}{:02.0}", kind.tag(), p * 100.0);
        }
        out
    }
}

/// One concrete operation. Key ids index the preloaded record space;
/// inserts carry fresh ids past it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Read { key_id: u64 },
    Update { key_id: u64 },
    Scan { key_id: u64, len: u32 },
    Insert { key_id: u64 },
    Rmw { key_id: u64 },
}

impl Op {
    pub fn kind(&self) -> OpKind {
        match self {
            Op::Read { .. } => OpKind::Read,
            Op::Update { .. } => OpKind::Update,
            Op::Scan { .. } => OpKind::Scan,
            Op::Insert { .. } => OpKind::Insert,
            Op::Rmw { .. } => OpKind::Rmw,
        }
    }

    pub fn key_id(&self) -> u64 {
        match self {
            Op::Read { key_id }
            | Op::Update { key_id }
            | Op::Scan { key_id, .. }
            | Op::Insert { key_id }
            | Op::Rmw { key_id } => *key_id,
        }
    }
}

/// A fully expanded operation sequence plus the preload geometry needed
/// to replay it.
#[derive(Clone, Debug, PartialEq)]
pub struct OpStream {
    pub record_count: u64,
    pub value_len: usize,
    pub seed: u64,
    pub ops: Vec<Op>,
}

impl OpStream {
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Operation counts in [`OpKind::ALL`] order.
    pub fn kind_counts(&self) -> [u64; 5] {
        let mut counts = [0u64; 5];
        for op in &self.ops {
            counts[op.kind().index()] += 1;
        }
        counts
    }

    /// Deterministic payload for the write half of operation `op_index`.
    pub fn value_for(&self, op_index: usize) -> Value {
        deterministic_value(
            self.seed ^ 0x9e3779b97f4a7c15,
            op_index as u64,
            self.value_len,
        )
    }

    /// Deterministic payload for preloaded record `id`.
    pub fn preload_value(&self, id: u64) -> Value {
        deterministic_value(self.seed ^ 0x2545f4914f6cdd1d, id, self.value_len)
    }

    /// Stable byte encoding; equal streams encode equal bytes.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + self.ops.len() * 10);
        out.extend_from_slice(&self.record_count.to_le_bytes());
        out.extend_from_slice(&(self.value_len as u64).to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&(self.ops.len() as u64).to_le_bytes());
        for op in &self.ops {
            out.push(op.kind().index() as u8);
            out.extend_from_slice(&op.key_id().to_le_bytes());
            if let Op::Scan { len, .. } = op {
                out.extend_from_slice(&len.to_le_bytes());
            }
        }
        out
    }
}

/// splitmix64; enough mixing to decorrelate value bytes from ids.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn deterministic_value(seed: u64, id: u64, len: usize) -> Value {
    let mut state = seed ^ id.wrapping_mul(0xff51afd7ed558ccd);
    let mut bytes = Vec::with_capacity(len);
    while bytes.len() < len {
        let word = splitmix64(&mut state);
        bytes.extend_from_slice(&word.to_le_bytes());
    }
    bytes.truncate(len);
    Value::new(bytes).expect("generated value length is valid")
}

/// Expands a spec into its operation stream. The same spec always yields
/// the same stream.
pub fn generate(spec: &WorkloadSpec) -> Result<OpStream> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let zipf = match spec.key_dist {
        KeyDist::Zipfian { theta } => Some(
            Zipf::new(spec.record_count, theta)
                .map_err(|e| Error::InvalidWorkload(format!("zipfian: {e}")))?,
        ),
        KeyDist::Uniform => None,
    };
    let mut cumulative = [0.0f64; 5];
    let mut acc = 0.0;
    for (slot, &p) in cumulative.iter_mut().zip(&spec.proportions) {
        acc += p;
        *slot = acc;
    }
    let mut next_insert_id = spec.record_count;
    let mut ops = Vec::with_capacity(spec.op_count as usize);
    for _ in 0..spec.op_count {
        let draw: f64 = rng.gen();
        let kind = OpKind::ALL[cumulative.iter().position(|&c| draw < c).unwrap_or(4)];
        let op = match kind {
            OpKind::Insert => {
                let key_id = next_insert_id;
                next_insert_id += 1;
                Op::Insert { key_id }
            }
            _ => {
                let key_id = match &zipf {
                    // Zipf samples ranks 1..=n, skewed toward low ranks.
                    Some(z) => z.sample(&mut rng) as u64 - 1,
                    None => rng.gen_range(0..spec.record_count),
                };
                match kind {
                    OpKind::Read => Op::Read { key_id },
                    OpKind::Update => Op::Update { key_id },
                    OpKind::Scan => Op::Scan {
                        key_id,
                        len: spec.scan_len,
                    },
                    OpKind::Rmw => Op::Rmw { key_id },
                    OpKind::Insert => unreachable!(),
                }
            }
        };
        ops.push(op);
    }
    Ok(OpStream {
        record_count: spec.record_count,
        value_len: spec.value_len,
        seed: spec.seed,
        ops,
    })
}

/// Draws a workload mix uniformly from the proportion simplex (normalized
/// unit-rate exponentials); other fields take their defaults and the
/// stream seed derives from `seed`.
pub fn sample_random(seed: u64) -> WorkloadSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = [0.0f64; 5];
    let mut sum = 0.0;
    for slot in &mut draws {
        let u: f64 = rng.gen();
        *slot = -(1.0 - u).ln();
        sum += *slot;
    }
    if sum <= 0.0 {
        draws = [1.0; 5];
        sum = 5.0;
    }
    for slot in &mut draws {
        *slot /= sum;
    }
    let mut spec = WorkloadSpec::from_proportions(draws).expect("normalized mix is valid");
    spec.seed = rng.gen();
    spec
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkloadFile {
    workload: WorkloadTable,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkloadTable {
    read: Option<f64>,
    update: Option<f64>,
    scan: Option<f64>,
    insert: Option<f64>,
    rmw: Option<f64>,
    op_count: Option<u64>,
    record_count: Option<u64>,
    distribution: Option<String>,
    zipf_theta: Option<f64>,
    scan_len: Option<u32>,
    value_len: Option<usize>,
    seed: Option<u64>,
}

/// Parses a workload file. Omitted proportions are zero; at least one
/// must be present. Other fields fall back to the documented defaults.
pub fn parse_str(text: &str) -> Result<WorkloadSpec> {
    let file: WorkloadFile =
        toml::from_str(text).map_err(|e| Error::InvalidWorkload(e.to_string()))?;
    let table = file.workload;
    if table.read.is_none()
        && table.update.is_none()
        && table.scan.is_none()
        && table.insert.is_none()
        && table.rmw.is_none()
    {
        return Err(Error::InvalidWorkload(
            "missing field: at least one of read/update/scan/insert/rmw".into(),
        ));
    }
    let proportions = [
        table.read.unwrap_or(0.0),
        table.update.unwrap_or(0.0),
        table.scan.unwrap_or(0.0),
        table.insert.unwrap_or(0.0),
        table.rmw.unwrap_or(0.0),
    ];
    let key_dist = match table.distribution.as_deref() {
        None | Some("zipfian") => KeyDist::Zipfian {
            theta: table.zipf_theta.unwrap_or(DEFAULT_ZIPF_THETA),
        },
        Some("uniform") => {
            if table.zipf_theta.is_some() {
                return Err(Error::InvalidWorkload(
                    "zipf_theta is only valid with distribution = \"zipfian\"".into(),
                ));
            }
            KeyDist::Uniform
        }
        Some(other) => {
            return Err(Error::InvalidWorkload(format!(
                "unknown distribution {other:?}, expected \"uniform\" or \"zipfian\""
            )))
        }
    };
    let spec = WorkloadSpec {
        proportions,
        op_count: table.op_count.unwrap_or(DEFAULT_OP_COUNT),
        record_count: table.record_count.unwrap_or(DEFAULT_RECORD_COUNT),
        key_dist,
        scan_len: table.scan_len.unwrap_or(DEFAULT_SCAN_LEN),
        value_len: table.value_len.unwrap_or(DEFAULT_VALUE_BYTES),
        seed: table.seed.unwrap_or(DEFAULT_WORKLOAD_SEED),
    };
    spec.validate()?;
    Ok(spec)
}

pub fn parse_file(path: &std::path::Path) -> Result<WorkloadSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_str(&text)
}

/// The six standard preset mixes.
pub mod presets {
    use super::*;

    pub const NAMES: [&str; 6] = ["ycsb-a", "ycsb-b", "ycsb-c", "ycsb-d", "ycsb-e", "ycsb-f"];

    /// Preset definitions as workload files, so the shipped files and the
    /// built-in specs cannot drift apart.
    pub fn toml_for(name: &str) -> Option<&'static str> {
        Some(match name {
            "ycsb-a" => {
                "# Update heavy: 50/50 reads and updates.\n[workload]\nread = 0.5\nupdate = 0.5\nop_count = 10000\nrecord_count = 10000\ndistribution = \"zipfian\"\nzipf_theta = 0.99\nseed = 101\n"
            }
            "ycsb-b" => {
                "# Read mostly: 95/5 reads and updates.\n[workload]\nread = 0.95\nupdate = 0.05\nop_count = 10000\nrecord_count = 10000\ndistribution = \"zipfian\"\nzipf_theta = 0.99\nseed = 102\n"
            }
            "ycsb-c" => {
                "# Read only.\n[workload]\nread = 1.0\nop_count = 10000\nrecord_count = 10000\ndistribution = \"zipfian\"\nzipf_theta = 0.99\nseed = 103\n"
            }
            "ycsb-d" => {
                "# Read latest: 95/5 reads and inserts.\n[workload]\nread = 0.95\ninsert = 0.05\nop_count = 10000\nrecord_count = 10000\ndistribution = \"zipfian\"\nzipf_theta = 0.99\nseed = 104\n"
            }
            "ycsb-e" => {
                "# Short ranges: 95/5 scans and inserts.\n[workload]\nscan = 0.95\ninsert = 0.05\nop_count = 10000\nrecord_count = 10000\ndistribution = \"zipfian\"\nzipf_theta = 0.99\nscan_len = 100\nseed = 105\n"
            }
            "ycsb-f" => {
                "# Read-modify-write: 50/50 reads and RMWs.\n[workload]\nread = 0.5\nrmw = 0.5\nop_count = 10000\nrecord_count = 10000\ndistribution = \"zipfian\"\nzipf_theta = 0.99\nseed = 106\n"
            }
            _ => return None,
        })
    }

    pub fn by_name(name: &str) -> Option<WorkloadSpec> {
        let text = toml_for(name)?;
        Some(parse_str(text).expect("presets are valid workload files"))
    }
}

//! Index structures and the registry that selects between them.
//!
//! Every structure implements [`Index`] over the same key/value types, so
//! the rest of the crate can swap implementations freely. A [`Structure`]
//! describes one structure kind: its tuning axes and how to build an
//! instance from a point on the parameter grid. The [`StructureRegistry`]
//! owns one `Structure` per registered kind and is the single place that
//! maps between configs, grid coordinates, and runnable indexes.

mod btree;
mod hash;
mod lsm;

pub use btree::BTreeIndex;
pub use hash::HashIndex;
pub use lsm::LsmIndex;

use std::collections::HashSet;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// Fixed key width. Shorter keys are zero-padded by the constructors.
pub const KEY_BYTES: usize = 16;

/// Upper bound on value payload size.
pub const MAX_VALUE_BYTES: usize = 4096;

/// Value payload size used by generated workloads.
pub const DEFAULT_VALUE_BYTES: usize = 100;

/// Default bound on resident entries per store instance.
pub const DEFAULT_CAPACITY: usize = 1 << 21;

/// Fixed-width binary key, ordered bytewise.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key([u8; KEY_BYTES]);

impl Key {
    pub const MIN: Key = Key([0u8; KEY_BYTES]);

    /// Encodes a numeric id as a zero-padded decimal string, so numeric
    /// order and byte order agree.
    pub fn from_id(id: u64) -> Self {
        let mut buf = [b'0'; KEY_BYTES];
        let digits = id.to_string();
        let start = KEY_BYTES - digits.len();
        buf[start..].copy_from_slice(digits.as_bytes());
        Key(buf)
    }

    pub fn from_bytes(bytes: [u8; KEY_BYTES]) -> Self {
        Key(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; KEY_BYTES] {
        &self.0
    }
}

impl fmt::Debug for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match std::str::from_utf8(&self.0) {
            Ok(s) => write!(f, "Key({s})"),
            Err(_) => write!(f, "Key({:02x?})", self.0),
        }
    }
}

/// Opaque value payload, 1..=[`MAX_VALUE_BYTES`] bytes.
#[derive(Clone, PartialEq, Eq)]
pub struct Value(Vec<u8>);

impl Value {
    pub fn new(bytes: Vec<u8>) -> Result<Self> {
        if bytes.is_empty() {
            return Err(Error::InvalidValue("value must not be empty".into()));
        }
        if bytes.len() > MAX_VALUE_BYTES {
            return Err(Error::InvalidValue(format!(
                "value is {} bytes, limit is {MAX_VALUE_BYTES}",
                bytes.len()
            )));
        }
        Ok(Value(bytes))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Value({} bytes)", self.0.len())
    }
}

/// The three index structure kinds the store can run on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StructureKind {
    BTree,
    Hash,
    LsmTree,
}

impl StructureKind {
    pub const ALL: [StructureKind; 3] = [
        StructureKind::BTree,
        StructureKind::Hash,
        StructureKind::LsmTree,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StructureKind::BTree => "btree",
            StructureKind::Hash => "hash",
            StructureKind::LsmTree => "lsm",
        }
    }

    /// Stable position used for one-hot encodings and grid slots.
    pub fn index(&self) -> usize {
        match self {
            StructureKind::BTree => 0,
            StructureKind::Hash => 1,
            StructureKind::LsmTree => 2,
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "btree" => Ok(StructureKind::BTree),
            "hash" => Ok(StructureKind::Hash),
            "lsm" => Ok(StructureKind::LsmTree),
            other => Err(Error::InvalidConfig(format!(
                "unknown structure {other:?}, expected one of: btree, hash, lsm"
            ))),
        }
    }
}

/// One named tuning axis with its admissible values, ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamAxis {
    pub name: &'static str,
    pub values: Vec<u64>,
}

impl ParamAxis {
    pub fn new(name: &'static str, values: Vec<u64>) -> Self {
        ParamAxis { name, values }
    }

    fn validate(&self, kind: StructureKind) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidGrid(format!(
                "{}/{} has no values",
                kind.name(),
                self.name
            )));
        }
        if !self.values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidGrid(format!(
                "{}/{} values must be strictly increasing",
                kind.name(),
                self.name
            )));
        }
        Ok(())
    }
}

/// Per-structure tuning axes. Kinds absent from the grid are left out of
/// the registry built from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamGrid {
    axes: [Vec<ParamAxis>; 3],
}

impl ParamGrid {
    pub fn new() -> Self {
        ParamGrid {
            axes: [Vec::new(), Vec::new(), Vec::new()],
        }
    }

    pub fn set(mut self, kind: StructureKind, axes: Vec<ParamAxis>) -> Self {
        self.axes[kind.index()] = axes;
        self
    }

    pub fn axes(&self, kind: StructureKind) -> &[ParamAxis] {
        &self.axes[kind.index()]
    }

    pub fn has(&self, kind: StructureKind) -> bool {
        !self.axes[kind.index()].is_empty()
    }
}

impl Default for ParamGrid {
    /// The stock grid: three fanouts, three bucket counts, three memtable
    /// budgets crossed with two level size ratios.
    fn default() -> Self {
        ParamGrid::new()
            .set(
                StructureKind::BTree,
                vec![ParamAxis::new("fanout", vec![16, 64, 256])],
            )
            .set(
                StructureKind::Hash,
                vec![ParamAxis::new("bucket_count", vec![1024, 4096, 16384])],
            )
            .set(
                StructureKind::LsmTree,
                vec![
                    ParamAxis::new("memtable_bytes", vec![65536, 262144, 1048576]),
                    ParamAxis::new("size_ratio", vec![4, 10]),
                ],
            )
    }
}

/// A point on the grid: a structure kind plus one value index per axis.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexConfig {
    pub kind: StructureKind,
    /// Position on each axis of `kind`, in axis order.
    pub params: Vec<usize>,
}

impl IndexConfig {
    pub fn new(kind: StructureKind, params: Vec<usize>) -> Self {
        IndexConfig { kind, params }
    }
}

/// Uniform mutable interface over every index structure.
///
/// All write paths are upserts at the structure level; the trait methods
/// layer the store semantics on top: `insert` admits new keys (bounded by
/// capacity), `update` and `rmw` only touch keys that already exist.
pub trait Index {
    fn kind(&self) -> StructureKind;

    /// Number of distinct live keys.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Point lookup.
    fn read(&self, key: &Key) -> Option<Value>;

    /// Inserts or overwrites. Fails only when admitting a new entry would
    /// exceed the capacity bound.
    fn insert(&mut self, key: Key, value: Value) -> Result<()>;

    /// Overwrites an existing key. Returns false (and changes nothing)
    /// when the key is absent.
    fn update(&mut self, key: &Key, value: Value) -> bool;

    /// Up to `count` entries with key >= `start`, in ascending key order.
    fn scan(&self, start: &Key, count: usize) -> Vec<(Key, Value)>;

    /// Read-modify-write: installs `value` over an existing key and
    /// returns the prior value, or None (no change) when absent.
    fn rmw(&mut self, key: &Key, value: Value) -> Option<Value>;
}

/// One selectable structure kind: its tuning axes and builder.
pub trait Structure: Send + Sync {
    fn kind(&self) -> StructureKind;

    fn name(&self) -> &'static str {
        self.kind().name()
    }

    fn axes(&self) -> &[ParamAxis];

    /// Builds an empty instance from resolved axis values.
    fn build(&self, values: &[u64], capacity: usize) -> Box<dyn Index>;
}

fn make_structure(kind: StructureKind, axes: Vec<ParamAxis>) -> Result<Box<dyn Structure>> {
    Ok(match kind {
        StructureKind::BTree => Box::new(btree::BTreeStructure::new(axes)?),
        StructureKind::Hash => Box::new(hash::HashStructure::new(axes)?),
        StructureKind::LsmTree => Box::new(lsm::LsmStructure::new(axes)?),
    })
}

/// Registry of the structures available to one store deployment.
///
/// Lookup is by kind or by name; enumeration follows the fixed kind order
/// so every walk over the config space is deterministic.
pub struct StructureRegistry {
    entries: Vec<Box<dyn Structure>>,
}

impl StructureRegistry {
    /// All three structures on the stock grid.
    pub fn with_defaults() -> Self {
        Self::from_grid(&ParamGrid::default(), &StructureKind::ALL).expect("stock grid is valid")
    }

    /// Registers `kinds` (in fixed kind order) with their axes from `grid`.
    pub fn from_grid(grid: &ParamGrid, kinds: &[StructureKind]) -> Result<Self> {
        let mut entries: Vec<Box<dyn Structure>> = Vec::new();
        for kind in StructureKind::ALL {
            if !kinds.contains(&kind) {
                continue;
            }
            let axes = grid.axes(kind).to_vec();
            for axis in &axes {
                axis.validate(kind)?;
            }
            entries.push(make_structure(kind, axes)?);
        }
        if entries.is_empty() {
            return Err(Error::InvalidGrid("no structures registered".into()));
        }
        Ok(StructureRegistry { entries })
    }

    pub fn structures(&self) -> impl Iterator<Item = &dyn Structure> {
        self.entries.iter().map(|e| e.as_ref())
    }

    pub fn kinds(&self) -> Vec<StructureKind> {
        self.entries.iter().map(|e| e.kind()).collect()
    }

    pub fn by_kind(&self, kind: StructureKind) -> Option<&dyn Structure> {
        self.entries
            .iter()
            .find(|e| e.kind() == kind)
            .map(|e| e.as_ref())
    }

    pub fn by_name(&self, name: &str) -> Option<&dyn Structure> {
        self.entries
            .iter()
            .find(|e| e.name() == name)
            .map(|e| e.as_ref())
    }

    fn require(&self, kind: StructureKind) -> Result<&dyn Structure> {
        self.by_kind(kind).ok_or_else(|| {
            Error::InvalidConfig(format!("structure {} is not registered", kind.name()))
        })
    }

    /// Total number of axes across registered structures; the width of the
    /// parameter block in encoded states.
    pub fn total_axes(&self) -> usize {
        self.entries.iter().map(|e| e.axes().len()).sum()
    }

    /// Offset of `kind`'s first axis within the parameter block.
    pub fn slot_offset(&self, kind: StructureKind) -> Result<usize> {
        let mut offset = 0;
        for entry in &self.entries {
            if entry.kind() == kind {
                return Ok(offset);
            }
            offset += entry.axes().len();
        }
        Err(Error::InvalidConfig(format!(
            "structure {} is not registered",
            kind.name()
        )))
    }

    /// Largest axis count of any registered structure; fixes the action
    /// set width.
    pub fn max_axes(&self) -> usize {
        self.entries
            .iter()
            .map(|e| e.axes().len())
            .max()
            .unwrap_or(0)
    }

    pub fn config_space_size(&self) -> usize {
        self.entries
            .iter()
            .map(|e| e.axes().iter().map(|a| a.values.len()).product::<usize>())
            .sum()
    }

    /// Every config, in kind order then row-major axis order.
    pub fn all_configs(&self) -> Vec<IndexConfig> {
        let mut out = Vec::with_capacity(self.config_space_size());
        for entry in &self.entries {
            let lens: Vec<usize> = entry.axes().iter().map(|a| a.values.len()).collect();
            let mut cursor = vec![0usize; lens.len()];
            'space: loop {
                out.push(IndexConfig::new(entry.kind(), cursor.clone()));
                for axis in (0..lens.len()).rev() {
                    cursor[axis] += 1;
                    if cursor[axis] < lens[axis] {
                        continue 'space;
                    }
                    cursor[axis] = 0;
                }
                break;
            }
        }
        out
    }

    /// Grid midpoint config for `kind`.
    pub fn default_config(&self, kind: StructureKind) -> Result<IndexConfig> {
        let entry = self.require(kind)?;
        let params = entry.axes().iter().map(|a| a.values.len() / 2).collect();
        Ok(IndexConfig::new(kind, params))
    }

    /// Uniform kind, then uniform position on each axis.
    pub fn random_config<R: Rng + ?Sized>(&self, rng: &mut R) -> IndexConfig {
        let entry = &self.entries[rng.gen_range(0..self.entries.len())];
        let params = entry
            .axes()
            .iter()
            .map(|a| rng.gen_range(0..a.values.len()))
            .collect();
        IndexConfig::new(entry.kind(), params)
    }

    pub fn validate_config(&self, config: &IndexConfig) -> Result<()> {
        let entry = self.require(config.kind)?;
        let axes = entry.axes();
        if config.params.len() != axes.len() {
            return Err(Error::InvalidConfig(format!(
                "{} takes {} parameters, got {}",
                entry.name(),
                axes.len(),
                config.params.len()
            )));
        }
        for (axis, &pos) in axes.iter().zip(&config.params) {
            if pos >= axis.values.len() {
                return Err(Error::InvalidConfig(format!(
                    "{}/{} position {pos} out of range (axis has {} values)",
                    entry.name(),
                    axis.name,
                    axis.values.len()
                )));
            }
        }
        Ok(())
    }

    /// Axis values at the config's grid position.
    pub fn resolve(&self, config: &IndexConfig) -> Result<Vec<u64>> {
        self.validate_config(config)?;
        let entry = self.require(config.kind)?;
        Ok(entry
            .axes()
            .iter()
            .zip(&config.params)
            .map(|(axis, &pos)| axis.values[pos])
            .collect())
    }

    /// Builds an empty index for `config`.
    pub fn build_index(&self, config: &IndexConfig, capacity: usize) -> Result<Box<dyn Index>> {
        let values = self.resolve(config)?;
        let entry = self.require(config.kind)?;
        Ok(entry.build(&values, capacity))
    }

    /// Builds an index preloaded with `records`. The input must not
    /// repeat a key; a repeat aborts the build.
    pub fn build_with_records(
        &self,
        config: &IndexConfig,
        records: impl IntoIterator<Item = (Key, Value)>,
        capacity: usize,
    ) -> Result<Box<dyn Index>> {
        let mut index = self.build_index(config, capacity)?;
        let mut seen: HashSet<[u8; KEY_BYTES]> = HashSet::new();
        for (key, value) in records {
            if !seen.insert(*key.as_bytes()) {
                return Err(Error::DuplicateKey(format!("{key:?}")));
            }
            index.insert(key, value)?;
        }
        Ok(index)
    }

    /// Parses `kind[:axis=value,...]`. Omitted axes sit at the grid
    /// midpoint; listed values must be admissible grid values.
    pub fn parse_config(&self, text: &str) -> Result<IndexConfig> {
        let text = text.trim();
        let (kind_part, params_part) = match text.split_once(':') {
            Some((k, p)) => (k.trim(), Some(p)),
            None => (text, None),
        };
        let kind = StructureKind::parse(kind_part)?;
        let entry = self.require(kind)?;
        let mut config = self.default_config(kind)?;
        let Some(params_part) = params_part else {
            return Ok(config);
        };
        for pair in params_part.split(',') {
            let pair = pair.trim();
            if pair.is_empty() {
                continue;
            }
            let (name, value) = pair.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("expected axis=value, got {pair:?}"))
            })?;
            let name = name.trim();
            let value: u64 = value.trim().parse().map_err(|_| {
                Error::InvalidConfig(format!("{name}: {:?} is not an integer", value.trim()))
            })?;
            let axis_pos = entry
                .axes()
                .iter()
                .position(|a| a.name == name)
                .ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "{} has no axis {name:?} (axes: {})",
                        entry.name(),
                        entry
                            .axes()
                            .iter()
                            .map(|a| a.name)
                            .collect::<Vec<_>>()
                            .join(", ")
                    ))
                })?;
            let axis = &entry.axes()[axis_pos];
            let value_pos = axis
                .values
                .iter()
                .position(|&v| v == value)
                .ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "{}/{name} does not admit {value} (values: {})",
                        entry.name(),
                        axis.values
                            .iter()
                            .map(|v| v.to_string())
                            .collect::<Vec<_>>()
                            .join(", ")
                    ))
                })?;
            config.params[axis_pos] = value_pos;
        }
        Ok(config)
    }

    /// Canonical printable form, `kind:axis=value,...`. Inverse of
    /// [`parse_config`](Self::parse_config).
    pub fn format_config(&self, config: &IndexConfig) -> Result<String> {
        let entry = self.require(config.kind)?;
        self.validate_config(config)?;
        if entry.axes().is_empty() {
            return Ok(entry.name().to_string());
        }
        let params: Vec<String> = entry
            .axes()
            .iter()
            .zip(&config.params)
            .map(|(axis, &pos)| format!("{}={}", axis.name, axis.values[pos]))
            .collect();
        Ok(format!("{}:{}", entry.name(), params.join(",")))
    }
}

//! Analytic cost model behind Simulated mode.
//!
//! Each operation is priced in estimated seconds from the structure's
//! work shape at the store's current size `n`: tree depth for the B+
//! tree, expected chain length for the hash table, and run count for the
//! LSM tree. The unit costs live in a versioned TOML file so they can be
//! recalibrated without touching code; the embedded copy in
//! `data/cost_model.toml` is the default.
//!
//! Every cost is strictly positive and non-decreasing in `n`, which keeps
//! simulated throughputs finite and stable.

use std::sync::OnceLock;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::index::StructureKind;
use crate::workload::{Op, OpKind};

const EMBEDDED: &str = include_str!("../../data/cost_model.toml");

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BTreeCosts {
    pub probe: f64,
    pub write: f64,
    pub scan_step: f64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HashCosts {
    pub probe: f64,
    pub write: f64,
    pub sort: f64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LsmCosts {
    pub append: f64,
    pub flush: f64,
    pub probe: f64,
    pub scan_step: f64,
    pub record_bytes: f64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CostModel {
    pub version: u32,
    pub btree: BTreeCosts,
    pub hash: HashCosts,
    pub lsm: LsmCosts,
}

impl CostModel {
    /// The calibrated model shipped with the crate.
    pub fn embedded() -> &'static CostModel {
        static MODEL: OnceLock<CostModel> = OnceLock::new();
        MODEL.get_or_init(|| {
            CostModel::from_toml_str(EMBEDDED).expect("embedded cost model is valid")
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let model: CostModel =
            toml::from_str(text).map_err(|e| Error::InvalidCostModel(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("btree.probe", self.btree.probe),
            ("btree.write", self.btree.write),
            ("btree.scan_step", self.btree.scan_step),
            ("hash.probe", self.hash.probe),
            ("hash.write", self.hash.write),
            ("hash.sort", self.hash.sort),
            ("lsm.append", self.lsm.append),
            ("lsm.flush", self.lsm.flush),
            ("lsm.probe", self.lsm.probe),
            ("lsm.scan_step", self.lsm.scan_step),
            ("lsm.record_bytes", self.lsm.record_bytes),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidCostModel(format!(
                    "{name} must be finite and positive, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Estimated seconds for one operation against a store of `n` live
    /// records, on the structure described by `kind` + resolved `values`.
    pub fn op_cost(&self, kind: StructureKind, values: &[u64], op: &Op, n: u64) -> f64 {
        let scan_len = match op {
            Op::Scan { len, .. } => *len as f64,
            _ => 0.0,
        };
        match kind {
            StructureKind::BTree => {
                let fanout = values[0] as f64;
                let depth = btree_depth(n, fanout);
                let c = &self.btree;
                match op.kind() {
                    OpKind::Read => c.probe * depth,
                    OpKind::Update | OpKind::Insert | OpKind::Rmw => (c.probe + c.write) * depth,
                    OpKind::Scan => c.probe * depth + c.scan_step * scan_len,
                }
            }
            StructureKind::Hash => {
                let buckets = values[0] as f64;
                let chain = 1.0 + n as f64 / buckets;
                let c = &self.hash;
                match op.kind() {
                    OpKind::Read => c.probe * chain,
                    OpKind::Update | OpKind::Insert | OpKind::Rmw => (c.probe + c.write) * chain,
                    // Collect-and-sort over the whole table.
                    OpKind::Scan => c.sort * (n as f64 + 1.0) * log2(n + 2),
                }
            }
            StructureKind::LsmTree => {
                let memtable = values[0] as f64;
                let ratio = values[1] as f64;
                let c = &self.lsm;
                let runs = lsm_runs(n as f64 * c.record_bytes, memtable, ratio);
                let append = c.append + c.flush * c.record_bytes / memtable;
                let probe_all = c.probe * runs * log2(n + 2);
                match op.kind() {
                    OpKind::Insert => append,
                    OpKind::Read => probe_all,
                    // Read the current value, then append the new one.
                    OpKind::Update | OpKind::Rmw => probe_all + append,
                    OpKind::Scan => runs * (c.probe * log2(n + 2) + c.scan_step * scan_len),
                }
            }
        }
    }
}

fn log2(n: u64) -> f64 {
    (n as f64).log2()
}

/// Expected search depth of a tree of `n` records with the given fanout.
/// The +2 keeps the estimate positive for tiny stores.
fn btree_depth(n: u64, fanout: f64) -> f64 {
    ((n + 2) as f64).ln() / fanout.ln()
}

/// Sorted runs consulted by a point read: the memtable plus one run per
/// level the data has cascaded through.
fn lsm_runs(data_bytes: f64, memtable_bytes: f64, ratio: f64) -> f64 {
    if data_bytes <= memtable_bytes {
        return 1.0;
    }
    let levels = ((data_bytes / memtable_bytes).ln() / ratio.ln()).floor() + 1.0;
    1.0 + levels
}

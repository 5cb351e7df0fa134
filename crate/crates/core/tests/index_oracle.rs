//! Every index structure must behave exactly like a sorted map with
//! upsert semantics. A `BTreeMap` shadow executes the same operation
//! sequence and arbitrates reads, updates, scans, and read-modify-writes.

use std::collections::BTreeMap;

use proptest::prelude::*;

use idxsel_core::index::{
    Index, IndexConfig, Key, ParamAxis, ParamGrid, StructureKind, StructureRegistry, Value,
};

#[derive(Clone, Debug)]
enum ShadowOp {
    Insert(u64, u8),
    Update(u64, u8),
    Rmw(u64, u8),
    Read(u64),
    Scan(u64, usize),
}

fn shadow_op() -> impl Strategy<Value = ShadowOp> {
    // Small id range so overwrites and misses both happen often.
    let id = 0u64..64;
    prop_oneof![
        (id.clone(), any::<u8>()).prop_map(|(k, v)| ShadowOp::Insert(k, v)),
        (id.clone(), any::<u8>()).prop_map(|(k, v)| ShadowOp::Update(k, v)),
        (id.clone(), any::<u8>()).prop_map(|(k, v)| ShadowOp::Rmw(k, v)),
        id.clone().prop_map(ShadowOp::Read),
        (id, 0usize..20).prop_map(|(k, n)| ShadowOp::Scan(k, n)),
    ]
}

fn value(tag: u8) -> Value {
    Value::new(vec![tag, tag ^ 0xff, 0x5a]).unwrap()
}

/// Grids deliberately include degenerate points: minimum fanout, a single
/// hash bucket, and a memtable small enough that a handful of writes
/// cascades through several levels.
fn stress_registry() -> StructureRegistry {
    let grid = ParamGrid::new()
        .set(
            StructureKind::BTree,
            vec![ParamAxis::new("fanout", vec![3, 4, 64])],
        )
        .set(
            StructureKind::Hash,
            vec![ParamAxis::new("bucket_count", vec![1, 7, 1024])],
        )
        .set(
            StructureKind::LsmTree,
            vec![
                ParamAxis::new("memtable_bytes", vec![64, 256, 65536]),
                ParamAxis::new("size_ratio", vec![2, 4]),
            ],
        );
    StructureRegistry::from_grid(&grid, &StructureKind::ALL).unwrap()
}

fn run_against_shadow(index: &mut dyn Index, ops: &[ShadowOp], label: &str) {
    let mut shadow: BTreeMap<Key, Value> = BTreeMap::new();
    for (step, op) in ops.iter().enumerate() {
        match op {
            ShadowOp::Insert(id, tag) => {
                index.insert(Key::from_id(*id), value(*tag)).unwrap();
                shadow.insert(Key::from_id(*id), value(*tag));
            }
            ShadowOp::Update(id, tag) => {
                let key = Key::from_id(*id);
                let hit = index.update(&key, value(*tag));
                assert_eq!(
                    hit,
                    shadow.contains_key(&key),
                    "{label} step {step}: update hit"
                );
                if hit {
                    shadow.insert(key, value(*tag));
                }
            }
            ShadowOp::Rmw(id, tag) => {
                let key = Key::from_id(*id);
                let prior = index.rmw(&key, value(*tag));
                let shadow_prior = shadow.get(&key).cloned();
                assert_eq!(prior, shadow_prior, "{label} step {step}: rmw prior value");
                if shadow_prior.is_some() {
                    shadow.insert(key, value(*tag));
                }
            }
            ShadowOp::Read(id) => {
                let key = Key::from_id(*id);
                assert_eq!(
                    index.read(&key),
                    shadow.get(&key).cloned(),
                    "{label} step {step}: read {id}"
                );
            }
            ShadowOp::Scan(id, count) => {
                let key = Key::from_id(*id);
                let got = index.scan(&key, *count);
                let want: Vec<(Key, Value)> = shadow
                    .range(key..)
                    .take(*count)
                    .map(|(k, v)| (*k, v.clone()))
                    .collect();
                assert_eq!(got, want, "{label} step {step}: scan from {id} x{count}");
            }
        }
        assert_eq!(
            index.len(),
            shadow.len(),
            "{label} step {step}: live key count"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_config_matches_the_shadow_map(ops in prop::collection::vec(shadow_op(), 1..300)) {
        let registry = stress_registry();
        for config in registry.all_configs() {
            let label = registry.format_config(&config).unwrap();
            let mut index = registry.build_index(&config, 100_000).unwrap();
            run_against_shadow(index.as_mut(), &ops, &label);
        }
    }

    #[test]
    fn structures_agree_with_each_other(ops in prop::collection::vec(shadow_op(), 1..200)) {
        let registry = stress_registry();
        let mut indexes: Vec<Box<dyn Index>> = StructureKind::ALL
            .iter()
            .map(|&kind| {
                let config = registry.default_config(kind).unwrap();
                registry.build_index(&config, 100_000).unwrap()
            })
            .collect();
        for op in &ops {
            match op {
                ShadowOp::Insert(id, tag) => {
                    for index in &mut indexes {
                        index.insert(Key::from_id(*id), value(*tag)).unwrap();
                    }
                }
                ShadowOp::Update(id, tag) => {
                    let hits: Vec<bool> = indexes
                        .iter_mut()
                        .map(|i| i.update(&Key::from_id(*id), value(*tag)))
                        .collect();
                    prop_assert!(hits.windows(2).all(|w| w[0] == w[1]));
                }
                ShadowOp::Rmw(id, tag) => {
                    let priors: Vec<Option<Value>> = indexes
                        .iter_mut()
                        .map(|i| i.rmw(&Key::from_id(*id), value(*tag)))
                        .collect();
                    prop_assert!(priors.windows(2).all(|w| w[0] == w[1]));
                }
                ShadowOp::Read(id) => {
                    let reads: Vec<Option<Value>> =
                        indexes.iter().map(|i| i.read(&Key::from_id(*id))).collect();
                    prop_assert!(reads.windows(2).all(|w| w[0] == w[1]));
                }
                ShadowOp::Scan(id, count) => {
                    let scans: Vec<Vec<(Key, Value)>> = indexes
                        .iter()
                        .map(|i| i.scan(&Key::from_id(*id), *count))
                        .collect();
                    prop_assert!(scans.windows(2).all(|w| w[0] == w[1]));
                }
            }
        }
    }
}

#[test]
fn preloaded_build_matches_shadow_on_every_structure() {
    let registry = StructureRegistry::with_defaults();
    let records: Vec<(Key, Value)> = (0..500)
        .map(|id| (Key::from_id(id), value((id % 251) as u8)))
        .collect();
    let shadow: BTreeMap<Key, Value> = records.iter().cloned().collect();
    for kind in StructureKind::ALL {
        let config = registry.default_config(kind).unwrap();
        let index = registry
            .build_with_records(&config, records.clone(), 100_000)
            .unwrap();
        assert_eq!(index.len(), shadow.len());
        for (key, want) in &shadow {
            assert_eq!(index.read(key).as_ref(), Some(want));
        }
        let scanned = index.scan(&Key::MIN, usize::MAX);
        assert_eq!(scanned.len(), shadow.len());
        assert!(
            scanned.windows(2).all(|w| w[0].0 < w[1].0),
            "scan must be sorted"
        );
    }
}

#[test]
fn capacity_error_reports_the_limit() {
    let registry = StructureRegistry::with_defaults();
    for kind in StructureKind::ALL {
        let config = registry.default_config(kind).unwrap();
        let mut index = registry.build_index(&config, 8).unwrap();
        for id in 0..8 {
            index.insert(Key::from_id(id), value(id as u8)).unwrap();
        }
        let err = index.insert(Key::from_id(99), value(0)).unwrap_err();
        assert!(
            matches!(err, idxsel_core::Error::CapacityExceeded { limit: 8 }),
            "{kind:?}: {err}"
        );
    }
}

/// Mirrors how the benchmark drives an index config: build one config of
/// each kind from the same registry the selector uses.
#[test]
fn registry_builds_runnable_indexes_for_all_defaults() {
    let registry = StructureRegistry::with_defaults();
    for config in registry.all_configs() {
        let mut index = registry.build_index(&config, 1000).unwrap();
        index.insert(Key::from_id(1), value(1)).unwrap();
        assert_eq!(index.kind(), config.kind);
        assert_eq!(index.len(), 1);
    }
    let _ = IndexConfig::new(StructureKind::BTree, vec![0]);
}

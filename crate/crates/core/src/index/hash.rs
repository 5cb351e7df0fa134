//! Chained hash table with a fixed bucket count.
//!
//! Buckets are unsorted chains, so point operations cost one chain walk
//! while scans must collect and sort every qualifying entry.

use crate::error::{Error, Result};

use super::{Index, Key, ParamAxis, Structure, StructureKind, Value};

pub struct HashStructure {
    axes: Vec<ParamAxis>,
}

impl HashStructure {
    pub fn new(axes: Vec<ParamAxis>) -> Result<Self> {
        if axes.len() != 1 || axes[0].name != "bucket_count" {
            return Err(Error::InvalidGrid(
                "hash takes exactly one axis: bucket_count".into(),
            ));
        }
        if axes[0].values.contains(&0) {
            return Err(Error::InvalidGrid(
                "hash bucket_count must be positive".into(),
            ));
        }
        Ok(HashStructure { axes })
    }
}

impl Structure for HashStructure {
    fn kind(&self) -> StructureKind {
        StructureKind::Hash
    }

    fn axes(&self) -> &[ParamAxis] {
        &self.axes
    }

    fn build(&self, values: &[u64], capacity: usize) -> Box<dyn Index> {
        Box::new(HashIndex::new(values[0] as usize, capacity))
    }
}

/// FNV-1a, chosen for determinism across runs and platforms.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

pub struct HashIndex {
    buckets: Vec<Vec<(Key, Value)>>,
    len: usize,
    capacity: usize,
}

impl HashIndex {
    pub fn new(bucket_count: usize, capacity: usize) -> Self {
        HashIndex {
            buckets: (0..bucket_count).map(|_| Vec::new()).collect(),
            len: 0,
            capacity,
        }
    }

    fn bucket_of(&self, key: &Key) -> usize {
        (fnv1a(key.as_bytes()) % self.buckets.len() as u64) as usize
    }

    fn slot_mut(&mut self, key: &Key) -> Option<&mut Value> {
        let bucket = self.bucket_of(key);
        self.buckets[bucket]
            .iter_mut()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v)
    }
}

impl Index for HashIndex {
    fn kind(&self) -> StructureKind {
        StructureKind::Hash
    }

    fn len(&self) -> usize {
        self.len
    }

    fn read(&self, key: &Key) -> Option<Value> {
        let bucket = self.bucket_of(key);
        self.buckets[bucket]
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.clone())
    }

    fn insert(&mut self, key: Key, value: Value) -> Result<()> {
        match self.slot_mut(&key) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => {
                if self.len >= self.capacity {
                    return Err(Error::CapacityExceeded {
                        limit: self.capacity,
                    });
                }
                let bucket = self.bucket_of(&key);
                self.buckets[bucket].push((key, value));
                self.len += 1;
                Ok(())
            }
        }
    }

    fn update(&mut self, key: &Key, value: Value) -> bool {
        match self.slot_mut(key) {
            Some(slot) => {
                *slot = value;
                true
            }
            None => false,
        }
    }

    fn scan(&self, start: &Key, count: usize) -> Vec<(Key, Value)> {
        let mut hits: Vec<(Key, Value)> = self
            .buckets
            .iter()
            .flatten()
            .filter(|(k, _)| k >= start)
            .cloned()
            .collect();
        hits.sort_unstable_by(|(a, _), (b, _)| a.cmp(b));
        hits.truncate(count);
        hits
    }

    fn rmw(&mut self, key: &Key, value: Value) -> Option<Value> {
        self.slot_mut(key)
            .map(|slot| std::mem::replace(slot, value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(tag: u8) -> Value {
        Value::new(vec![tag; 8]).unwrap()
    }

    #[test]
    fn point_ops_survive_chain_collisions() {
        // One bucket forces every key onto the same chain.
        let mut index = HashIndex::new(1, 1000);
        for id in 0..50 {
            index.insert(Key::from_id(id), value(id as u8)).unwrap();
        }
        assert_eq!(index.len(), 50);
        for id in 0..50 {
            assert_eq!(index.read(&Key::from_id(id)), Some(value(id as u8)));
        }
        assert!(index.update(&Key::from_id(30), value(99)));
        assert_eq!(index.rmw(&Key::from_id(30), value(7)), Some(value(99)));
    }

    #[test]
    fn scan_sorts_across_buckets() {
        let mut index = HashIndex::new(16, 1000);
        for id in (0..40).rev() {
            index.insert(Key::from_id(id), value(id as u8)).unwrap();
        }
        let got = index.scan(&Key::from_id(12), 10);
        let want: Vec<Key> = (12..22).map(Key::from_id).collect();
        assert_eq!(got.iter().map(|(k, _)| *k).collect::<Vec<_>>(), want);
    }

    #[test]
    fn capacity_blocks_only_new_keys() {
        let mut index = HashIndex::new(4, 1);
        index.insert(Key::from_id(1), value(1)).unwrap();
        assert!(matches!(
            index.insert(Key::from_id(2), value(2)),
            Err(Error::CapacityExceeded { limit: 1 })
        ));
        index.insert(Key::from_id(1), value(3)).unwrap();
        assert_eq!(index.len(), 1);
    }

    #[test]
    fn fnv1a_matches_reference_vectors() {
        // Published FNV-1a 64-bit digests.
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a(b"foobar"), 0x85944171f73967e8);
    }
}

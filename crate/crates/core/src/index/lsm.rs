//! Leveled LSM tree: a sorted in-memory memtable in front of one sorted
//! run per level.
//!
//! Writes only touch the memtable, so an existing key written again
//! shadows its older copy until a merge deduplicates them. The memtable
//! flushes once its byte budget is exceeded; the flushed run merges into
//! level 0 and cascades down whenever a level outgrows its target size
//! (`memtable_bytes * size_ratio^(level + 1)`). Reads probe newest to
//! oldest and stop at the first hit.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::{Index, Key, ParamAxis, Structure, StructureKind, Value, KEY_BYTES};

pub struct LsmStructure {
    axes: Vec<ParamAxis>,
}

impl LsmStructure {
    pub fn new(axes: Vec<ParamAxis>) -> Result<Self> {
        if axes.len() != 2 || axes[0].name != "memtable_bytes" || axes[1].name != "size_ratio" {
            return Err(Error::InvalidGrid(
                "lsm takes exactly two axes: memtable_bytes, size_ratio".into(),
            ));
        }
        if axes[0].values.contains(&0) {
            return Err(Error::InvalidGrid(
                "lsm memtable_bytes must be positive".into(),
            ));
        }
        if axes[1].values.iter().any(|&v| v < 2) {
            return Err(Error::InvalidGrid("lsm size_ratio must be >= 2".into()));
        }
        Ok(LsmStructure { axes })
    }
}

impl Structure for LsmStructure {
    fn kind(&self) -> StructureKind {
        StructureKind::LsmTree
    }

    fn axes(&self) -> &[ParamAxis] {
        &self.axes
    }

    fn build(&self, values: &[u64], capacity: usize) -> Box<dyn Index> {
        Box::new(LsmIndex::new(
            values[0] as usize,
            values[1] as usize,
            capacity,
        ))
    }
}

fn entry_bytes(value: &Value) -> usize {
    KEY_BYTES + value.len()
}

#[derive(Default)]
struct Run {
    entries: Vec<(Key, Value)>,
    bytes: usize,
}

impl Run {
    fn from_sorted(entries: Vec<(Key, Value)>) -> Self {
        let bytes = entries.iter().map(|(_, v)| entry_bytes(v)).sum();
        Run { entries, bytes }
    }

    fn get(&self, key: &Key) -> Option<&Value> {
        self.entries
            .binary_search_by(|(k, _)| k.cmp(key))
            .ok()
            .map(|i| &self.entries[i].1)
    }

    /// Two-pointer merge; on a key collision the newer entry survives.
    fn merge(newer: Run, older: Run) -> Run {
        let mut out = Vec::with_capacity(newer.entries.len() + older.entries.len());
        let mut new_iter = newer.entries.into_iter().peekable();
        let mut old_iter = older.entries.into_iter().peekable();
        loop {
            match (new_iter.peek(), old_iter.peek()) {
                (Some((nk, _)), Some((ok, _))) => {
                    if nk < ok {
                        out.push(new_iter.next().unwrap());
                    } else if ok < nk {
                        out.push(old_iter.next().unwrap());
                    } else {
                        out.push(new_iter.next().unwrap());
                        old_iter.next();
                    }
                }
                (Some(_), None) => out.push(new_iter.next().unwrap()),
                (None, Some(_)) => out.push(old_iter.next().unwrap()),
                (None, None) => break,
            }
        }
        Run::from_sorted(out)
    }
}

pub struct LsmIndex {
    memtable: BTreeMap<Key, Value>,
    memtable_bytes: usize,
    memtable_budget: usize,
    size_ratio: usize,
    /// One sorted run per level; lower index is newer.
    levels: Vec<Run>,
    capacity: usize,
}

impl LsmIndex {
    pub fn new(memtable_budget: usize, size_ratio: usize, capacity: usize) -> Self {
        LsmIndex {
            memtable: BTreeMap::new(),
            memtable_bytes: 0,
            memtable_budget,
            size_ratio,
            levels: Vec::new(),
            capacity,
        }
    }

    /// Resident entries, shadow copies included.
    fn resident(&self) -> usize {
        self.memtable.len() + self.levels.iter().map(|r| r.entries.len()).sum::<usize>()
    }

    fn level_target(&self, level: usize) -> usize {
        self.memtable_budget
            .saturating_mul(self.size_ratio.saturating_pow(level as u32 + 1))
    }

    /// Upsert into the memtable, flushing when the budget is exceeded.
    fn write(&mut self, key: Key, value: Value) {
        let added = entry_bytes(&value);
        if let Some(old) = self.memtable.insert(key, value) {
            self.memtable_bytes -= entry_bytes(&old);
        }
        self.memtable_bytes += added;
        if self.memtable_bytes > self.memtable_budget {
            self.flush();
        }
    }

    fn flush(&mut self) {
        let drained = std::mem::take(&mut self.memtable);
        self.memtable_bytes = 0;
        let mut carry = Run::from_sorted(drained.into_iter().collect());
        let mut level = 0;
        loop {
            if level == self.levels.len() {
                self.levels.push(carry);
                return;
            }
            let merged = Run::merge(carry, std::mem::take(&mut self.levels[level]));
            if merged.bytes <= self.level_target(level) {
                self.levels[level] = merged;
                return;
            }
            carry = merged;
            level += 1;
        }
    }

    /// Newest-wins k-way merge of every source holding keys >= `start`.
    /// `emit` sees entries in ascending key order; returning false stops
    /// the merge early.
    fn merged_range(&self, start: &Key, mut emit: impl FnMut(&Key, &Value) -> bool) {
        let mem: Vec<(&Key, &Value)> = self.memtable.range(*start..).collect();
        let mut sources: Vec<&[(Key, Value)]> = Vec::with_capacity(1 + self.levels.len());
        let mut positions = vec![0usize; 1 + self.levels.len()];
        // Source 0 is the memtable view, then runs from newest to oldest.
        let empty: &[(Key, Value)] = &[];
        sources.push(empty);
        for run in &self.levels {
            let from = run.entries.partition_point(|(k, _)| k < start);
            sources.push(&run.entries[from..]);
        }
        let mut mem_pos = 0usize;
        loop {
            let mut best: Option<&Key> = None;
            if mem_pos < mem.len() {
                best = Some(mem[mem_pos].0);
            }
            for (s, source) in sources.iter().enumerate().skip(1) {
                if let Some((k, _)) = source.get(positions[s]) {
                    if best.map_or(true, |b| k < b) {
                        best = Some(k);
                    }
                }
            }
            let Some(best) = best else { return };
            let best = *best;
            // Emit the newest copy, then advance every source sitting on
            // this key.
            let mut emitted = false;
            if mem_pos < mem.len() && *mem[mem_pos].0 == best {
                if !emit(mem[mem_pos].0, mem[mem_pos].1) {
                    return;
                }
                emitted = true;
                mem_pos += 1;
            }
            for (s, source) in sources.iter().enumerate().skip(1) {
                if let Some((k, v)) = source.get(positions[s]) {
                    if *k == best {
                        if !emitted {
                            if !emit(k, v) {
                                return;
                            }
                            emitted = true;
                        }
                        positions[s] += 1;
                    }
                }
            }
        }
    }

    #[cfg(test)]
    fn level_count(&self) -> usize {
        self.levels.len()
    }
}

impl Index for LsmIndex {
    fn kind(&self) -> StructureKind {
        StructureKind::LsmTree
    }

    fn len(&self) -> usize {
        let mut count = 0;
        self.merged_range(&Key::MIN, |_, _| {
            count += 1;
            true
        });
        count
    }

    fn read(&self, key: &Key) -> Option<Value> {
        if let Some(v) = self.memtable.get(key) {
            return Some(v.clone());
        }
        self.levels.iter().find_map(|run| run.get(key)).cloned()
    }

    fn insert(&mut self, key: Key, value: Value) -> Result<()> {
        // A key living only in older runs still adds a memtable entry, so
        // it counts as growth against the resident bound.
        if !self.memtable.contains_key(&key) && self.resident() >= self.capacity {
            return Err(Error::CapacityExceeded {
                limit: self.capacity,
            });
        }
        self.write(key, value);
        Ok(())
    }

    fn update(&mut self, key: &Key, value: Value) -> bool {
        if self.read(key).is_none() {
            return false;
        }
        self.write(*key, value);
        true
    }

    fn scan(&self, start: &Key, count: usize) -> Vec<(Key, Value)> {
        let mut out = Vec::new();
        if count == 0 {
            return out;
        }
        self.merged_range(start, |k, v| {
            out.push((*k, v.clone()));
            out.len() < count
        });
        out
    }

    fn rmw(&mut self, key: &Key, value: Value) -> Option<Value> {
        let old = self.read(key)?;
        self.write(*key, value);
        Some(old)
    }
}

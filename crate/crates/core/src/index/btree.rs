//! In-memory B+ tree with a tunable fanout.
//!
//! Values live only in leaves; internal nodes hold separator keys where
//! `keys[i]` is the smallest key reachable under `children[i + 1]`. Nodes
//! split at `fanout` entries, so `fanout` bounds both leaf entries and
//! internal routing keys.

use crate::error::{Error, Result};

use super::{Index, Key, ParamAxis, Structure, StructureKind, Value};

/// Smallest fanout that still splits into two non-empty halves with a
/// routing key left over.
const MIN_FANOUT: u64 = 3;

pub struct BTreeStructure {
    axes: Vec<ParamAxis>,
}

impl BTreeStructure {
    pub fn new(axes: Vec<ParamAxis>) -> Result<Self> {
        if axes.len() != 1 || axes[0].name != "fanout" {
            return Err(Error::InvalidGrid(
                "btree takes exactly one axis: fanout".into(),
            ));
        }
        if axes[0].values.iter().any(|&v| v < MIN_FANOUT) {
            return Err(Error::InvalidGrid(format!(
                "btree fanout must be >= {MIN_FANOUT}"
            )));
        }
        Ok(BTreeStructure { axes })
    }
}

impl Structure for BTreeStructure {
    fn kind(&self) -> StructureKind {
        StructureKind::BTree
    }

    fn axes(&self) -> &[ParamAxis] {
        &self.axes
    }

    fn build(&self, values: &[u64], capacity: usize) -> Box<dyn Index> {
        Box::new(BTreeIndex::new(values[0] as usize, capacity))
    }
}

enum Node {
    Leaf(Vec<(Key, Value)>),
    Internal { keys: Vec<Key>, children: Vec<Node> },
}

/// Outcome of a recursive upsert.
enum Upsert {
    Replaced,
    Inserted,
    /// Inserted and the child overflowed; the new right sibling starts at
    /// the carried separator key.
    Split(Key, Node),
}

pub struct BTreeIndex {
    root: Node,
    fanout: usize,
    len: usize,
    capacity: usize,
}

impl BTreeIndex {
    pub fn new(fanout: usize, capacity: usize) -> Self {
        BTreeIndex {
            root: Node::Leaf(Vec::new()),
            fanout,
            len: 0,
            capacity,
        }
    }

    /// Number of children that may hold `key`: all separators <= `key`
    /// route to the right of themselves.
    fn route(keys: &[Key], key: &Key) -> usize {
        keys.partition_point(|sep| sep <= key)
    }

    fn find<'a>(node: &'a Node, key: &Key) -> Option<&'a Value> {
        match node {
            Node::Leaf(entries) => entries
                .binary_search_by(|(k, _)| k.cmp(key))
                .ok()
                .map(|i| &entries[i].1),
            Node::Internal { keys, children } => Self::find(&children[Self::route(keys, key)], key),
        }
    }

    fn find_mut<'a>(node: &'a mut Node, key: &Key) -> Option<&'a mut Value> {
        match node {
            Node::Leaf(entries) => match entries.binary_search_by(|(k, _)| k.cmp(key)) {
                Ok(i) => Some(&mut entries[i].1),
                Err(_) => None,
            },
            Node::Internal { keys, children } => {
                let child = Self::route(keys, key);
                Self::find_mut(&mut children[child], key)
            }
        }
    }

    fn upsert(node: &mut Node, key: Key, value: Value, fanout: usize) -> Upsert {
        match node {
            Node::Leaf(entries) => match entries.binary_search_by(|(k, _)| k.cmp(&key)) {
                Ok(i) => {
                    entries[i].1 = value;
                    Upsert::Replaced
                }
                Err(i) => {
                    entries.insert(i, (key, value));
                    if entries.len() > fanout {
                        let right = entries.split_off(entries.len() / 2);
                        let sep = right[0].0;
                        Upsert::Split(sep, Node::Leaf(right))
                    } else {
                        Upsert::Inserted
                    }
                }
            },
            Node::Internal { keys, children } => {
                let child = Self::route(keys, &key);
                match Self::upsert(&mut children[child], key, value, fanout) {
                    Upsert::Split(sep, sibling) => {
                        keys.insert(child, sep);
                        children.insert(child + 1, sibling);
                        if keys.len() > fanout {
                            let mid = keys.len() / 2;
                            let up = keys[mid];
                            let right_keys = keys.split_off(mid + 1);
                            keys.pop();
                            let right_children = children.split_off(mid + 1);
                            let sibling = Node::Internal {
                                keys: right_keys,
                                children: right_children,
                            };
                            Upsert::Split(up, sibling)
                        } else {
                            Upsert::Inserted
                        }
                    }
                    other => other,
                }
            }
        }
    }

    /// Appends entries with key >= `start` until `out` holds `count`.
    /// Returns true once filled, which prunes the remaining subtrees.
    fn collect(node: &Node, start: &Key, count: usize, out: &mut Vec<(Key, Value)>) -> bool {
        match node {
            Node::Leaf(entries) => {
                let from = entries.partition_point(|(k, _)| k < start);
                for (k, v) in &entries[from..] {
                    if out.len() == count {
                        return true;
                    }
                    out.push((*k, v.clone()));
                }
                out.len() == count
            }
            Node::Internal { keys, children } => {
                for child in &children[Self::route(keys, start)..] {
                    if Self::collect(child, start, count, out) {
                        return true;
                    }
                }
                out.len() == count
            }
        }
    }
}

impl Index for BTreeIndex {
    fn kind(&self) -> StructureKind {
        StructureKind::BTree
    }

    fn len(&self) -> usize {
        self.len
    }

    fn read(&self, key: &Key) -> Option<Value> {
        Self::find(&self.root, key).cloned()
    }

    fn insert(&mut self, key: Key, value: Value) -> Result<()> {
        if self.len >= self.capacity && Self::find(&self.root, &key).is_none() {
            return Err(Error::CapacityExceeded {
                limit: self.capacity,
            });
        }
        match Self::upsert(&mut self.root, key, value, self.fanout) {
            Upsert::Replaced => {}
            Upsert::Inserted => self.len += 1,
            Upsert::Split(sep, sibling) => {
                self.len += 1;
                let old_root = std::mem::replace(&mut self.root, Node::Leaf(Vec::new()));
                self.root = Node::Internal {
                    keys: vec![sep],
                    children: vec![old_root, sibling],
                };
            }
        }
        Ok(())
    }

    fn update(&mut self, key: &Key, value: Value) -> bool {
        match Self::find_mut(&mut self.root, key) {
            Some(slot) => {
                *slot = value;
                true
            }
            None => false,
        }
    }

    fn scan(&self, start: &Key, count: usize) -> Vec<(Key, Value)> {
        let mut out = Vec::new();
        Self::collect(&self.root, start, count, &mut out);
        out
    }

    fn rmw(&mut self, key: &Key, value: Value) -> Option<Value> {
        Self::find_mut(&mut self.root, key).map(|slot| std::mem::replace(slot, value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(tag: u8) -> Value {
        Value::new(vec![tag; 8]).unwrap()
    }

    #[test]
    fn root_split_produces_routable_tree() {
        let mut index = BTreeIndex::new(3, 1000);
        for id in 0..20 {
            index.insert(Key::from_id(id), value(id as u8)).unwrap();
        }
        assert_eq!(index.len(), 20);
        for id in 0..20 {
            assert_eq!(
                index.read(&Key::from_id(id)),
                Some(value(id as u8)),
                "id {id}"
            );
        }
        assert!(matches!(index.root, Node::Internal { .. }));
    }

    #[test]
    fn insert_overwrites_without_growing() {
        let mut index = BTreeIndex::new(4, 1000);
        index.insert(Key::from_id(5), value(1)).unwrap();
        index.insert(Key::from_id(5), value(2)).unwrap();
        assert_eq!(index.len(), 1);
        assert_eq!(index.read(&Key::from_id(5)), Some(value(2)));
    }

    #[test]
    fn capacity_blocks_new_keys_but_not_overwrites() {
        let mut index = BTreeIndex::new(4, 2);
        index.insert(Key::from_id(1), value(1)).unwrap();
        index.insert(Key::from_id(2), value(2)).unwrap();
        let err = index.insert(Key::from_id(3), value(3)).unwrap_err();
        assert!(matches!(err, Error::CapacityExceeded { limit: 2 }));
        index.insert(Key::from_id(2), value(9)).unwrap();
        assert_eq!(index.read(&Key::from_id(2)), Some(value(9)));
    }

    #[test]
    fn scan_spans_leaf_boundaries_in_order() {
        let mut index = BTreeIndex::new(3, 1000);
        for id in (0..40).rev() {
            index.insert(Key::from_id(id), value(id as u8)).unwrap();
        }
        let got = index.scan(&Key::from_id(10), 15);
        assert_eq!(got.len(), 15);
        for (offset, (k, v)) in got.iter().enumerate() {
            let id = 10 + offset as u64;
            assert_eq!(*k, Key::from_id(id));
            assert_eq!(*v, value(id as u8));
        }
    }

    #[test]
    fn scan_past_the_end_returns_short() {
        let mut index = BTreeIndex::new(4, 1000);
        for id in 0..5 {
            index.insert(Key::from_id(id), value(id as u8)).unwrap();
        }
        assert_eq!(index.scan(&Key::from_id(3), 10).len(), 2);
        assert!(index.scan(&Key::from_id(100), 10).is_empty());
    }

    #[test]
    fn update_and_rmw_miss_absent_keys() {
        let mut index = BTreeIndex::new(4, 1000);
        index.insert(Key::from_id(1), value(1)).unwrap();
        assert!(!index.update(&Key::from_id(2), value(9)));
        assert!(index.rmw(&Key::from_id(2), value(9)).is_none());
        assert_eq!(index.len(), 1);
        assert!(index.update(&Key::from_id(1), value(7)));
        assert_eq!(index.rmw(&Key::from_id(1), value(8)), Some(value(7)));
        assert_eq!(index.read(&Key::from_id(1)), Some(value(8)));
    }
}

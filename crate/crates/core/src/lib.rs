//! Workload-driven index selection for an embedded key-value store.
//!
//! The crate models a store whose index layer can be swapped at runtime
//! between a B+ tree, a chained hash table, and a leveled LSM tree, each
//! with a small grid of tuning parameters. A benchmark scores any
//! (structure, parameters) configuration against a YCSB-style operation
//! mix, either by executing the operations or through a calibrated cost
//! model. On top of that sits a reinforcement-learning loop: an
//! environment whose actions reconfigure the index, a dueling Q-network
//! trained from replayed transitions, and a selector that rolls the
//! greedy policy forward to extract the best configuration for a given
//! workload.

pub mod bench;
pub mod env;
pub mod error;
pub mod index;
pub mod report;
pub mod rl;
pub mod selector;
pub mod trainer;
pub mod workload;

pub use error::{Error, Result};

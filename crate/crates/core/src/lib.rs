//! Simulation and strategy library for traffic interception in
//! distance-vector routing networks.
//!
//! Honest agents run a synchronous distance-vector protocol and forward each
//! message to a neighbor advertising the smallest distance to its target.
//! A set of colluding agents may advertise false (smaller) distances in order
//! to attract traffic, but every message must still be deliverable.
//!
//! The crate is organized bottom-up:
//!
//! - [`graph`]: topology, generators, edge-list ingestion and BFS distances.
//! - [`protocol`]: the synchronization fixpoint, forwarding policies and the
//!   per-target routing graph.
//! - [`strategy`]: colluder strategies (honest, independent, optimal for
//!   separated sets, and the component strategy for adjacent colluders) and
//!   the admissibility check.
//! - [`interception`]: worst-case interception counts and the coverage
//!   objective used for colluder selection.
//! - [`selection`]: colluder-set selection (random, top degree, greedy,
//!   exhaustive).
//! - [`reduction`]: the edge-subdivision construction relating per-neighbor
//!   (nonuniform) broadcasts to uniform ones.

pub mod dist;
pub mod error;
pub mod graph;
pub mod interception;
pub mod protocol;
pub mod reduction;
pub mod selection;
pub mod strategy;

pub use dist::Dist;
pub use error::{Error, Result};
pub use graph::{Graph, NodeId};

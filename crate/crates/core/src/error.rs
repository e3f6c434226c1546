use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: expected two node tokens, found {found}")]
    Parse { line: usize, found: usize },

    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: NodeId, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("colluder {colluder} broadcasts {value} for target {target}")]
    InvalidBroadcast {
        colluder: NodeId,
        target: NodeId,
        value: String,
    },

    #[error("colluder {colluder} forwards to {hop} for target {target}, which is not a neighbor")]
    InvalidForward {
        colluder: NodeId,
        target: NodeId,
        hop: NodeId,
    },

    #[error("synchronization did not converge within {rounds} rounds")]
    NoConvergence { rounds: usize },

    #[error("colluder set is not separated: {0} and {1} are adjacent")]
    NotSeparated(NodeId, NodeId),

    #[error("strategy is not admissible: no corresponding path from {source_node} to {target}")]
    Inadmissible { source_node: NodeId, target: NodeId },

    #[error("search budget exceeded: {needed} candidates, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("coverage {target} is not achievable (maximum {max})")]
    Unachievable { target: f64, max: f64 },

    #[error("malformed strategy: {0}")]
    Malformed(String),
}

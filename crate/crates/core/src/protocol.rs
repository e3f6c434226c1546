//! Honest-agent dynamics.
//!
//! Honest agents start from `rho(i,i) = 0`, `rho(i,j) = inf` and in every
//! synchronous round take `rho(i,j) = min(rho(i,j), 1 + min_{k~i} rho(k,j))`.
//! Colluder rows never change: they are whatever the colluder broadcasts.
//! At the fixpoint an honest agent forwards a message for `t` to any
//! neighbor advertising the minimum distance to `t`.
//!
//! Two routes to the fixpoint are provided. [`synchronize`] runs the rounds
//! literally on the full `n x n` table; [`target_fixpoint`] computes a single
//! target column as a multi-source shortest-path problem in `O(n + m)`, which
//! is what the large-scale interception code uses.

use std::collections::VecDeque;

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::graph::{DistanceVector, Graph, NodeId};

/// Validated colluder broadcast rows.
///
/// Every row has `row[v] = 0` for its own colluder `v` and `row[t] >= 1` for
/// all `t != v`; a colluder cannot advertise itself as a destination it is
/// not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Broadcasts {
    members: Vec<NodeId>,
    slot: Vec<Option<usize>>,
    rows: Vec<Vec<Dist>>,
}

impl Broadcasts {
    /// `members[i]` broadcasts `rows[i]`. Members must be distinct.
    pub fn new(n: usize, members: Vec<NodeId>, rows: Vec<Vec<Dist>>) -> Result<Self> {
        if members.len() != rows.len() {
            return Err(Error::InvalidArgument(format!(
                "{} colluders but {} broadcast rows",
                members.len(),
                rows.len()
            )));
        }
        let mut slot = vec![None; n];
        for (i, (&v, row)) in members.iter().zip(&rows).enumerate() {
            if v >= n {
                return Err(Error::NodeOutOfRange { node: v, n });
            }
            if slot[v].is_some() {
                return Err(Error::InvalidArgument(format!("colluder {v} listed twice")));
            }
            if row.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "broadcast row of colluder {v} has length {}, expected {n}",
                    row.len()
                )));
            }
            for (t, &b) in row.iter().enumerate() {
                let ok = if t == v { b == Dist::ZERO } else { b >= Dist::ONE };
                if !ok {
                    return Err(Error::InvalidBroadcast {
                        colluder: v,
                        target: t,
                        value: b.to_string(),
                    });
                }
            }
            slot[v] = Some(i);
        }
        Ok(Broadcasts { members, slot, rows })
    }

    /// No colluders at all.
    pub fn none(n: usize) -> Self {
        Broadcasts {
            members: Vec::new(),
            slot: vec![None; n],
            rows: Vec::new(),
        }
    }

    pub fn from_vectors(n: usize, vectors: &[DistanceVector]) -> Result<Self> {
        Self::new(
            n,
            vectors.iter().map(|dv| dv.source).collect(),
            vectors.iter().map(|dv| dv.dist.clone()).collect(),
        )
    }

    pub fn node_count(&self) -> usize {
        self.slot.len()
    }

    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    #[inline]
    pub fn slot(&self, v: NodeId) -> Option<usize> {
        self.slot[v]
    }

    #[inline]
    pub fn is_colluder(&self, v: NodeId) -> bool {
        self.slot[v].is_some()
    }

    /// `mask[v]` is true iff `v` is a colluder.
    pub fn mask(&self) -> Vec<bool> {
        self.slot.iter().map(Option::is_some).collect()
    }

    #[inline]
    pub fn get(&self, v: NodeId, t: NodeId) -> Option<Dist> {
        self.slot[v].map(|i| self.rows[i][t])
    }

    pub fn row(&self, v: NodeId) -> Option<&[Dist]> {
        self.slot[v].map(|i| self.rows[i].as_slice())
    }

    pub(crate) fn rows_mut(&mut self) -> &mut [Vec<Dist>] {
        &mut self.rows
    }
}

/// Perceived distances at the synchronization fixpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeliefState {
    /// `rho[i][j]`: what `i` believes (or, for a colluder, broadcasts) as its
    /// distance to `j`.
    pub rho: Vec<Vec<Dist>>,
    /// Number of rounds that changed at least one entry.
    pub rounds_to_converge: usize,
}

impl BeliefState {
    pub fn get(&self, i: NodeId, j: NodeId) -> Dist {
        self.rho[i][j]
    }
}

/// Round-by-round synchronization.
#[derive(Debug, Clone)]
pub struct Synchronizer<'a> {
    graph: &'a Graph,
    broadcasts: &'a Broadcasts,
    rho: Vec<Vec<Dist>>,
    rounds: usize,
}

impl<'a> Synchronizer<'a> {
    pub fn new(graph: &'a Graph, broadcasts: &'a Broadcasts) -> Self {
        let n = graph.node_count();
        assert_eq!(broadcasts.node_count(), n, "broadcast table sized for another graph");
        let rho = (0..n)
            .map(|i| match broadcasts.row(i) {
                Some(row) => row.to_vec(),
                None => {
                    let mut r = vec![Dist::INFINITE; n];
                    r[i] = Dist::ZERO;
                    r
                }
            })
            .collect();
        Synchronizer {
            graph,
            broadcasts,
            rho,
            rounds: 0,
        }
    }

    pub fn rho(&self) -> &[Vec<Dist>] {
        &self.rho
    }

    /// Runs one synchronous round. Returns whether any entry changed.
    pub fn step(&mut self) -> bool {
        let n = self.graph.node_count();
        let mut next = self.rho.clone();
        let mut changed = false;
        for (i, row) in next.iter_mut().enumerate() {
            if self.broadcasts.is_colluder(i) {
                continue;
            }
            for (j, entry) in row.iter_mut().enumerate().take(n) {
                let best = self
                    .graph
                    .neighbors(i)
                    .iter()
                    .map(|&k| self.rho[k][j])
                    .min()
                    .unwrap_or(Dist::INFINITE)
                    + 1;
                if best < *entry {
                    *entry = best;
                    changed = true;
                }
            }
        }
        self.rho = next;
        if changed {
            self.rounds += 1;
        }
        changed
    }

    pub fn finish(self) -> BeliefState {
        BeliefState {
            rho: self.rho,
            rounds_to_converge: self.rounds,
        }
    }
}

/// Iterates synchronous rounds to the fixpoint.
///
/// Fails if the fixpoint is not reached within `n - 1` changing rounds, which
/// cannot happen for validated broadcasts.
pub fn synchronize(graph: &Graph, broadcasts: &Broadcasts) -> Result<BeliefState> {
    let limit = graph.node_count().saturating_sub(1);
    let mut sync = Synchronizer::new(graph, broadcasts);
    while sync.step() {
        if sync.rounds > limit {
            return Err(Error::NoConvergence { rounds: limit });
        }
    }
    Ok(sync.finish())
}

/// The fixpoint column `rho(., t)` for a single target.
///
/// Honest values are shortest-path lengths to `t` (when `t` is honest) or to
/// a colluder `v` plus its broadcast `b(v, t)`, along paths whose interior
/// nodes are honest. Colluder entries are their broadcasts.
pub fn target_fixpoint(graph: &Graph, broadcasts: &Broadcasts, t: NodeId) -> Vec<Dist> {
    let pinned: Vec<Option<Dist>> = graph.nodes().map(|v| broadcasts.get(v, t)).collect();
    fixpoint_column(graph, t, &pinned)
}

/// [`target_fixpoint`] with the colluder entries given directly:
/// `pinned[v]` is `Some(b(v, t))` for colluders and `None` for honest nodes.
pub fn fixpoint_column(graph: &Graph, t: NodeId, pinned: &[Option<Dist>]) -> Vec<Dist> {
    let n = graph.node_count();
    let mut field = vec![Dist::INFINITE; n];
    let mut seeds: Vec<(Dist, NodeId)> = Vec::new();
    for (v, b) in pinned.iter().enumerate() {
        let Some(b) = *b else { continue };
        field[v] = b;
        if b.is_infinite() {
            continue;
        }
        for &u in graph.neighbors(v) {
            if pinned[u].is_none() {
                seeds.push((b + 1, u));
            }
        }
    }
    if pinned[t].is_none() {
        seeds.push((Dist::ZERO, t));
    }
    seeds.sort_unstable();

    let mut settled = vec![false; n];
    let mut queue: VecDeque<(Dist, NodeId)> = VecDeque::new();
    let mut next_seed = 0;
    loop {
        let from_seed = seeds.get(next_seed).copied();
        let from_queue = queue.front().copied();
        let take_seed = match (from_seed, from_queue) {
            (None, None) => break,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some(s), Some(q)) => s.0 <= q.0,
        };
        let (d, u) = if take_seed {
            next_seed += 1;
            from_seed.unwrap()
        } else {
            queue.pop_front().unwrap()
        };
        if settled[u] {
            continue;
        }
        settled[u] = true;
        field[u] = d;
        for &w in graph.neighbors(u) {
            if !settled[w] && pinned[w].is_none() {
                queue.push_back((d + 1, w));
            }
        }
    }
    field
}

/// Argmin next-hop sets of honest agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForwardingPolicy {
    /// `next_hops[i][t]`; empty for colluders, for `i == t`, and when no
    /// neighbor advertises a finite distance.
    pub next_hops: Vec<Vec<Vec<NodeId>>>,
}

impl ForwardingPolicy {
    pub fn get(&self, i: NodeId, t: NodeId) -> &[NodeId] {
        &self.next_hops[i][t]
    }
}

/// Honest next hops toward `t` given a fixpoint column.
pub fn honest_next_hops(graph: &Graph, column: &[Dist], u: NodeId, t: NodeId) -> Vec<NodeId> {
    if u == t {
        return Vec::new();
    }
    let best = graph
        .neighbors(u)
        .iter()
        .map(|&k| column[k])
        .min()
        .unwrap_or(Dist::INFINITE);
    if best.is_infinite() {
        return Vec::new();
    }
    graph
        .neighbors(u)
        .iter()
        .copied()
        .filter(|&k| column[k] == best)
        .collect()
}

pub fn forwarding_policy(graph: &Graph, belief: &BeliefState, broadcasts: &Broadcasts) -> ForwardingPolicy {
    let n = graph.node_count();
    let mut next_hops = vec![vec![Vec::new(); n]; n];
    for t in 0..n {
        let column: Vec<Dist> = (0..n).map(|k| belief.rho[k][t]).collect();
        for (i, hops) in next_hops.iter_mut().enumerate() {
            if !broadcasts.is_colluder(i) {
                hops[t] = honest_next_hops(graph, &column, i, t);
            }
        }
    }
    ForwardingPolicy { next_hops }
}

/// Per-target routing view over a fixpoint column without materializing
/// edges: honest `u != t` points at every neighbor `k` with
/// `column[k] = column[u] - 1`; a colluder points at its declared hop.
pub struct TargetRouting<'a, H> {
    graph: &'a Graph,
    colluder: &'a [bool],
    target: NodeId,
    column: &'a [Dist],
    hop: H,
}

impl<'a, H> TargetRouting<'a, H>
where
    H: Fn(NodeId) -> Option<NodeId>,
{
    /// `colluder[v]` marks colluders; `hop(v)` is the declared next hop of
    /// colluder `v` toward `target`.
    pub fn new(graph: &'a Graph, colluder: &'a [bool], target: NodeId, column: &'a [Dist], hop: H) -> Self {
        TargetRouting {
            graph,
            colluder,
            target,
            column,
            hop,
        }
    }

    /// Whether `u -> y` is an edge of the routing graph.
    #[inline]
    pub fn forwards_to(&self, u: NodeId, y: NodeId) -> bool {
        if u == self.target {
            return false;
        }
        if self.colluder[u] {
            return (self.hop)(u) == Some(y);
        }
        let cy = self.column[y];
        cy.is_finite() && self.column[u] == cy + 1
    }

    pub fn out_edges(&self, u: NodeId) -> Vec<NodeId> {
        if u == self.target {
            return Vec::new();
        }
        if self.colluder[u] {
            return (self.hop)(u).into_iter().collect();
        }
        honest_next_hops(self.graph, self.column, u, self.target)
    }

    /// Nodes from which the target is reachable, never passing through a
    /// node with `deleted[v]` set. The target itself is always reached.
    pub fn reaching_target(&self, deleted: &[bool]) -> Vec<bool> {
        let is_deleted = |v: NodeId| deleted.get(v).copied().unwrap_or(false);
        let mut reached = vec![false; self.graph.node_count()];
        reached[self.target] = true;
        let mut stack = vec![self.target];
        while let Some(y) = stack.pop() {
            for &u in self.graph.neighbors(y) {
                if !reached[u] && !is_deleted(u) && self.forwards_to(u, y) {
                    reached[u] = true;
                    stack.push(u);
                }
            }
        }
        reached
    }

    pub fn materialize(&self) -> RoutingGraph {
        RoutingGraph {
            target: self.target,
            out: self.graph.nodes().map(|u| self.out_edges(u)).collect(),
        }
    }
}

/// Directed graph of permitted forwarding moves toward one target. Walks from
/// `s` to `target` are exactly the corresponding paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingGraph {
    pub target: NodeId,
    pub out: Vec<Vec<NodeId>>,
}

/// Materializes the routing graph toward `t` from an honest forwarding policy
/// and the colluders' declared hops.
pub fn routing_graph(
    graph: &Graph,
    policy: &ForwardingPolicy,
    broadcasts: &Broadcasts,
    colluder_hop: impl Fn(NodeId) -> Option<NodeId>,
    t: NodeId,
) -> Result<RoutingGraph> {
    graph.check_node(t)?;
    let mut out = Vec::with_capacity(graph.node_count());
    for u in graph.nodes() {
        if u == t {
            out.push(Vec::new());
        } else if broadcasts.is_colluder(u) {
            match colluder_hop(u) {
                Some(h) if graph.has_edge(u, h) => out.push(vec![h]),
                Some(h) => {
                    return Err(Error::InvalidForward {
                        colluder: u,
                        target: t,
                        hop: h,
                    })
                }
                None => out.push(Vec::new()),
            }
        } else {
            out.push(policy.get(u, t).to_vec());
        }
    }
    Ok(RoutingGraph { target: t, out })
}

impl RoutingGraph {
    /// Nodes that can reach the target (reverse search).
    pub fn reaching_target(&self) -> Vec<bool> {
        let n = self.out.len();
        let mut rev = vec![Vec::new(); n];
        for (u, outs) in self.out.iter().enumerate() {
            for &v in outs {
                rev[v].push(u);
            }
        }
        let mut reached = vec![false; n];
        reached[self.target] = true;
        let mut stack = vec![self.target];
        while let Some(y) = stack.pop() {
            for &u in &rev[y] {
                if !reached[u] {
                    reached[u] = true;
                    stack.push(u);
                }
            }
        }
        reached
    }
}

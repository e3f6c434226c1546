//! Strategies whose colluders announce a different distance to each
//! neighbor.
//!
//! Only announcements heard by honest neighbors are stored. Colluders' own
//! beliefs are pinned, so what one colluder tells another never changes an
//! honest belief or route.

use fixedbitset::FixedBitSet;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::interception::{intercepted_toward, InterceptionResult};
use crate::strategy::{normalize_set, toward, Strategy};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonuniformStrategy {
    members: Vec<NodeId>,
    slot: Vec<Option<usize>>,
    /// Honest neighbors of each member, sorted.
    listeners: Vec<Vec<NodeId>>,
    /// `heard[i][t][j]`: what member `i` tells `listeners[i][j]` about `t`.
    heard: Vec<Vec<Vec<Dist>>>,
    forward: Vec<Vec<Option<NodeId>>>,
}

impl NonuniformStrategy {
    /// `broadcast(u, t, v)` is queried for every member `u`, target `t` and
    /// honest neighbor `v`; `forward(u, t)` for every member and target.
    pub fn new(
        graph: &Graph,
        set: &[NodeId],
        broadcast: impl Fn(NodeId, NodeId, NodeId) -> Dist,
        forward: impl Fn(NodeId, NodeId) -> Option<NodeId>,
    ) -> Result<Self> {
        let n = graph.node_count();
        let members = normalize_set(graph, set)?;
        let mut slot = vec![None; n];
        for (i, &u) in members.iter().enumerate() {
            slot[u] = Some(i);
        }
        let listeners: Vec<Vec<NodeId>> = members
            .iter()
            .map(|&u| {
                graph
                    .neighbors(u)
                    .iter()
                    .copied()
                    .filter(|&v| slot[v].is_none())
                    .collect()
            })
            .collect();
        let mut heard = Vec::with_capacity(members.len());
        let mut hops = Vec::with_capacity(members.len());
        for (&u, ears) in members.iter().zip(&listeners) {
            let mut rows = Vec::with_capacity(n);
            let mut row_hops = Vec::with_capacity(n);
            for t in 0..n {
                let row: Vec<Dist> = ears.iter().map(|&v| broadcast(u, t, v)).collect();
                for &b in &row {
                    if (t == u) != (b == Dist::ZERO) {
                        return Err(Error::InvalidBroadcast {
                            colluder: u,
                            target: t,
                            value: b.to_string(),
                        });
                    }
                }
                rows.push(row);
                let hop = forward(u, t);
                if let Some(h) = hop {
                    if h >= n || !graph.has_edge(u, h) {
                        return Err(Error::InvalidForward {
                            colluder: u,
                            target: t,
                            hop: h,
                        });
                    }
                }
                row_hops.push(hop);
            }
            heard.push(rows);
            hops.push(row_hops);
        }
        Ok(NonuniformStrategy {
            members,
            slot,
            listeners,
            heard,
            forward: hops,
        })
    }

    /// Every colluder tells everyone its true distance and forwards along a
    /// shortest path.
    pub fn honest(graph: &Graph, set: &[NodeId]) -> Result<Self> {
        let rows = all_distances(graph);
        NonuniformStrategy::new(graph, set, |u, t, _| rows[t][u], |u, t| toward(graph, &rows[t], u))
    }

    /// The same announcement to every neighbor.
    pub fn from_uniform(graph: &Graph, strategy: &Strategy) -> Result<Self> {
        NonuniformStrategy::new(
            graph,
            strategy.colluders(),
            |u, t, _| strategy.broadcast(u, t).expect("member"),
            |u, t| strategy.forward(u, t),
        )
    }

    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    pub fn node_count(&self) -> usize {
        self.slot.len()
    }

    pub fn is_colluder(&self, v: NodeId) -> bool {
        self.slot.get(v).is_some_and(|s| s.is_some())
    }

    /// What `u` tells honest neighbor `v` about `t`; `None` unless `u` is a
    /// member and `v` an honest neighbor.
    pub fn broadcast(&self, u: NodeId, t: NodeId, v: NodeId) -> Option<Dist> {
        let i = (*self.slot.get(u)?)?;
        let j = self.listeners[i].binary_search(&v).ok()?;
        Some(self.heard[i][t][j])
    }

    pub fn forward(&self, u: NodeId, t: NodeId) -> Option<NodeId> {
        let i = (*self.slot.get(u)?)?;
        self.forward[i][t]
    }

    /// Honest beliefs about `t` by synchronous rounds; colluder entries are
    /// infinite except at `t`.
    pub fn column(&self, graph: &Graph, t: NodeId) -> Vec<Dist> {
        let n = graph.node_count();
        let mut rho = vec![Dist::INFINITE; n];
        rho[t] = Dist::ZERO;
        loop {
            let mut next = rho.clone();
            for i in (0..n).filter(|&i| !self.is_colluder(i) && i != t) {
                for &k in graph.neighbors(i) {
                    let heard = match self.slot[k] {
                        Some(_) => self.broadcast(k, t, i).expect("honest neighbor"),
                        None => rho[k],
                    };
                    if heard + 1 < next[i] {
                        next[i] = heard + 1;
                    }
                }
            }
            if next == rho {
                return rho;
            }
            rho = next;
        }
    }

    fn forwards_to(&self, graph: &Graph, column: &[Dist], t: NodeId, u: NodeId, y: NodeId) -> bool {
        if self.is_colluder(u) {
            return self.forward(u, t) == Some(y);
        }
        let heard = match self.slot[y] {
            Some(_) => self.broadcast(y, t, u).expect("honest neighbor"),
            None => column[y],
        };
        debug_assert!(graph.has_edge(u, y));
        heard.is_finite() && column[u] == heard + 1
    }

    /// Nodes with a routing walk to `t` avoiding `deleted`.
    fn reaching(&self, graph: &Graph, t: NodeId, column: &[Dist], deleted: &[bool]) -> Vec<bool> {
        let mut reached = vec![false; graph.node_count()];
        reached[t] = true;
        let mut stack = vec![t];
        while let Some(y) = stack.pop() {
            for &u in graph.neighbors(y) {
                if !reached[u] && !deleted.get(u).copied().unwrap_or(false) && self.forwards_to(graph, column, t, u, y)
                {
                    reached[u] = true;
                    stack.push(u);
                }
            }
        }
        reached
    }

    /// Nodes of `t`'s component that cannot reach `t`.
    pub fn trapped_nodes(&self, graph: &Graph, t: NodeId) -> Vec<NodeId> {
        let label = graph.components().label;
        let column = self.column(graph, t);
        let reached = self.reaching(graph, t, &column, &[]);
        graph.nodes().filter(|&s| label[s] == label[t] && !reached[s]).collect()
    }

    pub fn is_admissible(&self, graph: &Graph) -> bool {
        graph.nodes().all(|t| self.trapped_nodes(graph, t).is_empty())
    }

    /// Worst-case interception, under the same conventions as the uniform
    /// engine.
    pub fn intercepted_pairs(&self, graph: &Graph) -> Result<InterceptionResult> {
        let label = graph.components().label;
        let colluder: Vec<bool> = graph.nodes().map(|v| self.is_colluder(v)).collect();
        let by_target = graph
            .nodes()
            .map(|t| {
                let column = self.column(graph, t);
                let reached = self.reaching(graph, t, &column, &[]);
                if let Some(s) = graph.nodes().find(|&s| label[s] == label[t] && !reached[s]) {
                    return Err(Error::Inadmissible {
                        source_node: s,
                        target: t,
                    });
                }
                let escaped = self.reaching(graph, t, &column, &colluder);
                Ok(intercepted_toward(t, &label, &colluder, &escaped))
            })
            .collect::<Result<Vec<FixedBitSet>>>()?;
        Ok(InterceptionResult::from_targets(graph, by_target))
    }
}

pub(crate) fn all_distances(graph: &Graph) -> Vec<Vec<Dist>> {
    graph.nodes().map(|t| graph.bfs_blocked(t, &[], u32::MAX)).collect()
}

/// Random admissible strategy: starting from honest, tries `attempts`
/// random single-announcement decreases and keeps each that stays
/// admissible. Used to sample strategies for tests and experiments.
pub fn random_admissible(graph: &Graph, set: &[NodeId], seed: u64, attempts: usize) -> Result<NonuniformStrategy> {
    let mut current = NonuniformStrategy::honest(graph, set)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = graph.node_count();
    let candidates: Vec<(usize, usize)> = current
        .listeners
        .iter()
        .enumerate()
        .flat_map(|(i, ears)| (0..ears.len()).map(move |j| (i, j)))
        .collect();
    if candidates.is_empty() || n == 0 {
        return Ok(current);
    }
    for _ in 0..attempts {
        let (i, j) = candidates[rng.gen_range(0..candidates.len())];
        let t = rng.gen_range(0..n);
        let old = current.heard[i][t][j];
        let Some(v) = old.finite().filter(|&v| v > 1) else {
            continue;
        };
        current.heard[i][t][j] = Dist::new(rng.gen_range(1..v));
        if !current.trapped_nodes(graph, t).is_empty() {
            current.heard[i][t][j] = old;
        }
    }
    Ok(current)
}

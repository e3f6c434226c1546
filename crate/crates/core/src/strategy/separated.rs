//! Optimal broadcasts for pairwise non-adjacent colluders.
//!
//! The single-agent lie is `rho'(x, t) = max(d(x, t) - 2, 1)`. A colluder may
//! do better by handing the message to another colluder: a chain
//! `x = c_1, ..., c_j` costs `sum (d(c_i, c_{i+1}) - 2) + rho'(c_j, t)`. The
//! optimal broadcast `rho*(x, t)` is the cheapest chain, which is a
//! shortest-path problem on the complete graph over colluders with edge
//! weights `d(x, y) - 2 >= 0` and per-colluder source costs `rho'`. Labels
//! are compared as (value, chain length) so the chain length is the smallest
//! among optimal chains; a chain of length one means the colluder is
//! improper.

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

use super::{assemble, normalize_set, toward, Strategy, StrategyKind};

/// Plan entry for one colluder and one target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RhoStarEntry {
    pub value: Dist,
    /// Number of colluders on the optimal chain starting here; 1 iff improper.
    pub forwarding_number: u32,
    /// Next colluder on the chain, `None` for improper colluders.
    pub successor: Option<NodeId>,
    /// The neighbor this colluder forwards to.
    pub exit_hop: Option<NodeId>,
}

/// Optimal broadcasts of a separated colluder set toward one target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhoStarPlan {
    pub target: NodeId,
    members: Vec<NodeId>,
    entries: Vec<RhoStarEntry>,
}

impl RhoStarPlan {
    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    pub fn entry(&self, x: NodeId) -> Option<&RhoStarEntry> {
        let i = self.members.binary_search(&x).ok()?;
        Some(&self.entries[i])
    }

    pub fn value(&self, x: NodeId) -> Option<Dist> {
        self.entry(x).map(|e| e.value)
    }

    pub fn is_proper(&self, x: NodeId) -> Option<bool> {
        self.entry(x).map(|e| e.forwarding_number > 1)
    }

    /// The colluder chain realizing `rho*(x, t)`, starting at `x`.
    pub fn witness(&self, x: NodeId) -> Vec<NodeId> {
        let mut chain = Vec::new();
        let mut cur = Some(x);
        while let Some(c) = cur {
            chain.push(c);
            cur = self.entry(c).and_then(|e| e.successor);
        }
        chain
    }
}

/// True distances from every colluder of a separated set.
pub(crate) struct SeparatedContext {
    pub members: Vec<NodeId>,
    /// `from[i]` is the BFS row of `members[i]`.
    pub from: Vec<Vec<Dist>>,
}

impl SeparatedContext {
    pub fn new(graph: &Graph, set: &[NodeId]) -> Result<Self> {
        let members = normalize_set(graph, set)?;
        let mut is_member = vec![false; graph.node_count()];
        for &v in &members {
            is_member[v] = true;
        }
        for &v in &members {
            if let Some(&u) = graph.neighbors(v).iter().find(|&&u| is_member[u]) {
                return Err(Error::NotSeparated(v.min(u), v.max(u)));
            }
        }
        let from = members.iter().map(|&v| graph.bfs_blocked(v, &[], u32::MAX)).collect();
        Ok(SeparatedContext { members, from })
    }

    /// The plan toward `t`, which must not be a colluder.
    pub fn plan(&self, graph: &Graph, t: NodeId, dist_t: &[Dist]) -> RhoStarPlan {
        let k = self.members.len();
        let mut key: Vec<(Dist, u32)> = self
            .members
            .iter()
            .map(|&x| (dist_t[x].minus_floored(2, 1), 1))
            .collect();
        let mut successor: Vec<Option<usize>> = vec![None; k];
        let mut settled = vec![false; k];
        for _ in 0..k {
            let Some(i) = (0..k)
                .filter(|&i| !settled[i] && key[i].0.is_finite())
                .min_by_key(|&i| (key[i], i))
            else {
                break;
            };
            settled[i] = true;
            for j in 0..k {
                if settled[j] {
                    continue;
                }
                let Some(dij) = self.from[i][self.members[j]].finite() else {
                    continue;
                };
                let cand = (key[i].0 + (dij - 2), key[i].1 + 1);
                let better = cand < key[j] || (cand == key[j] && successor[j].is_some_and(|s| i < s));
                if better {
                    key[j] = cand;
                    successor[j] = Some(i);
                }
            }
        }
        let entries = (0..k)
            .map(|i| {
                let x = self.members[i];
                let exit_hop = match successor[i] {
                    None => toward(graph, dist_t, x),
                    Some(s) => toward(graph, &self.from[s], x),
                };
                RhoStarEntry {
                    value: key[i].0,
                    forwarding_number: key[i].1,
                    successor: successor[i].map(|s| self.members[s]),
                    exit_hop,
                }
            })
            .collect();
        RhoStarPlan {
            target: t,
            members: self.members.clone(),
            entries,
        }
    }
}

/// Minimum over chains of `j` distinct colluders from `x` to `y` of the sum
/// of consecutive true distances; infinite when no chain exists.
pub fn colluding_distance(graph: &Graph, set: &[NodeId], x: NodeId, y: NodeId, j: usize) -> Result<Dist> {
    let members = normalize_set(graph, set)?;
    let (Ok(xi), Ok(yi)) = (members.binary_search(&x), members.binary_search(&y)) else {
        return Err(Error::InvalidArgument(format!("{x} and {y} must both be colluders")));
    };
    if j == 0 {
        return Err(Error::InvalidArgument("chain length must be at least 1".into()));
    }
    if j > members.len() {
        return Ok(Dist::INFINITE);
    }
    let table: Vec<Vec<Dist>> = members
        .iter()
        .map(|&a| {
            let row = graph.bfs_blocked(a, &[], u32::MAX);
            members.iter().map(|&b| row[b]).collect()
        })
        .collect();

    fn extend(table: &[Vec<Dist>], used: &mut [bool], cur: usize, left: usize, end: usize, acc: Dist, best: &mut Dist) {
        if left == 0 {
            if cur == end && acc < *best {
                *best = acc;
            }
            return;
        }
        for next in 0..table.len() {
            if used[next] || (left > 1 && next == end) || table[cur][next].is_infinite() {
                continue;
            }
            used[next] = true;
            extend(table, used, next, left - 1, end, acc + table[cur][next], best);
            used[next] = false;
        }
    }

    if j == 1 {
        return Ok(if x == y { Dist::ZERO } else { Dist::INFINITE });
    }
    if x == y {
        return Ok(Dist::INFINITE);
    }
    let mut used = vec![false; members.len()];
    used[xi] = true;
    let mut best = Dist::INFINITE;
    extend(&table, &mut used, xi, j - 1, yi, Dist::ZERO, &mut best);
    Ok(best)
}

/// The optimal plan toward a non-colluder target `t`.
pub fn rho_star_plan(graph: &Graph, set: &[NodeId], t: NodeId) -> Result<RhoStarPlan> {
    graph.check_node(t)?;
    let ctx = SeparatedContext::new(graph, set)?;
    if ctx.members.binary_search(&t).is_ok() {
        return Err(Error::InvalidArgument(format!("target {t} is a colluder")));
    }
    let dist_t = graph.bfs_blocked(t, &[], u32::MAX);
    Ok(ctx.plan(graph, t, &dist_t))
}

/// Optimal strategy for a separated set: broadcasts follow the plan; improper
/// colluders forward along a shortest path to the target, proper ones along
/// a shortest path to their successor. Colluder targets are handled
/// honestly.
pub fn separated_strategy(graph: &Graph, set: &[NodeId]) -> Result<Strategy> {
    let ctx = SeparatedContext::new(graph, set)?;
    let members = ctx.members.clone();
    assemble(graph, StrategyKind::RhoStar, members, |t, dist_t| {
        if ctx.members.binary_search(&t).is_ok() {
            return ctx
                .members
                .iter()
                .map(|&x| (dist_t[x], toward(graph, dist_t, x)))
                .collect();
        }
        let plan = ctx.plan(graph, t, dist_t);
        plan.entries.iter().map(|e| (e.value, e.exit_hop)).collect()
    })
}

//! Colluder strategies and the admissibility check.
//!
//! A strategy fixes, for every colluder `v` and target `t`, a uniform
//! broadcast `b(v, t)` (the same value announced to every neighbor) and a
//! single next hop. Builders are pure per target and run in parallel over
//! targets.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::protocol::{self, Broadcasts, TargetRouting};

mod adjacent;
mod bruteforce;
mod separated;

pub use adjacent::{adjacent_strategy, ComponentOrder};
pub use bruteforce::{admissible_for_some_forwarding, minimal_admissible_bruteforce, MinimalBroadcasts};
pub use separated::{colluding_distance, rho_star_plan, separated_strategy, RhoStarEntry, RhoStarPlan};

const NO_HOP: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    Honest,
    Independent,
    RhoStar,
    AdjacentGeneral,
    Custom,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Honest,
        StrategyKind::Independent,
        StrategyKind::RhoStar,
        StrategyKind::AdjacentGeneral,
        StrategyKind::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Honest => "honest",
            StrategyKind::Independent => "independent",
            StrategyKind::RhoStar => "rho_star",
            StrategyKind::AdjacentGeneral => "adjacent_general",
            StrategyKind::Custom => "custom",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown strategy kind {s:?}")))
    }
}

/// Broadcasts and next hops of a colluder set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strategy {
    kind: StrategyKind,
    broadcasts: Broadcasts,
    /// `forward[slot][t]`, `NO_HOP` when absent.
    forward: Vec<Vec<u32>>,
    mask: Vec<bool>,
}

impl Strategy {
    /// Validates and assembles a strategy. `forward[i][t]` must be a neighbor
    /// of `members[i]` when present.
    pub fn new(
        graph: &Graph,
        kind: StrategyKind,
        members: Vec<NodeId>,
        rows: Vec<Vec<Dist>>,
        forward: Vec<Vec<Option<NodeId>>>,
    ) -> Result<Self> {
        let n = graph.node_count();
        let broadcasts = Broadcasts::new(n, members, rows)?;
        if forward.len() != broadcasts.members().len() {
            return Err(Error::InvalidArgument(format!(
                "{} colluders but {} forwarding rows",
                broadcasts.members().len(),
                forward.len()
            )));
        }
        let mut packed = Vec::with_capacity(forward.len());
        for (&v, row) in broadcasts.members().iter().zip(forward) {
            if row.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "forwarding row of colluder {v} has length {}, expected {n}",
                    row.len()
                )));
            }
            let mut out = Vec::with_capacity(n);
            for (t, hop) in row.into_iter().enumerate() {
                match hop {
                    Some(h) if h < n && graph.has_edge(v, h) => out.push(h as u32),
                    Some(h) => {
                        return Err(Error::InvalidForward {
                            colluder: v,
                            target: t,
                            hop: h,
                        })
                    }
                    None => out.push(NO_HOP),
                }
            }
            packed.push(out);
        }
        Ok(Self::from_parts(kind, broadcasts, packed))
    }

    fn from_parts(kind: StrategyKind, broadcasts: Broadcasts, forward: Vec<Vec<u32>>) -> Self {
        let mask = broadcasts.mask();
        Strategy {
            kind,
            broadcasts,
            forward,
            mask,
        }
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: StrategyKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn node_count(&self) -> usize {
        self.mask.len()
    }

    /// Colluders in ascending id order.
    pub fn colluders(&self) -> &[NodeId] {
        self.broadcasts.members()
    }

    pub fn broadcasts(&self) -> &Broadcasts {
        &self.broadcasts
    }

    /// `mask[v]` is true iff `v` is a colluder.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_colluder(&self, v: NodeId) -> bool {
        self.mask[v]
    }

    pub fn broadcast(&self, v: NodeId, t: NodeId) -> Option<Dist> {
        self.broadcasts.get(v, t)
    }

    pub fn forward(&self, v: NodeId, t: NodeId) -> Option<NodeId> {
        let slot = self.broadcasts.slot(v)?;
        match self.forward[slot][t] {
            NO_HOP => None,
            h => Some(h as NodeId),
        }
    }

    /// Replaces one broadcast value, keeping the row valid.
    pub fn set_broadcast(&mut self, v: NodeId, t: NodeId, b: Dist) -> Result<()> {
        let slot = self
            .broadcasts
            .slot(v)
            .ok_or_else(|| Error::InvalidArgument(format!("{v} is not a colluder")))?;
        let ok = if t == v { b == Dist::ZERO } else { b >= Dist::ONE };
        if !ok {
            return Err(Error::InvalidBroadcast {
                colluder: v,
                target: t,
                value: b.to_string(),
            });
        }
        self.broadcasts.rows_mut()[slot][t] = b;
        self.kind = StrategyKind::Custom;
        Ok(())
    }

    pub fn set_forward(&mut self, graph: &Graph, v: NodeId, t: NodeId, hop: Option<NodeId>) -> Result<()> {
        let slot = self
            .broadcasts
            .slot(v)
            .ok_or_else(|| Error::InvalidArgument(format!("{v} is not a colluder")))?;
        self.forward[slot][t] = match hop {
            Some(h) if h < graph.node_count() && graph.has_edge(v, h) => h as u32,
            Some(h) => {
                return Err(Error::InvalidForward {
                    colluder: v,
                    target: t,
                    hop: h,
                })
            }
            None => NO_HOP,
        };
        self.kind = StrategyKind::Custom;
        Ok(())
    }

    /// Fixpoint column `rho(., t)` under this strategy.
    pub fn column(&self, graph: &Graph, t: NodeId) -> Vec<Dist> {
        protocol::target_fixpoint(graph, &self.broadcasts, t)
    }

    /// Routing view toward `t` over a column produced by [`Strategy::column`].
    pub fn routing<'a>(
        &'a self,
        graph: &'a Graph,
        t: NodeId,
        column: &'a [Dist],
    ) -> TargetRouting<'a, impl Fn(NodeId) -> Option<NodeId> + 'a> {
        TargetRouting::new(graph, &self.mask, t, column, move |v| self.forward(v, t))
    }

    /// One `colluder target broadcast forward` record per line, after a
    /// `# strategy <kind>` header. Missing hops are written as `-`.
    pub fn to_text(&self) -> String {
        let n = self.node_count();
        let mut out = format!("# strategy {}\n# colluder target broadcast forward\n", self.kind);
        for &v in self.colluders() {
            for t in 0..n {
                let b = self.broadcast(v, t).expect("member");
                let hop = self.forward(v, t).map_or_else(|| "-".to_owned(), |h| h.to_string());
                let _ = writeln!(out, "{v} {t} {b} {hop}");
            }
        }
        out
    }

    pub fn from_text(graph: &Graph, text: &str) -> Result<Self> {
        let n = graph.node_count();
        let mut kind = StrategyKind::Custom;
        let mut records: Vec<(NodeId, NodeId, Dist, Option<NodeId>)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix("# strategy ") {
                kind = rest.trim().parse()?;
                continue;
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::Malformed(format!("line {}: {line:?}", lineno + 1));
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let [v, t, b, hop] = tokens[..] else {
                return Err(bad());
            };
            let v: NodeId = v.parse().map_err(|_| bad())?;
            let t: NodeId = t.parse().map_err(|_| bad())?;
            let b: Dist = b.parse().map_err(|_| bad())?;
            let hop = match hop {
                "-" => None,
                h => Some(h.parse().map_err(|_| bad())?),
            };
            for x in [v, t] {
                graph.check_node(x)?;
            }
            records.push((v, t, b, hop));
        }
        let mut members: Vec<NodeId> = records.iter().map(|r| r.0).collect();
        members.sort_unstable();
        members.dedup();
        let mut slot = vec![usize::MAX; n];
        for (i, &v) in members.iter().enumerate() {
            slot[v] = i;
        }
        let mut rows = vec![vec![None; n]; members.len()];
        let mut forward = vec![vec![None; n]; members.len()];
        for (v, t, b, hop) in records {
            if rows[slot[v]][t].replace(b).is_some() {
                return Err(Error::Malformed(format!(
                    "duplicate record for colluder {v}, target {t}"
                )));
            }
            forward[slot[v]][t] = hop;
        }
        let rows = rows
            .into_iter()
            .zip(&members)
            .map(|(row, &v)| {
                row.into_iter()
                    .enumerate()
                    .map(|(t, b)| b.ok_or_else(|| Error::Malformed(format!("no record for colluder {v}, target {t}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Strategy::new(graph, kind, members, rows, forward)
    }
}

/// Sorted, deduplicated, range-checked colluder list.
pub(crate) fn normalize_set(graph: &Graph, set: &[NodeId]) -> Result<Vec<NodeId>> {
    let mut members = set.to_vec();
    for &v in &members {
        graph.check_node(v)?;
    }
    members.sort_unstable();
    members.dedup();
    Ok(members)
}

/// Lowest-id neighbor of `v` on a shortest path to the source of `dist_t`.
pub(crate) fn toward(graph: &Graph, dist_t: &[Dist], v: NodeId) -> Option<NodeId> {
    let dv = dist_t[v].finite()?;
    if dv == 0 {
        return None;
    }
    graph
        .neighbors(v)
        .iter()
        .copied()
        .find(|&u| dist_t[u].finite() == Some(dv - 1))
}

/// Builds a strategy target by target. `per_target(t, dist_t)` receives the
/// true distances to `t` and returns `(broadcast, hop)` for every member in
/// order.
pub(crate) fn assemble<F>(graph: &Graph, kind: StrategyKind, members: Vec<NodeId>, per_target: F) -> Result<Strategy>
where
    F: Fn(NodeId, &[Dist]) -> Vec<(Dist, Option<NodeId>)> + Sync,
{
    let n = graph.node_count();
    let columns: Vec<Vec<(Dist, Option<NodeId>)>> = (0..n)
        .into_par_iter()
        .map(|t| {
            let dist_t = graph.bfs_blocked(t, &[], u32::MAX);
            per_target(t, &dist_t)
        })
        .collect();
    let k = members.len();
    let mut rows = vec![Vec::with_capacity(n); k];
    let mut forward = vec![Vec::with_capacity(n); k];
    for column in columns {
        debug_assert_eq!(column.len(), k);
        for (i, (b, hop)) in column.into_iter().enumerate() {
            rows[i].push(b);
            forward[i].push(hop.map_or(NO_HOP, |h| h as u32));
        }
    }
    let broadcasts = Broadcasts::new(n, members, rows)?;
    Ok(Strategy::from_parts(kind, broadcasts, forward))
}

/// Every colluder broadcasts its true distance and forwards along a shortest
/// path (lowest-id neighbor).
pub fn honest_strategy(graph: &Graph, set: &[NodeId]) -> Result<Strategy> {
    let members = normalize_set(graph, set)?;
    let m = members.clone();
    assemble(graph, StrategyKind::Honest, members, move |_, dist_t| {
        m.iter().map(|&x| (dist_t[x], toward(graph, dist_t, x))).collect()
    })
}

/// Every colluder lies on its own: it broadcasts `max(1, d(x, t) - 2)` and
/// forwards along a shortest path.
pub fn independent_strategy(graph: &Graph, set: &[NodeId]) -> Result<Strategy> {
    let members = normalize_set(graph, set)?;
    let m = members.clone();
    assemble(graph, StrategyKind::Independent, members, move |t, dist_t| {
        m.iter()
            .map(|&x| {
                let b = if x == t {
                    Dist::ZERO
                } else {
                    dist_t[x].minus_floored(2, 1)
                };
                (b, toward(graph, dist_t, x))
            })
            .collect()
    })
}

/// Outcome of [`check_admissible`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibilityVerdict {
    pub admissible: bool,
    /// Smallest target with a trapped node, and the smallest trapped node.
    pub violating_pair: Option<(NodeId, NodeId)>,
    /// Nodes of the target's component that cannot reach it.
    pub trap_set: Option<Vec<NodeId>>,
}

/// Nodes in `t`'s component from which `t` is unreachable in the routing
/// graph toward `t`.
pub fn trapped_nodes(graph: &Graph, strategy: &Strategy, t: NodeId, component: &[usize]) -> Vec<NodeId> {
    let column = strategy.column(graph, t);
    let reached = strategy.routing(graph, t, &column).reaching_target(&[]);
    graph
        .nodes()
        .filter(|&s| component[s] == component[t] && !reached[s])
        .collect()
}

/// A strategy is admissible when every node reaches every target in its
/// component along the routing graph.
pub fn check_admissible(graph: &Graph, strategy: &Strategy) -> AdmissibilityVerdict {
    let label = graph.components().label;
    let violation = (0..graph.node_count()).into_par_iter().find_map_first(|t| {
        let trapped = trapped_nodes(graph, strategy, t, &label);
        (!trapped.is_empty()).then_some((t, trapped))
    });
    match violation {
        None => AdmissibilityVerdict {
            admissible: true,
            violating_pair: None,
            trap_set: None,
        },
        Some((t, trapped)) => AdmissibilityVerdict {
            admissible: false,
            violating_pair: Some((trapped[0], t)),
            trap_set: Some(trapped),
        },
    }
}

/// Whether an admissible strategy intercepts strictly more ordered pairs than
/// the honest strategy on the same colluders.
pub fn is_beneficial(graph: &Graph, strategy: &Strategy) -> Result<bool> {
    let lying = crate::interception::intercepted_pairs(graph, strategy)?;
    let honest = honest_strategy(graph, strategy.colluders())?;
    let baseline = crate::interception::intercepted_pairs(graph, &honest)?;
    Ok(lying.intercepted_ordered > baseline.intercepted_ordered)
}

//! Per-neighbor broadcasts and the edge-subdivision construction.
//!
//! Subdividing every edge `(u, v)` with `u` in `S` by a new colluder
//! `w_(u,v)` turns a per-neighbor announcement of `u` into the uniform
//! announcement of `w_(u,v)`: honest `v` is adjacent to `w_(u,v)` only.
//! Honest beliefs, honest routes and intercepted original pairs carry over
//! unchanged in both directions.

pub mod nonuniform;

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::strategy::{assemble, normalize_set, toward, Strategy, StrategyKind};

pub use nonuniform::{random_admissible, NonuniformStrategy};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlowupMap {
    original: Graph,
    blown: Graph,
    set: Vec<NodeId>,
    blown_set: Vec<NodeId>,
    /// `(u, v, w)` with `u < v`, in sorted edge order; `w = n + index`.
    subdivisions: Vec<(NodeId, NodeId, NodeId)>,
    index: HashMap<(NodeId, NodeId), NodeId>,
}

impl BlowupMap {
    pub fn original(&self) -> &Graph {
        &self.original
    }

    pub fn graph(&self) -> &Graph {
        &self.blown
    }

    pub fn set(&self) -> &[NodeId] {
        &self.set
    }

    /// `S` followed by every subdivision vertex; sorted.
    pub fn blown_set(&self) -> &[NodeId] {
        &self.blown_set
    }

    pub fn new_vertex_count(&self) -> usize {
        self.subdivisions.len()
    }

    pub fn subdivisions(&self) -> &[(NodeId, NodeId, NodeId)] {
        &self.subdivisions
    }

    /// The vertex subdividing edge `{u, v}`, if it was subdivided.
    pub fn subdivision(&self, u: NodeId, v: NodeId) -> Option<NodeId> {
        self.index.get(&(u.min(v), u.max(v))).copied()
    }

    /// The original edge a subdivision vertex sits on.
    pub fn subdivided_edge(&self, w: NodeId) -> Option<(NodeId, NodeId)> {
        let n = self.original.node_count();
        let &(u, v, _) = self.subdivisions.get(w.checked_sub(n)?)?;
        Some((u, v))
    }

    /// One `u v w` line per subdivided edge.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for &(u, v, w) in &self.subdivisions {
            writeln!(out, "{u} {v} {w}").expect("writing to a string");
        }
        out
    }

    /// Rebuilds the map for `(graph, set)` and checks it against a table
    /// written by [`BlowupMap::to_text`].
    pub fn from_text(graph: &Graph, set: &[NodeId], text: &str) -> Result<Self> {
        let map = blow_up(graph, set)?;
        let mut table = Vec::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let fields: Vec<NodeId> = line
                .split_whitespace()
                .map(|f| f.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Malformed(format!("line {}: {line:?}", i + 1)))?;
            match fields[..] {
                [u, v, w] => table.push((u, v, w)),
                _ => {
                    return Err(Error::Parse {
                        line: i + 1,
                        found: fields.len(),
                    })
                }
            }
        }
        if table != map.subdivisions {
            return Err(Error::Malformed(
                "subdivision table does not match the graph and set".into(),
            ));
        }
        Ok(map)
    }
}

/// Subdivides every edge with an endpoint in `set` (once, even when both
/// endpoints are members). New vertices are numbered from `n` in sorted edge
/// order.
pub fn blow_up(graph: &Graph, set: &[NodeId]) -> Result<BlowupMap> {
    let members = normalize_set(graph, set)?;
    let n = graph.node_count();
    let mut member = vec![false; n];
    for &u in &members {
        member[u] = true;
    }
    let mut subdivisions = Vec::new();
    let mut edges = Vec::new();
    for (u, v) in graph.edges() {
        if member[u] || member[v] {
            let w = n + subdivisions.len();
            subdivisions.push((u, v, w));
            edges.push((u, w));
            edges.push((w, v));
        } else {
            edges.push((u, v));
        }
    }
    let blown = Graph::from_edges(n + subdivisions.len(), edges)?;
    let index = subdivisions.iter().map(|&(u, v, w)| ((u, v), w)).collect();
    let blown_set = members.iter().copied().chain(n..n + subdivisions.len()).collect();
    Ok(BlowupMap {
        original: graph.clone(),
        blown,
        set: members,
        blown_set,
        subdivisions,
        index,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FractionMode {
    /// `(p C(|V|,2) + C(|S|D,2) + |S||V|) / C(|V|+|S|D,2)` for `D`-regular
    /// graphs.
    ClosedForm,
    /// `(p C(|V|,2) + C(q,2) + q|V|) / C(|V|+q,2)` with `q` new vertices:
    /// every pair touching a new vertex is intercepted.
    #[default]
    DirectCount,
}

fn pairs(k: usize) -> f64 {
    k as f64 * (k as f64 - 1.0) / 2.0
}

/// The unordered-pair fraction in the subdivided graph matching fraction `p`
/// in the original.
pub fn translate_fraction(graph: &Graph, set: &[NodeId], p: f64, mode: FractionMode) -> Result<f64> {
    let members = normalize_set(graph, set)?;
    let n = graph.node_count();
    let s = members.len();
    if s == 0 {
        return Ok(p);
    }
    let (added, new_vs_old) = match mode {
        FractionMode::ClosedForm => {
            let d = graph.degree(0);
            if graph.nodes().any(|v| graph.degree(v) != d) {
                return Err(Error::InvalidArgument("the formula needs a regular graph".into()));
            }
            (s * d, s * n)
        }
        FractionMode::DirectCount => {
            let q = blow_up(graph, &members)?.new_vertex_count();
            (q, q * n)
        }
    };
    Ok((p * pairs(n) + pairs(added) + new_vs_old as f64) / pairs(n + added))
}

/// Uniform strategy on the subdivided graph that simulates `strategy`.
///
/// `w_(u,v)` with `v` honest announces what `u` tells `v`, plus one when the
/// target is a member (every path into a member gains a subdivision hop).
/// It passes a message on to `v` when `u` forwards to `v`, and back to `u`
/// otherwise. Members and subdivision vertices with no honest listener
/// announce true distances, as do all colluders about new vertices.
pub fn lift_strategy(map: &BlowupMap, strategy: &NonuniformStrategy) -> Result<Strategy> {
    let n = map.original.node_count();
    if strategy.node_count() != n || strategy.members() != map.set {
        return Err(Error::Malformed(
            "strategy colluders differ from the subdivided set".into(),
        ));
    }
    let is_member = |v: NodeId| v < n && strategy.is_colluder(v);
    let graph = &map.blown;
    let members = map.blown_set.clone();
    let m = members.clone();
    assemble(graph, StrategyKind::Custom, members, move |t, dist_t| {
        m.iter()
            .map(|&x| {
                if t >= n {
                    return (dist_t[x], toward(graph, dist_t, x));
                }
                let Some((a, b)) = map.subdivided_edge(x) else {
                    let hop = strategy
                        .forward(x, t)
                        .map(|y| map.subdivision(x, y).expect("edge at a member"));
                    return (dist_t[x], hop);
                };
                let honest_end = match (is_member(a), is_member(b)) {
                    (true, false) => Some((a, b)),
                    (false, true) => Some((b, a)),
                    _ => None,
                };
                let broadcast = match honest_end {
                    Some((u, v)) => {
                        let heard = strategy.broadcast(u, t, v).expect("honest neighbor");
                        heard + u32::from(is_member(t))
                    }
                    None => dist_t[x],
                };
                let hop = if t == a || t == b {
                    t
                } else if is_member(a) && strategy.forward(a, t) == Some(b) {
                    b
                } else if is_member(a) || (is_member(b) && strategy.forward(b, t) == Some(a)) {
                    a
                } else {
                    b
                };
                (broadcast, Some(hop))
            })
            .collect()
    })
}

/// Contracts the subdivision edges: `u` tells honest `v` what `w_(u,v)`
/// announces (minus the member-target hop), and forwards to the far end of
/// the subdivided edge it forwards into.
pub fn collapse_strategy(map: &BlowupMap, strategy: &Strategy) -> Result<NonuniformStrategy> {
    if strategy.colluders() != map.blown_set {
        return Err(Error::Malformed(
            "strategy colluders differ from the subdivided set".into(),
        ));
    }
    let n = map.original.node_count();
    let member = |v: NodeId| map.set.binary_search(&v).is_ok();
    NonuniformStrategy::new(
        &map.original,
        &map.set,
        |u, t, v| {
            if t == u {
                return Dist::ZERO;
            }
            let w = map.subdivision(u, v).expect("edge at a member");
            let b = strategy.broadcast(w, t).expect("subdivision vertex is a colluder");
            if member(t) {
                b.minus_floored(1, 1)
            } else {
                b
            }
        },
        |u, t| {
            let w = strategy.forward(u, t)?;
            let (a, b) = map.subdivided_edge(w)?;
            debug_assert!(w >= n);
            Some(if a == u { b } else { a })
        },
    )
}

//! Undirected, unweighted topologies with dense `0..n` node ids.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use crate::dist::Dist;
use crate::error::{Error, Result};

mod generate;

pub use generate::{generate, Model};

pub type NodeId = usize;

/// Finite simple undirected graph.
///
/// Adjacency lists are sorted and duplicate free; the relation is symmetric
/// and there are no self-loops. The graph is immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<NodeId>>,
    edges: usize,
}

impl Graph {
    /// Graph with `n` isolated nodes.
    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
            edges: 0,
        }
    }

    /// Builds a graph from an edge list, silently dropping self-loops and
    /// duplicate edges (in either orientation).
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::NodeOutOfRange { node: x, n });
                }
            }
            if u == v {
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut edges = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            edges += list.len();
        }
        Ok(Graph { adj, edges: edges / 2 })
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges
    }

    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adj[u]
    }

    #[inline]
    pub fn degree(&self, u: NodeId) -> usize {
        self.adj[u].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.adj.len()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub(crate) fn check_node(&self, u: NodeId) -> Result<()> {
        if u < self.node_count() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                node: u,
                n: self.node_count(),
            })
        }
    }

    /// Connected-component label of every node; labels are `0..count` in
    /// order of each component's smallest node.
    pub fn components(&self) -> Components {
        let n = self.node_count();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &v in &self.adj[u] {
                    if label[v] == usize::MAX {
                        label[v] = count;
                        queue.push_back(v);
                    }
                }
            }
            count += 1;
        }
        let mut sizes = vec![0; count];
        for &c in &label {
            sizes[c] += 1;
        }
        Components { label, sizes }
    }

    pub fn is_connected(&self) -> bool {
        self.components().count() <= 1
    }

    /// True iff no two members of `set` are adjacent.
    pub fn is_independent(&self, set: &[NodeId]) -> bool {
        let mut member = vec![false; self.node_count()];
        for &v in set {
            member[v] = true;
        }
        set.iter().all(|&v| self.adj[v].iter().all(|&u| !member[u]))
    }

    /// Exact hop distances from `source`.
    pub fn bfs_distances(&self, source: NodeId) -> Result<DistanceVector> {
        self.check_node(source)?;
        Ok(DistanceVector {
            source,
            dist: self.bfs_blocked(source, &[], u32::MAX),
        })
    }

    /// Distance from `x` to `y` in the subgraph induced on `V - removed`.
    pub fn distance_avoiding(&self, removed: &[NodeId], x: NodeId, y: NodeId) -> Result<Dist> {
        self.check_node(x)?;
        self.check_node(y)?;
        let mut blocked = vec![false; self.node_count()];
        for &a in removed {
            self.check_node(a)?;
            blocked[a] = true;
        }
        if blocked[x] || blocked[y] {
            return Err(Error::InvalidArgument(format!(
                "endpoints {x} and {y} must not be in the removed set"
            )));
        }
        Ok(self.bfs_blocked(x, &blocked, u32::MAX)[y])
    }

    /// BFS from `source` that never enters a node with `blocked[v]` set and
    /// stops expanding at depth `max_depth`. An empty `blocked` slice blocks
    /// nothing. Nodes beyond the depth limit stay infinite.
    pub(crate) fn bfs_blocked(&self, source: NodeId, blocked: &[bool], max_depth: u32) -> Vec<Dist> {
        let n = self.node_count();
        let is_blocked = |v: NodeId| blocked.get(v).copied().unwrap_or(false);
        let mut dist = vec![Dist::INFINITE; n];
        dist[source] = Dist::ZERO;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].raw();
            if du >= max_depth {
                continue;
            }
            for &v in &self.adj[u] {
                if dist[v].is_infinite() && !is_blocked(v) {
                    dist[v] = Dist::new(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Connected-component labelling.
#[derive(Debug, Clone)]
pub struct Components {
    pub label: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn same(&self, u: NodeId, v: NodeId) -> bool {
        self.label[u] == self.label[v]
    }

    /// Number of ordered pairs `(s, t)`, `s != t`, in a common component.
    pub fn ordered_pairs(&self) -> u64 {
        self.sizes
            .iter()
            .map(|&c| (c as u64) * (c as u64).saturating_sub(1))
            .sum()
    }
}

/// Hop distances from a single source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceVector {
    pub source: NodeId,
    pub dist: Vec<Dist>,
}

impl std::ops::Index<NodeId> for DistanceVector {
    type Output = Dist;

    fn index(&self, v: NodeId) -> &Dist {
        &self.dist[v]
    }
}

/// A graph parsed from an edge list, together with the original node tokens.
#[derive(Debug, Clone)]
pub struct LabeledGraph {
    pub graph: Graph,
    /// `labels[id]` is the token that was mapped to `id`.
    pub labels: Vec<String>,
}

impl LabeledGraph {
    pub fn id_of(&self, token: &str) -> Option<NodeId> {
        self.labels.iter().position(|l| l == token)
    }

    /// Two-column `token,id` CSV of the ingestion mapping.
    pub fn mapping_csv(&self) -> String {
        let mut out = String::from("token,id\n");
        for (id, tok) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "{tok},{id}");
        }
        out
    }
}

/// Parses a whitespace-separated edge list. Lines starting with `#` and
/// blank lines are skipped; tokens get dense ids in order of first
/// appearance.
pub fn from_edge_list<'a>(text: &'a str) -> Result<LabeledGraph> {
    let mut ids: HashMap<&'a str, NodeId> = HashMap::new();
    let mut labels = Vec::new();
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: lineno + 1,
                found: tokens.len(),
            });
        }
        let mut intern = |tok: &'a str| -> NodeId {
            *ids.entry(tok).or_insert_with(|| {
                labels.push(tok.to_owned());
                labels.len() - 1
            })
        };
        let u = intern(tokens[0]);
        let v = intern(tokens[1]);
        edges.push((u, v));
    }
    let graph = Graph::from_edges(labels.len(), edges)?;
    Ok(LabeledGraph { graph, labels })
}

//! Colluder-set selection.
//!
//! Greedy and exhaustive selection score sets under the honest strategy. Two
//! objectives are available: the fraction of ordered pairs intercepted
//! (every shortest path crosses the set), and the fraction of individual
//! shortest paths that meet the set. Only the second is submodular; the
//! first is what the experiments report.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::interception::{honest_escaped, honest_interception, path_coverage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Random,
    TopDegree,
    GreedyMax,
    GreedyMin,
    Exhaustive,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Random,
        Method::TopDegree,
        Method::GreedyMax,
        Method::GreedyMin,
        Method::Exhaustive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::TopDegree => "top_degree",
            Method::GreedyMax => "greedy_max",
            Method::GreedyMin => "greedy_min",
            Method::Exhaustive => "exhaustive",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown selection method {s:?}")))
    }
}

/// Set function maximized by greedy and exhaustive selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    /// Ordered pairs all of whose shortest paths meet the set.
    #[default]
    PairInterception,
    /// Individual shortest paths (over ordered pairs) that meet the set.
    PathCoverage,
}

/// Objective value in integer units, with the total it is a fraction of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Score {
    pub covered: u128,
    pub total: u128,
}

impl Score {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.covered as f64 / self.total as f64
        }
    }
}

pub fn score(graph: &Graph, set: &[NodeId], objective: Objective) -> Result<Score> {
    Ok(match objective {
        Objective::PairInterception => {
            let r = honest_interception(graph, set)?;
            Score {
                covered: r.intercepted_ordered.into(),
                total: r.total_ordered.into(),
            }
        }
        Objective::PathCoverage => {
            let c = path_coverage(graph, set)?;
            Score {
                covered: c.covered_paths,
                total: c.total_paths,
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionSpec {
    pub method: Method,
    pub k: Option<usize>,
    pub p: Option<f64>,
    pub seed: u64,
    pub objective: Objective,
}

impl SelectionSpec {
    pub fn with_k(method: Method, k: usize, seed: u64) -> Self {
        SelectionSpec {
            method,
            k: Some(k),
            p: None,
            seed,
            objective: Objective::default(),
        }
    }

    fn require_k(&self, n: usize) -> Result<usize> {
        let k = self
            .k
            .ok_or_else(|| Error::InvalidArgument(format!("{} selection needs a size", self.method)))?;
        if k > n {
            return Err(Error::InvalidArgument(format!("cannot select {k} of {n} nodes")));
        }
        Ok(k)
    }
}

/// Default budget for exhaustive search, in candidate subsets.
pub const EXHAUSTIVE_BUDGET: u128 = 1_000_000;

/// Selects a colluder set; the result is sorted by node id.
pub fn select(graph: &Graph, spec: &SelectionSpec) -> Result<Vec<NodeId>> {
    let n = graph.node_count();
    let mut set = match spec.method {
        Method::Random => random_set(graph, spec.require_k(n)?, spec.seed)?,
        Method::TopDegree => top_degree(graph, spec.require_k(n)?)?,
        Method::GreedyMax => greedy_max_spds(graph, spec.require_k(n)?, spec.objective)?.picks,
        Method::GreedyMin => {
            let p = spec
                .p
                .ok_or_else(|| Error::InvalidArgument("greedy_min selection needs a target fraction".into()))?;
            greedy_min_spds(graph, p, spec.objective)?.run.picks
        }
        Method::Exhaustive => exhaustive_opt(graph, spec.require_k(n)?, spec.objective, EXHAUSTIVE_BUDGET)?.0,
    };
    set.sort_unstable();
    Ok(set)
}

/// `k` nodes drawn uniformly without replacement. Sets for the same seed are
/// nested: the `k`-set is a prefix of one seeded permutation.
pub fn random_set(graph: &Graph, k: usize, seed: u64) -> Result<Vec<NodeId>> {
    let n = graph.node_count();
    if k > n {
        return Err(Error::InvalidArgument(format!("cannot select {k} of {n} nodes")));
    }
    let mut order: Vec<NodeId> = graph.nodes().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.truncate(k);
    order.sort_unstable();
    Ok(order)
}

/// The `k` highest-degree nodes, ties by lowest id.
pub fn top_degree(graph: &Graph, k: usize) -> Result<Vec<NodeId>> {
    let n = graph.node_count();
    if k > n {
        return Err(Error::InvalidArgument(format!("cannot select {k} of {n} nodes")));
    }
    let mut order: Vec<NodeId> = graph.nodes().collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(graph.degree(v)), v));
    order.truncate(k);
    order.sort_unstable();
    Ok(order)
}

/// Marginal gain, in intercepted ordered pairs, of adding each node to
/// `set` under the honest strategy. Members of `set` get 0.
///
/// Toward a target `t`, a source `s` escapes iff some shortest path avoids
/// the set. Adding `v` newly captures exactly the escaping sources that `v`
/// dominates in the escaping part of the shortest-path DAG (rooted at `t`),
/// plus every escaping source of target `v` itself.
pub fn pair_gains(graph: &Graph, set: &[NodeId]) -> Result<Vec<u64>> {
    let n = graph.node_count();
    let mut blocked = vec![false; n];
    for &v in set {
        graph.check_node(v)?;
        blocked[v] = true;
    }
    let gains = (0..n)
        .into_par_iter()
        .filter(|&t| !blocked[t])
        .map(|t| gains_toward(graph, t, &blocked))
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(gains)
}

fn gains_toward(graph: &Graph, t: NodeId, blocked: &[bool]) -> Vec<u64> {
    let n = graph.node_count();
    let dist = graph.bfs_blocked(t, &[], u32::MAX);
    let escaped = honest_escaped(graph, t, &dist, blocked);
    let mut order: Vec<NodeId> = (0..n).filter(|&v| escaped[v]).collect();
    order.sort_by_key(|&v| dist[v]);

    const NONE: usize = usize::MAX;
    let mut idom = vec![NONE; n];
    let mut depth = vec![0u32; n];
    for &u in order.iter().skip(1) {
        let prev = dist[u].finite().map(|d| d - 1);
        let mut dom = NONE;
        for &y in graph.neighbors(u) {
            if escaped[y] && dist[y].finite() == prev {
                dom = if dom == NONE { y } else { lca(dom, y, &idom, &depth) };
            }
        }
        idom[u] = dom;
        depth[u] = depth[dom] + 1;
    }
    let mut subtree = vec![0u64; n];
    let mut gains = vec![0u64; n];
    for &u in order.iter().skip(1).rev() {
        subtree[u] += 1;
        gains[u] = subtree[u];
        subtree[idom[u]] += subtree[u];
    }
    gains[t] = order.len() as u64 - 1;
    gains
}

fn lca(mut a: NodeId, mut b: NodeId, idom: &[NodeId], depth: &[u32]) -> NodeId {
    while depth[a] > depth[b] {
        a = idom[a];
    }
    while depth[b] > depth[a] {
        b = idom[b];
    }
    while a != b {
        a = idom[a];
        b = idom[b];
    }
    a
}

/// Gains of every node under an objective, by incremental dominator counts
/// for pairs and by recomputation for paths.
fn all_gains(graph: &Graph, set: &[NodeId], objective: Objective, current: &Score) -> Result<Vec<u128>> {
    match objective {
        Objective::PairInterception => Ok(pair_gains(graph, set)?.into_iter().map(u128::from).collect()),
        Objective::PathCoverage => {
            let mut member = vec![false; graph.node_count()];
            for &v in set {
                member[v] = true;
            }
            graph
                .nodes()
                .into_par_iter()
                .map(|v| {
                    if member[v] {
                        return Ok(0);
                    }
                    let mut with = set.to_vec();
                    with.push(v);
                    Ok(score(graph, &with, objective)?.covered - current.covered)
                })
                .collect()
        }
    }
}

/// A greedy selection in pick order.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyRun {
    pub picks: Vec<NodeId>,
    /// Marginal gain of each pick, in objective units.
    pub gains: Vec<u128>,
    pub score: Score,
}

fn greedy_step(graph: &Graph, run: &mut GreedyRun, objective: Objective) -> Result<()> {
    let gains = all_gains(graph, &run.picks, objective, &run.score)?;
    let mut member = vec![false; graph.node_count()];
    for &v in &run.picks {
        member[v] = true;
    }
    let (v, gain) = graph
        .nodes()
        .filter(|&v| !member[v])
        .map(|v| (v, gains[v]))
        .max_by_key(|&(v, g)| (g, std::cmp::Reverse(v)))
        .expect("a node is left to pick");
    run.picks.push(v);
    run.gains.push(gain);
    run.score = score(graph, &run.picks, objective)?;
    debug_assert_eq!(run.score.covered, run.gains.iter().sum::<u128>());
    Ok(())
}

/// Adds the node of largest marginal gain `k` times (ties by lowest id).
pub fn greedy_max_spds(graph: &Graph, k: usize, objective: Objective) -> Result<GreedyRun> {
    let n = graph.node_count();
    if k > n {
        return Err(Error::InvalidArgument(format!("cannot select {k} of {n} nodes")));
    }
    let mut run = GreedyRun {
        picks: Vec::new(),
        gains: Vec::new(),
        score: score(graph, &[], objective)?,
    };
    for _ in 0..k {
        greedy_step(graph, &mut run, objective)?;
    }
    Ok(run)
}

/// Greedy cover of a target fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyCover {
    pub run: GreedyRun,
    /// Approximation certificate `1 + ln(max single-node gain)`: the greedy
    /// size is at most this factor times the optimum when the objective is
    /// submodular.
    pub size_bound_factor: f64,
}

/// Adds max-gain nodes until the objective reaches fraction `p`.
pub fn greedy_min_spds(graph: &Graph, p: f64, objective: Objective) -> Result<GreedyCover> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("target fraction {p} outside [0, 1]")));
    }
    let all: Vec<NodeId> = graph.nodes().collect();
    let max = score(graph, &all, objective)?.fraction();
    if p > max {
        return Err(Error::Unachievable { target: p, max });
    }
    let start = score(graph, &[], objective)?;
    let first = all_gains(graph, &[], objective, &start)?;
    let top = first.iter().copied().max().unwrap_or(0);
    let mut run = GreedyRun {
        picks: Vec::new(),
        gains: Vec::new(),
        score: start,
    };
    while run.score.fraction() < p {
        greedy_step(graph, &mut run, objective)?;
    }
    Ok(GreedyCover {
        run,
        size_bound_factor: 1.0 + (top.max(1) as f64).ln(),
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[NodeId])) {
    let mut idx: Vec<NodeId> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Best `k`-set by exhaustive search; ties resolve to the lexicographically
/// smallest set.
pub fn exhaustive_opt(graph: &Graph, k: usize, objective: Objective, budget: u128) -> Result<(Vec<NodeId>, f64)> {
    let n = graph.node_count();
    if k > n {
        return Err(Error::InvalidArgument(format!("cannot select {k} of {n} nodes")));
    }
    let needed = binomial(n, k);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let mut best: Option<(u128, Vec<NodeId>, f64)> = None;
    let mut failure = None;
    for_each_subset(n, k, |set| match score(graph, set, objective) {
        Ok(s) => {
            if best.as_ref().is_none_or(|b| s.covered > b.0) {
                best = Some((s.covered, set.to_vec(), s.fraction()));
            }
        }
        Err(e) => failure = Some(e),
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let (_, set, fraction) = best.expect("at least one subset");
    Ok((set, fraction))
}

/// Smallest set reaching fraction `p`, by exhaustive search over sizes.
pub fn exhaustive_min_cover(graph: &Graph, p: f64, objective: Objective, budget: u128) -> Result<Vec<NodeId>> {
    let n = graph.node_count();
    for k in 0..=n {
        let (set, fraction) = exhaustive_opt(graph, k, objective, budget)?;
        if fraction >= p {
            return Ok(set);
        }
    }
    let max = score(graph, &(0..n).collect::<Vec<_>>(), objective)?.fraction();
    Err(Error::Unachievable { target: p, max })
}

/// One node token per line, using `labels` when given.
pub fn set_to_text(set: &[NodeId], labels: Option<&[String]>) -> String {
    set.iter()
        .map(|&v| match labels {
            Some(l) => format!("{}\n", l[v]),
            None => format!("{v}\n"),
        })
        .collect()
}

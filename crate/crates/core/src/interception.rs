//! Worst-case interception.
//!
//! A message from `s` to `t` escapes the colluders if some walk in the
//! routing graph toward `t` avoids them. Deleting the colluders from the
//! routing graph and searching backwards from `t` finds every escaping
//! source in `O(n + m)` per target. Pairs with an endpoint among the
//! colluders are always intercepted; pairs in different components are not
//! counted at all.

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::strategy::Strategy;

/// Interception counts over ordered and unordered pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterceptionResult {
    /// Ordered pairs `(s, t)`, `s != t`, in a common component.
    pub total_ordered: u64,
    pub intercepted_ordered: u64,
    /// Unordered pairs in a common component.
    pub total_unordered: u64,
    /// Unordered pairs intercepted in both directions.
    pub intercepted_unordered: u64,
    /// Bit `s` of `by_target[t]` is set iff `(s, t)` is intercepted.
    by_target: Vec<FixedBitSet>,
}

impl InterceptionResult {
    pub(crate) fn from_targets(graph: &Graph, by_target: Vec<FixedBitSet>) -> Self {
        let comps = graph.components();
        let total_ordered = comps.ordered_pairs();
        let intercepted_ordered = by_target.iter().map(|b| b.count_ones(..) as u64).sum();
        let mut intercepted_unordered = 0;
        for (t, bits) in by_target.iter().enumerate() {
            for s in bits.ones().take_while(|&s| s < t) {
                if by_target[s].contains(t) {
                    intercepted_unordered += 1;
                }
            }
        }
        InterceptionResult {
            total_ordered,
            intercepted_ordered,
            total_unordered: total_ordered / 2,
            intercepted_unordered,
            by_target,
        }
    }

    pub fn fraction_ordered(&self) -> f64 {
        ratio(self.intercepted_ordered, self.total_ordered)
    }

    pub fn fraction_unordered(&self) -> f64 {
        ratio(self.intercepted_unordered, self.total_unordered)
    }

    pub fn is_intercepted(&self, s: NodeId, t: NodeId) -> bool {
        self.by_target[t].contains(s)
    }

    /// Intercepted ordered pairs per target.
    pub fn per_target_counts(&self) -> Vec<u64> {
        self.by_target.iter().map(|b| b.count_ones(..) as u64).collect()
    }

    pub const CSV_HEADER: &'static str = "strategy,selection,k,seed,fraction_ordered,fraction_unordered";

    pub fn csv_record(&self, strategy: &str, selection: &str, k: usize, seed: u64) -> String {
        format!(
            "{strategy},{selection},{k},{seed},{},{}",
            self.fraction_ordered(),
            self.fraction_unordered()
        )
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Marks intercepted sources toward `t` given the set `escaped` of sources
/// with a colluder-free walk. `colluder` marks the colluder set.
pub(crate) fn intercepted_toward(t: NodeId, component: &[usize], colluder: &[bool], escaped: &[bool]) -> FixedBitSet {
    let n = component.len();
    let mut bits = FixedBitSet::with_capacity(n);
    for s in 0..n {
        if s != t && component[s] == component[t] && (colluder[s] || colluder[t] || !escaped[s]) {
            bits.insert(s);
        }
    }
    bits
}

/// Worst-case interception under an admissible strategy. Fails with the
/// first trapped pair when the strategy is not admissible.
pub fn intercepted_pairs(graph: &Graph, strategy: &Strategy) -> Result<InterceptionResult> {
    let label = graph.components().label;
    let colluder = strategy.mask();
    let by_target = (0..graph.node_count())
        .into_par_iter()
        .map(|t| {
            let column = strategy.column(graph, t);
            let routing = strategy.routing(graph, t, &column);
            let reached = routing.reaching_target(&[]);
            if let Some(s) = (0..reached.len()).find(|&s| label[s] == label[t] && !reached[s]) {
                return Err(Error::Inadmissible {
                    source_node: s,
                    target: t,
                });
            }
            let escaped = routing.reaching_target(colluder);
            Ok(intercepted_toward(t, &label, colluder, &escaped))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InterceptionResult::from_targets(graph, by_target))
}

/// Sources that reach `t` along true shortest paths avoiding `blocked`.
pub(crate) fn honest_escaped(graph: &Graph, t: NodeId, dist_t: &[Dist], blocked: &[bool]) -> Vec<bool> {
    let mut reached = vec![false; graph.node_count()];
    reached[t] = true;
    let mut stack = vec![t];
    while let Some(y) = stack.pop() {
        let next = dist_t[y] + 1;
        for &u in graph.neighbors(y) {
            if !reached[u] && !blocked[u] && dist_t[u] == next {
                reached[u] = true;
                stack.push(u);
            }
        }
    }
    reached
}

fn mask_of(graph: &Graph, set: &[NodeId]) -> Result<Vec<bool>> {
    let mut mask = vec![false; graph.node_count()];
    for &v in set {
        graph.check_node(v)?;
        mask[v] = true;
    }
    Ok(mask)
}

/// Interception under the honest strategy, computed directly on the
/// shortest-path structure.
pub fn honest_interception(graph: &Graph, set: &[NodeId]) -> Result<InterceptionResult> {
    let mask = mask_of(graph, set)?;
    let label = graph.components().label;
    let by_target = (0..graph.node_count())
        .into_par_iter()
        .map(|t| {
            let dist_t = graph.bfs_blocked(t, &[], u32::MAX);
            let escaped = honest_escaped(graph, t, &dist_t, &mask);
            intercepted_toward(t, &label, &mask, &escaped)
        })
        .collect();
    Ok(InterceptionResult::from_targets(graph, by_target))
}

/// Fraction of ordered pairs intercepted under the honest strategy.
pub fn coverage_function(graph: &Graph, set: &[NodeId]) -> Result<f64> {
    Ok(honest_interception(graph, set)?.fraction_ordered())
}

/// Shortest-path counts: how many individual shortest paths (over ordered
/// pairs in a common component) contain at least one node of the set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathCoverage {
    pub total_paths: u128,
    pub covered_paths: u128,
}

impl PathCoverage {
    pub fn fraction(&self) -> f64 {
        if self.total_paths == 0 {
            0.0
        } else {
            self.covered_paths as f64 / self.total_paths as f64
        }
    }
}

/// Counts shortest paths toward `t`: all of them, and those avoiding
/// `blocked` entirely (endpoints included).
fn path_counts_toward(graph: &Graph, t: NodeId, blocked: &[bool]) -> (u128, u128) {
    let n = graph.node_count();
    let dist = graph.bfs_blocked(t, &[], u32::MAX);
    let mut order: Vec<NodeId> = (0..n).filter(|&v| dist[v].is_finite()).collect();
    order.sort_by_key(|&v| dist[v]);
    let mut all = vec![0u128; n];
    let mut free = vec![0u128; n];
    all[t] = 1;
    free[t] = u128::from(!blocked[t]);
    let (mut total, mut avoiding) = (0u128, 0u128);
    for &u in order.iter().skip(1) {
        let prev = dist[u].finite().map(|d| d - 1);
        let (mut a, mut f) = (0u128, 0u128);
        for &y in graph.neighbors(u) {
            if dist[y].finite() == prev {
                a = a.saturating_add(all[y]);
                f = f.saturating_add(free[y]);
            }
        }
        all[u] = a;
        free[u] = if blocked[u] { 0 } else { f };
        total = total.saturating_add(a);
        avoiding = avoiding.saturating_add(free[u]);
    }
    (total, avoiding)
}

/// Proportion of shortest paths that meet the set.
pub fn path_coverage(graph: &Graph, set: &[NodeId]) -> Result<PathCoverage> {
    let mask = mask_of(graph, set)?;
    let (total, avoiding) = (0..graph.node_count())
        .into_par_iter()
        .map(|t| path_counts_toward(graph, t, &mask))
        .reduce(|| (0, 0), |a, b| (a.0.saturating_add(b.0), a.1.saturating_add(b.1)));
    Ok(PathCoverage {
        total_paths: total,
        covered_paths: total - avoiding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Model};
    use crate::strategy::{honest_strategy, independent_strategy};

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    /// K_{m,2}: hubs 0 and 1, leaves 2..m+2.
    fn k_m2(m: usize) -> Graph {
        Graph::from_edges(m + 2, (2..m + 2).flat_map(|y| [(0, y), (1, y)])).unwrap()
    }

    /// Enumerates every simple walk of the routing graph from `s` and
    /// reports whether one reaches `t` without touching a colluder.
    fn escapes_by_enumeration(g: &Graph, strat: &Strategy, s: NodeId, t: NodeId) -> bool {
        let column = strat.column(g, t);
        let routing = strat.routing(g, t, &column);
        fn walk<H: Fn(NodeId) -> Option<NodeId>>(
            r: &crate::protocol::TargetRouting<'_, H>,
            strat: &Strategy,
            u: NodeId,
            t: NodeId,
            seen: &mut Vec<bool>,
        ) -> bool {
            if strat.is_colluder(u) {
                return false;
            }
            if u == t {
                return true;
            }
            seen[u] = true;
            let found = r
                .out_edges(u)
                .into_iter()
                .any(|v| !seen[v] && walk(r, strat, v, t, seen));
            seen[u] = false;
            found
        }
        walk(&routing, strat, s, t, &mut vec![false; g.node_count()])
    }

    #[test]
    fn trivial_sets() {
        let g = generate(Model::ErdosRenyi { n: 12, p: 0.3 }, 2).unwrap();
        let none = intercepted_pairs(&g, &honest_strategy(&g, &[]).unwrap()).unwrap();
        assert_eq!(none.fraction_ordered(), 0.0);
        let all: Vec<NodeId> = g.nodes().collect();
        let every = intercepted_pairs(&g, &honest_strategy(&g, &all).unwrap()).unwrap();
        assert_eq!(every.fraction_ordered(), 1.0);
        assert_eq!(every.fraction_unordered(), 1.0);
    }

    #[test]
    fn p5_middle() {
        let g = path(5);
        let r = intercepted_pairs(&g, &honest_strategy(&g, &[2]).unwrap()).unwrap();
        assert_eq!((r.intercepted_unordered, r.total_unordered), (8, 10));
        assert_eq!(r.fraction_unordered(), 0.8);
        assert_eq!(r.fraction_ordered(), 0.8);
        assert_eq!(coverage_function(&g, &[2]).unwrap(), 0.8);
    }

    #[test]
    fn star_center() {
        let g = Graph::from_edges(6, (1..6).map(|l| (0, l))).unwrap();
        assert_eq!(coverage_function(&g, &[0]).unwrap(), 1.0);
    }

    #[test]
    fn k52_ordered_gains() {
        let m = 5;
        let g = k_m2(m);
        let count = |set: &[NodeId]| honest_interception(&g, set).unwrap().intercepted_ordered;
        let (p, q) = (0, 1);
        assert_eq!(count(&[q]) - count(&[]), 2 * (m as u64 + 1));
        assert_eq!(count(&[p, q]) - count(&[p]), 2 * 21 - 2 * (m as u64 + 1));
        assert_eq!(count(&[q]) - count(&[]), 12);
        assert_eq!(count(&[p, q]) - count(&[p]), 30);
    }

    #[test]
    fn path_coverage_on_k52_is_submodular() {
        let g = k_m2(5);
        let f = |set: &[NodeId]| path_coverage(&g, set).unwrap().covered_paths;
        // Hub pairs have five shortest paths, leaf pairs two, hub-leaf one.
        assert_eq!(path_coverage(&g, &[]).unwrap().total_paths, 10 + 20 + 40);
        assert_eq!(f(&[1]) - f(&[]), 40);
        assert_eq!(f(&[0, 1]) - f(&[0]), 30);
    }

    #[test]
    fn disconnected_pairs_excluded() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (3, 4)]).unwrap();
        let r = honest_interception(&g, &[1]).unwrap();
        assert_eq!(r.total_ordered, 8);
        assert_eq!(r.intercepted_ordered, 6);
        assert!(!r.is_intercepted(0, 3));
    }

    #[test]
    fn honest_fast_path_matches_engine() {
        for seed in 0..20 {
            let g = generate(Model::ErdosRenyi { n: 15, p: 0.25 }, seed).unwrap();
            let set = [1, 5, 11];
            let engine = intercepted_pairs(&g, &honest_strategy(&g, &set).unwrap()).unwrap();
            assert_eq!(engine, honest_interception(&g, &set).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn reverse_search_matches_walk_enumeration() {
        for seed in 0..25 {
            let g = generate(Model::ErdosRenyi { n: 8, p: 0.4 }, seed).unwrap();
            let strat = independent_strategy(&g, &[2, 6]).unwrap();
            let r = intercepted_pairs(&g, &strat).unwrap();
            let comps = g.components();
            for t in g.nodes() {
                for s in g.nodes() {
                    if s == t || !comps.same(s, t) || strat.is_colluder(s) || strat.is_colluder(t) {
                        continue;
                    }
                    assert_eq!(
                        r.is_intercepted(s, t),
                        !escapes_by_enumeration(&g, &strat, s, t),
                        "seed {seed} pair ({s},{t})"
                    );
                }
            }
        }
    }

    #[test]
    fn inadmissible_refused() {
        let g = path(5);
        let mut s = honest_strategy(&g, &[2]).unwrap();
        s.set_broadcast(2, 4, Dist::ONE).unwrap();
        s.set_forward(&g, 2, 4, Some(1)).unwrap();
        assert!(matches!(
            intercepted_pairs(&g, &s),
            Err(Error::Inadmissible { target: 4, .. })
        ));
    }

    #[test]
    fn csv_record_format() {
        let g = path(5);
        let r = honest_interception(&g, &[2]).unwrap();
        assert_eq!(r.csv_record("honest", "random", 1, 7), "honest,random,1,7,0.8,0.8");
    }
}

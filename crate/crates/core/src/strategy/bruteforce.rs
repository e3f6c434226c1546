//! Exhaustive search for the smallest admissible broadcasts toward one
//! target. Only usable on tiny graphs; serves as an oracle.

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::protocol::fixpoint_column;

use super::normalize_set;

/// Admissible broadcast vectors toward one target that no other admissible
/// vector undercuts entrywise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalBroadcasts {
    pub members: Vec<NodeId>,
    /// Pareto-minimal admissible vectors, indexed like `members`, in
    /// lexicographic order.
    pub frontier: Vec<Vec<Dist>>,
}

impl MinimalBroadcasts {
    /// The entrywise minimum, when it is unique.
    pub fn minimum(&self) -> Option<&[Dist]> {
        match self.frontier.as_slice() {
            [only] => Some(only),
            _ => None,
        }
    }
}

/// Whether some choice of colluder next hops lets every node of `t`'s
/// component reach `t`. `pinned[v]` is `Some(b(v, t))` for colluders.
///
/// A colluder can pick any neighbor as its hop, so in the reverse search it
/// is reached as soon as any neighbor is.
pub fn admissible_for_some_forwarding(graph: &Graph, t: NodeId, pinned: &[Option<Dist>]) -> bool {
    let column = fixpoint_column(graph, t, pinned);
    let n = graph.node_count();
    let mut reached = vec![false; n];
    reached[t] = true;
    let mut stack = vec![t];
    let mut count = 1;
    while let Some(y) = stack.pop() {
        for &u in graph.neighbors(y) {
            if reached[u] {
                continue;
            }
            let ok = pinned[u].is_some() || (column[y].is_finite() && column[u] == column[y] + 1);
            if ok {
                reached[u] = true;
                count += 1;
                stack.push(u);
            }
        }
    }
    let label = graph.components().label;
    count == label.iter().filter(|&&c| c == label[t]).count()
}

/// Enumerates every broadcast vector with `b(x, t)` in `1..=d(x, t)` for
/// each colluder `x` (infinite when `t` is unreachable) and returns the
/// Pareto-minimal admissible ones. Fails when the number of vectors exceeds
/// `budget`.
pub fn minimal_admissible_bruteforce(
    graph: &Graph,
    set: &[NodeId],
    t: NodeId,
    budget: u128,
) -> Result<MinimalBroadcasts> {
    graph.check_node(t)?;
    let members = normalize_set(graph, set)?;
    if members.binary_search(&t).is_ok() {
        return Err(Error::InvalidArgument(format!("target {t} is a colluder")));
    }
    let dist_t = graph.bfs_blocked(t, &[], u32::MAX);
    let upper: Vec<Option<u32>> = members.iter().map(|&x| dist_t[x].finite()).collect();
    let needed = upper
        .iter()
        .fold(1u128, |acc, u| acc.saturating_mul(u.map_or(1, |d| d as u128)));
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }

    let n = graph.node_count();
    let mut pinned: Vec<Option<Dist>> = vec![None; n];
    let mut current: Vec<u32> = upper.iter().map(|u| if u.is_some() { 1 } else { 0 }).collect();
    let mut admissible: Vec<Vec<Dist>> = Vec::new();
    loop {
        let vector: Vec<Dist> = current
            .iter()
            .zip(&upper)
            .map(|(&c, u)| if u.is_some() { Dist::new(c) } else { Dist::INFINITE })
            .collect();
        for (&x, &b) in members.iter().zip(&vector) {
            pinned[x] = Some(b);
        }
        if admissible_for_some_forwarding(graph, t, &pinned) {
            admissible.push(vector);
        }
        // Odometer step over the finite coordinates.
        let mut i = 0;
        loop {
            if i == current.len() {
                return Ok(MinimalBroadcasts {
                    frontier: pareto_minimal(admissible),
                    members,
                });
            }
            match upper[i] {
                Some(u) if current[i] < u => {
                    current[i] += 1;
                    break;
                }
                Some(_) => {
                    current[i] = 1;
                    i += 1;
                }
                None => i += 1,
            }
        }
    }
}

fn pareto_minimal(mut vectors: Vec<Vec<Dist>>) -> Vec<Vec<Dist>> {
    let dominates = |a: &[Dist], b: &[Dist]| a != b && a.iter().zip(b).all(|(x, y)| x <= y);
    let keep: Vec<bool> = vectors
        .iter()
        .map(|v| !vectors.iter().any(|w| dominates(w, v)))
        .collect();
    let mut i = 0;
    vectors.retain(|_| {
        i += 1;
        keep[i - 1]
    });
    vectors.sort();
    vectors
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    #[test]
    fn p7_two_colluders() {
        let g = path(7);
        let m = minimal_admissible_bruteforce(&g, &[1, 4], 6, 1_000).unwrap();
        assert_eq!(m.minimum(), Some(&[Dist::new(2), Dist::new(1)][..]));
    }

    #[test]
    fn single_colluder_on_path() {
        let g = path(7);
        for t in 1..7 {
            let m = minimal_admissible_bruteforce(&g, &[0], t, 1_000).unwrap();
            let expect = Dist::new(t as u32).minus_floored(2, 1);
            assert_eq!(m.minimum(), Some(&[expect][..]), "t {t}");
        }
    }

    #[test]
    fn budget_is_enforced() {
        let g = path(7);
        let err = minimal_admissible_bruteforce(&g, &[0, 2], 6, 10).unwrap_err();
        assert_eq!(err, Error::BudgetExceeded { needed: 24, budget: 10 });
    }

    #[test]
    fn unreachable_colluder_keeps_infinite() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let m = minimal_admissible_bruteforce(&g, &[2], 0, 10).unwrap();
        assert_eq!(m.minimum(), Some(&[Dist::INFINITE][..]));
    }

    #[test]
    fn pareto_keeps_incomparable() {
        let d = Dist::new;
        let f = pareto_minimal(vec![vec![d(1), d(2)], vec![d(2), d(1)], vec![d(2), d(2)]]);
        assert_eq!(f, vec![vec![d(1), d(2)], vec![d(2), d(1)]]);
    }
}

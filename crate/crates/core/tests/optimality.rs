//! Optimality of the separated-set broadcasts against exhaustive search.

use dvroute::graph::{generate, Model};
use dvroute::strategy::{check_admissible, minimal_admissible_bruteforce, rho_star_plan, separated_strategy};
use dvroute::{Dist, Graph, NodeId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Connected graphs on 3..=8 nodes with varied density.
fn small_connected(count: usize, seed: u64) -> Vec<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let n = rng.gen_range(3..=8);
        let p = rng.gen_range(0.2..0.7);
        let g = generate(Model::ErdosRenyi { n, p }, rng.gen()).unwrap();
        if g.is_connected() {
            out.push(g);
        }
    }
    out
}

fn separated_subsets(g: &Graph, size: usize) -> Vec<Vec<NodeId>> {
    let n = g.node_count();
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<NodeId>, NodeId)> = vec![(Vec::new(), 0)];
    while let Some((set, next)) = stack.pop() {
        if set.len() == size {
            out.push(set);
            continue;
        }
        for v in next..n {
            if set.iter().all(|&u| !g.has_edge(u, v)) {
                let mut s = set.clone();
                s.push(v);
                stack.push((s, v + 1));
            }
        }
    }
    out
}

/// Every separated set of size 1 or 2 on 200 graphs (size 3 on the first
/// 30), every outside target: the plan equals the unique entrywise-minimal
/// admissible vector, and lowering any value above 1 traps someone.
#[test]
fn rho_star_is_the_exhaustive_minimum_and_tight() {
    let graphs = small_connected(200, 7);
    let mut checked = 0;
    for (gi, g) in graphs.iter().enumerate() {
        for size in 1..=3 {
            if size == 3 && gi >= 30 {
                continue;
            }
            for set in separated_subsets(g, size) {
                let strat = separated_strategy(g, &set).unwrap();
                for t in g.nodes().filter(|t| !set.contains(t)) {
                    let plan = rho_star_plan(g, &set, t).unwrap();
                    let bf = minimal_admissible_bruteforce(g, &set, t, 1_000_000).unwrap();
                    let mine: Vec<Dist> = set.iter().map(|&x| plan.value(x).unwrap()).collect();
                    assert_eq!(
                        bf.minimum(),
                        Some(&mine[..]),
                        "graph {gi} set {set:?} t {t} frontier {:?}",
                        bf.frontier
                    );
                    for &x in &set {
                        let v = plan.value(x).unwrap();
                        if v > Dist::ONE {
                            let mut lower = strat.clone();
                            lower.set_broadcast(x, t, Dist::new(v.finite().unwrap() - 1)).unwrap();
                            assert!(
                                !check_admissible(g, &lower).admissible,
                                "graph {gi} set {set:?} x {x} t {t}"
                            );
                        }
                    }
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 10_000, "{checked}");
}

#[test]
fn single_colluder_minimum_is_distance_minus_two() {
    for (gi, g) in small_connected(200, 11).iter().enumerate() {
        for x in g.nodes() {
            let d = g.bfs_distances(x).unwrap().dist;
            for t in g.nodes().filter(|&t| t != x) {
                let bf = minimal_admissible_bruteforce(g, &[x], t, 1_000).unwrap();
                assert_eq!(
                    bf.minimum(),
                    Some(&[d[t].minus_floored(2, 1)][..]),
                    "graph {gi} x {x} t {t}"
                );
            }
        }
    }
}

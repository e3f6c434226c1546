//! Seeded random-graph generators.
//!
//! All generators draw from `ChaCha8Rng`, so a `(model, seed)` pair yields
//! the same graph on every platform and every run.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Graph, NodeId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// Each of the `n(n-1)/2` edges independently with probability `p`.
    ErdosRenyi { n: usize, p: f64 },
    /// Preferential attachment: a clique on `m + 1` seed nodes, then each new
    /// node attaches `m` edges to distinct existing nodes chosen with
    /// probability proportional to degree.
    PrefAttach { n: usize, m: usize },
    /// Ring lattice with `k` nearest neighbors per node; each lattice edge's
    /// far endpoint is rewired with probability `beta`.
    WattsStrogatz { n: usize, k: usize, beta: f64 },
}

impl Model {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match *self {
            Model::ErdosRenyi { p, .. } if !(0.0..=1.0).contains(&p) => {
                bad(format!("erdos_renyi: p={p} outside [0, 1]"))
            }
            Model::PrefAttach { n, m } if m < 1 || m >= n => {
                bad(format!("pref_attach: need 1 <= m < n, got m={m}, n={n}"))
            }
            Model::WattsStrogatz { n, k, beta } => {
                if k % 2 != 0 || k >= n {
                    bad(format!("watts_strogatz: need even k < n, got k={k}, n={n}"))
                } else if !(0.0..=1.0).contains(&beta) {
                    bad(format!("watts_strogatz: beta={beta} outside [0, 1]"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

pub fn generate(model: Model, seed: u64) -> Result<Graph> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match model {
        Model::ErdosRenyi { n, p } => erdos_renyi(n, p, &mut rng),
        Model::PrefAttach { n, m } => pref_attach(n, m, &mut rng),
        Model::WattsStrogatz { n, k, beta } => watts_strogatz(n, k, beta, &mut rng),
    }
}

fn erdos_renyi(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Result<Graph> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

fn pref_attach(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Result<Graph> {
    let mut edges = Vec::new();
    // every edge endpoint appears once per incident edge, so a uniform draw
    // from this list is a degree-proportional draw
    let mut endpoints: Vec<NodeId> = Vec::new();
    for u in 0..=m {
        for v in u + 1..=m {
            edges.push((u, v));
            endpoints.extend([u, v]);
        }
    }
    for new in m + 1..n {
        let mut chosen = BTreeSet::new();
        while chosen.len() < m {
            chosen.insert(*endpoints.choose(rng).expect("seed clique is non-empty"));
        }
        for &v in &chosen {
            edges.push((new, v));
            endpoints.extend([new, v]);
        }
    }
    Graph::from_edges(n, edges)
}

fn watts_strogatz(n: usize, k: usize, beta: f64, rng: &mut ChaCha8Rng) -> Result<Graph> {
    let mut adj: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=k / 2 {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    // rewire ring by ring, as in the classic construction
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if !adj[u].contains(&v) || !rng.gen_bool(beta) {
                continue;
            }
            if adj[u].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.gen_range(0..n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    let edges = adj
        .iter()
        .enumerate()
        .flat_map(|(u, s)| s.iter().filter(move |&&v| v > u).map(move |&v| (u, v)));
    Graph::from_edges(n, edges.collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_degree(g: &Graph) -> f64 {
        2.0 * g.edge_count() as f64 / g.node_count() as f64
    }

    fn assert_simple(g: &Graph) {
        for u in g.nodes() {
            let nb = g.neighbors(u);
            assert!(nb.windows(2).all(|w| w[0] < w[1]));
            assert!(!nb.contains(&u));
            for &v in nb {
                assert!(g.has_edge(v, u));
            }
        }
    }

    #[test]
    fn erdos_renyi_mean_degree_band() {
        for seed in 0..20 {
            let g = generate(Model::ErdosRenyi { n: 1000, p: 0.004 }, seed).unwrap();
            let md = mean_degree(&g);
            assert!((3.2..=4.8).contains(&md), "seed {seed}: mean degree {md}");
            assert_simple(&g);
        }
    }

    #[test]
    fn erdos_renyi_degenerate_p() {
        let g = generate(Model::ErdosRenyi { n: 12, p: 0.0 }, 1).unwrap();
        assert_eq!(g.edge_count(), 0);
        let g = generate(Model::ErdosRenyi { n: 12, p: 1.0 }, 1).unwrap();
        assert_eq!(g.edge_count(), 66);
    }

    #[test]
    fn watts_strogatz_without_rewiring_is_the_lattice() {
        let g = generate(
            Model::WattsStrogatz {
                n: 1000,
                k: 10,
                beta: 0.0,
            },
            3,
        )
        .unwrap();
        assert_eq!(g.edge_count(), 5000);
        assert!(g.nodes().all(|u| g.degree(u) == 10));
        assert!(g.has_edge(0, 995) && g.has_edge(0, 5) && !g.has_edge(0, 6));
    }

    #[test]
    fn watts_strogatz_rewiring_keeps_edge_count() {
        let g = generate(
            Model::WattsStrogatz {
                n: 1000,
                k: 10,
                beta: 0.04,
            },
            3,
        )
        .unwrap();
        assert_eq!(g.edge_count(), 5000);
        assert_simple(&g);
    }

    #[test]
    fn pref_attach_sizes() {
        let g = generate(Model::PrefAttach { n: 100, m: 2 }, 9).unwrap();
        // clique on 3 nodes, then two edges per added node
        assert_eq!(g.edge_count(), 3 + 2 * 97);
        assert!(g.is_connected());
        assert_simple(&g);
    }

    #[test]
    fn determinism() {
        let m = Model::ErdosRenyi { n: 200, p: 0.03 };
        assert_eq!(generate(m, 42).unwrap(), generate(m, 42).unwrap());
        assert_ne!(generate(m, 42).unwrap(), generate(m, 43).unwrap());
    }

    #[test]
    fn invalid_parameters() {
        assert!(generate(Model::ErdosRenyi { n: 5, p: 1.5 }, 0).is_err());
        assert!(generate(Model::PrefAttach { n: 5, m: 5 }, 0).is_err());
        assert!(generate(Model::PrefAttach { n: 5, m: 0 }, 0).is_err());
        assert!(generate(Model::WattsStrogatz { n: 10, k: 3, beta: 0.1 }, 0).is_err());
        assert!(generate(
            Model::WattsStrogatz {
                n: 10,
                k: 10,
                beta: 0.1
            },
            0
        )
        .is_err());
    }
}

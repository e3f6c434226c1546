//! Sweeps over selection methods, strategies, set sizes and trials.
//!
//! A cell is one (method, strategy, size, trial). The colluder set of a
//! cell depends on (method, size, trial) only, so every strategy in a trial
//! faces the same set, and for a fixed trial the sets are nested across
//! sizes. Cells run on a rayon pool; rows are sorted by cell key before
//! writing, so output bytes do not depend on scheduling.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use dvroute::graph::{from_edge_list, generate};
use dvroute::interception::intercepted_pairs;
use dvroute::selection::{
    exhaustive_opt, greedy_max_spds, random_set, top_degree, Method, Objective, EXHAUSTIVE_BUDGET,
};
use dvroute::strategy::{
    adjacent_strategy, check_admissible, honest_strategy, independent_strategy, separated_strategy,
    AdmissibilityVerdict, ComponentOrder, Strategy,
};
use dvroute::{Graph, NodeId};
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{ExperimentConfig, GraphSource, Metric, StrategyLabel, DEFAULT_TRIALS};

pub const CSV_HEADER: [&str; 11] = [
    "graph",
    "n",
    "m",
    "selection",
    "strategy",
    "k",
    "trial",
    "seed",
    "fraction_ordered",
    "fraction_unordered",
    "runtime_ms",
];

/// Label written for a "separated" row whose set had adjacent members.
pub const DEGRADED_LABEL: &str = "separated~adjacent_general";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(#[from] crate::config::ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] dvroute::Error),
    #[error("size {k} exceeds the {n} nodes of the graph")]
    SizeTooLarge { k: usize, n: usize },
    #[error("{strategy} strategy inadmissible for {selection} k={k} trial={trial}: {verdict:?}")]
    Inadmissible {
        strategy: String,
        selection: Method,
        k: usize,
        trial: usize,
        verdict: AdmissibilityVerdict,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl RunError {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Io { .. } => "io",
            RunError::Core(_) => "graph",
            RunError::SizeTooLarge { .. } => "config",
            RunError::Inadmissible { .. } => "inadmissible",
            RunError::Csv(_) => "io",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub selection: Method,
    /// Label requested in the configuration.
    pub requested: StrategyLabel,
    /// Label actually run, as written to the CSV.
    pub strategy: String,
    pub k: usize,
    pub trial: usize,
    pub seed: u64,
    pub colluders: Vec<NodeId>,
    pub fraction_ordered: f64,
    pub fraction_unordered: f64,
    pub runtime_ms: u64,
}

impl Row {
    pub fn fraction(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Ordered => self.fraction_ordered,
            Metric::Unordered => self.fraction_unordered,
        }
    }

    pub fn degraded(&self) -> bool {
        self.strategy == DEGRADED_LABEL
    }
}

/// A cell that produced no row.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub selection: Method,
    pub strategy: StrategyLabel,
    pub k: usize,
    pub trial: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub selection: Method,
    pub strategy: StrategyLabel,
    pub k: usize,
    pub trials: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single trial.
    pub std: f64,
    /// Trials where "separated" ran the component strategy.
    pub degraded: usize,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub graph_name: String,
    pub graph: Graph,
    pub config: ExperimentConfig,
    pub rows: Vec<Row>,
    pub failures: Vec<Failure>,
}

/// Deterministic seed for a (method, trial) pair.
pub fn trial_seed(master: u64, method: Method, trial: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(method.as_str().as_bytes());
    h.update((trial as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

fn graph_seed(master: u64) -> u64 {
    let digest = Sha256::new()
        .chain_update(master.to_le_bytes())
        .chain_update(b"graph")
        .finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Loads or generates the experiment graph and names it for the CSV.
pub fn load_graph(cfg: &ExperimentConfig) -> Result<(String, Graph), RunError> {
    match &cfg.graph {
        GraphSource::Generate(spec) => Ok((spec.to_string(), generate(spec.0, graph_seed(cfg.seed))?)),
        GraphSource::EdgeList(path) => {
            let text = fs::read_to_string(path).map_err(|source| RunError::Io {
                path: path.clone(),
                source,
            })?;
            let name = path
                .file_name()
                .map_or_else(|| path.display().to_string(), |f| f.to_string_lossy().into_owned());
            Ok((name, from_edge_list(&text)?.graph))
        }
    }
}

fn build(graph: &Graph, label: StrategyLabel, set: &[NodeId]) -> dvroute::Result<(String, Strategy)> {
    Ok(match label {
        StrategyLabel::Honest => ("honest".into(), honest_strategy(graph, set)?),
        StrategyLabel::Independent => ("independent".into(), independent_strategy(graph, set)?),
        StrategyLabel::Separated if graph.is_independent(set) => ("separated".into(), separated_strategy(graph, set)?),
        StrategyLabel::Separated => (
            DEGRADED_LABEL.into(),
            adjacent_strategy(graph, set, &ComponentOrder::ByValue)?,
        ),
        StrategyLabel::Adjacent => (
            "adjacent".into(),
            adjacent_strategy(graph, set, &ComponentOrder::ByValue)?,
        ),
    })
}

struct Item {
    method: usize,
    trial: usize,
    size: usize,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let (graph_name, graph) = load_graph(cfg)?;
    run_on_graph(cfg, graph_name, graph)
}

/// Runs the sweep on an already loaded graph.
pub fn run_on_graph(cfg: &ExperimentConfig, graph_name: String, graph: Graph) -> Result<Report, RunError> {
    let n = graph.node_count();
    let sizes = cfg.sweep.sizes(n);
    if let Some(&k) = sizes.iter().find(|&&k| k > n) {
        return Err(RunError::SizeTooLarge { k, n });
    }
    let max_k = sizes.iter().copied().max().unwrap_or(0);
    // Greedy picks are deterministic and nested, so one run serves all sizes.
    let greedy_order = if cfg.selection.contains(&Method::GreedyMax) {
        greedy_max_spds(&graph, max_k, Objective::PairInterception)?.picks
    } else {
        Vec::new()
    };

    let size_count = sizes.len();
    let items: Vec<Item> = (0..cfg.selection.len())
        .flat_map(|method| {
            (0..cfg.trials).flat_map(move |trial| (0..size_count).map(move |size| Item { method, trial, size }))
        })
        .collect();
    let results: Vec<Result<(Vec<Row>, Vec<Failure>), RunError>> = items
        .par_iter()
        .map(|item| run_item(cfg, &graph, &greedy_order, sizes[item.size], item))
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        let (r, f) = r?;
        rows.extend(r);
        failures.extend(f);
    }
    let method_rank = |m: Method| cfg.selection.iter().position(|&x| x == m);
    let strategy_rank = |s: StrategyLabel| cfg.strategy.iter().position(|&x| x == s);
    let size_rank = |k: usize| sizes.iter().position(|&x| x == k);
    rows.sort_by_key(|r| {
        (
            method_rank(r.selection),
            strategy_rank(r.requested),
            size_rank(r.k),
            r.trial,
        )
    });
    failures.sort_by_key(|f| {
        (
            method_rank(f.selection),
            strategy_rank(f.strategy),
            size_rank(f.k),
            f.trial,
        )
    });
    Ok(Report {
        graph_name,
        graph,
        config: cfg.clone(),
        rows,
        failures,
    })
}

fn run_item(
    cfg: &ExperimentConfig,
    graph: &Graph,
    greedy_order: &[NodeId],
    k: usize,
    item: &Item,
) -> Result<(Vec<Row>, Vec<Failure>), RunError> {
    let method = cfg.selection[item.method];
    let seed = trial_seed(cfg.seed, method, item.trial);
    let fail = |strategy, message: String| Failure {
        selection: method,
        strategy,
        k,
        trial: item.trial,
        message,
    };
    let set = match method {
        Method::Random => random_set(graph, k, seed)?,
        Method::TopDegree => top_degree(graph, k)?,
        Method::GreedyMax => {
            let mut s = greedy_order[..k].to_vec();
            s.sort_unstable();
            s
        }
        Method::Exhaustive => match exhaustive_opt(graph, k, Objective::PairInterception, EXHAUSTIVE_BUDGET) {
            Ok((s, _)) => s,
            Err(e @ dvroute::Error::BudgetExceeded { .. }) => {
                let failures = cfg.strategy.iter().map(|&s| fail(s, e.to_string())).collect();
                return Ok((Vec::new(), failures));
            }
            Err(e) => return Err(e.into()),
        },
        Method::GreedyMin => unreachable!("rejected by config validation"),
    };

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &label in &cfg.strategy {
        let start = Instant::now();
        let (name, strategy) = build(graph, label, &set)?;
        let verdict = check_admissible(graph, &strategy);
        if !verdict.admissible {
            return Err(RunError::Inadmissible {
                strategy: name,
                selection: method,
                k,
                trial: item.trial,
                verdict,
            });
        }
        let result = intercepted_pairs(graph, &strategy)?;
        let elapsed = start.elapsed().as_millis() as u64;
        if cfg.cell_budget_ms.is_some_and(|b| elapsed > b) {
            failures.push(fail(label, format!("cell took {elapsed} ms, over the budget")));
            continue;
        }
        rows.push(Row {
            selection: method,
            requested: label,
            strategy: name,
            k,
            trial: item.trial,
            seed,
            colluders: set.clone(),
            fraction_ordered: result.fraction_ordered(),
            fraction_unordered: result.fraction_unordered(),
            runtime_ms: if cfg.timing { elapsed } else { 0 },
        });
    }
    Ok((rows, failures))
}

impl Report {
    pub fn to_csv(&self) -> Result<String, RunError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        let n = self.graph.node_count().to_string();
        let m = self.graph.edge_count().to_string();
        for r in &self.rows {
            w.write_record([
                self.graph_name.as_str(),
                &n,
                &m,
                r.selection.as_str(),
                &r.strategy,
                &r.k.to_string(),
                &r.trial.to_string(),
                &r.seed.to_string(),
                &r.fraction_ordered.to_string(),
                &r.fraction_unordered.to_string(),
                &r.runtime_ms.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| RunError::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Mean and standard deviation of the configured metric per
    /// (method, requested strategy, size), in row order.
    pub fn summary(&self) -> Vec<CellSummary> {
        let mut out: Vec<CellSummary> = Vec::new();
        let mut values: Vec<Vec<f64>> = Vec::new();
        for r in &self.rows {
            let same = out
                .last()
                .is_some_and(|c| c.selection == r.selection && c.strategy == r.requested && c.k == r.k);
            if !same {
                out.push(CellSummary {
                    selection: r.selection,
                    strategy: r.requested,
                    k: r.k,
                    trials: 0,
                    mean: 0.0,
                    std: 0.0,
                    degraded: 0,
                });
                values.push(Vec::new());
            }
            let cell = out.last_mut().expect("just pushed");
            cell.trials += 1;
            cell.degraded += usize::from(r.degraded());
            values
                .last_mut()
                .expect("just pushed")
                .push(r.fraction(self.config.metric));
        }
        for (cell, v) in out.iter_mut().zip(values) {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let var = if v.len() > 1 {
                v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64
            } else {
                0.0
            };
            cell.mean = mean;
            cell.std = var.sqrt();
        }
        out
    }

    /// Summary CSV preceded by `#` metadata lines (run parameters, defaults
    /// in effect, failed cells).
    pub fn summary_csv(&self) -> String {
        let cfg = &self.config;
        let mut out = String::new();
        out.push_str(&format!(
            "# graph={} n={} m={}\n",
            self.graph_name,
            self.graph.node_count(),
            self.graph.edge_count()
        ));
        let default_note = if cfg.trials == DEFAULT_TRIALS { " (default)" } else { "" };
        out.push_str(&format!("# trials={}{default_note} seed={}\n", cfg.trials, cfg.seed));
        out.push_str("# std is the sample standard deviation over trials\n");
        for f in &self.failures {
            out.push_str(&format!(
                "# failed selection={} strategy={} k={} trial={}: {}\n",
                f.selection, f.strategy, f.k, f.trial, f.message
            ));
        }
        out.push_str("selection,strategy,k,trials,metric,mean,std,degraded\n");
        for c in self.summary() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                c.selection,
                c.strategy,
                c.k,
                c.trials,
                cfg.metric.as_str(),
                c.mean,
                c.std,
                c.degraded
            ));
        }
        out
    }
}

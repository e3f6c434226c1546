//! Experiment configuration: TOML text, command-line overrides and
//! validation that reports every violation at once.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use dvroute::graph::Model;
use dvroute::selection::Method;
use toml::{Table, Value};

/// A generator written as `model:key=value,...`, e.g. `er:n=1000,p=0.004`,
/// `ws:n=1000,k=10,beta=0.04` or `pa:n=100` (`m` defaults to 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec(pub Model);

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Model::ErdosRenyi { n, p } => write!(f, "er:n={n},p={p}"),
            Model::WattsStrogatz { n, k, beta } => write!(f, "ws:n={n},k={k},beta={beta}"),
            Model::PrefAttach { n, m } => write!(f, "pa:n={n},m={m}"),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, params) = s.split_once(':').unwrap_or((s, ""));
        let mut n = None;
        let mut p = None;
        let mut k = None;
        let mut m = None;
        let mut beta = None;
        for kv in params.split(',').filter(|kv| !kv.is_empty()) {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got {kv:?}"))?;
            let bad = || format!("bad value for {key}: {value:?}");
            match key {
                "n" => n = Some(value.parse::<usize>().map_err(|_| bad())?),
                "k" => k = Some(value.parse::<usize>().map_err(|_| bad())?),
                "m" => m = Some(value.parse::<usize>().map_err(|_| bad())?),
                "p" => p = Some(value.parse::<f64>().map_err(|_| bad())?),
                "beta" => beta = Some(value.parse::<f64>().map_err(|_| bad())?),
                _ => return Err(format!("unknown generator parameter {key:?}")),
            }
        }
        fn need<T>(v: Option<T>, name: &str, key: &str) -> Result<T, String> {
            v.ok_or_else(|| format!("{name} needs {key}"))
        }
        let model = match name {
            "er" | "erdos_renyi" => Model::ErdosRenyi {
                n: need(n, name, "n")?,
                p: need(p, name, "p")?,
            },
            "ws" | "watts_strogatz" => Model::WattsStrogatz {
                n: need(n, name, "n")?,
                k: need(k, name, "k")?,
                beta: need(beta, name, "beta")?,
            },
            "pa" | "pref_attach" => Model::PrefAttach {
                n: need(n, name, "n")?,
                m: m.unwrap_or(2),
            },
            _ => return Err(format!("unknown generator {name:?} (expected er, ws or pa)")),
        };
        model.validate().map_err(|e| e.to_string())?;
        Ok(GeneratorSpec(model))
    }
}

impl GeneratorSpec {
    pub fn node_count(&self) -> usize {
        match self.0 {
            Model::ErdosRenyi { n, .. } | Model::WattsStrogatz { n, .. } | Model::PrefAttach { n, .. } => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Generate(GeneratorSpec),
    EdgeList(PathBuf),
}

/// Strategy labels accepted by the runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyLabel {
    Honest,
    Independent,
    /// Optimal separated-set broadcasts; runs the component strategy when the
    /// selected set has adjacent members.
    Separated,
    Adjacent,
}

impl StrategyLabel {
    pub const ALL: [StrategyLabel; 4] = [
        StrategyLabel::Honest,
        StrategyLabel::Independent,
        StrategyLabel::Separated,
        StrategyLabel::Adjacent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyLabel::Honest => "honest",
            StrategyLabel::Independent => "independent",
            StrategyLabel::Separated => "separated",
            StrategyLabel::Adjacent => "adjacent",
        }
    }
}

impl fmt::Display for StrategyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        StrategyLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown strategy {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Ordered,
    Unordered,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Ordered => "ordered",
            Metric::Unordered => "unordered",
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ordered" => Ok(Metric::Ordered),
            "unordered" => Ok(Metric::Unordered),
            _ => Err(format!("unknown metric {s:?} (expected ordered or unordered)")),
        }
    }
}

/// Colluder-set sizes, as counts or as percentages of `n`.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    Counts(Vec<usize>),
    Percent(Vec<f64>),
}

impl Sweep {
    /// Sizes for an `n`-node graph, percentages rounded to the nearest count.
    pub fn sizes(&self, n: usize) -> Vec<usize> {
        match self {
            Sweep::Counts(k) => k.clone(),
            Sweep::Percent(p) => p.iter().map(|&p| (p / 100.0 * n as f64).round() as usize).collect(),
        }
    }
}

pub const DEFAULT_TRIALS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub selection: Vec<Method>,
    pub strategy: Vec<StrategyLabel>,
    pub sweep: Sweep,
    pub trials: usize,
    pub seed: u64,
    pub metric: Metric,
    pub out: Option<PathBuf>,
    /// Wall-clock budget per cell; cells over budget are reported as failed.
    pub cell_budget_ms: Option<u64>,
    /// Record `runtime_ms`; when off the column is 0 and output bytes depend
    /// only on the configuration.
    pub timing: bool,
}

const KEYS: [&str; 12] = [
    "graph",
    "generate",
    "selection",
    "strategy",
    "k",
    "percent",
    "trials",
    "seed",
    "metric",
    "out",
    "cell_budget_ms",
    "timing",
];

/// Validation failure listing every violation found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub Vec<String>);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("; "))
    }
}

impl std::error::Error for ConfigError {}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError(vec![e.message().to_owned()]))?;
    from_table(&table)
}

/// Builds a config from a parsed table, collecting every violation.
pub fn from_table(table: &Table) -> Result<ExperimentConfig, ConfigError> {
    let mut errors = Vec::new();
    for key in table.keys() {
        if !KEYS.contains(&key.as_str()) {
            errors.push(format!("{key}: unknown key"));
        }
    }

    let graph = match (table.get("graph"), table.get("generate")) {
        (Some(_), Some(_)) => {
            errors.push("graph, generate: give exactly one".into());
            None
        }
        (Some(Value::String(path)), None) => Some(GraphSource::EdgeList(PathBuf::from(path))),
        (None, Some(Value::String(spec))) => match spec.parse() {
            Ok(spec) => Some(GraphSource::Generate(spec)),
            Err(e) => {
                errors.push(format!("generate: {e}"));
                None
            }
        },
        (None, None) => {
            errors.push("graph, generate: one is required".into());
            None
        }
        (Some(_), None) => {
            errors.push("graph: expected a path string".into());
            None
        }
        (None, Some(_)) => {
            errors.push("generate: expected a generator string".into());
            None
        }
    };

    let selection = string_list(table, "selection", &mut errors)
        .map(|names| parse_each::<Method>(names, "selection", &mut errors))
        .unwrap_or_else(|| vec![Method::Random]);
    for m in &selection {
        if matches!(m, Method::GreedyMin) {
            errors.push("selection: greedy_min takes a target fraction, not a size sweep".into());
        }
    }
    let strategy = string_list(table, "strategy", &mut errors)
        .map(|names| parse_each::<StrategyLabel>(names, "strategy", &mut errors))
        .unwrap_or_else(|| {
            vec![
                StrategyLabel::Honest,
                StrategyLabel::Independent,
                StrategyLabel::Separated,
            ]
        });
    if selection.is_empty() {
        errors.push("selection: at least one method".into());
    }
    if strategy.is_empty() {
        errors.push("strategy: at least one label".into());
    }

    let sweep = match (table.get("k"), table.get("percent")) {
        (Some(_), Some(_)) => {
            errors.push("k, percent: give exactly one".into());
            None
        }
        (Some(v), None) => integer_list(v, "k", &mut errors).map(Sweep::Counts),
        (None, Some(v)) => float_list(v, "percent", &mut errors).map(Sweep::Percent),
        (None, None) => {
            errors.push("k, percent: one is required".into());
            None
        }
    };
    if let Some(Sweep::Percent(p)) = &sweep {
        if p.iter().any(|p| !(0.0..=100.0).contains(p)) {
            errors.push("percent: values must lie in [0, 100]".into());
        }
    }
    if let (Some(GraphSource::Generate(spec)), Some(sweep)) = (&graph, &sweep) {
        let n = spec.node_count();
        if sweep.sizes(n).iter().any(|&k| k > n) {
            errors.push(format!("k: sizes must not exceed n = {n}"));
        }
    }

    let trials = match table.get("trials") {
        None => DEFAULT_TRIALS,
        Some(Value::Integer(t)) if *t >= 1 => *t as usize,
        Some(Value::Integer(t)) => {
            errors.push(format!("trials: must be at least 1, got {t}"));
            DEFAULT_TRIALS
        }
        Some(_) => {
            errors.push("trials: expected an integer".into());
            DEFAULT_TRIALS
        }
    };
    let seed = match table.get("seed") {
        None => 0,
        Some(Value::Integer(s)) if *s >= 0 => *s as u64,
        Some(_) => {
            errors.push("seed: expected a non-negative integer".into());
            0
        }
    };
    let metric = match table.get("metric") {
        None => Metric::default(),
        Some(Value::String(s)) => s.parse().unwrap_or_else(|e| {
            errors.push(format!("metric: {e}"));
            Metric::default()
        }),
        Some(_) => {
            errors.push("metric: expected a string".into());
            Metric::default()
        }
    };
    let out = match table.get("out") {
        None => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(_) => {
            errors.push("out: expected a path string".into());
            None
        }
    };
    let cell_budget_ms = match table.get("cell_budget_ms") {
        None => None,
        Some(Value::Integer(b)) if *b > 0 => Some(*b as u64),
        Some(_) => {
            errors.push("cell_budget_ms: expected a positive integer".into());
            None
        }
    };
    let timing = match table.get("timing") {
        None => true,
        Some(Value::Boolean(b)) => *b,
        Some(_) => {
            errors.push("timing: expected true or false".into());
            true
        }
    };

    match (graph, sweep) {
        (Some(graph), Some(sweep)) if errors.is_empty() => Ok(ExperimentConfig {
            graph,
            selection,
            strategy,
            sweep,
            trials,
            seed,
            metric,
            out,
            cell_budget_ms,
            timing,
        }),
        _ => Err(ConfigError(errors)),
    }
}

fn string_list<'a>(table: &'a Table, key: &str, errors: &mut Vec<String>) -> Option<Vec<&'a str>> {
    match table.get(key)? {
        Value::String(s) => Some(vec![s.as_str()]),
        Value::Array(items) => {
            let strings: Option<Vec<&str>> = items.iter().map(Value::as_str).collect();
            if strings.is_none() {
                errors.push(format!("{key}: expected strings"));
            }
            strings
        }
        _ => {
            errors.push(format!("{key}: expected a string or a list of strings"));
            None
        }
    }
}

fn parse_each<T: FromStr>(names: Vec<&str>, key: &str, errors: &mut Vec<String>) -> Vec<T>
where
    T::Err: fmt::Display,
{
    names
        .into_iter()
        .filter_map(|s| s.parse().map_err(|e| errors.push(format!("{key}: {e}"))).ok())
        .collect()
}

fn integer_list(value: &Value, key: &str, errors: &mut Vec<String>) -> Option<Vec<usize>> {
    let items = match value {
        Value::Array(items) => items.as_slice(),
        v => std::slice::from_ref(v),
    };
    let mut out = Vec::new();
    for item in items {
        match item.as_integer() {
            Some(k) if k >= 0 => out.push(k as usize),
            _ => {
                errors.push(format!("{key}: expected non-negative integers, got {item}"));
                return None;
            }
        }
    }
    Some(out)
}

fn float_list(value: &Value, key: &str, errors: &mut Vec<String>) -> Option<Vec<f64>> {
    let items = match value {
        Value::Array(items) => items.as_slice(),
        v => std::slice::from_ref(v),
    };
    let mut out = Vec::new();
    for item in items {
        match item {
            Value::Float(f) => out.push(*f),
            Value::Integer(i) => out.push(*i as f64),
            _ => {
                errors.push(format!("{key}: expected numbers, got {item}"));
                return None;
            }
        }
    }
    Some(out)
}

impl ExperimentConfig {
    /// TOML table with every field written out, defaults included.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new();
        match &self.graph {
            GraphSource::Generate(spec) => t.insert("generate".into(), spec.to_string().into()),
            GraphSource::EdgeList(path) => t.insert("graph".into(), path.display().to_string().into()),
        };
        let strings = |items: Vec<String>| Value::Array(items.into_iter().map(Value::String).collect());
        t.insert(
            "selection".into(),
            strings(self.selection.iter().map(|m| m.to_string()).collect()),
        );
        t.insert(
            "strategy".into(),
            strings(self.strategy.iter().map(|s| s.to_string()).collect()),
        );
        match &self.sweep {
            Sweep::Counts(k) => t.insert(
                "k".into(),
                Value::Array(k.iter().map(|&k| Value::Integer(k as i64)).collect()),
            ),
            Sweep::Percent(p) => t.insert(
                "percent".into(),
                Value::Array(p.iter().map(|&p| Value::Float(p)).collect()),
            ),
        };
        t.insert("trials".into(), Value::Integer(self.trials as i64));
        t.insert("seed".into(), Value::Integer(self.seed as i64));
        t.insert("metric".into(), self.metric.as_str().into());
        if let Some(out) = &self.out {
            t.insert("out".into(), out.display().to_string().into());
        }
        if let Some(b) = self.cell_budget_ms {
            t.insert("cell_budget_ms".into(), Value::Integer(b as i64));
        }
        t.insert("timing".into(), Value::Boolean(self.timing));
        t
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_table()).expect("a table always serializes")
    }
}

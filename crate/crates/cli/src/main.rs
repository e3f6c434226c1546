use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use dvroute_cli::config::from_table;
use dvroute_cli::experiment::{run_experiment, RunError};
use toml::{Table, Value};

/// Sweeps colluder-set sizes and writes interception fractions as CSV.
///
/// Keys in the --config file override flags of the same name. Without
/// --out, rows go to stdout and the summary to stderr; with --out, the
/// summary is written next to it as `<stem>.summary.csv`.
#[derive(Debug, Parser)]
#[command(name = "dvroute", version)]
struct Cli {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Edge-list file.
    #[arg(long, conflicts_with = "generate")]
    graph: Option<String>,
    /// Generator spec: `er:n=1000,p=0.004`, `ws:n=1000,k=10,beta=0.04`, `pa:n=100,m=2`.
    #[arg(long)]
    generate: Option<String>,
    /// Comma-separated selection methods.
    #[arg(long = "select")]
    selection: Option<String>,
    /// Comma-separated strategies: honest, independent, separated, adjacent.
    #[arg(long)]
    strategy: Option<String>,
    /// Comma-separated colluder counts.
    #[arg(long, conflicts_with = "percent")]
    k: Option<String>,
    /// Comma-separated percentages of n.
    #[arg(long)]
    percent: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    trials: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    seed: Option<i64>,
    /// ordered or unordered.
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    cell_budget_ms: Option<i64>,
    /// Write 0 for runtime_ms so output bytes depend only on the config.
    #[arg(long)]
    no_timing: bool,
}

fn list(text: &str, item: impl Fn(&str) -> Value) -> Value {
    Value::Array(
        text.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(item)
            .collect(),
    )
}

/// Unparsable numbers stay strings so validation reports them by key.
fn number(s: &str) -> Value {
    s.parse::<i64>()
        .map(Value::Integer)
        .or_else(|_| s.parse::<f64>().map(Value::Float))
        .unwrap_or_else(|_| Value::String(s.to_owned()))
}

impl Cli {
    fn to_table(&self) -> Table {
        let mut t = Table::new();
        let mut put = |key: &str, v: Option<Value>| {
            if let Some(v) = v {
                t.insert(key.into(), v);
            }
        };
        put("graph", self.graph.clone().map(Value::String));
        put("generate", self.generate.clone().map(Value::String));
        put(
            "selection",
            self.selection.as_deref().map(|s| list(s, |x| Value::String(x.into()))),
        );
        put(
            "strategy",
            self.strategy.as_deref().map(|s| list(s, |x| Value::String(x.into()))),
        );
        put("k", self.k.as_deref().map(|s| list(s, number)));
        put("percent", self.percent.as_deref().map(|s| list(s, number)));
        put("trials", self.trials.map(Value::Integer));
        put("seed", self.seed.map(Value::Integer));
        put("metric", self.metric.clone().map(Value::String));
        put("out", self.out.as_ref().map(|p| Value::String(p.display().to_string())));
        put("cell_budget_ms", self.cell_budget_ms.map(Value::Integer));
        put("timing", self.no_timing.then_some(Value::Boolean(false)));
        t
    }
}

/// Flags overlaid by the config file; a graph source in the file replaces
/// either graph flag, and likewise for the sweep.
fn merged(cli: &Cli) -> Result<Table, RunError> {
    let mut table = cli.to_table();
    let Some(path) = &cli.config else {
        return Ok(table);
    };
    let text = fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.clone(),
        source,
    })?;
    let file: Table = text
        .parse()
        .map_err(|e: toml::de::Error| dvroute_cli::ConfigError(vec![format!("{}: {}", path.display(), e.message())]))?;
    for group in [["graph", "generate"], ["k", "percent"]] {
        if group.iter().any(|k| file.contains_key(*k)) {
            for k in group {
                table.remove(k);
            }
        }
    }
    table.extend(file);
    Ok(table)
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.summary.csv"))
}

fn run(cli: &Cli) -> Result<bool, RunError> {
    let cfg = from_table(&merged(cli)?)?;
    let report = run_experiment(&cfg)?;
    let rows = report.to_csv()?;
    let summary = report.summary_csv();
    match &cfg.out {
        Some(out) => {
            let write = |path: &Path, text: &str| {
                fs::write(path, text).map_err(|source| RunError::Io {
                    path: path.to_owned(),
                    source,
                })
            };
            write(out, &rows)?;
            write(&summary_path(out), &summary)?;
        }
        None => {
            print!("{rows}");
            eprint!("{summary}");
        }
    }
    for f in &report.failures {
        eprintln!(
            "cell\tfailed\tselection={} strategy={} k={} trial={}\t{}",
            f.selection, f.strategy, f.k, f.trial, f.message
        );
    }
    Ok(report.failures.is_empty())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // Help and version; a closed pipe is not worth reporting.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e
                .to_string()
                .lines()
                .next()
                .unwrap_or_default()
                .trim_start_matches("error: ")
                .to_owned();
            eprintln!("error\tusage\t{first}");
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error\t{}\t{}", e.kind(), e.to_string().replace(['\t', '\n'], " "));
            ExitCode::from(if e.kind() == "config" { 2 } else { 1 })
        }
    }
}

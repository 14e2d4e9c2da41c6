//! Command-line runner for the microlocal experiments.
//!
//! Exit status: 0 when the experiment's verdict holds, 2 when it does not,
//! 1 on any error (unreadable or invalid config, failed computation, bad
//! usage).

mod config;
mod emit;
mod experiments;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use toml::{Table, Value};

use config::{from_table, parse_table, read_table, Experiment, RunConfig};
use emit::{csv_document, json_document};
use experiments::{execute, Outcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{origin}: {message}")]
    Syntax { origin: String, message: String },
    #[error("config error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Run(#[from] microlocal::Error),
    #[error("cannot start the worker pool: {0}")]
    Threads(String),
}

#[derive(Parser)]
#[command(name = "microlocal", version, about = "Semiclassical wavefront experiments")]
struct Cli {
    /// Worker threads; results are identical for every count.
    #[arg(long, global = true, env = "MICROLOCAL_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write result files into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StateArgs {
    /// State family: coherent, real_quadratic, linear_phase, flat_gaussian,
    /// quadratic_gaussian or bump_gaussian.
    #[arg(long = "u")]
    u: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xi0: Option<f64>,
    /// Frequency of the linear_phase state.
    #[arg(long, allow_hyphen_values = true)]
    frequency: Option<f64>,
}

#[derive(Args)]
struct CenterArgs {
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in a config file and write its result files.
    Run {
        config: PathBuf,
        /// Overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Semiclassical Fourier transform of a catalog state.
    Transform {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        h: Option<f64>,
    },
    /// Coherent-state wavefront scan; prints the cell table.
    Scan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        state: StateArgs,
    },
    /// Fixed versus selected centers for the flat-at-the-origin symbol.
    Example1 {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        centers: CenterArgs,
    },
    /// Fixed versus selected centers for the staircase symbol.
    Example2 {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        centers: CenterArgs,
    },
    /// Fixed versus selected centers for any catalog symbol.
    Theorem1 {
        #[command(flatten)]
        common: Common,
        /// Inline TOML table, e.g. `{ kind = "bump", power = 1 }`.
        #[arg(long)]
        symbol: Option<String>,
        #[command(flatten)]
        centers: CenterArgs,
    },
    /// Detected versus predicted wavefront of a WKB state.
    Wkb {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        state: StateArgs,
    },
    /// Exponent recurrence, derivative-estimate constant and scaling checks.
    Bounds {
        #[command(flatten)]
        common: Common,
        /// Last index of the recurrence table.
        #[arg(long)]
        recurrence: Option<usize>,
        #[arg(long)]
        catalog_dx: Option<f64>,
    },
    /// The twelve acceptance criteria.
    Selftest {
        #[command(flatten)]
        common: Common,
        /// Comma-separated criterion numbers; all by default.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
    },
}

fn set(table: &mut Table, path: &[&str], value: Value) {
    let (last, parents) = path.split_last().expect("non-empty key path");
    let mut t = table;
    for key in parents {
        let entry = t.entry(key.to_string()).or_insert_with(|| Value::Table(Table::new()));
        if !entry.is_table() {
            *entry = Value::Table(Table::new());
        }
        t = entry.as_table_mut().expect("just made a table");
    }
    t.insert(last.to_string(), value);
}

fn apply_state(table: &mut Table, s: &StateArgs) {
    if let Some(u) = &s.u {
        let mut st = Table::new();
        st.insert("kind".into(), Value::String(u.clone()));
        if u == "coherent" {
            st.insert("x0".into(), Value::Float(0.5));
            st.insert("xi0".into(), Value::Float(-1.0));
        }
        table.insert("state".into(), Value::Table(st));
    } else if (s.x0.is_some() || s.xi0.is_some()) && !table.contains_key("state") {
        set(table, &["state", "kind"], Value::String("coherent".into()));
        set(table, &["state", "x0"], Value::Float(0.5));
        set(table, &["state", "xi0"], Value::Float(-1.0));
    }
    for (key, v) in [("x0", s.x0), ("xi0", s.xi0), ("frequency", s.frequency)] {
        if let Some(v) = v {
            set(table, &["state", key], Value::Float(v));
        }
    }
}

fn apply_centers(table: &mut Table, c: &CenterArgs) {
    for (key, v) in [("radius", c.radius), ("epsilon", c.epsilon)] {
        if let Some(v) = v {
            set(table, &["theorem1", key], Value::Float(v));
        }
    }
}

fn base_table(common: &Common, experiment: Experiment) -> Result<Table, CliError> {
    let mut table = match &common.config {
        Some(p) => read_table(p)?,
        None => Table::new(),
    };
    match table.get("experiment") {
        Some(Value::String(s)) if s != experiment.name() => {
            return Err(CliError::Schema {
                path: "experiment".into(),
                message: format!("the config names `{s}` but the subcommand is `{}`", experiment.name()),
            })
        }
        _ => {}
    }
    table.insert("experiment".into(), Value::String(experiment.name().into()));
    Ok(table)
}

/// Result files for `cfg`: always JSON, plus CSV when there is a table.
fn write_outputs(cfg: &RunConfig, dir: &Path, o: &Outcome) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })?;
    let echo = cfg.echo();
    let mut files = vec![(dir.join(format!("{}.json", cfg.stem())), json_document(&echo, &o.result, o.verdict))];
    if let Some(t) = &o.table {
        files.push((dir.join(format!("{}.csv", cfg.stem())), csv_document(&echo, t)));
    }
    for (path, body) in &files {
        std::fs::write(path, body).map_err(|source| CliError::Write { path: path.clone(), source })?;
    }
    Ok(files.into_iter().map(|f| f.0).collect())
}

/// Builds the config for a subcommand, runs it and prints its main output.
fn run_subcommand(table: Table, out: Option<PathBuf>) -> Result<bool, CliError> {
    let cfg = from_table(table)?;
    let o = execute(&cfg)?;
    let echo = cfg.echo();
    match (&o.text, cfg.experiment, &o.table) {
        (Some(text), _, _) => print!("{text}"),
        (None, Experiment::Scan | Experiment::Bounds, Some(t)) => print!("{}", csv_document(&echo, t)),
        _ => print!("{}", json_document(&echo, &o.result, o.verdict)),
    }
    if let Some(dir) = out.or_else(|| cfg.output.dir.clone()) {
        for f in write_outputs(&cfg, &dir, &o)? {
            eprintln!("wrote {}", f.display());
        }
    }
    eprintln!("{}: verdict {}", cfg.experiment.name(), o.verdict);
    Ok(o.verdict)
}

fn dispatch(command: Command) -> Result<bool, CliError> {
    match command {
        Command::Run { config, out } => {
            let cfg = from_table(read_table(&config)?)?;
            let o = execute(&cfg)?;
            let dir = out.or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("."));
            for f in write_outputs(&cfg, &dir, &o)? {
                println!("wrote {}", f.display());
            }
            println!("{}: verdict {}", cfg.experiment.name(), o.verdict);
            Ok(o.verdict)
        }
        Command::Transform { common, state, h } => {
            let mut t = base_table(&common, Experiment::Transform)?;
            apply_state(&mut t, &state);
            if let Some(h) = h {
                set(&mut t, &["transform", "h"], Value::Float(h));
            }
            run_subcommand(t, common.out)
        }
        Command::Scan { common, state } => {
            let mut t = base_table(&common, Experiment::Scan)?;
            apply_state(&mut t, &state);
            run_subcommand(t, common.out)
        }
        Command::Example1 { common, centers } => {
            let mut t = base_table(&common, Experiment::Example1)?;
            apply_centers(&mut t, &centers);
            run_subcommand(t, common.out)
        }
        Command::Example2 { common, centers } => {
            let mut t = base_table(&common, Experiment::Example2)?;
            apply_centers(&mut t, &centers);
            run_subcommand(t, common.out)
        }
        Command::Theorem1 { common, symbol, centers } => {
            let mut t = base_table(&common, Experiment::Theorem1)?;
            if let Some(s) = symbol {
                let parsed = parse_table(&format!("symbol = {s}"), "--symbol")?;
                t.insert("symbol".into(), parsed["symbol"].clone());
            }
            apply_centers(&mut t, &centers);
            run_subcommand(t, common.out)
        }
        Command::Wkb { common, state } => {
            let mut t = base_table(&common, Experiment::Wkb)?;
            apply_state(&mut t, &state);
            run_subcommand(t, common.out)
        }
        Command::Bounds { common, recurrence, catalog_dx } => {
            let mut t = base_table(&common, Experiment::Bounds)?;
            if let Some(n) = recurrence {
                set(&mut t, &["bounds", "recurrence"], Value::Integer(n as i64));
            }
            if let Some(dx) = catalog_dx {
                set(&mut t, &["bounds", "catalog_dx"], Value::Float(dx));
            }
            run_subcommand(t, common.out)
        }
        Command::Selftest { common, criteria } => {
            let mut t = base_table(&common, Experiment::Selftest)?;
            if !criteria.is_empty() {
                let list = criteria.iter().map(|&c| Value::Integer(c.into())).collect();
                set(&mut t, &["selftest", "criteria"], Value::Array(list));
            }
            run_subcommand(t, common.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {}", CliError::Threads(e.to_string()));
            return ExitCode::from(1);
        }
    }
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

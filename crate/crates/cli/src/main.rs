//! `rmps`: command-line driver for random-MPS projected ensembles.
//!
//! Every command prints a CSV table to stdout, or with `--out STEM` writes
//! `STEM.csv` and a `STEM.json` mirror carrying the resolved configuration
//! and a run manifest. CSV files start with a `# schema=1 seed=… config_hash=…`
//! line; the wall time only appears in JSON so that CSV output is
//! byte-reproducible.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use projected_ensemble::estimator::{
    forced_moments, oracle_moments, overlap_histogram, sample_moments, EnsembleConfig, MomentEstimate, SamplingMode,
};
use projected_ensemble::permgroup::ReplicaShape;
use projected_ensemble::replica::{contract_with, ContractionPath, ReplicaChainSpec};
use projected_ensemble::theory::{leading_order, vacuum_limit, PredictionParams};
use projected_ensemble::{EnsembleKind, Error, Setup};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(name = "rmps", version, about = "Projected ensembles of random matrix-product states")]
struct Cli {
    /// Worker threads for realization-parallel commands.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write STEM.csv and STEM.json instead of printing CSV.
    #[arg(long, global = true, value_name = "STEM")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scaling-limit predictions.
    Predict(PredictArgs),
    /// Exact replica-chain average F^(k,n).
    Contract(ConfigArgs),
    /// Monte-Carlo moments from Born or forced sampling.
    Sample(ConfigArgs),
    /// Exact per-circuit frame potentials from the statevector simulator.
    Oracle(ConfigArgs),
    /// Histogram of Born-mode overlaps.
    Histogram(HistogramArgs),
}

/// Experiment configuration; flags override `--config` file entries.
#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// Plain-text `key = value` file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    setup: Option<String>,
    /// haar or gaussian.
    #[arg(long)]
    kind: Option<String>,
    /// Gaussian entry variance overriding the 1/q default.
    #[arg(long)]
    variance: Option<String>,
    #[arg(long)]
    na: Option<String>,
    #[arg(long)]
    nb: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    chi: Option<String>,
    /// Largest moment order.
    #[arg(long)]
    k: Option<String>,
    /// Replica parameter n.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    pairs: Option<String>,
    #[arg(long)]
    realizations: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// born or forced.
    #[arg(long)]
    mode: Option<String>,
    /// independent or all_pairs.
    #[arg(long)]
    pair_mode: Option<String>,
    #[arg(long)]
    exclude_coincidences: bool,
    /// contract only: auto, dense or matrix-free.
    #[arg(long, default_value = "auto")]
    path: String,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long, default_value = "staircase")]
    setup: String,
    #[arg(long, default_value = "haar")]
    kind: String,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Largest moment order.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Scaling variable.
    #[arg(long)]
    x: f64,
    /// Replica parameter (glued only); defaults to the physical 1 − k.
    #[arg(long, allow_hyphen_values = true)]
    n: Option<i64>,
    /// Emit the overlap density instead of moment ratios.
    #[arg(long)]
    pdf: bool,
    /// Single point for --pdf.
    #[arg(long, conflicts_with_all = ["umax", "points"])]
    u: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    umax: f64,
    #[arg(long, default_value_t = 101)]
    points: usize,
}

#[derive(Args)]
struct HistogramArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    #[arg(long, default_value_t = 10.0)]
    umax: f64,
}

/// A computed table plus the provenance needed for the manifest.
struct Table {
    command: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
    config: Value,
    seed: u64,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<EnsembleConfig, Error> {
        let mut cfg = EnsembleConfig::default();
        if let Some(path) = &self.config {
            for (i, line) in fs::read_to_string(path)?.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
                cfg.set_field(key.trim(), value.trim())?;
            }
        }
        let flags = [
            ("setup", &self.setup),
            ("kind", &self.kind),
            ("variance", &self.variance),
            ("n_a", &self.na),
            ("n_b", &self.nb),
            ("d", &self.d),
            ("chi", &self.chi),
            ("k_max", &self.k),
            ("n", &self.n),
            ("pairs_per_state", &self.pairs),
            ("realizations", &self.realizations),
            ("seed", &self.seed),
            ("sampling_mode", &self.mode),
            ("pair_mode", &self.pair_mode),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set_field(key, v)?;
            }
        }
        if self.exclude_coincidences {
            cfg.exclude_coincidences = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn config_json(cfg: &EnsembleConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn moment_table(command: &'static str, cfg: &EnsembleConfig, est: &[MomentEstimate]) -> Table {
    Table {
        command,
        header: vec![
            "k",
            "mean",
            "stderr",
            "ratio_to_haar",
            "ratio_to_haar_stderr",
            "ratio_to_first_moment",
            "ratio_to_first_moment_stderr",
            "n_samples",
        ],
        rows: est
            .iter()
            .map(|e| {
                vec![
                    e.k as f64,
                    e.mean,
                    e.stderr,
                    e.ratio_to_haar,
                    e.ratio_to_haar_stderr,
                    e.ratio_to_first_moment,
                    e.ratio_to_first_moment_stderr,
                    e.n_samples as f64,
                ]
            })
            .collect(),
        config: config_json(cfg),
        seed: cfg.seed,
    }
}

fn cmd_predict(a: &PredictArgs) -> Result<Table, Error> {
    let setup: Setup = a.setup.parse()?;
    let kind: EnsembleKind = a.kind.parse()?;
    let params = |k: usize| PredictionParams { d: a.d, k, n: a.n.unwrap_or(1 - k as i64), x: a.x, setup, kind };
    let config = json!({ "setup": setup, "kind": kind, "d": a.d, "k": a.k, "x": a.x, "n": a.n, "pdf": a.pdf });
    if a.pdf {
        let p = params(1);
        let grid: Vec<f64> = match a.u {
            Some(u) => vec![u],
            None => {
                let steps = a.points.max(2) - 1;
                (0..=steps).map(|i| a.umax * i as f64 / steps as f64).collect()
            }
        };
        let rows = grid.iter().map(|&u| Ok(vec![u, p.pdf(u)?])).collect::<Result<_, Error>>()?;
        return Ok(Table { command: "predict", header: vec!["u", "density"], rows, config, seed: 0 });
    }
    let rows = (1..=a.k).map(|k| Ok(vec![a.x, k as f64, params(k).ratio()?])).collect::<Result<_, Error>>()?;
    Ok(Table { command: "predict", header: vec!["x", "k", "ratio"], rows, config, seed: 0 })
}

fn cmd_contract(a: &ConfigArgs) -> Result<Table, Error> {
    let cfg = a.resolve()?;
    if cfg.n < 0 {
        return Err(Error::Unsupported("the exact chain needs n ≥ 0".into()));
    }
    let path = match a.path.as_str() {
        "auto" => ContractionPath::Auto,
        "dense" => ContractionPath::Dense,
        "matrix-free" | "matrix_free" => ContractionPath::MatrixFree,
        other => return Err(Error::Parse(format!("unknown contraction path '{other}'"))),
    };
    let shape = ReplicaShape::new(cfg.n as usize, cfg.k_max)?;
    let spec = match cfg.setup {
        Setup::Staircase => ReplicaChainSpec::staircase(shape, cfg.n_a, cfg.n_b, cfg.d, cfg.chi, cfg.kind)?,
        Setup::Glued => ReplicaChainSpec::glued(shape, cfg.n_a, cfg.d, cfg.chi, cfg.kind)?,
    };
    let f = contract_with(&spec, path)?;
    let args = (cfg.setup, shape, cfg.n_a, cfg.n_b, cfg.d, cfg.chi, cfg.kind);
    let lead = leading_order(args.0, args.1, args.2, args.3, args.4, args.5, args.6);
    let vacuum = vacuum_limit(args.0, args.1, args.2, args.3, args.4, args.5, args.6)?;
    Ok(Table {
        command: "contract",
        header: vec!["k", "n", "mantissa", "log_scale", "ln_value", "ratio_to_leading_order", "ratio_to_vacuum_limit"],
        rows: vec![vec![
            cfg.k_max as f64,
            cfg.n as f64,
            f.mantissa,
            f.log_scale,
            f.ln(),
            f.ratio(&lead),
            f.ratio(&vacuum),
        ]],
        config: config_json(&cfg),
        seed: cfg.seed,
    })
}

fn cmd_sample(a: &ConfigArgs) -> Result<Table, Error> {
    let cfg = a.resolve()?;
    let est = match cfg.sampling_mode {
        SamplingMode::Born => sample_moments(&cfg)?,
        SamplingMode::Forced => forced_moments(&cfg)?,
    };
    Ok(moment_table("sample", &cfg, &est))
}

fn cmd_oracle(a: &ConfigArgs) -> Result<Table, Error> {
    let mut cfg = a.resolve()?;
    if a.n.is_none() {
        // physical ensemble unless a replica parameter was asked for
        cfg.n = -1;
    }
    let est = oracle_moments(&cfg)?;
    Ok(moment_table("oracle", &cfg, &est))
}

fn cmd_histogram(a: &HistogramArgs) -> Result<Table, Error> {
    let cfg = a.config.resolve()?;
    let h = overlap_histogram(&cfg, a.bins, a.umax)?;
    let rows = (0..a.bins)
        .map(|i| vec![h.bin_centers[i], h.densities[i], h.errors[i], h.densities[i] * h.width, h.counts[i] as f64])
        .collect();
    let mut config = config_json(&cfg);
    config["bins"] = json!(a.bins);
    config["umax"] = json!(a.umax);
    Ok(Table {
        command: "histogram",
        header: vec!["bin_center", "density", "error", "probability", "count"],
        rows,
        config,
        seed: cfg.seed,
    })
}

fn config_hash(table: &Table) -> String {
    let text = format!("{}:{}", table.command, table.config);
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

fn render_csv(table: &Table, hash: &str) -> String {
    let mut s = format!("# schema={SCHEMA} seed={} config_hash={hash}\n", table.seed);
    s.push_str(&table.header.join(","));
    s.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Shortest round-trip decimal, switching to exponent form for very large
/// or small magnitudes.
fn format_number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn render_json(table: &Table, hash: &str, outputs: &[PathBuf], wall_time: f64) -> String {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| Value::Object(table.header.iter().zip(r).map(|(h, v)| (h.to_string(), json!(v))).collect()))
        .collect();
    let doc = json!({
        "schema": SCHEMA,
        "command": table.command,
        "seed": table.seed,
        "config_hash": hash,
        "config": table.config,
        "rows": rows,
        "manifest": {
            "tool_version": env!("CARGO_PKG_VERSION"),
            "wall_time": wall_time,
            "outputs": outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        },
    });
    serde_json::to_string_pretty(&doc).expect("json renders") + "\n"
}

/// Write `contents` to `path` through a temporary file and a rename.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    let result = fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(contents.as_bytes()).and_then(|_| f.sync_all()))
        .and_then(|_| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn emit(table: &Table, out: Option<&Path>, started: Instant) -> Result<(), Error> {
    let hash = config_hash(table);
    let csv = render_csv(table, &hash);
    let Some(stem) = out else {
        print!("{csv}");
        return Ok(());
    };
    let csv_path = stem.with_extension("csv");
    let json_path = stem.with_extension("json");
    let outputs = [csv_path.clone(), json_path.clone()];
    let json = render_json(table, &hash, &outputs, started.elapsed().as_secs_f64());
    let parent = csv_path.parent().filter(|p| !p.as_os_str().is_empty());
    let result = parent
        .map_or(Ok(()), fs::create_dir_all)
        .and_then(|_| write_atomic(&csv_path, &csv))
        .and_then(|_| write_atomic(&json_path, &json));
    if let Err(e) = result {
        for p in &outputs {
            let _ = fs::remove_file(p);
        }
        return Err(e.into());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Error> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    }
    let started = Instant::now();
    let table = match &cli.command {
        Command::Predict(a) => cmd_predict(a)?,
        Command::Contract(a) => cmd_contract(a)?,
        Command::Sample(a) => cmd_sample(a)?,
        Command::Oracle(a) => cmd_oracle(a)?,
        Command::Histogram(a) => cmd_histogram(a)?,
    };
    emit(&table, cli.out.as_deref(), started)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

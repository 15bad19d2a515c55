//! `hermitegf`: runs the numerical studies and fits 1D data from the command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hermitegf::experiments::{format_float, run_experiment, ExperimentConfig, ExperimentKind};
use hermitegf::grids::uniform_nodes;
use hermitegf::interp1d::{fit_hermitegf, fit_hermitegf_qr, fit_rbf_direct};
use serde_json::{Map, Value};

const THREADS_ENV: &str = "HERMITEGF_THREADS";

#[derive(Parser)]
#[command(
    name = "hermitegf",
    version,
    about = "Stable Gaussian RBF interpolation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Table 1: error against j_add and N with HermiteGF-QR.
    Table1(AliasArgs),
    /// Error against the shape parameter for RBF-Direct and HermiteGF.
    EpsSweep(AliasArgs),
    /// Condition number of the collocation matrix against gamma and N.
    Cond(AliasArgs),
    /// Error against N for several gamma*L.
    Gamma(AliasArgs),
    /// Tensor-product interpolation error against N in 1 to 3 dimensions.
    Tensor(AliasArgs),
    /// Error and conditioning on uniform collocation nodes.
    Uniform(AliasArgs),
    /// Anisotropic fit on Halton nodes against isotropic fits.
    Aniso(AliasArgs),
    /// Print the preset config of an experiment.
    Preset { name: String },
    /// Fit 1D data from a CSV file (columns x,f) and evaluate the interpolant.
    Interp(InterpArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON sidecar with config echo, version and timings.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct AliasArgs {
    /// JSON overrides applied on top of the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Single override, e.g. `--set epsilon=0.2` or `--set n_values=[10,20]`.
    #[arg(long = "set", value_name = "KEY=JSON")]
    set: Vec<String>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    RbfDirect,
    Hermitegf,
    HermitegfQr,
}

#[derive(Args)]
struct InterpArgs {
    /// CSV with header and columns x,f.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "hermitegf")]
    method: MethodArg,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 3.0)]
    gamma: f64,
    /// Expansion size for hermitegf-qr (defaults to N + 10).
    #[arg(long)]
    m_terms: Option<usize>,
    /// Interval as `a,b`; defaults to the data range.
    #[arg(long, value_delimiter = ',', num_args = 2, allow_hyphen_values = true)]
    interval: Option<Vec<f64>>,
    /// Number of uniform evaluation points on the interval.
    #[arg(long, default_value_t = 100)]
    n_eval: usize,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Io(anyhow::Error),
    Config(anyhow::Error),
    Numerical(anyhow::Error),
}

impl Failure {
    fn from_lib(e: hermitegf::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.into())
        } else {
            Failure::Config(e.into())
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, e) = match f {
                Failure::Io(e) => (1, e),
                Failure::Config(e) => (2, e),
                Failure::Numerical(e) => (3, e),
            };
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    let alias = |kind, args: AliasArgs| -> CliResult<()> {
        let cfg = alias_config(kind, &args)?;
        execute(cfg, &args.out)
    };
    match command {
        Command::Run { config, out } => {
            let text = read_config(&config)?;
            let cfg = ExperimentConfig::from_json_str(&text).map_err(Failure::from_lib)?;
            execute(cfg, &out)
        }
        Command::Table1(a) => alias(ExperimentKind::Table1, a),
        Command::EpsSweep(a) => alias(ExperimentKind::EpsSweep, a),
        Command::Cond(a) => alias(ExperimentKind::Cond, a),
        Command::Gamma(a) => alias(ExperimentKind::Gamma, a),
        Command::Tensor(a) => alias(ExperimentKind::Tensor, a),
        Command::Uniform(a) => alias(ExperimentKind::Uniform, a),
        Command::Aniso(a) => alias(ExperimentKind::Aniso, a),
        Command::Preset { name } => {
            let kind = name.parse::<ExperimentKind>().map_err(Failure::from_lib)?;
            println!("{}", ExperimentConfig::preset(kind).to_json_string());
            Ok(())
        }
        Command::Interp(args) => interp(&args),
    }
}

fn read_config(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))
        .map_err(Failure::Config)
}

fn alias_config(kind: ExperimentKind, args: &AliasArgs) -> CliResult<ExperimentConfig> {
    let mut overrides = Map::new();
    if let Some(path) = &args.config {
        let text = read_config(path)?;
        match serde_json::from_str::<Value>(&text) {
            Ok(Value::Object(m)) => overrides = m,
            Ok(_) => return Err(Failure::Config(anyhow!("config must be a JSON object"))),
            Err(e) => {
                return Err(Failure::Config(anyhow!(
                    "invalid JSON in {}: {e}",
                    path.display()
                )))
            }
        }
    }
    for item in &args.set {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| Failure::Config(anyhow!("--set expects KEY=VALUE, got '{item}'")))?;
        // Bare words such as `f3` or `uniform` are taken as strings.
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        overrides.insert(key.to_string(), value);
    }
    match overrides.get("experiment") {
        Some(Value::String(s)) if s != kind.name() => {
            return Err(Failure::Config(anyhow!(
                "config names experiment '{s}' but the '{kind}' subcommand was used"
            )))
        }
        _ => {}
    }
    overrides.remove("experiment");
    ExperimentConfig::preset(kind)
        .merged(overrides)
        .map_err(Failure::from_lib)
}

fn apply_thread_env(cfg: &mut ExperimentConfig) -> CliResult<()> {
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        cfg.threads = raw
            .trim()
            .parse()
            .map_err(|_| Failure::Config(anyhow!("{THREADS_ENV} must be a count, got '{raw}'")))?;
    }
    Ok(())
}

fn execute(mut cfg: ExperimentConfig, out: &OutputArgs) -> CliResult<()> {
    apply_thread_env(&mut cfg)?;
    log::info!("running {} with {} threads", cfg.experiment, cfg.threads);
    let result = run_experiment(&cfg).map_err(Failure::from_lib)?;
    result
        .table
        .write_csv(&out.out)
        .with_context(|| format!("writing {}", out.out.display()))
        .map_err(Failure::Io)?;
    if let Some(path) = &out.json {
        let text = serde_json::to_string_pretty(&result.sidecar(&cfg)).expect("sidecar serializes");
        std::fs::write(path, text + "\n")
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Io)?;
    }
    Ok(())
}

fn interp(args: &InterpArgs) -> CliResult<()> {
    let mut reader = csv::Reader::from_path(&args.data)
        .with_context(|| format!("reading {}", args.data.display()))
        .map_err(Failure::Config)?;
    let (mut xs, mut fs) = (Vec::new(), Vec::new());
    for (line, record) in reader.records().enumerate() {
        let record = record
            .with_context(|| format!("parsing {}", args.data.display()))
            .map_err(Failure::Config)?;
        let field = |i: usize| -> CliResult<f64> {
            record
                .get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| {
                    Failure::Config(anyhow!("row {}: expected two numbers x,f", line + 1))
                })
        };
        xs.push(field(0)?);
        fs.push(field(1)?);
    }
    if xs.is_empty() {
        return Err(Failure::Config(anyhow!(
            "no data rows in {}",
            args.data.display()
        )));
    }
    let interval = match &args.interval {
        Some(v) => [v[0], v[1]],
        None => [
            xs.iter().copied().fold(f64::INFINITY, f64::min),
            xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ],
    };
    let model = match args.method {
        MethodArg::RbfDirect => fit_rbf_direct(&xs, &xs, &fs, args.epsilon),
        MethodArg::Hermitegf => fit_hermitegf(&xs, &fs, args.gamma, args.epsilon, interval),
        MethodArg::HermitegfQr => {
            let m = args.m_terms.unwrap_or(xs.len() + 10);
            fit_hermitegf_qr(&xs, &xs, &fs, args.gamma, args.epsilon, interval, m)
        }
    }
    .map_err(Failure::from_lib)?;
    let points = uniform_nodes(args.n_eval, interval).map_err(|e| Failure::Config(e.into()))?;
    let values = model.evaluate(&points).map_err(Failure::from_lib)?;
    let mut text = String::from("x,s\n");
    for (x, s) in points.iter().zip(&values) {
        text.push_str(&format!("{},{}\n", format_float(*x), format_float(*s)));
    }
    std::fs::write(&args.out, text)
        .with_context(|| format!("writing {}", args.out.display()))
        .map_err(Failure::Io)
}

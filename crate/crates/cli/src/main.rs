use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mmsb_core::config::parse_key_values;
use mmsb_core::eval::{emit_report, OracleFixture, ReportFormat};
use mmsb_core::experiment::{run_experiment, run_grid, GridSpec};
use mmsb_core::rng::{self, Lane};
use mmsb_core::stream::{
    assortative, cv_split, generate_synthetic, load_edge_list, load_masks, save_edge_list,
    save_ground_truth, save_masks, ObservationStream, SplitMask, SyntheticConfig,
};
use mmsb_core::{Error, EvalReport, Result, RunConfig};

#[derive(Parser)]
#[command(name = "mmsb", version, about = "Streaming MMSB inference experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic stream (and optionally its ground truth).
    Generate(GenerateArgs),
    /// Write five-fold train/validation/test dyad masks for a stream.
    Split(SplitArgs),
    /// Run one algorithm and report per-interval held-out log-likelihood.
    Run(RunArgs),
    /// Select settings on validation data and report the winner.
    Grid(GridArgs),
    /// Evaluate exact-enumeration oracle fixtures.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 60)]
    nodes: usize,
    #[arg(long, default_value_t = 3)]
    groups: usize,
    #[arg(long, default_value_t = 10)]
    intervals: u32,
    #[arg(long, default_value_t = 1200)]
    records_per_interval: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha_gen: f64,
    /// Diagonal of the assortative block matrix.
    #[arg(long, default_value_t = 0.9)]
    diag: f64,
    #[arg(long, default_value_t = 0.05)]
    off: f64,
    /// Switch to the column-shifted block matrix from this interval on.
    #[arg(long)]
    shift_at: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge-list output.
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth sidecar output.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    stream: PathBuf,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0.5)]
    validation_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Run settings. Values given here override the `--config` file.
#[derive(Args)]
struct RunFlags {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    k: Option<String>,
    /// One value, or K comma-separated values.
    #[arg(long)]
    alpha: Option<String>,
    /// `psi_one,psi_zero`.
    #[arg(long)]
    psi: Option<String>,
    #[arg(long)]
    sweeps: Option<String>,
    #[arg(long)]
    rejuvenation: Option<String>,
    #[arg(long)]
    particles: Option<String>,
    #[arg(long)]
    ess_threshold: Option<String>,
    #[arg(long)]
    lambda0: Option<String>,
    /// `inverse_rate` or `deficit`.
    #[arg(long)]
    tau_strategy: Option<String>,
    #[arg(long)]
    implicit_absence: Option<String>,
    /// `alternating` or `joint`.
    #[arg(long)]
    pair_mode: Option<String>,
    #[arg(long)]
    decorrelate: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    fold: Option<String>,
    #[arg(long)]
    stream: Option<String>,
    #[arg(long)]
    masks: Option<String>,
    /// Report path stem; `.csv` and `.json` are written next to each other.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    flags: RunFlags,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    flags: RunFlags,
    /// Axis `key=v1,v2,...`; repeat for a Cartesian product.
    #[arg(long = "grid", required = true)]
    axes: Vec<String>,
}

#[derive(Args)]
struct OracleArgs {
    /// Fixture files.
    #[arg(required = true)]
    fixtures: Vec<PathBuf>,
    /// Store computed values as the expected values.
    #[arg(long)]
    update: bool,
}

impl RunFlags {
    fn resolve(&self) -> Result<RunConfig> {
        let mut pairs = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                    path: path.clone(),
                    source: e,
                })?;
                parse_key_values(&text)?
            }
            None => BTreeMap::new(),
        };
        let flags = [
            ("algorithm", &self.algorithm),
            ("k", &self.k),
            ("alpha", &self.alpha),
            ("psi", &self.psi),
            ("sweeps", &self.sweeps),
            ("rejuvenation", &self.rejuvenation),
            ("particles", &self.particles),
            ("ess_threshold", &self.ess_threshold),
            ("lambda0", &self.lambda0),
            ("tau_strategy", &self.tau_strategy),
            ("implicit_absence", &self.implicit_absence),
            ("pair_mode", &self.pair_mode),
            ("decorrelate", &self.decorrelate),
            ("seed", &self.seed),
            ("fold", &self.fold),
            ("stream", &self.stream),
            ("masks", &self.masks),
            ("out", &self.out),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                pairs.insert(key.to_owned(), v.clone());
            }
        }
        RunConfig::from_pairs(&pairs)
    }
}

fn load_inputs(config: &RunConfig) -> Result<(ObservationStream, SplitMask)> {
    let path = config
        .stream
        .as_ref()
        .ok_or_else(|| Error::Config("no stream given (--stream)".into()))?;
    let stream = load_edge_list(path)?;
    let mask = match &config.masks {
        Some(masks) => load_masks(masks, stream.nodes())?
            .into_iter()
            .find(|m| m.fold == config.fold)
            .ok_or_else(|| Error::Data(format!("{}: no fold {}", masks.display(), config.fold)))?,
        None => {
            eprintln!("warning: no masks given, every dyad is training data");
            SplitMask::all_train(&stream.dyad_universe())
        }
    };
    Ok((stream, mask))
}

fn print_report(report: &EvalReport) {
    println!("interval  test_loglik  baseline_loglik  records");
    for (x, b) in report.per_interval.iter().zip(&report.baseline_per_interval) {
        let flag = if x.is_empty() { "  (empty)" } else { "" };
        println!("{:>8}  {:>11.4}  {:>15.4}  {:>7}{flag}", x.interval, x.loglik, b.loglik, x.records);
    }
    match report.improvement {
        Some(v) => println!("improvement: {v:.6}"),
        None => println!("improvement: n/a (no test records)"),
    }
    if report.metadata.discards > 0 {
        println!("history discards: {}", report.metadata.discards);
    }
    if report.clamp_events() > 0 {
        println!("clamped probabilities: {}", report.clamp_events());
    }
}

fn write_report(report: &EvalReport, out: Option<&Path>) -> Result<()> {
    if let Some(out) = out {
        for p in emit_report(report, out, ReportFormat::Both)? {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn generate(args: &GenerateArgs) -> Result<()> {
    let mut config = SyntheticConfig {
        nodes: args.nodes,
        groups: args.groups,
        intervals: args.intervals,
        alpha_gen: args.alpha_gen,
        schedule: vec![(1, assortative(args.groups, args.diag, args.off))],
        records_per_interval: args.records_per_interval,
        seed: args.seed,
    };
    if let Some(t) = args.shift_at {
        config = config.with_shift_at(t);
    }
    let data = generate_synthetic(&config)?;
    save_edge_list(&data.stream, &args.out)?;
    println!("wrote {} ({} records)", args.out.display(), data.stream.len());
    if let Some(truth) = &args.truth {
        save_ground_truth(&data.truth, truth)?;
        println!("wrote {}", truth.display());
    }
    Ok(())
}

fn split(args: &SplitArgs) -> Result<()> {
    let stream = load_edge_list(&args.stream)?;
    let mut rng = rng::stream(args.seed, Lane::Split, 0, 0);
    let masks = cv_split(&stream.dyad_universe(), args.folds, args.validation_fraction, &mut rng)?;
    save_masks(&masks, stream.nodes(), &args.out)?;
    println!("wrote {} ({} folds)", args.out.display(), masks.len());
    Ok(())
}

fn run(args: &RunArgs) -> Result<()> {
    let config = args.flags.resolve()?;
    let (stream, mask) = load_inputs(&config)?;
    let report = run_experiment(&config, &stream, &mask)?;
    print_report(&report);
    write_report(&report, config.out.as_deref())
}

fn grid(args: &GridArgs) -> Result<()> {
    let config = args.flags.resolve()?;
    let spec = GridSpec {
        axes: args
            .axes
            .iter()
            .map(|a| GridSpec::parse_axis(a))
            .collect::<Result<_>>()?,
    };
    let (stream, mask) = load_inputs(&config)?;
    let outcome = run_grid(&config, &spec, &stream, &mask)?;
    for (i, cell) in outcome.cells.iter().enumerate() {
        let setting: Vec<String> = spec
            .axes
            .iter()
            .map(|(k, _)| format!("{k}={}", cell.config.to_pairs().get(k).cloned().unwrap_or_default()))
            .collect();
        let score = cell.validation.map_or("n/a".into(), |v| format!("{v:.4}"));
        let mark = if i == outcome.best_index { "  <- best" } else { "" };
        println!("cell {i}: {}  validation {score}{mark}", setting.join(" "));
    }
    print_report(&outcome.report);
    write_report(&outcome.report, config.out.as_deref())
}

fn oracle(args: &OracleArgs) -> Result<bool> {
    let mut all_match = true;
    for path in &args.fixtures {
        let mut fixture = OracleFixture::load(path)?;
        let value = fixture.compute()?;
        match fixture.expected {
            Some(e) if (e - value).abs() > 1e-9 && !args.update => {
                all_match = false;
                println!("{}: {value:.12} MISMATCH (expected {e:.12})", path.display());
            }
            Some(e) => println!("{}: {value:.12} (expected {e:.12})", path.display()),
            None => println!("{}: {value:.12}", path.display()),
        }
        if args.update {
            fixture.expected = Some(value);
            std::fs::write(path, fixture.to_text()).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
        }
    }
    Ok(all_match)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => generate(a).map(|_| true),
        Command::Split(a) => split(a).map(|_| true),
        Command::Run(a) => run(a).map(|_| true),
        Command::Grid(a) => grid(a).map(|_| true),
        Command::Oracle(a) => oracle(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 3 } else { 2 })
        }
    }
}

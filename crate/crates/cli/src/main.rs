//! `qdi`: command-line front end for the discord-indicator library.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qdi_core::discord::{discord_report, DiscordReport};
use qdi_core::ensemble::{discord_sweep, Measure, RandomEnsembleSpec};
use qdi_core::experiment::{
    estimate_q_side, throughput, DelayScheme, ExperimentConfig, MomentEstimate, ThroughputReport, THROUGHPUT_CSV_HEADER,
};
use qdi_core::io::{parse_experiment_config, parse_state, sig17, to_json};
use qdi_core::robustness::robustness_sweep;
use qdi_core::{Side, TwoQubitState};

const DEFAULT_SWEEP_COUNT: u64 = 100_000;
const DEFAULT_PAIRS: u64 = 10_000;
const FULL_COUNT: u64 = 1_000_000;

#[derive(Parser)]
#[command(name = "qdi", version, about = "Discord indicators of two-qubit states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Geometric discord and indicators of a state file.
    Analyze(AnalyzeArgs),
    /// Indicators over a random ensemble, one CSV row per state.
    Sweep(SweepArgs),
    /// Monte Carlo coincidence experiment for M1, M2 and Q.
    Simulate(SimulateArgs),
    /// Analytic event rates over a grid of detector efficiencies.
    Throughput(ThroughputArgs),
    /// Q from mismatched sources versus Q of their average.
    Robustness(RobustnessArgs),
}

#[derive(Args, Serialize)]
struct AnalyzeArgs {
    state_file: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum MeasureArg {
    Hs,
    Haar,
}

#[derive(Args, Serialize)]
struct SweepArgs {
    /// Number of states [default: 100000, or 1000000 with --full].
    #[arg(long)]
    count: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = MeasureArg::Hs)]
    measure: MeasureArg,
    /// Use 10^6 states.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum SchemeArg {
    Det,
    Prob,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum SideArg {
    A,
    B,
}

#[derive(Args, Serialize)]
struct ExperimentArgs {
    /// JSON file with ExperimentConfig fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    tau_ns: Option<f64>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long)]
    strict_delay_factor: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Iterations of the protocol.
    #[arg(long)]
    count: Option<u64>,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => parse_experiment_config(&read(path)?)?,
            None => ExperimentConfig::default(),
        };
        if let Some(eta) = self.eta {
            cfg.eta = eta;
        }
        if let Some(tau) = self.tau_ns {
            cfg.tau_ns = tau;
        }
        if let Some(scheme) = self.scheme {
            cfg.delay_scheme = match scheme {
                SchemeArg::Det => DelayScheme::Deterministic,
                SchemeArg::Prob => DelayScheme::Probabilistic,
            };
        }
        if self.strict_delay_factor {
            cfg.strict_delay_factor = true;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(n) = self.count {
            cfg.iterations = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    state_file: PathBuf,
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[arg(long, value_enum, default_value_t = SideArg::A)]
    side: SideArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ThroughputArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Comma-separated efficiencies in (0, 1] [default: 0.05, 0.10, ..., 1.00].
    #[arg(long, value_delimiter = ',')]
    eta_grid: Option<Vec<f64>>,
    /// Measurements of each moment to collect.
    #[arg(long, default_value_t = 1000)]
    n_target: u64,
    /// Also write the full reports as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct RobustnessArgs {
    /// Number of pairs [default: 10000, or 1000000 with --full].
    #[arg(long)]
    count: Option<u64>,
    #[arg(long, default_value_t = 0.9)]
    f_min: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use 10^6 pairs.
    #[arg(long)]
    full: bool,
    /// Summary JSON path [default: next to --out].
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Core(qdi_core::Error),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use qdi_core::Error as E;
        match self {
            CliError::Core(E::Parse(_) | E::InvalidConfig(_)) => 2,
            CliError::Core(E::InvalidState(_) | E::NotAState { .. }) => 3,
            CliError::Core(E::InsufficientStatistics { .. }) => 4,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<qdi_core::Error> for CliError {
    fn from(e: qdi_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Writes `contents` to `out`, or to stdout when no path is given.
fn emit(out: Option<&Path>, contents: &str, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write(path, contents)?;
            written.push(path.to_path_buf());
        }
        None => print!("{contents}"),
    }
    Ok(())
}

fn csv_text(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of ASCII numbers"))
}

#[derive(Serialize)]
struct Manifest<'a, A: Serialize> {
    command: &'a str,
    args: &'a A,
    config: Option<&'a ExperimentConfig>,
    seed: Option<u64>,
    code_version: &'static str,
    outputs: Vec<String>,
    wall_clock_s: f64,
}

struct Run<'a, A: Serialize> {
    command: &'a str,
    args: &'a A,
    out: Option<&'a Path>,
    started: Instant,
}

impl<'a, A: Serialize> Run<'a, A> {
    fn new(command: &'a str, args: &'a A, out: Option<&'a Path>) -> Self {
        Self { command, args, out, started: Instant::now() }
    }

    /// The manifest goes last, so its presence marks a complete run.
    fn finish(self, config: Option<&ExperimentConfig>, seed: Option<u64>, written: &[PathBuf]) -> Result<(), CliError> {
        let Some(out) = self.out else { return Ok(()) };
        let manifest = Manifest {
            command: self.command,
            args: self.args,
            config,
            seed,
            code_version: env!("CARGO_PKG_VERSION"),
            outputs: written.iter().map(|p| p.display().to_string()).collect(),
            wall_clock_s: self.started.elapsed().as_secs_f64(),
        };
        write(&manifest_path(out), &to_json(&manifest))
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn load_state(path: &Path) -> Result<TwoQubitState, CliError> {
    Ok(parse_state(&read(path)?)?)
}

fn analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let run = Run::new("analyze", args, args.out.as_deref());
    let report: DiscordReport = discord_report(&load_state(&args.state_file)?);
    let text = to_json(&report);
    print!("{text}");
    let mut written = Vec::new();
    if let Some(out) = &args.out {
        write(out, &text)?;
        written.push(out.clone());
    }
    run.finish(None, None, &written)
}

fn opt(x: Option<f64>) -> String {
    x.map(sig17).unwrap_or_default()
}

fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let run = Run::new("sweep", args, args.out.as_deref());
    let count = args.count.unwrap_or(if args.full { FULL_COUNT } else { DEFAULT_SWEEP_COUNT });
    let measure = match args.measure {
        MeasureArg::Hs => Measure::HilbertSchmidt,
        MeasureArg::Haar => Measure::PureHaar,
    };
    let rows = discord_sweep(&RandomEnsembleSpec { measure, seed: args.seed, count: count as usize })?;
    let violations = rows
        .iter()
        .filter(|r| !(r.q_a >= 0.0 && r.q_a <= r.d_a + 1e-9 && r.q_b >= 0.0 && r.q_b <= r.d_b + 1e-9))
        .count();
    let negative = rows.iter().filter(|r| r.radicand_a < -1e-10 || r.radicand_b < -1e-10).count();
    let text = csv_text(
        &["d_a", "q_a", "v_a_or_empty", "d_b", "q_b", "purity"],
        rows.iter().map(|r| vec![sig17(r.d_a), sig17(r.q_a), opt(r.v_a), sig17(r.d_b), sig17(r.q_b), sig17(r.purity)]),
    )?;
    let mut written = Vec::new();
    emit(args.out.as_deref(), &text, &mut written)?;
    eprintln!("states {count}, bound violations {violations}, negative radicands {negative}");
    run.finish(None, Some(args.seed), &written)
}

#[derive(Serialize)]
struct MomentSummary<'a> {
    moment: &'static str,
    value: f64,
    std_error: f64,
    n_success: u64,
    n_total: u64,
    histogram: &'a [(i64, u64)],
    wall_config: &'a ExperimentConfig,
}

impl<'a> MomentSummary<'a> {
    fn new(e: &'a MomentEstimate, cfg: &'a ExperimentConfig) -> Self {
        Self {
            moment: e.moment.name(),
            value: e.value,
            std_error: e.std_error,
            n_success: e.n_success,
            n_total: e.n_total,
            histogram: &e.histogram,
            wall_config: cfg,
        }
    }
}

#[derive(Serialize)]
struct QSummary {
    value: f64,
    std_error: f64,
    clamped: bool,
    bootstrap_resamples: usize,
    bootstrap_valid: usize,
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    side: Side,
    m1: MomentSummary<'a>,
    m2: MomentSummary<'a>,
    q: QSummary,
}

fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let run = Run::new("simulate", args, args.out.as_deref());
    let state = load_state(&args.state_file)?;
    let cfg = args.experiment.resolve()?;
    let side = match args.side {
        SideArg::A => Side::A,
        SideArg::B => Side::B,
    };
    let est = estimate_q_side(&state, &cfg, side)?;
    let report = SimulateReport {
        side,
        m1: MomentSummary::new(&est.m1, &cfg),
        m2: MomentSummary::new(&est.m2, &cfg),
        q: QSummary {
            value: est.q,
            std_error: est.std_error,
            clamped: est.clamped,
            bootstrap_resamples: est.bootstrap_resamples,
            bootstrap_valid: est.bootstrap_valid,
        },
    };
    let mut written = Vec::new();
    emit(args.out.as_deref(), &to_json(&report), &mut written)?;
    run.finish(Some(&cfg), Some(cfg.seed), &written)
}

fn default_eta_grid() -> Vec<f64> {
    (1..=20).map(|k| k as f64 / 20.0).collect()
}

fn throughput_cmd(args: &ThroughputArgs) -> Result<(), CliError> {
    let run = Run::new("throughput", args, args.out.as_deref());
    let cfg = args.experiment.resolve()?;
    let grid = match (&args.eta_grid, args.experiment.eta) {
        (Some(grid), _) => grid.clone(),
        (None, Some(eta)) => vec![eta],
        (None, None) => default_eta_grid(),
    };
    if let Some(bad) = grid.iter().find(|&&eta| !(eta > 0.0 && eta <= 1.0)) {
        return Err(qdi_core::Error::InvalidConfig(format!("eta grid values must lie in (0, 1], got {bad}")).into());
    }
    let reports: Vec<ThroughputReport> = grid
        .iter()
        .map(|&eta| throughput(&ExperimentConfig { eta, ..cfg.clone() }, args.n_target))
        .collect::<Result<_, _>>()?;
    let text =
        csv_text(&THROUGHPUT_CSV_HEADER, reports.iter().map(|r| r.csv_row().iter().map(|&x| sig17(x)).collect()))?;
    let mut written = Vec::new();
    emit(args.out.as_deref(), &text, &mut written)?;
    if let Some(path) = &args.report {
        write(path, &to_json(&reports))?;
        written.push(path.clone());
    }
    run.finish(Some(&cfg), None, &written)
}

fn robustness(args: &RobustnessArgs) -> Result<(), CliError> {
    let run = Run::new("robustness", args, args.out.as_deref());
    let n_pairs = args.count.unwrap_or(if args.full { FULL_COUNT } else { DEFAULT_PAIRS });
    let summary = robustness_sweep(n_pairs, args.f_min, args.seed)?;
    let text = csv_text(
        &["q_exact", "q_prime", "fidelity"],
        summary.rows.iter().map(|r| vec![sig17(r.q_exact), sig17(r.q_prime), sig17(r.fidelity)]),
    )?;
    let mut written = Vec::new();
    emit(args.out.as_deref(), &text, &mut written)?;
    let summary_path = args.summary.clone().or_else(|| args.out.as_ref().map(|o| o.with_extension("summary.json")));
    let summary_text = to_json(&summary);
    match summary_path {
        Some(path) => {
            write(&path, &summary_text)?;
            written.push(path);
        }
        None => eprint!("{summary_text}"),
    }
    run.finish(None, Some(args.seed), &written)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Sweep(a) => sweep(a),
        Command::Simulate(a) => simulate(a),
        Command::Throughput(a) => throughput_cmd(a),
        Command::Robustness(a) => robustness(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

use anyhow::{anyhow, Context};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use onebit_doa::bounds::{bound_report, BoundReport};
use onebit_doa::estimator::{EstimatorOptions, Method};
use onebit_doa::exec::{self, Execution};
use onebit_doa::moments::{orthant4, QuarticCache};
use onebit_doa::montecarlo::{run_rmse_experiment, ExperimentConfig, RmseReport};
use onebit_doa::numerics::{spd_factor, SymMatrix};
use onebit_doa::report::{loss_csv, rmse_csv};
use onebit_doa::selftest::{run_selftest, SelftestOptions};
use onebit_doa::sweep::{loss_sweep, parse_list, parse_range, SweepSpec, SweepVariable};
use onebit_doa::UlaSource;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

mod config;

const EXIT_INVALID: u8 = 2;
const EXIT_RUNTIME: u8 = 3;
const SELFTEST_BUDGET_SECS: f64 = 120.0;

#[derive(Debug, Parser)]
#[command(
    name = "onebit-doa",
    version,
    about = "Quantization loss, pessimistic CRLB and CMLE simulation for 1-bit DOA estimation",
    args_override_self = true
)]
struct Cli {
    /// Master seed for anything random
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output file (default: stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Flat key = value file mirroring the flags; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep the quantization loss over SNR, angle or array size
    Loss(LossArgs),
    /// All bound quantities at one model point
    Bound(BoundArgs),
    /// Monte Carlo RMSE of the estimator against its bound
    Simulate(SimulateArgs),
    /// Positive-orthant probability of a 4-variate Gaussian
    Orthant(OrthantArgs),
    /// Run the built-in consistency checks
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
struct LossArgs {
    /// Swept variable: snr, theta or k
    #[arg(long = "var")]
    variable: SweepVariable,
    /// Inclusive range start:stop:step
    #[arg(long, conflicts_with = "list", allow_hyphen_values = true)]
    range: Option<String>,
    /// Explicit values, comma separated, or a..b for integers
    #[arg(long, allow_hyphen_values = true)]
    list: Option<String>,
    /// Number of sensors
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// DOA in degrees
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    theta: f64,
    /// SNR in dB
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    snr: f64,
    /// Allow array sizes above K = 8 (slow)
    #[arg(long)]
    allow_long: bool,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    theta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    snr: f64,
    /// Snapshots per estimate
    #[arg(long, default_value_t = 1000)]
    n: usize,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    theta: f64,
    /// SNR points in dB: start:stop:step or a comma list
    #[arg(long, default_value = "-6:0:1", allow_hyphen_values = true)]
    snr: String,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 2000)]
    runs: usize,
    /// cmle or gaussian-mle
    #[arg(long, default_value = "cmle")]
    estimator: Method,
    /// JSON summary path (default: next to --out with a .json extension)
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Re-run the exact configuration stored in a summary file
    #[arg(long)]
    replay: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OrthantArgs {
    /// Correlations r01 r02 r03 r12 r13 r23
    #[arg(num_args = 6, required = true, allow_negative_numbers = true)]
    corr: Vec<f64>,
    /// Monte Carlo cross-check with this many samples
    #[arg(long)]
    mc: Option<usize>,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Test hook: corrupt the arcsine-law derivative
    #[arg(long, hide = true)]
    corrupt_arcsine: bool,
}

/// Failure classes that map onto exit codes.
#[derive(Debug)]
enum Failure {
    Invalid(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    fn from_core(e: onebit_doa::Error) -> Self {
        use onebit_doa::Error as E;
        match e {
            E::InvalidInput(_) | E::Domain(_) | E::InvalidCorrelation(_) | E::DimensionTooLarge(_) => {
                Failure::Invalid(e.into())
            }
            _ => Failure::Runtime(e.into()),
        }
    }
}

type CmdResult<T> = std::result::Result<T, Failure>;

fn invalid(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Invalid(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

/// Writes `text` to `path` through a temporary file, so a failed write
/// never leaves partial output behind.
fn write_atomic(path: &Path, text: &str) -> anyhow::Result<()> {
    let tmp = path.with_extension(format!(
        "{}.partial",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    let result = std::fs::write(&tmp, text).and_then(|_| std::fs::rename(&tmp, path));
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> CmdResult<()> {
    match out {
        Some(p) => write_atomic(p, text).map_err(runtime),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(runtime)
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> CmdResult<String> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(runtime)
}

fn snr_values(s: &str) -> onebit_doa::Result<Vec<f64>> {
    if s.contains(':') {
        parse_range(s)
    } else {
        parse_list(s)
    }
}

fn cmd_loss(cli: &Cli, a: &LossArgs) -> CmdResult<()> {
    let values = match (&a.range, &a.list) {
        (Some(r), None) => parse_range(r),
        (None, Some(l)) => parse_list(l),
        _ => return Err(invalid(anyhow!("give exactly one of --range or --list"))),
    }
    .map_err(Failure::from_core)?;
    let spec = SweepSpec {
        variable: a.variable,
        values,
        k: a.k,
        theta_deg: a.theta,
        snr_db: a.snr,
    };
    spec.validate(a.allow_long).map_err(Failure::from_core)?;
    let rows = loss_sweep(&spec, a.allow_long, Execution::default()).map_err(Failure::from_core)?;
    let text = match cli.format {
        Format::Csv => loss_csv(&rows),
        Format::Json => to_json(&rows)?,
    };
    emit(cli.out.as_deref(), &text)
}

fn bound_csv(r: &BoundReport) -> String {
    format!(
        "K,theta_deg,snr_db,n,fisher_y,fisher_lb,chi,chi_db,pcrlb_rad2,pcrlb_deg2\n{},{},{},{},{},{},{},{},{},{}\n",
        r.k, r.theta_deg, r.snr_db, r.n, r.fisher_y, r.fisher_lb, r.chi, r.chi_db, r.pcrlb_rad2, r.pcrlb_deg2
    )
}

fn cmd_bound(cli: &Cli, a: &BoundArgs) -> CmdResult<()> {
    let src = UlaSource::from_deg_db(a.k, a.theta, a.snr).map_err(Failure::from_core)?;
    let report = bound_report(&src, a.n, &QuarticCache::new(), Execution::default()).map_err(Failure::from_core)?;
    let text = match cli.format {
        Format::Csv => bound_csv(&report),
        Format::Json => to_json(&report)?,
    };
    emit(cli.out.as_deref(), &text)
}

/// Summary written next to the simulation CSV.
#[derive(Debug, Serialize, Deserialize)]
struct SimulationSummary {
    version: String,
    threads: usize,
    total_wall_time_sec: f64,
    report: RmseReport,
}

fn summary_path(a: &SimulateArgs, out: Option<&Path>) -> Option<PathBuf> {
    a.summary.clone().or_else(|| out.map(|p| p.with_extension("json")))
}

fn cmd_simulate(cli: &Cli, a: &SimulateArgs) -> CmdResult<()> {
    let cfg = match &a.replay {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(invalid)?;
            let summary: SimulationSummary = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))
                .map_err(invalid)?;
            summary.report.config
        }
        None => ExperimentConfig {
            k: a.k,
            theta_deg: a.theta,
            snr_db_list: snr_values(&a.snr).map_err(Failure::from_core)?,
            n: a.n,
            runs: a.runs,
            master_seed: cli.seed,
            estimator: a.estimator,
            options: EstimatorOptions::default(),
            population_statistics: false,
        },
    };
    cfg.validate().map_err(Failure::from_core)?;
    let started = Instant::now();
    let report = run_rmse_experiment(&cfg, Execution::default()).map_err(|e| runtime(anyhow!(e)))?;
    let summary = SimulationSummary {
        version: env!("CARGO_PKG_VERSION").to_string(),
        threads: exec::current_threads(),
        total_wall_time_sec: started.elapsed().as_secs_f64(),
        report,
    };
    let text = match cli.format {
        Format::Csv => rmse_csv(&summary.report),
        Format::Json => to_json(&summary)?,
    };
    emit(cli.out.as_deref(), &text)?;
    if cli.format == Format::Csv {
        if let Some(path) = summary_path(a, cli.out.as_deref()) {
            if let Err(e) = write_atomic(&path, &to_json(&summary)?) {
                if let Some(out) = &cli.out {
                    let _ = std::fs::remove_file(out);
                }
                return Err(runtime(e));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct MonteCarloCheck {
    samples: usize,
    seed: u64,
    estimate: f64,
    std_error: f64,
    deviation_sigma: f64,
}

#[derive(Debug, Serialize)]
struct OrthantOutput {
    correlations: [f64; 6],
    orthant: f64,
    orthant_sum: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    monte_carlo: Option<MonteCarloCheck>,
}

fn monte_carlo_orthant(corr: &SymMatrix, samples: usize, seed: u64, p: f64) -> CmdResult<MonteCarloCheck> {
    use rand::Rng;
    let l = spd_factor(corr, 0.0).map_err(Failure::from_core)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let w: [f64; 4] = std::array::from_fn(|_| rng.sample(rand_distr::StandardNormal));
        hits += (0..4).all(|i| (0..=i).map(|j| l.get(i, j) * w[j]).sum::<f64>() > 0.0) as usize;
    }
    let estimate = hits as f64 / samples as f64;
    let std_error = (p * (1.0 - p) / samples as f64).sqrt();
    Ok(MonteCarloCheck {
        samples,
        seed,
        estimate,
        std_error,
        deviation_sigma: if std_error > 0.0 { (estimate - p).abs() / std_error } else { 0.0 },
    })
}

fn cmd_orthant(cli: &Cli, a: &OrthantArgs) -> CmdResult<()> {
    let c: [f64; 6] = a.corr.as_slice().try_into().map_err(|_| invalid(anyhow!("need six correlations")))?;
    let [r01, r02, r03, r12, r13, r23] = c;
    let full = [[1.0, r01, r02, r03], [r01, 1.0, r12, r13], [r02, r12, 1.0, r23], [r03, r13, r23, 1.0]];
    let corr = SymMatrix::from_lower_fn(4, |i, j| full[i][j]);
    let orthant = orthant4(&corr).map_err(Failure::from_core)?;
    let mut orthant_sum = 0.0;
    for pattern in 0..16u32 {
        let s = |b: usize| if pattern & (1 << b) != 0 { -1.0 } else { 1.0 };
        orthant_sum += orthant4(&SymMatrix::from_lower_fn(4, |i, j| s(i) * s(j) * full[i][j])).map_err(Failure::from_core)?;
    }
    let monte_carlo = match a.mc {
        Some(0) => return Err(invalid(anyhow!("--mc needs at least one sample"))),
        Some(n) => Some(monte_carlo_orthant(&corr, n, cli.seed, orthant)?),
        None => None,
    };
    let out = OrthantOutput {
        correlations: c,
        orthant,
        orthant_sum,
        monte_carlo,
    };
    emit(cli.out.as_deref(), &to_json(&out)?)
}

fn cmd_selftest(cli: &Cli, a: &SelftestArgs) -> CmdResult<u8> {
    let started = Instant::now();
    let opts = SelftestOptions {
        seed: cli.seed,
        corrupt_arcsine: a.corrupt_arcsine,
    };
    let groups = run_selftest(&opts, Execution::default());
    let mut text = String::new();
    for g in &groups {
        let status = if g.passed() { "PASS" } else { "FAIL" };
        text.push_str(&format!("{status} {} ({} checks)\n", g.name, g.checks));
        for f in &g.failures {
            text.push_str(&format!("  {f}\n"));
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    if elapsed > SELFTEST_BUDGET_SECS {
        log::warn!("selftest took {elapsed:.0} s, over the {SELFTEST_BUDGET_SECS:.0} s budget");
    }
    emit(cli.out.as_deref(), &text)?;
    let failed = groups.iter().filter(|g| !g.passed()).count();
    Ok(if failed == 0 {
        0
    } else {
        EXIT_RUNTIME.saturating_add(failed as u8)
    })
}

fn run(cli: &Cli) -> CmdResult<u8> {
    match &cli.command {
        Command::Loss(a) => cmd_loss(cli, a).map(|_| 0),
        Command::Bound(a) => cmd_bound(cli, a).map(|_| 0),
        Command::Simulate(a) => cmd_simulate(cli, a).map(|_| 0),
        Command::Orthant(a) => cmd_orthant(cli, a).map(|_| 0),
        Command::Selftest(a) => cmd_selftest(cli, a),
    }
}

fn parse(args: &[String]) -> Result<Cli, clap::Error> {
    let matches = Cli::command().try_get_matches_from(args)?;
    Cli::from_arg_matches(&matches)
}

/// Splices the config file's flags in ahead of the user's, then parses.
fn parse_with_config(args: Vec<String>) -> Result<Cli, ExitCode> {
    let clap_exit = |e: clap::Error| {
        let code = e.exit_code();
        let _ = e.print();
        ExitCode::from(if code == 0 { 0 } else { EXIT_INVALID })
    };
    let args = match config::config_path(&args) {
        Some(path) => {
            let extra = config::load_config(Path::new(&path)).map_err(|e| {
                eprintln!("error: {e:#}");
                ExitCode::from(EXIT_INVALID)
            })?;
            config::splice(&args, extra)
        }
        None => args,
    };
    parse(&args).map_err(clap_exit)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match parse_with_config(std::env::args().collect()) {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    let outcome = exec::with_threads(cli.threads, || run(&cli));
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

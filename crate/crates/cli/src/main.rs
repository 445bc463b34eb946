//! Command-line front end for the pre-log laboratory.
//!
//! Subcommands: `maxent` (angle-entropy ceiling for one moment target),
//! `constants` (the pinned derived constants), `verify` (randomized
//! inequality suites as gap-report rows), `bound` (sum-rate ceiling sweep),
//! `sim` (Monte-Carlo scheme rates), and `report` (the whole battery as a
//! machine-readable pass/fail summary).
//!
//! Exit codes: 0 = everything ran and all checks passed, 1 = a checked
//! inequality was violated (the offending row is printed to stderr),
//! 2 = usage, configuration, or runtime error.
//!
//! CSV rows go to `--out` when given, otherwise to stdout; the one-line
//! summary always goes to stderr so piped CSV stays clean. All randomness
//! derives from one seed: `--seed`, else the `PRELOG_SEED` environment
//! variable, else a fixed default — identical invocations produce
//! byte-identical CSV.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use prelog::bound::{bound_sweep, derive_constants, sum_rate_upper_bound};
use prelog::channel::{ChannelConfig, FadingModel};
use prelog::config::load_channel_config;
use prelog::entropy::{polar_stats, DEFAULT_K};
use prelog::inequality::GapReport;
use prelog::laws::PlaneLaw;
use prelog::maxent::{hmax_asymptote, maxent_solution, GAMMA_INFIMUM};
use prelog::sim::{scheme_sum_rate, Scheme, SchemeTag};
use prelog::suites::{
    allocation_suite, direction_suite, fading_suite, run_allocation_suite, run_direction_suite,
    run_fading_suite, run_scale_suite, scale_suite,
};
use prelog::vec2::Vec2;
use prelog::RandomStream;

/// Seed used when neither `--seed` nor `PRELOG_SEED` is present.
const DEFAULT_SEED: u64 = 0x5EED_CAFE;
const SEED_ENV: &str = "PRELOG_SEED";
/// Samples per trial for the polar-decomposition check (`verify --lemma 3`).
const POLAR_TRIAL_SAMPLES: usize = 20_000;

#[derive(Parser)]
#[command(
    name = "prelog",
    about = "Numerical laboratory for the pre-log of a two-antenna fading broadcast channel",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Angle-entropy ceiling for one truncated-log moment target.
    Maxent(MaxentArgs),
    /// Print the pinned derived constants.
    Constants(ConstantsArgs),
    /// Run one randomized inequality suite; one gap-report row per check.
    Verify(VerifyArgs),
    /// Sweep the sum-rate ceiling over an SNR grid.
    Bound(BoundArgs),
    /// Monte-Carlo rates of one transmission scheme over an SNR grid.
    Sim(SimArgs),
    /// Run the whole battery and emit a pass/fail summary per check.
    Report(ReportArgs),
}

#[derive(Args)]
struct MaxentArgs {
    /// Moment target (must exceed the family infimum 1/pi).
    #[arg(long)]
    gamma: f64,
    /// CSV destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConstantsArgs {
    /// CSV destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which inequality family to exercise:
    /// 2 = scale mixtures, 3 = polar decomposition, 4 = directional floors,
    /// 5 = cross-fading comparisons, 6 = power-allocation gap.
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=6))]
    lemma: u8,
    /// Number of randomized trials.
    #[arg(long, default_value_t = 25)]
    trials: usize,
    /// Seed (overrides PRELOG_SEED and the built-in default).
    #[arg(long, value_parser = parse_seed)]
    seed: Option<u64>,
    /// CSV destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// First grid point, dB.
    #[arg(long = "snr-db-start")]
    snr_db_start: f64,
    /// Last grid point, dB (inclusive).
    #[arg(long = "snr-db-stop")]
    snr_db_stop: f64,
    /// Grid spacing, dB (must be positive).
    #[arg(long = "snr-db-step")]
    snr_db_step: f64,
}

#[derive(Args)]
struct BoundArgs {
    /// Channel description file (flat `key = value` grammar).
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// CSV destination.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimArgs {
    /// Scheme tag: zf-imperfect, zf-perfect, single-user, or cooperative.
    #[arg(long, value_parser = parse_scheme)]
    scheme: SchemeTag,
    /// Channel description file (flat `key = value` grammar).
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Fading draws per grid point.
    #[arg(long, default_value_t = 10_000)]
    mc: usize,
    /// Seed (overrides PRELOG_SEED and the built-in default).
    #[arg(long, value_parser = parse_seed)]
    seed: Option<u64>,
    /// CSV destination.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Channel description file; a built-in Gaussian channel when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Trials per randomized suite.
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Seed (overrides PRELOG_SEED and the built-in default).
    #[arg(long, value_parser = parse_seed)]
    seed: Option<u64>,
    /// CSV destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Accepts decimal or `0x`-prefixed hexadecimal seeds.
fn parse_seed(text: &str) -> Result<u64, String> {
    let parsed = match text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
        None => text.replace('_', "").parse(),
    };
    parsed.map_err(|_| format!("`{text}` is not a 64-bit unsigned seed"))
}

fn parse_scheme(text: &str) -> Result<SchemeTag, String> {
    text.parse().map_err(|e| format!("{e}"))
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, String> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(text) => parse_seed(&text).map_err(|e| format!("{SEED_ENV}: {e}")),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_SEED),
        Err(e) => Err(format!("{SEED_ENV}: {e}")),
    }
}

/// A terminal failure that maps to exit code 2.
struct Fatal(String);

impl From<prelog::Error> for Fatal {
    fn from(e: prelog::Error) -> Self {
        Fatal(e.to_string())
    }
}

impl From<String> for Fatal {
    fn from(message: String) -> Self {
        Fatal(message)
    }
}

/// What a subcommand produced: CSV text, a summary line, and any violated
/// rows (pre-rendered for stderr).
struct Outcome {
    csv: String,
    summary: String,
    violations: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (out, result) = match cli.command {
        Command::Maxent(args) => (args.out.clone(), run_maxent(&args)),
        Command::Constants(args) => (args.out.clone(), run_constants()),
        Command::Verify(args) => (args.out.clone(), run_verify(&args)),
        Command::Bound(args) => (Some(args.out.clone()), run_bound(&args)),
        Command::Sim(args) => (Some(args.out.clone()), run_sim(&args)),
        Command::Report(args) => (args.out.clone(), run_report(&args)),
    };
    let outcome = match result {
        Ok(outcome) => outcome,
        Err(Fatal(message)) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };
    match &out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &outcome.csv) {
                eprintln!("error: writing {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{}", outcome.csv),
    }
    eprintln!("{}", outcome.summary);
    for row in &outcome.violations {
        eprintln!("violation: {row}");
    }
    if outcome.violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run_maxent(args: &MaxentArgs) -> Result<Outcome, Fatal> {
    let solution = maxent_solution(args.gamma).map_err(|e| {
        Fatal(format!(
            "{e}; the ceiling family only covers moment targets above 1/pi = {GAMMA_INFIMUM:.6}"
        ))
    })?;
    let asymptote = hmax_asymptote(args.gamma);
    let mut csv = String::from("gamma,alpha,h_max,asymptote,asymptote_gap\n");
    let _ = writeln!(
        csv,
        "{},{},{},{},{}",
        args.gamma,
        solution.alpha,
        solution.h_max,
        asymptote,
        solution.h_max - asymptote
    );
    let summary = format!(
        "maxent: gamma {} -> h_max {:.6} nats (alpha {:.6}, asymptote gap {:+.6})",
        args.gamma,
        solution.h_max,
        solution.alpha,
        solution.h_max - asymptote
    );
    Ok(Outcome { csv, summary, violations: Vec::new() })
}

fn run_constants() -> Result<Outcome, Fatal> {
    let c = derive_constants();
    let mut csv = String::from("name,value\n");
    let _ = writeln!(csv, "m_half,{}", c.m_half);
    let _ = writeln!(csv, "gamma,{}", c.gamma);
    let _ = writeln!(csv, "gamma_prime,{}", c.gamma_prime);
    let summary = format!(
        "constants: m_half {:.12}, gamma {:.12}, gamma_prime {:.12}",
        c.m_half, c.gamma, c.gamma_prime
    );
    Ok(Outcome { csv, summary, violations: Vec::new() })
}

/// Stream handed to suite evaluators; the lineage index is out of reach of
/// the per-case splits used during suite generation, so evaluation noise is
/// independent of case parameters while both derive from the one seed.
fn eval_stream(seed: u64) -> RandomStream {
    RandomStream::new(seed).split(u64::MAX)
}

/// Polar-decomposition check rows: per trial, samples of a standard planar
/// Gaussian are split into radius and angle; the decomposition gap
/// `h(theta) - [h(w) - h(r) - E ln r]` must vanish to estimator noise since
/// radius and angle are independent there.
fn polar_rows(trials: usize, seed: u64) -> Result<Vec<GapReport>, prelog::Error> {
    // Lineage index distinct from both suite generation (0..trials) and the
    // evaluation stream (u64::MAX), so the checks never share draws.
    let root = RandomStream::new(seed).split(u64::MAX - 1);
    let law = PlaneLaw::isotropic_gaussian(1.0);
    (0..trials)
        .map(|i| {
            let mut stream = root.split(i as u64);
            let samples: Vec<Vec2> =
                (0..POLAR_TRIAL_SAMPLES).map(|_| law.sample(&mut stream)).collect();
            let report = polar_stats(&samples, DEFAULT_K)?;
            let lhs = report.h_theta.value;
            let rhs = report.h_w.value - report.h_r.value - report.e_log_r;
            Ok(GapReport {
                label: "polar-decomposition",
                lhs,
                rhs,
                gap: report.lemma3_gap,
                combined_se: report.se_gap,
                pass: report.lemma3_gap >= -3.0 * report.se_gap,
            })
        })
        .collect()
}

fn gap_csv(rows: &[(usize, GapReport)]) -> String {
    let mut csv = String::from("trial,label,lhs,rhs,gap,combined_se,pass\n");
    for (trial, r) in rows {
        let _ = writeln!(
            csv,
            "{trial},{},{},{},{},{},{}",
            r.label, r.lhs, r.rhs, r.gap, r.combined_se, r.pass
        );
    }
    csv
}

fn gap_violations(rows: &[(usize, GapReport)]) -> Vec<String> {
    rows.iter()
        .filter(|(_, r)| !r.pass)
        .map(|(trial, r)| {
            format!(
                "trial={trial} label={} lhs={} rhs={} gap={} combined_se={}",
                r.label, r.lhs, r.rhs, r.gap, r.combined_se
            )
        })
        .collect()
}

fn run_verify(args: &VerifyArgs) -> Result<Outcome, Fatal> {
    if args.trials == 0 {
        return Err(Fatal("--trials must be at least 1".to_string()));
    }
    let seed = resolve_seed(args.seed)?;
    let stream = eval_stream(seed);
    let rows: Vec<(usize, GapReport)> = match args.lemma {
        2 => run_scale_suite(&scale_suite(seed, args.trials), &stream)?
            .into_iter()
            .enumerate()
            .collect(),
        3 => polar_rows(args.trials, seed)?.into_iter().enumerate().collect(),
        4 => run_direction_suite(&direction_suite(seed, args.trials), &stream)?
            .into_iter()
            .enumerate()
            .flat_map(|(i, triple)| triple.into_iter().map(move |r| (i, r)))
            .collect(),
        5 => run_fading_suite(&fading_suite(seed, args.trials), &stream)?
            .into_iter()
            .enumerate()
            .flat_map(|(i, quad)| quad.into_iter().map(move |r| (i, r)))
            .collect(),
        6 => run_allocation_suite(&allocation_suite(seed, args.trials)?)?
            .into_iter()
            .enumerate()
            .collect(),
        other => return Err(Fatal(format!("--lemma {other} is outside 2..=6"))),
    };
    let violations = gap_violations(&rows);
    let summary = format!(
        "verify --lemma {}: {} rows over {} trials, {} violation(s) (seed {seed:#x})",
        args.lemma,
        rows.len(),
        args.trials,
        violations.len()
    );
    Ok(Outcome { csv: gap_csv(&rows), summary, violations })
}

/// Inclusive dB grid; enforces a positive step and start <= stop.
fn db_grid(args: &GridArgs) -> Result<Vec<f64>, Fatal> {
    if !args.snr_db_step.is_finite() || args.snr_db_step <= 0.0 {
        return Err(Fatal(format!("--snr-db-step must be positive, got {}", args.snr_db_step)));
    }
    if !args.snr_db_start.is_finite()
        || !args.snr_db_stop.is_finite()
        || args.snr_db_start > args.snr_db_stop
    {
        return Err(Fatal(format!(
            "--snr-db-start {} and --snr-db-stop {} must be finite and ordered",
            args.snr_db_start, args.snr_db_stop
        )));
    }
    let count = ((args.snr_db_stop - args.snr_db_start) / args.snr_db_step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| args.snr_db_start + i as f64 * args.snr_db_step).collect())
}

fn run_bound(args: &BoundArgs) -> Result<Outcome, Fatal> {
    let config = load_channel_config(&args.config)?;
    let dbs = db_grid(&args.grid)?;
    let grid: Vec<f64> = dbs.iter().map(|db| 10f64.powf(db / 10.0)).collect();
    let sweep = bound_sweep(&config, &grid)?;
    let mut csv = String::from("snr_db,snr,bound_nats,ratio\n");
    for (i, &db) in dbs.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{db},{},{},{}",
            sweep.totals.snr_grid[i], sweep.totals.values[i], sweep.ratios[i]
        );
    }
    let summary = format!(
        "bound: {} points over {}..{} dB, fitted pre-log {:.6}",
        dbs.len(),
        args.grid.snr_db_start,
        args.grid.snr_db_stop,
        sweep.prelog.slope
    );
    Ok(Outcome { csv, summary, violations: Vec::new() })
}

fn run_sim(args: &SimArgs) -> Result<Outcome, Fatal> {
    let config = load_channel_config(&args.config)?;
    let seed = resolve_seed(args.seed)?;
    let dbs = db_grid(&args.grid)?;
    let scheme = Scheme::new(args.scheme);
    let root = RandomStream::new(seed);
    let mut csv = String::from("snr_db,snr,scheme,rate_y,rate_z,sum_rate,std_error,n_mc,skipped\n");
    for (i, &db) in dbs.iter().enumerate() {
        let snr = 10f64.powf(db / 10.0);
        let result = scheme_sum_rate(&scheme, &config, snr, args.mc, &root.split(i as u64))?;
        let _ = writeln!(
            csv,
            "{db},{snr},{},{},{},{},{},{},{}",
            args.scheme.name(),
            result.rate_y,
            result.rate_z,
            result.sum_rate,
            result.std_error,
            result.n_mc,
            result.skipped
        );
    }
    let summary = format!(
        "sim: {} over {} points, {} draws each (seed {seed:#x})",
        args.scheme.name(),
        dbs.len(),
        args.mc
    );
    Ok(Outcome { csv, summary, violations: Vec::new() })
}

fn builtin_config() -> ChannelConfig {
    ChannelConfig::new(
        FadingModel::gaussian_iid(1.0, 0.1).expect("builtin model"),
        FadingModel::gaussian_iid(1.0, 0.1).expect("builtin model"),
        1.0,
        1.0,
    )
    .expect("builtin config")
}

fn run_report(args: &ReportArgs) -> Result<Outcome, Fatal> {
    if args.trials == 0 {
        return Err(Fatal("--trials must be at least 1".to_string()));
    }
    let config = match &args.config {
        Some(path) => load_channel_config(path)?,
        None => builtin_config(),
    };
    let seed = resolve_seed(args.seed)?;
    let stream = eval_stream(seed);
    let mut checks: Vec<(String, String, bool)> = Vec::new();

    // Ceiling asymptote: the gap shrinks as the moment target grows.
    let gap_at = |g: f64| maxent_solution(g).map(|s| (s.h_max - hmax_asymptote(g)).abs());
    let (g1, g2, g3) = (gap_at(10.0)?, gap_at(20.0)?, gap_at(40.0)?);
    checks.push((
        "ceiling-asymptote".to_string(),
        format!("gaps {g1:.4}/{g2:.4}/{g3:.4} at targets 10/20/40"),
        g1 > g2 && g2 > g3 && g3 < 0.1,
    ));

    // Randomized inequality suites, smallest failure count per family.
    let suite = |name: &str, rows: Vec<GapReport>| {
        let fails = rows.iter().filter(|r| !r.pass).count();
        (name.to_string(), format!("{} rows, {fails} violations", rows.len()), fails == 0)
    };
    checks.push(suite("scale-mixtures", run_scale_suite(&scale_suite(seed, args.trials), &stream)?));
    checks.push(suite("polar-decomposition", polar_rows(args.trials, seed)?));
    checks.push(suite(
        "directional-floors",
        run_direction_suite(&direction_suite(seed, args.trials), &stream)?
            .into_iter()
            .flatten()
            .collect(),
    ));
    checks.push(suite(
        "cross-fading-floors",
        run_fading_suite(&fading_suite(seed, args.trials), &stream)?
            .into_iter()
            .flatten()
            .collect(),
    ));
    checks.push(suite(
        "allocation-cap",
        run_allocation_suite(&allocation_suite(seed, args.trials)?)?,
    ));

    // Ceiling pre-log on the configured channel.
    let grid: Vec<f64> = (0..=12).map(|i| 10f64.powf((60.0 + 5.0 * i as f64) / 10.0)).collect();
    let sweep = bound_sweep(&config, &grid)?;
    checks.push((
        "ceiling-prelog".to_string(),
        format!("fitted slope {:.6} over 60..120 dB", sweep.prelog.slope),
        (sweep.prelog.slope - 2.0 / 3.0).abs() < 1e-3,
    ));

    // Simulated schemes stay below the ceiling on the configured channel.
    let mut dominated = true;
    let mut detail = String::new();
    for (j, &db) in [30.0, 60.0].iter().enumerate() {
        let snr = 10f64.powf(db / 10.0);
        let ceiling = sum_rate_upper_bound(&config.with_snr_db(db))?.total;
        for (k, tag) in SchemeTag::all().iter().enumerate() {
            let result = scheme_sum_rate(
                &Scheme::new(*tag),
                &config,
                snr,
                10_000,
                &stream.split((1_000_000 + j * 10 + k) as u64),
            )?;
            dominated &= result.sum_rate <= ceiling;
        }
        let _ = write!(detail, "{}ceiling {ceiling:.3} nats at {db} dB", if j > 0 { "; " } else { "" });
    }
    checks.push(("scheme-dominance".to_string(), detail, dominated));

    let mut csv = String::from("check,detail,pass\n");
    for (name, detail, pass) in &checks {
        let _ = writeln!(csv, "{name},\"{detail}\",{pass}");
    }
    let violations: Vec<String> = checks
        .iter()
        .filter(|(_, _, pass)| !pass)
        .map(|(name, detail, _)| format!("check={name} detail=\"{detail}\""))
        .collect();
    let summary = format!(
        "report: {} checks, {} violation(s) (seed {seed:#x}, {} trials per suite)",
        checks.len(),
        violations.len(),
        args.trials
    );
    Ok(Outcome { csv, summary, violations })
}

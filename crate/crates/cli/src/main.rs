//! `polya`: simulate, verify and plot the Polya urn market model.
//!
//! Exit codes: 0 success, 1 domain error (including failed verification),
//! 2 usage error.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use polya_market::analysis::{
    self, read_snapshot, render_curves, render_trajectory, stability_stats, write_curve,
    write_jsonl, write_trajectory, CapitalCurve, CurveSeries, StabilityReport,
};
use polya_market::polya::log_polya_pmf;
use polya_market::simplex::SimplexIndex;
use polya_market::simulate::{run_ensemble, Fluctuation, ScenarioConfig, ScenarioMode, Trajectory};
use polya_market::verify::{run_all_checks, CheckReport};
use polya_market::{Composition, Error, ModelParams};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "polya",
    version,
    about = "Polya urn market model: exact equilibrium checks and capital distribution curves",
    args_override_self = true,
    after_help = "Any subcommand accepts --config FILE with `flag = value` lines (flag names without \
                  leading dashes, `#` comments). Flags given on the command line win over the file."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run growth-only or two-phase (growth, then fluctuation) scenarios.
    Simulate(SimulateArgs),
    /// Check stationarity, detailed balance, measure preservation and
    /// cross-level balance by full enumeration; writes JSON lines.
    Verify(VerifyArgs),
    /// Capital distribution curve of a `ticker,market_cap` snapshot CSV.
    Curve(CurveArgs),
    /// Exact Polya probability of one composition.
    Pmf(PmfArgs),
    /// List all compositions of a level, in index order.
    Enumerate(EnumerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Growth,
    TwoPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FluctuationArg {
    /// One DOWN then one UP per step; capitalization stays at the threshold.
    DownUp,
    /// A single DOWN or UP per step, each with probability 1/2.
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
    Svg,
}

#[derive(Debug, clap::Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "growth")]
    mode: Mode,
    /// Prior weight per stock (theta is always stocks * alpha).
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Number of stocks (colors).
    #[arg(long, default_value_t = 20)]
    stocks: usize,
    /// Total steps. Default: 3000 for growth, 4 x threshold for two-phase.
    #[arg(long)]
    steps: Option<usize>,
    /// Capitalization level at which growth stops (two-phase only).
    #[arg(long)]
    threshold: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent replicas; replica r uses stream r of the seed.
    #[arg(long, default_value_t = 1)]
    replicas: usize,
    /// Record every k-th step (step 0, threshold and terminal are always recorded).
    #[arg(long, default_value_t = 1)]
    record_every: usize,
    #[arg(long, value_enum, default_value = "down-up")]
    fluctuation: FluctuationArg,
    /// Keep only the largest k weights in curve outputs.
    #[arg(long)]
    top_k: Option<usize>,
    /// Output directory.
    #[arg(long)]
    output: PathBuf,
    /// Output formats: csv (trajectory and curves), jsonl (stability summary), svg (charts).
    #[arg(long, value_enum, value_delimiter = ',', default_value = "csv")]
    format: Vec<Format>,
}

#[derive(Debug, clap::Args)]
struct VerifyArgs {
    /// One or more prior weights, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    alpha: Vec<f64>,
    /// One or more stock counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    stocks: Vec<usize>,
    /// Level to check (the highest level when --min-level is given).
    #[arg(long)]
    level: usize,
    /// Check every level from here up to --level.
    #[arg(long)]
    min_level: Option<usize>,
    /// Residual below which a check passes.
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
    /// JSON-lines report path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct CurveArgs {
    /// Snapshot CSV with header `ticker,market_cap`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    top_k: Option<usize>,
    /// Output directory; files are named after the input file.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "csv")]
    format: Vec<Format>,
}

#[derive(Debug, clap::Args)]
struct PmfArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    stocks: usize,
    /// Counts per stock, e.g. `3,2,1`.
    #[arg(long)]
    composition: String,
}

#[derive(Debug, clap::Args)]
struct EnumerateArgs {
    #[arg(long)]
    stocks: usize,
    #[arg(long)]
    level: usize,
}

#[derive(Debug)]
enum Failure {
    Domain(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

fn main() -> ExitCode {
    let argv = match config::expand_config(std::env::args().collect()) {
        Ok(argv) => argv,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Verify(args) => verify(args),
        Command::Curve(args) => curve(args),
        Command::Pmf(args) => pmf(args),
        Command::Enumerate(args) => enumerate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

#[derive(Serialize)]
struct ReplicaSummary<'a> {
    replica: u64,
    seed: u64,
    terminal_level: usize,
    stability: &'a StabilityReport,
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let params = ModelParams::new(args.alpha, args.stocks)?;
    let mode = match (args.mode, args.threshold) {
        (Mode::Growth, None) => ScenarioMode::GrowthOnly,
        (Mode::Growth, Some(_)) => {
            return Err(Failure::Usage(
                "--threshold only applies to --mode two-phase".into(),
            ))
        }
        (Mode::TwoPhase, Some(threshold)) => ScenarioMode::TwoPhase { threshold },
        (Mode::TwoPhase, None) => {
            return Err(Failure::Usage(
                "--mode two-phase requires --threshold".into(),
            ))
        }
    };
    let total_steps = match (args.steps, mode) {
        (Some(s), _) => s,
        (None, ScenarioMode::GrowthOnly) => 3000,
        (None, ScenarioMode::TwoPhase { threshold }) => 4 * threshold,
    };
    if args.replicas == 0 {
        return Err(Failure::Usage("--replicas must be at least 1".into()));
    }
    let cfg = ScenarioConfig {
        params,
        mode,
        total_steps,
        seed: args.seed,
        record_every: args.record_every,
        fluctuation: match args.fluctuation {
            FluctuationArg::DownUp => Fluctuation::DownUpPair,
            FluctuationArg::Alternating => Fluctuation::Alternating,
        },
    };
    cfg.validate()?;

    let runs = run_ensemble(&cfg, args.replicas, args.seed)?;
    let window = match cfg.threshold() {
        Some(t) => t..=total_steps,
        None => total_steps / 2..=total_steps,
    };
    let mut products = Vec::with_capacity(runs.len());
    for t in &runs {
        t.check_level_invariants()?;
        let start = t
            .record_at_or_after(*window.start())
            .expect("threshold and terminal are always recorded");
        let curves = ReplicaCurves {
            start: CapitalCurve::from_composition(&start.composition, args.top_k)?,
            terminal: CapitalCurve::from_composition(&t.terminal, args.top_k)?,
        };
        let stability = stability_stats(t, window.clone())?;
        products.push((curves, stability));
    }

    std::fs::create_dir_all(&args.output)
        .map_err(|e| Failure::Domain(format!("{}: {e}", args.output.display())))?;
    let suffix = |r: u64| {
        if args.replicas == 1 {
            String::new()
        } else {
            format!("_r{r:04}")
        }
    };
    let start_name = if cfg.threshold().is_some() {
        "threshold"
    } else {
        "midpoint"
    };
    for (t, (curves, _)) in runs.iter().zip(&products) {
        let sfx = suffix(t.replica);
        if args.format.contains(&Format::Csv) {
            write_trajectory(&args.output.join(format!("trajectory{sfx}.csv")), t)?;
            write_curve(
                &args.output.join(format!("curve_{start_name}{sfx}.csv")),
                &curves.start,
            )?;
            write_curve(
                &args.output.join(format!("curve_terminal{sfx}.csv")),
                &curves.terminal,
            )?;
        }
        if args.format.contains(&Format::Svg) {
            write_svgs(&args.output, &sfx, t, curves, start_name)?;
        }
    }
    if args.format.contains(&Format::Jsonl) {
        let summaries: Vec<_> = runs
            .iter()
            .zip(&products)
            .map(|(t, (_, stability))| ReplicaSummary {
                replica: t.replica,
                seed: args.seed,
                terminal_level: t.terminal.level(),
                stability,
            })
            .collect();
        write_jsonl(&args.output.join("summary.jsonl"), &summaries)?;
    }
    Ok(())
}

struct ReplicaCurves {
    start: CapitalCurve,
    terminal: CapitalCurve,
}

fn write_svgs(
    dir: &Path,
    sfx: &str,
    t: &Trajectory,
    curves: &ReplicaCurves,
    start_name: &str,
) -> Result<(), Failure> {
    let p = &t.scenario.params;
    let title = format!(
        "{} stocks, alpha = {}, theta = {}",
        p.stocks(),
        p.alpha(),
        p.theta()
    );
    render_trajectory(&dir.join(format!("trajectory{sfx}.svg")), &title, t)?;
    let series = [
        CurveSeries {
            label: start_name,
            curve: &curves.start,
            color: "#1f4fd8",
        },
        CurveSeries {
            label: "terminal",
            curve: &curves.terminal,
            color: "#d62728",
        },
    ];
    render_curves(&dir.join(format!("curves{sfx}.svg")), &title, &series)?;
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let low = args.min_level.unwrap_or(args.level);
    if low == 0 || low > args.level {
        return Err(Failure::Usage(
            "levels must satisfy 1 <= --min-level <= --level".into(),
        ));
    }
    let mut grid = Vec::new();
    for &alpha in &args.alpha {
        for &m in &args.stocks {
            let params = ModelParams::new(alpha, m)?;
            for n in low..=args.level {
                // Largest simplex touched is C_n; fail before any work if it is too big.
                let size = SimplexIndex::new(m, n)?.size();
                if size > polya_market::verify::MAX_EXACT_STATES {
                    return Err(Failure::Domain(format!(
                        "simplex with {m} stocks at level {n} has {size} states; exact verification is limited to {} (use `simulate` for Monte Carlo checks)",
                        polya_market::verify::MAX_EXACT_STATES
                    )));
                }
                grid.push((params, n));
            }
        }
    }
    let reports: Vec<CheckReport> = {
        use rayon::prelude::*;
        grid.par_iter()
            .map(|(p, n)| run_all_checks(p, *n))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .flatten()
            .collect()
    };

    let mut failed = 0;
    for r in &reports {
        let ok = r.passes(args.tolerance);
        failed += usize::from(!ok);
        eprintln!(
            "{:<24} alpha={} stocks={} level={} residual={:.3e} {}",
            r.check,
            r.params.alpha,
            r.params.stocks,
            r.params.level,
            r.residual,
            if ok { "ok" } else { "FAIL" }
        );
    }
    match &args.output {
        Some(path) => write_jsonl(path, &reports)?,
        None => {
            let mut out = std::io::stdout().lock();
            for r in &reports {
                let line = serde_json::to_string(r).expect("report serializes");
                writeln!(out, "{line}").map_err(|e| Failure::Domain(e.to_string()))?;
            }
        }
    }
    if failed > 0 {
        return Err(Failure::Domain(format!(
            "{failed} of {} checks exceeded tolerance {:e}",
            reports.len(),
            args.tolerance
        )));
    }
    Ok(())
}

fn curve(args: CurveArgs) -> Result<(), Failure> {
    let snapshot = read_snapshot(&args.input)?;
    let curve = CapitalCurve::from_snapshot(&snapshot, args.top_k)?;
    std::fs::create_dir_all(&args.output)
        .map_err(|e| Failure::Domain(format!("{}: {e}", args.output.display())))?;
    let stem = &snapshot.date;
    if args.format.contains(&Format::Csv) {
        write_curve(&args.output.join(format!("{stem}_curve.csv")), &curve)?;
    }
    if args.format.contains(&Format::Svg) {
        let series = [CurveSeries {
            label: stem,
            curve: &curve,
            color: "#1f4fd8",
        }];
        render_curves(
            &args.output.join(format!("{stem}_curve.svg")),
            &format!("Capital distribution, {stem}"),
            &series,
        )?;
    }
    if args.format.contains(&Format::Jsonl) {
        analysis::write_jsonl(
            &args.output.join(format!("{stem}_curve.jsonl")),
            &curve.points,
        )?;
    }
    Ok(())
}

fn pmf(args: PmfArgs) -> Result<(), Failure> {
    let params = ModelParams::new(args.alpha, args.stocks)?;
    let x: Composition = args.composition.parse()?;
    let lp = log_polya_pmf(&params, &x)?;
    println!("composition {x}");
    println!("probability {}", lp.exp());
    println!("log_probability {lp}");
    Ok(())
}

fn enumerate(args: EnumerateArgs) -> Result<(), Failure> {
    let index = SimplexIndex::new(args.stocks, args.level)?;
    let mut out = std::io::BufWriter::new(std::io::stdout().lock());
    let io = |e: std::io::Error| Failure::Domain(e.to_string());
    let header: Vec<String> = (0..args.stocks).map(|i| format!("n{i}")).collect();
    writeln!(out, "index,{}", header.join(",")).map_err(io)?;
    for (i, x) in index.iter().enumerate() {
        writeln!(out, "{i},{x}").map_err(io)?;
    }
    out.flush().map_err(io)?;
    Ok(())
}

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hycast::geomsim::suites::{self, Check};
use hycast::hybrid;
use hycast::popularity::zipf;
use hycast::scenario::{DeliveryMetrics, Policy, Scenario};

use crate::error::CliError;
use crate::range::SweepRange;
use crate::sweep::{self, McSettings, Mode, Strategy, SweepParam};

#[derive(Debug, Parser)]
#[command(name = "hycast", version, about = "Hybrid multicast/unicast cached content delivery")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a policy (or a baseline) and print one CSV row.
    Evaluate(EvaluateArgs),
    /// Optimise the policy, write it as JSON and print its metrics.
    Optimize(OptimizeArgs),
    /// Re-solve the problem across a parameter range and print a CSV table.
    Sweep(SweepArgs),
    /// Compare analytic formulas with Monte Carlo simulation.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineKind {
    Spuc,
    Ompmc,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    /// Per-file outage target of the multicast-only baseline.
    #[arg(long, default_value_t = 0.05)]
    pub target_outage: f64,
}

impl BaselineArgs {
    fn strategy(&self, kind: Option<BaselineKind>) -> Strategy {
        match kind {
            None => Strategy::Hybrid,
            Some(BaselineKind::Spuc) => Strategy::Spuc,
            Some(BaselineKind::Ompmc) => Strategy::Ompmc {
                target_outage: self.target_outage,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Scenario JSON.
    pub config: PathBuf,
    /// Policy JSON with fields p, beta and u.
    #[arg(long, required_unless_present = "baseline", conflicts_with = "baseline")]
    pub policy: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub baseline: Option<BaselineKind>,
    #[command(flatten)]
    pub baseline_args: BaselineArgs,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    pub config: PathBuf,
    /// Where to write the optimised policy.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub param: SweepParam,
    /// Linear range start:stop:step.
    #[arg(long, conflicts_with = "logrange", required_unless_present = "logrange")]
    pub range: Option<String>,
    /// Log-spaced range start:stop:count.
    #[arg(long)]
    pub logrange: Option<String>,
    #[arg(long, value_enum, default_value = "analytic")]
    pub mode: Mode,
    /// Sweep a baseline instead of the optimised hybrid.
    #[arg(long, value_enum)]
    pub baseline: Option<BaselineKind>,
    #[command(flatten)]
    pub baseline_args: BaselineArgs,
    /// Multicast outage replications per point (mc and both modes).
    #[arg(long, default_value_t = 20_000)]
    pub reps: u64,
    /// Unicast torus windows per point (mc and both modes).
    #[arg(long, default_value_t = 20)]
    pub windows: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Lemma1,
    Unicast,
    Multicast,
    All,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub config: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    /// Replications for the lemma and multicast checks; the unicast check
    /// simulates one torus window (about 200 cells) per 1000 replications.
    #[arg(long, default_value_t = 100_000)]
    pub reps: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::File {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let s = Scenario::from_json_str(&read(path)?)?;
    s.validate()?;
    Ok(s)
}

pub fn write_metrics<W: Write>(out: W, metrics: &DeliveryMetrics) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DeliveryMetrics::CSV_HEADER)?;
    w.write_record(metrics.as_row().iter().map(|v| v.to_string()))?;
    w.flush()?;
    Ok(())
}

pub fn evaluate<W: Write>(args: &EvaluateArgs, out: W) -> Result<(), CliError> {
    let scenario = load_scenario(&args.config)?;
    let metrics = match (&args.policy, args.baseline) {
        (Some(path), _) => {
            let policy = Policy::from_json_str(&read(path)?)?;
            hybrid::evaluate(&scenario, &policy, &zipf(scenario.n_files, scenario.zipf_skew)?)?
        }
        (None, kind) => args.baseline_args.strategy(kind).solve(&scenario)?.1,
    };
    write_metrics(out, &metrics)
}

pub fn optimize<W: Write>(args: &OptimizeArgs, out: W) -> Result<(), CliError> {
    let scenario = load_scenario(&args.config)?;
    let (policy, metrics) = hycast::optimizer::optimize(&scenario)?;
    std::fs::write(&args.out, policy.to_json_string() + "\n").map_err(|source| CliError::File {
        path: args.out.display().to_string(),
        source,
    })?;
    write_metrics(out, &metrics)
}

pub fn sweep<W: Write>(args: &SweepArgs, out: W) -> Result<(), CliError> {
    let range = match (&args.range, &args.logrange) {
        (Some(r), _) => SweepRange::parse_linear(r)?,
        (None, Some(r)) => SweepRange::parse_log(r)?,
        (None, None) => return Err(CliError::Usage("one of --range or --logrange is required".into())),
    };
    if args.mode != Mode::Analytic && (args.reps == 0 || args.windows == 0) {
        return Err(CliError::Usage("--reps and --windows must be positive".into()));
    }
    let scenario = load_scenario(&args.config)?;
    let mc = McSettings {
        replications: args.reps,
        windows: args.windows,
        seed: args.seed,
    };
    let rows = sweep::run(
        &scenario,
        args.param,
        &range.points(),
        args.baseline_args.strategy(args.baseline),
        args.mode,
        &mc,
    );
    sweep::write_csv(out, args.param, args.mode, &rows)
}

fn report_line(c: &Check) -> String {
    format!(
        "{} {} {}: analytic {:.6e}, simulated {:.6e} ± {:.2e}, z = {:.2}, gap = {:.2}%",
        if c.passed() { "PASS" } else { "FAIL" },
        c.suite,
        c.name,
        c.analytic,
        c.estimate.mean,
        c.estimate.stderr,
        c.z,
        100.0 * c.relative_gap
    )
}

pub fn validate<W: Write>(args: &ValidateArgs, mut out: W) -> Result<(), CliError> {
    if args.reps == 0 {
        return Err(CliError::Usage("--reps must be positive".into()));
    }
    let scenario = load_scenario(&args.config)?;
    let mut checks = Vec::new();
    if matches!(args.suite, Suite::Lemma1 | Suite::All) {
        checks.extend(suites::lemma1_suite(args.reps, args.seed)?);
    }
    if matches!(args.suite, Suite::Multicast | Suite::All) {
        checks.extend(suites::multicast_suite(&scenario, args.reps, args.seed)?);
    }
    if matches!(args.suite, Suite::Unicast | Suite::All) {
        checks.extend(suites::unicast_suite(&scenario, args.reps.div_ceil(1000), args.seed)?);
    }
    for c in &checks {
        writeln!(out, "{}", report_line(c))?;
    }
    match checks.iter().filter(|c| !c.passed()).count() {
        0 => Ok(()),
        n => Err(CliError::ChecksFailed(n)),
    }
}

pub fn run<W: Write>(cli: &Cli, out: W) -> Result<(), CliError> {
    match &cli.command {
        Command::Evaluate(a) => evaluate(a, out),
        Command::Optimize(a) => optimize(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Validate(a) => validate(a, out),
    }
}

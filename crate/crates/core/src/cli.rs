//! Command-line front end.
//!
//! Exit codes: 0 when every check passed and the output was written, 1 when
//! a check failed (the report is still written), 2 on usage or
//! configuration errors (diagnostic on stderr).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::Serialize;

use crate::classify::{
    self, check_equal_weights, check_slices, default_starts, fit_log_hyperplane, sample_orbit,
    verify_level_sets, ClassificationReport, ClassifyConfig, SliceReport, Verdict,
};
use crate::error::{Error, Result};
use crate::fees::{decompose_check, drift_conforms, fee_drift, DecompositionReport, FeeConfig};
use crate::harness::{check_all, Axiom, AxiomReport, TrialConfig};
use crate::report::{drift_csv, fmt17, orbit_csv, raw_states_csv, to_json, SPEC_VERSION};
use crate::sampling::{log_uniform, trial_rng, PRNG_ALGORITHM};
use crate::state::{Reserve2, ReserveN};
use crate::swap::{BuiltinRule, Direction, RuleSpec, SwapRule};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "cfmm-axioms",
    version,
    about = "AMM axiom checks and orbit classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check validity invariance, Pareto efficiency and unit invariance, and report token symmetry.
    CheckAxioms(CheckArgs),
    /// Fit sampled orbits in log space and recover the invariant's weights.
    Classify(ClassifyArgs),
    /// Run fee-paying swaps and track invariant drift.
    SimulateFees(FeeArgs),
    /// Export one sampled orbit.
    OrbitExport(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct Common {
    /// wgm:<w> | product | csum | wprod:<w1>,<w2>,...
    #[arg(long, value_parser = parse_rule)]
    rule: RuleSpec,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 32)]
    chain_length: usize,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Also fail when token symmetry fails. Otherwise it is reported only.
    #[arg(long)]
    require_symmetry: bool,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 5)]
    orbits: usize,
    #[arg(long, default_value_t = 64)]
    samples: usize,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
}

#[derive(Debug, Args)]
struct FeeArgs {
    #[command(flatten)]
    common: Common,
    /// Fee rate in [0, 1).
    #[arg(long, default_value_t = 0.003)]
    phi: f64,
    #[arg(long, default_value_t = 100)]
    trades: usize,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 64)]
    samples: usize,
    /// Comma-separated start reserves; defaults to all ones.
    #[arg(long)]
    start: Option<String>,
}

fn parse_rule(s: &str) -> std::result::Result<RuleSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A rendered report and whether everything it records passed.
struct Output {
    body: String,
    passed: bool,
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (common, result) = match &cli.command {
        Command::CheckAxioms(a) => (&a.common, check_axioms(a)),
        Command::Classify(a) => (&a.common, classify_cmd(a)),
        Command::SimulateFees(a) => (&a.common, simulate_fees(a)),
        Command::OrbitExport(a) => (&a.common, orbit_export(a)),
    };
    let output = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Err(e) = emit(common.output.as_ref(), &output.body) {
        eprintln!("error: cannot write output: {e}");
        return EXIT_USAGE;
    }
    if output.passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

fn emit(path: Option<&PathBuf>, body: &str) -> std::io::Result<()> {
    match path {
        Some(p) => fs::write(p, body),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()
        }
    }
}

fn build_rule(spec: &RuleSpec) -> Result<BuiltinRule> {
    crate::swap::make_rule(spec)
}

#[derive(Serialize)]
struct AxiomsDocument<'a> {
    spec_version: &'static str,
    command: &'static str,
    rule: String,
    seed: u64,
    trials: usize,
    prng: &'static str,
    passed: bool,
    symmetry_required: bool,
    reports: &'a [AxiomReport],
}

fn check_axioms(args: &CheckArgs) -> Result<Output> {
    let rule = build_rule(&args.common.rule)?;
    let cfg = TrialConfig {
        seed: args.common.seed,
        trials: args.trials,
        chain_length: args.chain_length,
        tolerance: args.tolerance,
        ..TrialConfig::default()
    };
    let reports = check_all(&rule, &cfg)?;
    let passed = reports
        .iter()
        .all(|r| r.passed || (r.axiom == Axiom::TokenSymmetry && !args.require_symmetry));
    let body = match args.common.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&AxiomsDocument {
            spec_version: SPEC_VERSION,
            command: "check-axioms",
            rule: rule.name(),
            seed: cfg.seed,
            trials: cfg.trials,
            prng: PRNG_ALGORITHM,
            passed,
            symmetry_required: args.require_symmetry,
            reports: &reports,
        }),
        Format::Csv => {
            let mut s = String::from("axiom,rule,trials,passed,shrunk,witness_trial\n");
            for r in &reports {
                let trial = r
                    .witness
                    .as_ref()
                    .map(|w| w.trial.to_string())
                    .unwrap_or_default();
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.axiom.as_str(),
                    r.rule,
                    r.trials_run,
                    r.passed,
                    r.shrunk,
                    trial
                ));
            }
            s
        }
    };
    Ok(Output { body, passed })
}

#[derive(Serialize)]
struct ClassifyDocument<'a> {
    spec_version: &'static str,
    command: &'static str,
    seed: u64,
    samples: usize,
    #[serde(flatten)]
    report: &'a ClassificationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    slices: Option<SliceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    equal_weights: Option<bool>,
}

fn classify_cmd(args: &ClassifyArgs) -> Result<Output> {
    let rule = build_rule(&args.common.rule)?;
    let n = rule.dimension();
    let cfg = ClassifyConfig {
        samples: args.samples,
        seed: args.common.seed,
        tolerance: args.tolerance,
    };
    let starts = default_starts(n, args.orbits, cfg.seed);
    let report = verify_level_sets(&rule, &starts, &cfg)?;
    let mut passed = report.verdict == Verdict::Pass;

    let (slices, equal_weights) = if n >= 3 {
        let slices = check_slices(&rule, &starts[0], &cfg)?;
        passed &= slices.passed;
        let equal = sample_orbit(&rule, &starts[0], cfg.samples, cfg.seed)
            .and_then(|o| fit_log_hyperplane(&o))
            .map(|fit| check_equal_weights(&fit, cfg.tolerance))
            .ok();
        (Some(slices), equal)
    } else {
        (None, None)
    };

    let body = match args.common.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&ClassifyDocument {
            spec_version: SPEC_VERSION,
            command: "classify",
            seed: cfg.seed,
            samples: cfg.samples,
            report: &report,
            slices,
            equal_weights,
        }),
        Format::Csv => {
            let mut s = String::from("orbit,start,slope,intercept,residual,phi\n");
            let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
            for (k, f) in report.per_orbit.iter().enumerate() {
                let start: Vec<String> = f.start.iter().map(|v| fmt17(*v)).collect();
                s.push_str(&format!(
                    "{k},\"{}\",{},{},{},{}\n",
                    start.join(" "),
                    opt(f.slope),
                    opt(f.intercept),
                    opt(f.residual),
                    opt(f.phi)
                ));
            }
            s
        }
    };
    Ok(Output { body, passed })
}

#[derive(Serialize)]
struct FeeDocument {
    spec_version: &'static str,
    command: &'static str,
    rule: String,
    phi: f64,
    seed: u64,
    decomposition: DecompositionReport,
    drift: crate::fees::DriftSeries,
    strictly_increasing: bool,
    max_relative_drift: f64,
    passed: bool,
}

fn simulate_fees(args: &FeeArgs) -> Result<Output> {
    let rule = build_rule(&args.common.rule)?;
    if rule.dimension() != 2 {
        return Err(Error::Usage("simulate-fees needs a two-asset rule".into()));
    }
    if rule.weights().is_none() {
        return Err(Error::Usage(format!(
            "rule {} has no weighted-product invariant to track",
            rule.name()
        )));
    }
    let fee = FeeConfig::new(args.phi)?;
    let s0 = Reserve2 { x: 1.0, y: 1.0 };
    let trades = random_trades(&rule, s0, args.trades, args.common.seed, fee)?;
    let decomposition = decompose_check(&rule, s0, Direction::XIn, 1.0, fee)?;
    let drift = fee_drift(&rule, s0, &trades, fee)?;

    let strictly_increasing = drift.is_strictly_increasing();
    let max_relative_drift = drift.max_relative_drift();
    let drift_ok = drift_conforms(&drift, &trades, fee);
    let passed = decomposition.passed && drift_ok;

    let body = match args.common.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&FeeDocument {
            spec_version: SPEC_VERSION,
            command: "simulate-fees",
            rule: rule.name(),
            phi: fee.rate(),
            seed: args.common.seed,
            decomposition,
            drift,
            strictly_increasing,
            max_relative_drift,
            passed,
        }),
        Format::Csv => drift_csv(&drift),
    };
    Ok(Output { body, passed })
}

/// Seeded trades: random direction, size log-uniform in `[1e-3, 1]` of the
/// current input reserve.
pub fn random_trades<R: SwapRule + ?Sized>(
    rule: &R,
    s0: Reserve2,
    count: usize,
    seed: u64,
    fee: FeeConfig,
) -> Result<Vec<(Direction, f64)>> {
    let mut rng = trial_rng(seed, crate::sampling::AUX_STREAM + 1);
    let mut current = s0;
    let mut trades = Vec::with_capacity(count);
    for _ in 0..count {
        let direction = if rng.gen_bool(0.5) {
            Direction::XIn
        } else {
            Direction::YIn
        };
        let reserve = match direction {
            Direction::XIn => current.x,
            Direction::YIn => current.y,
        };
        let dx = reserve * log_uniform(&mut rng, 1e-3, 1.0);
        current = crate::fees::fee_swap(rule, current, direction, dx, fee)?;
        trades.push((direction, dx));
    }
    Ok(trades)
}

#[derive(Serialize)]
struct ExportDocument<'a> {
    spec_version: &'static str,
    command: &'static str,
    #[serde(flatten)]
    sample: &'a classify::OrbitSample,
}

#[derive(Serialize)]
struct ExportFailure {
    spec_version: &'static str,
    command: &'static str,
    rule: String,
    seed: u64,
    error: String,
    states: Vec<Vec<f64>>,
}

fn orbit_export(args: &ExportArgs) -> Result<Output> {
    let rule = build_rule(&args.common.rule)?;
    let n = rule.dimension();
    let start = match &args.start {
        None => ReserveN::ones(n)?,
        Some(text) => {
            let coords = text
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Usage(format!("malformed start coordinate {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let s = ReserveN::new(coords).map_err(|e| Error::Usage(e.to_string()))?;
            if s.dim() != n || !s.is_valid() {
                return Err(Error::Usage(format!(
                    "start must be {n} positive reserves, got {text:?}"
                )));
            }
            s
        }
    };
    let format = args.common.format.unwrap_or(Format::Csv);
    match sample_orbit(&rule, &start, args.samples, args.common.seed) {
        Ok(sample) => {
            let body = match format {
                Format::Csv => orbit_csv(&sample),
                Format::Json => to_json(&ExportDocument {
                    spec_version: SPEC_VERSION,
                    command: "orbit-export",
                    sample: &sample,
                }),
            };
            Ok(Output { body, passed: true })
        }
        Err(Error::Sampling { reason, states }) => {
            let body = match format {
                Format::Csv => raw_states_csv(&states),
                Format::Json => to_json(&ExportFailure {
                    spec_version: SPEC_VERSION,
                    command: "orbit-export",
                    rule: rule.name(),
                    seed: args.common.seed,
                    error: reason,
                    states,
                }),
            };
            Ok(Output {
                body,
                passed: false,
            })
        }
        Err(e) => Err(e),
    }
}

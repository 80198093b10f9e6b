//! Property-based conformance checks of swap rules against validity
//! invariance, Pareto efficiency, unit invariance and token symmetry.
//!
//! Every check draws inputs from per-trial ChaCha8 streams (see
//! [`crate::sampling`]), evaluates all trials (in parallel) and reports the
//! failure with the smallest trial index, so reports are deterministic.
//! Failures carry a [`Witness`] that [`Witness::reproduce`] re-executes
//! without the harness.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{log_uniform, log_uniform_state, token_pair, trial_rng, PRNG_ALGORITHM};
use crate::state::{max_rel_diff, rel_close_all, ReserveN};
use crate::swap::{chain, swap, Move, SwapRule};

/// States closer than this (relative) count as the same point for the
/// Pareto check, and dominance needs a coordinate larger by more than it.
pub const PARETO_EQ_TOLERANCE: f64 = 1e-12;

/// Bounds of the log-uniform per-token unit factors used by the unit
/// invariance check.
pub const FACTOR_RANGE: (f64, f64) = (1e-3, 1e3);

const MAX_SHRINK_ITERATIONS: usize = 100;
const BISECTION_STEPS: usize = 64;

/// Sampling parameters shared by every check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub seed: u64,
    pub trials: usize,
    pub chain_length: usize,
    /// Swap amounts, relative to the input token's current reserve.
    pub amount_range: (f64, f64),
    pub state_range: (f64, f64),
    pub tolerance: f64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 1000,
            chain_length: 32,
            amount_range: (1e-3, 1.0),
            state_range: (1e-6, 1e6),
            tolerance: 1e-9,
        }
    }
}

impl TrialConfig {
    pub fn new(seed: u64, trials: usize) -> Self {
        Self {
            seed,
            trials,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ordered = |(lo, hi): (f64, f64)| lo > 0.0 && lo <= hi && hi.is_finite();
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !ordered(self.amount_range) {
            return Err(Error::Config(format!(
                "amount range {:?} must be positive and ordered",
                self.amount_range
            )));
        }
        if !ordered(self.state_range) {
            return Err(Error::Config(format!(
                "state range {:?} must be positive and ordered",
                self.state_range
            )));
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Config(format!(
                "tolerance {} is invalid",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    ValidityInvariance,
    ParetoEfficiency,
    UnitInvariance,
    TokenSymmetry,
}

impl Axiom {
    pub const ALL: [Axiom; 4] = [
        Axiom::ValidityInvariance,
        Axiom::ParetoEfficiency,
        Axiom::UnitInvariance,
        Axiom::TokenSymmetry,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Axiom::ValidityInvariance => "validity_invariance",
            Axiom::ParetoEfficiency => "pareto_efficiency",
            Axiom::UnitInvariance => "unit_invariance",
            Axiom::TokenSymmetry => "token_symmetry",
        }
    }

    fn scope(self) -> &'static str {
        match self {
            Axiom::ValidityInvariance => {
                "forward direction only: valid inputs, including boundary-adjacent states, must \
                 yield valid outputs; behaviour on invalid inputs is not sampled"
            }
            Axiom::ParetoEfficiency => {
                "forward swap chains only; inverse swaps are not explored, so this is a necessary \
                 condition"
            }
            Axiom::UnitInvariance => "per-token rescaling commutes with the swap map",
            Axiom::TokenSymmetry => {
                "relabeled X-in swap must coincide with the Y-in swap of the same size"
            }
        }
    }
}

/// The concrete input of one failing case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessInputs {
    /// A single swap.
    Swap {
        state: Vec<f64>,
        token_in: usize,
        token_out: usize,
        amount: f64,
    },
    /// A swap compared against its rescaled counterpart.
    Scaled {
        state: Vec<f64>,
        factors: Vec<f64>,
        token_in: usize,
        token_out: usize,
        amount: f64,
    },
    /// An X-in swap compared against the Y-in swap at the relabeled state.
    Relabel { state: Vec<f64>, amount: f64 },
    /// A chain of swaps from `start`.
    Chain { start: Vec<f64>, moves: Vec<Move> },
}

/// What an evaluation produced or required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observation {
    State {
        reserves: Vec<f64>,
    },
    Condition {
        description: String,
    },
    Dominance {
        dominating_step: usize,
        dominated_step: usize,
        dominating: Vec<f64>,
        dominated: Vec<f64>,
    },
    Error {
        message: String,
    },
}

impl Observation {
    fn state(s: &ReserveN) -> Self {
        Observation::State {
            reserves: s.as_slice().to_vec(),
        }
    }

    fn error(e: &Error) -> Self {
        Observation::Error {
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub inputs: WitnessInputs,
    pub observed: Observation,
    pub expected: Observation,
    pub seed: u64,
    pub trial: u64,
}

impl Witness {
    /// Re-executes the inputs. `Some` iff the violation still occurs.
    pub fn reproduce<R: SwapRule + ?Sized>(
        &self,
        axiom: Axiom,
        rule: &R,
        tolerance: f64,
    ) -> Option<(Observation, Observation)> {
        evaluate(axiom, rule, &self.inputs, tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub rule: String,
    #[serde(rename = "trials")]
    pub trials_run: usize,
    pub passed: bool,
    pub witness: Option<Witness>,
    pub shrunk: bool,
    pub tolerance: f64,
    pub prng: String,
    pub scope: String,
}

fn input_state(state: &[f64]) -> std::result::Result<ReserveN, Observation> {
    ReserveN::new(state.to_vec()).map_err(|e| Observation::error(&e))
}

/// Strict dominance: every coordinate at least as large and one larger by
/// more than [`PARETO_EQ_TOLERANCE`] relative.
fn dominates(t: &ReserveN, s: &ReserveN) -> bool {
    let (t, s) = (t.as_slice(), s.as_slice());
    t.iter().zip(s).all(|(a, b)| a >= b)
        && t.iter()
            .zip(s)
            .any(|(a, b)| a - b > PARETO_EQ_TOLERANCE * a.abs().max(b.abs()))
}

/// Evaluates one case. Returns `(observed, expected)` when it violates
/// the axiom.
pub fn evaluate<R: SwapRule + ?Sized>(
    axiom: Axiom,
    rule: &R,
    inputs: &WitnessInputs,
    tolerance: f64,
) -> Option<(Observation, Observation)> {
    let outcome = match (axiom, inputs) {
        (
            Axiom::ValidityInvariance,
            WitnessInputs::Swap {
                state,
                token_in,
                token_out,
                amount,
            },
        ) => eval_validity(rule, state, *token_in, *token_out, *amount),
        (
            Axiom::UnitInvariance,
            WitnessInputs::Scaled {
                state,
                factors,
                token_in,
                token_out,
                amount,
            },
        ) => eval_unit(
            rule, state, factors, *token_in, *token_out, *amount, tolerance,
        ),
        (Axiom::TokenSymmetry, WitnessInputs::Relabel { state, amount }) => {
            eval_symmetry(rule, state, *amount, tolerance)
        }
        (Axiom::ParetoEfficiency, WitnessInputs::Chain { start, moves }) => {
            eval_pareto(rule, start, moves)
        }
        (axiom, _) => Err(Box::new((
            Observation::Error {
                message: format!("inputs do not apply to {}", axiom.as_str()),
            },
            Observation::Condition {
                description: "matching input kind".into(),
            },
        ))),
    };
    outcome.err().map(|b| *b)
}

type Outcome = std::result::Result<(), Box<(Observation, Observation)>>;

fn eval_validity<R: SwapRule + ?Sized>(
    rule: &R,
    state: &[f64],
    i: usize,
    j: usize,
    amount: f64,
) -> Outcome {
    let expected = || Observation::Condition {
        description: "valid state (every coordinate > 0)".into(),
    };
    let s = input_state(state).map_err(|o| (o, expected()))?;
    match swap(rule, &s, i, j, amount) {
        Err(e) => Err(Box::new((Observation::error(&e), expected()))),
        Ok(t) if !t.is_valid() => Err(Box::new((Observation::state(&t), expected()))),
        Ok(_) => Ok(()),
    }
}

fn eval_unit<R: SwapRule + ?Sized>(
    rule: &R,
    state: &[f64],
    factors: &[f64],
    i: usize,
    j: usize,
    amount: f64,
    tolerance: f64,
) -> Outcome {
    let cond = |d: &str| Observation::Condition {
        description: d.to_string(),
    };
    let s = input_state(state).map_err(|o| (o, cond("finite input state")))?;
    // swap(T s, f_i dx) against T swap(s, dx)
    let lhs = s
        .scale(factors)
        .and_then(|ts| swap(rule, &ts, i, j, factors[i] * amount));
    let rhs = swap(rule, &s, i, j, amount).and_then(|t| t.scale(factors));
    match (lhs, rhs) {
        (Ok(l), Ok(r)) => {
            if rel_close_all(l.as_slice(), r.as_slice(), tolerance) {
                Ok(())
            } else {
                Err(Box::new((Observation::state(&l), Observation::state(&r))))
            }
        }
        (Err(e), Ok(r)) => Err(Box::new((Observation::error(&e), Observation::state(&r)))),
        (_, Err(e)) => Err(Box::new((
            Observation::error(&e),
            cond("both diagram paths evaluate"),
        ))),
    }
}

fn eval_symmetry<R: SwapRule + ?Sized>(
    rule: &R,
    state: &[f64],
    amount: f64,
    tolerance: f64,
) -> Outcome {
    let cond = |d: &str| Observation::Condition {
        description: d.to_string(),
    };
    let s = input_state(state).map_err(|o| (o, cond("finite input state")))?;
    if s.dim() != 2 {
        return Err(Box::new((
            Observation::Error {
                message: "token symmetry applies to two-asset states".into(),
            },
            cond("two-asset state"),
        )));
    }
    let relabel = |r: &ReserveN| {
        ReserveN::new(vec![r.get(1), r.get(0)]).expect("relabeling keeps coordinates finite")
    };
    let t = swap(rule, &s, 0, 1, amount)
        .map_err(|e| (Observation::error(&e), cond("X-in swap evaluates")))?;
    let expected = relabel(&t);
    match swap(rule, &relabel(&s), 1, 0, amount) {
        Ok(observed) if rel_close_all(observed.as_slice(), expected.as_slice(), tolerance) => {
            Ok(())
        }
        Ok(observed) => Err(Box::new((
            Observation::state(&observed),
            Observation::state(&expected),
        ))),
        Err(e) => Err(Box::new((
            Observation::error(&e),
            Observation::state(&expected),
        ))),
    }
}

fn eval_pareto<R: SwapRule + ?Sized>(rule: &R, start: &[f64], moves: &[Move]) -> Outcome {
    let cond = Observation::Condition {
        description: "no state on the chain dominates another".into(),
    };
    let s0 = input_state(start).map_err(|o| (o, cond.clone()))?;
    let traj = chain(rule, &s0, moves).map_err(|e| (Observation::error(&e), cond.clone()))?;
    let states = &traj.states;
    for a in 0..states.len() {
        for b in a + 1..states.len() {
            let (sa, sb) = (&states[a], &states[b]);
            if max_rel_diff(sa.as_slice(), sb.as_slice()) <= PARETO_EQ_TOLERANCE {
                continue;
            }
            let pair = if dominates(sb, sa) {
                Some((b, a))
            } else if dominates(sa, sb) {
                Some((a, b))
            } else {
                None
            };
            if let Some((hi, lo)) = pair {
                return Err(Box::new((
                    Observation::Dominance {
                        dominating_step: hi,
                        dominated_step: lo,
                        dominating: states[hi].as_slice().to_vec(),
                        dominated: states[lo].as_slice().to_vec(),
                    },
                    cond,
                )));
            }
        }
    }
    Ok(())
}

fn sample_state<R: Rng>(rng: &mut R, n: usize, cfg: &TrialConfig) -> ReserveN {
    log_uniform_state(rng, n, cfg.state_range.0, cfg.state_range.1)
}

fn sample_amount<R: Rng>(rng: &mut R, reserve: f64, cfg: &TrialConfig) -> f64 {
    reserve * log_uniform(rng, cfg.amount_range.0, cfg.amount_range.1)
}

/// Regenerates the cases of one trial from `(cfg.seed, trial)`.
pub fn generate<R: SwapRule + ?Sized>(
    axiom: Axiom,
    rule: &R,
    cfg: &TrialConfig,
    trial: u64,
) -> Vec<WitnessInputs> {
    let mut rng = trial_rng(cfg.seed, trial);
    let n = rule.dimension();
    match axiom {
        Axiom::ValidityInvariance => {
            // every fourth trial stresses states near the lower boundary
            let state = if trial % 4 == 3 {
                let lo = cfg.state_range.0;
                let coords = (0..n)
                    .map(|_| {
                        if rng.gen_bool(0.5) {
                            log_uniform(&mut rng, lo, lo * 10.0)
                        } else {
                            log_uniform(&mut rng, lo, cfg.state_range.1)
                        }
                    })
                    .collect();
                ReserveN::new(coords).expect("finite")
            } else {
                sample_state(&mut rng, n, cfg)
            };
            let (i, j) = token_pair(&mut rng, n);
            let amount = sample_amount(&mut rng, state.get(i), cfg);
            vec![WitnessInputs::Swap {
                state: state.into_vec(),
                token_in: i,
                token_out: j,
                amount,
            }]
        }
        Axiom::UnitInvariance => {
            let state = sample_state(&mut rng, n, cfg);
            let factors: Vec<f64> = (0..n)
                .map(|_| log_uniform(&mut rng, FACTOR_RANGE.0, FACTOR_RANGE.1))
                .collect();
            let (i, j) = token_pair(&mut rng, n);
            let dx = sample_amount(&mut rng, state.get(i), cfg);
            let dy = sample_amount(&mut rng, state.get(j), cfg);
            [(i, j, dx), (j, i, dy)]
                .into_iter()
                .map(|(a, b, amount)| WitnessInputs::Scaled {
                    state: state.as_slice().to_vec(),
                    factors: factors.clone(),
                    token_in: a,
                    token_out: b,
                    amount,
                })
                .collect()
        }
        Axiom::TokenSymmetry => {
            let state = sample_state(&mut rng, n, cfg);
            let amount = sample_amount(&mut rng, state.get(0), cfg);
            vec![WitnessInputs::Relabel {
                state: state.into_vec(),
                amount,
            }]
        }
        Axiom::ParetoEfficiency => {
            let start = sample_state(&mut rng, n, cfg);
            let mut moves = Vec::with_capacity(cfg.chain_length);
            let mut current = start.clone();
            for _ in 0..cfg.chain_length {
                let (i, j) = token_pair(&mut rng, n);
                let amount = sample_amount(&mut rng, current.get(i), cfg);
                moves.push(Move::new(i, j, amount));
                match swap(rule, &current, i, j, amount) {
                    Ok(next) if rule.in_domain(&next) => current = next,
                    // keep the failing move; evaluation reports it
                    _ => break,
                }
            }
            vec![WitnessInputs::Chain {
                start: start.into_vec(),
                moves,
            }]
        }
    }
}

/// Runs one trial. `Some` carries the first failing case.
pub fn replay<R: SwapRule + ?Sized>(
    axiom: Axiom,
    rule: &R,
    cfg: &TrialConfig,
    trial: u64,
) -> Option<Witness> {
    generate(axiom, rule, cfg, trial)
        .into_iter()
        .find_map(|inputs| {
            evaluate(axiom, rule, &inputs, cfg.tolerance).map(|(observed, expected)| Witness {
                inputs,
                observed,
                expected,
                seed: cfg.seed,
                trial,
            })
        })
}

fn run_check<R: SwapRule + ?Sized>(
    axiom: Axiom,
    rule: &R,
    cfg: &TrialConfig,
) -> Result<AxiomReport> {
    cfg.validate()?;
    if rule.dimension() < 2 {
        return Err(Error::Usage(format!(
            "rule {} has fewer than 2 tokens",
            rule.name()
        )));
    }
    let witness = (0..cfg.trials as u64)
        .into_par_iter()
        .find_map_first(|trial| replay(axiom, rule, cfg, trial));
    Ok(AxiomReport {
        axiom,
        rule: rule.name(),
        trials_run: cfg.trials,
        passed: witness.is_none(),
        witness,
        shrunk: false,
        tolerance: cfg.tolerance,
        prng: PRNG_ALGORITHM.to_string(),
        scope: axiom.scope().to_string(),
    })
}

/// Valid states must swap to valid states.
pub fn check_validity_invariance<R: SwapRule + ?Sized>(
    rule: &R,
    cfg: &TrialConfig,
) -> Result<AxiomReport> {
    run_check(Axiom::ValidityInvariance, rule, cfg)
}

/// No state on a random swap chain may dominate another.
pub fn check_pareto<R: SwapRule + ?Sized>(rule: &R, cfg: &TrialConfig) -> Result<AxiomReport> {
    run_check(Axiom::ParetoEfficiency, rule, cfg)
}

/// Swapping commutes with per-token rescaling of units.
pub fn check_unit_invariance<R: SwapRule + ?Sized>(
    rule: &R,
    cfg: &TrialConfig,
) -> Result<AxiomReport> {
    run_check(Axiom::UnitInvariance, rule, cfg)
}

/// Relabeling the two tokens maps swaps to swaps. Two-asset rules only.
pub fn check_token_symmetry<R: SwapRule + ?Sized>(
    rule: &R,
    cfg: &TrialConfig,
) -> Result<AxiomReport> {
    if rule.dimension() != 2 {
        return Err(Error::Usage(format!(
            "token symmetry needs a two-asset rule, {} has {} tokens",
            rule.name(),
            rule.dimension()
        )));
    }
    run_check(Axiom::TokenSymmetry, rule, cfg)
}

/// Runs every applicable check and shrinks the failures. Token symmetry is
/// skipped for rules with more than two tokens.
pub fn check_all<R: SwapRule + ?Sized>(rule: &R, cfg: &TrialConfig) -> Result<Vec<AxiomReport>> {
    let mut reports = vec![
        check_validity_invariance(rule, cfg)?,
        check_pareto(rule, cfg)?,
        check_unit_invariance(rule, cfg)?,
    ];
    if rule.dimension() == 2 {
        reports.push(check_token_symmetry(rule, cfg)?);
    }
    reports
        .into_iter()
        .map(|r| if r.passed { Ok(r) } else { shrink(&r, rule) })
        .collect()
}

/// How a scalar in the witness may be simplified.
#[derive(Clone, Copy)]
enum Knob {
    Coordinate(usize),
    Factor(usize),
    Amount,
    MoveAmount(usize),
}

fn knobs(inputs: &WitnessInputs) -> Vec<Knob> {
    match inputs {
        WitnessInputs::Swap { state, .. } | WitnessInputs::Relabel { state, .. } => (0..state
            .len())
            .map(Knob::Coordinate)
            .chain([Knob::Amount])
            .collect(),
        WitnessInputs::Scaled { state, factors, .. } => (0..state.len())
            .map(Knob::Coordinate)
            .chain((0..factors.len()).map(Knob::Factor))
            .chain([Knob::Amount])
            .collect(),
        WitnessInputs::Chain { start, moves } => (0..start.len())
            .map(Knob::Coordinate)
            .chain((0..moves.len()).map(Knob::MoveAmount))
            .collect(),
    }
}

fn slot(inputs: &mut WitnessInputs, knob: Knob) -> &mut f64 {
    match (inputs, knob) {
        (
            WitnessInputs::Swap { state, .. }
            | WitnessInputs::Relabel { state, .. }
            | WitnessInputs::Scaled { state, .. },
            Knob::Coordinate(k),
        ) => &mut state[k],
        (WitnessInputs::Chain { start, .. }, Knob::Coordinate(k)) => &mut start[k],
        (WitnessInputs::Scaled { factors, .. }, Knob::Factor(k)) => &mut factors[k],
        (
            WitnessInputs::Swap { amount, .. }
            | WitnessInputs::Relabel { amount, .. }
            | WitnessInputs::Scaled { amount, .. },
            Knob::Amount,
        ) => amount,
        (WitnessInputs::Chain { moves, .. }, Knob::MoveAmount(k)) => &mut moves[k].amount,
        _ => unreachable!("knob does not match witness kind"),
    }
}

/// The shortest chain that still shows the failure: the segment between a
/// dominating pair, or the single move that left the domain.
fn chain_segment<R: SwapRule + ?Sized>(
    rule: &R,
    inputs: &WitnessInputs,
    observed: &Observation,
) -> Option<WitnessInputs> {
    let WitnessInputs::Chain { start, moves } = inputs else {
        return None;
    };
    let s0 = ReserveN::new(start.clone()).ok()?;
    match (chain(rule, &s0, moves), observed) {
        (
            Ok(traj),
            Observation::Dominance {
                dominating_step,
                dominated_step,
                ..
            },
        ) => {
            let (a, b) = (
                *dominated_step.min(dominating_step),
                *dominated_step.max(dominating_step),
            );
            Some(WitnessInputs::Chain {
                start: traj.states[a].as_slice().to_vec(),
                moves: moves[a..b].to_vec(),
            })
        }
        (Err(Error::Chain { step, states, .. }), _) => Some(WitnessInputs::Chain {
            start: states[step - 1].clone(),
            moves: vec![moves[step - 1]],
        }),
        _ => None,
    }
}

/// The same witness on token pair `(0, 1)`, if it uses another pair.
fn canonical_pair(inputs: &WitnessInputs) -> Option<WitnessInputs> {
    let mut cand = inputs.clone();
    match &mut cand {
        WitnessInputs::Swap {
            token_in,
            token_out,
            ..
        }
        | WitnessInputs::Scaled {
            token_in,
            token_out,
            ..
        } if (*token_in, *token_out) != (0, 1) => {
            *token_in = 0;
            *token_out = 1;
            Some(cand)
        }
        _ => None,
    }
}

/// Simpler values to try for a scalar, most aggressive first. State
/// coordinates and unit factors move toward 1 (factors via 2 or 1/2), swap
/// amounts of single-swap witnesses toward 1 then by halving, chain
/// amounts by halving.
fn candidates(inputs: &WitnessInputs, knob: Knob, value: f64) -> Vec<f64> {
    let toward_one = value.sqrt();
    let mut out = match knob {
        Knob::Coordinate(_) => vec![1.0, toward_one],
        Knob::Factor(_) => vec![1.0, if value > 1.0 { 2.0 } else { 0.5 }, toward_one],
        Knob::Amount => match inputs {
            WitnessInputs::Swap { .. } => vec![1.0, value / 2.0],
            _ => vec![1.0, toward_one],
        },
        Knob::MoveAmount(_) => vec![value / 2.0],
    };
    out.retain(|&c| c != value && c.is_finite() && c > 0.0);
    out
}

fn round_significant(v: f64, digits: i32) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let magnitude = v.abs().log10().floor() as i32;
    let scale = 10f64.powi(digits - 1 - magnitude);
    let r = (v * scale).round() / scale;
    if r.is_finite() {
        r
    } else {
        v
    }
}

/// Minimizes a failing report's witness while the failure persists.
///
/// A candidate is accepted only if it fails with the same kind of
/// observation as the original. Chain witnesses are first cut down to the
/// dominating segment (or the failing move); then up to 100 passes move
/// single-swap witnesses to the canonical token pair `(0, 1)` and pull
/// every scalar toward a simpler value.
/// Single-swap amounts then go through bisection for the smallest failing
/// amount, and every scalar is finally rounded to as few significant
/// digits as keep it failing.
pub fn shrink<R: SwapRule + ?Sized>(report: &AxiomReport, rule: &R) -> Result<AxiomReport> {
    let original = match (&report.passed, &report.witness) {
        (false, Some(w)) => w,
        _ => {
            return Err(Error::Usage(format!(
                "cannot shrink {} report for {}: it did not fail",
                report.axiom.as_str(),
                report.rule
            )))
        }
    };
    let axiom = report.axiom;
    let tol = report.tolerance;
    // candidates must keep failing the same way
    let kind = std::mem::discriminant(&original.observed);
    let fails = |inputs: &WitnessInputs| {
        evaluate(axiom, rule, inputs, tol)
            .filter(|(observed, _)| std::mem::discriminant(observed) == kind)
    };

    let mut best = original.inputs.clone();
    let mut outcome = (original.observed.clone(), original.expected.clone());

    if let Some(cut) = chain_segment(rule, &best, &outcome.0) {
        if let Some(o) = fails(&cut) {
            best = cut;
            outcome = o;
        }
    }

    for _ in 0..MAX_SHRINK_ITERATIONS {
        let mut changed = false;
        if let Some(cand) = canonical_pair(&best) {
            if let Some(o) = fails(&cand) {
                best = cand;
                outcome = o;
                changed = true;
            }
        }
        for knob in knobs(&best) {
            let value = *slot(&mut best.clone(), knob);
            for c in candidates(&best, knob, value) {
                let mut cand = best.clone();
                *slot(&mut cand, knob) = c;
                if let Some(o) = fails(&cand) {
                    best = cand;
                    outcome = o;
                    changed = true;
                    break;
                }
            }
        }
        if !changed {
            break;
        }
    }

    if let WitnessInputs::Swap { amount, .. } = &best {
        let at = |a: f64| {
            let mut cand = best.clone();
            *slot(&mut cand, Knob::Amount) = a;
            fails(&cand).map(|o| (cand, o))
        };
        if let Some(found) = at(0.0) {
            (best, outcome) = found;
        } else {
            let (mut lo, mut hi) = (0.0, *amount);
            for _ in 0..BISECTION_STEPS {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if at(mid).is_some() {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            if let Some(found) = at(hi) {
                (best, outcome) = found;
            }
        }
    }

    for knob in knobs(&best) {
        let value = *slot(&mut best.clone(), knob);
        for digits in 1..=17 {
            let r = round_significant(value, digits);
            if r == value {
                break;
            }
            let mut cand = best.clone();
            *slot(&mut cand, knob) = r;
            if let Some(o) = fails(&cand) {
                best = cand;
                outcome = o;
                break;
            }
        }
    }

    let mut shrunk = report.clone();
    shrunk.witness = Some(Witness {
        inputs: best,
        observed: outcome.0,
        expected: outcome.1,
        seed: original.seed,
        trial: original.trial,
    });
    shrunk.shrunk = true;
    Ok(shrunk)
}

//! Swap rules, swap execution and chains of primitive swaps.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{ReserveN, WeightVector};

/// A swap mechanism: the object under test.
///
/// `swap_in` is the raw map. It may return invalid states (that is what
/// the validity check looks for) but must not panic on valid input.
/// Callers should go through [`swap`], which checks arguments and domain.
pub trait SwapRule: Send + Sync {
    fn name(&self) -> String;

    fn dimension(&self) -> usize;

    /// State after inputting `amount` of `token_in` and paying out
    /// `token_out`.
    fn swap_in(
        &self,
        state: &ReserveN,
        token_in: usize,
        token_out: usize,
        amount: f64,
    ) -> Result<ReserveN>;

    fn in_domain(&self, state: &ReserveN) -> bool {
        state.is_valid()
    }

    /// Weights of the weighted-product invariant the rule preserves, if any.
    fn weights(&self) -> Option<WeightVector> {
        None
    }
}

/// Input token for two-asset swaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    XIn,
    YIn,
}

impl Direction {
    /// `(token_in, token_out)` indices.
    pub fn pair(self) -> (usize, usize) {
        match self {
            Direction::XIn => (0, 1),
            Direction::YIn => (1, 0),
        }
    }

    pub fn reversed(self) -> Direction {
        match self {
            Direction::XIn => Direction::YIn,
            Direction::YIn => Direction::XIn,
        }
    }
}

/// One primitive swap in a chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub token_in: usize,
    pub token_out: usize,
    pub amount: f64,
}

impl Move {
    pub fn new(token_in: usize, token_out: usize, amount: f64) -> Self {
        Self {
            token_in,
            token_out,
            amount,
        }
    }

    pub fn dir(direction: Direction, amount: f64) -> Self {
        let (i, j) = direction.pair();
        Self::new(i, j, amount)
    }
}

/// Textual rule specification: `wgm:<w>`, `product`, `csum` or
/// `wprod:<w1>,<w2>,...`.
#[derive(Debug, Clone, PartialEq)]
pub enum RuleSpec {
    Wgm(f64),
    Product,
    ConstantSum,
    WeightedProduct(Vec<f64>),
}

impl FromStr for RuleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let number = |t: &str| -> Result<f64> {
            let t = t.trim();
            let v: f64 = t
                .parse()
                .map_err(|_| Error::Usage(format!("malformed number {t:?} in rule spec {s:?}")))?;
            if !v.is_finite() {
                return Err(Error::Usage(format!(
                    "non-finite weight in rule spec {s:?}"
                )));
            }
            Ok(v)
        };
        match s.split_once(':') {
            None => match s {
                "product" => Ok(RuleSpec::Product),
                "csum" => Ok(RuleSpec::ConstantSum),
                _ => Err(Error::Usage(format!("unknown rule spec {s:?}"))),
            },
            Some(("wgm", w)) => Ok(RuleSpec::Wgm(number(w)?)),
            Some(("wprod", ws)) => ws
                .split(',')
                .map(number)
                .collect::<Result<Vec<_>>>()
                .map(RuleSpec::WeightedProduct),
            Some(_) => Err(Error::Usage(format!("unknown rule spec {s:?}"))),
        }
    }
}

impl fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleSpec::Wgm(w) => write!(f, "wgm:{w}"),
            RuleSpec::Product => f.write_str("product"),
            RuleSpec::ConstantSum => f.write_str("csum"),
            RuleSpec::WeightedProduct(ws) => {
                f.write_str("wprod:")?;
                for (k, w) in ws.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{w}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Pricing {
    /// Holds `∏ x_i^{w_i}` fixed across every pairwise swap.
    WeightedProduct(WeightVector),
    /// `(x_i, x_j) -> (x_i + dx, x_j - dx)`.
    ConstantSum,
}

/// One of the built-in rules.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinRule {
    spec: RuleSpec,
    pricing: Pricing,
}

/// Builds the rule described by `spec`.
pub fn make_rule(spec: &RuleSpec) -> Result<BuiltinRule> {
    let pricing = match spec {
        RuleSpec::Wgm(w) => Pricing::WeightedProduct(WeightVector::two_asset(*w)?),
        RuleSpec::Product => Pricing::WeightedProduct(WeightVector::two_asset(0.5)?),
        RuleSpec::ConstantSum => Pricing::ConstantSum,
        RuleSpec::WeightedProduct(ws) => Pricing::WeightedProduct(WeightVector::new(ws.clone())?),
    };
    Ok(BuiltinRule {
        spec: spec.clone(),
        pricing,
    })
}

impl BuiltinRule {
    pub fn spec(&self) -> &RuleSpec {
        &self.spec
    }
}

impl FromStr for BuiltinRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        make_rule(&s.parse()?)
    }
}

impl SwapRule for BuiltinRule {
    fn name(&self) -> String {
        self.spec.to_string()
    }

    fn dimension(&self) -> usize {
        match &self.pricing {
            Pricing::WeightedProduct(w) => w.dim(),
            Pricing::ConstantSum => 2,
        }
    }

    fn swap_in(&self, state: &ReserveN, i: usize, j: usize, amount: f64) -> Result<ReserveN> {
        if amount == 0.0 {
            return Ok(state.clone());
        }
        let s = state.as_slice();
        let mut out = s.to_vec();
        out[i] = s[i] + amount;
        out[j] = match &self.pricing {
            // ln x_j' = ln x_j - (w_i / w_j) ln(1 + dx / x_i)
            Pricing::WeightedProduct(w) => {
                let ratio = w.as_slice()[i] / w.as_slice()[j];
                s[j] * (-ratio * (amount / s[i]).ln_1p()).exp()
            }
            Pricing::ConstantSum => s[j] - amount,
        };
        ReserveN::new(out).map_err(|e| Error::Numeric(e.to_string()))
    }

    fn weights(&self) -> Option<WeightVector> {
        match &self.pricing {
            Pricing::WeightedProduct(w) => Some(w.clone()),
            Pricing::ConstantSum => None,
        }
    }
}

impl<R: SwapRule + ?Sized> SwapRule for &R {
    fn name(&self) -> String {
        (**self).name()
    }
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn swap_in(&self, s: &ReserveN, i: usize, j: usize, amount: f64) -> Result<ReserveN> {
        (**self).swap_in(s, i, j, amount)
    }
    fn in_domain(&self, s: &ReserveN) -> bool {
        (**self).in_domain(s)
    }
    fn weights(&self) -> Option<WeightVector> {
        (**self).weights()
    }
}

impl<R: SwapRule + ?Sized> SwapRule for Box<R> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn swap_in(&self, s: &ReserveN, i: usize, j: usize, amount: f64) -> Result<ReserveN> {
        (**self).swap_in(s, i, j, amount)
    }
    fn in_domain(&self, s: &ReserveN) -> bool {
        (**self).in_domain(s)
    }
    fn weights(&self) -> Option<WeightVector> {
        (**self).weights()
    }
}

fn check_args<R: SwapRule + ?Sized>(
    rule: &R,
    s: &ReserveN,
    i: usize,
    j: usize,
    amount: f64,
) -> Result<()> {
    let n = rule.dimension();
    if s.dim() != n {
        return Err(Error::Usage(format!(
            "rule {} is {n}-asset but the state has {} coordinates",
            rule.name(),
            s.dim()
        )));
    }
    if i >= n || j >= n || i == j {
        return Err(Error::Usage(format!(
            "token pair ({i}, {j}) is not a pair of distinct tokens below {n}"
        )));
    }
    if !(amount.is_finite() && amount >= 0.0) {
        return Err(Error::Usage(format!(
            "swap amount {amount} is not a nonnegative number"
        )));
    }
    if !rule.in_domain(s) {
        return Err(Error::Domain(format!(
            "state {:?} is outside the domain of {}",
            s.as_slice(),
            rule.name()
        )));
    }
    Ok(())
}

/// Input `amount` of token `i` at state `s`, receiving token `j`.
pub fn swap<R: SwapRule + ?Sized>(
    rule: &R,
    s: &ReserveN,
    i: usize,
    j: usize,
    amount: f64,
) -> Result<ReserveN> {
    check_args(rule, s, i, j, amount)?;
    let out = rule.swap_in(s, i, j, amount)?;
    if out.dim() != s.dim() {
        return Err(Error::Numeric(format!(
            "rule {} changed the state dimension",
            rule.name()
        )));
    }
    Ok(out)
}

/// Amount of token `j` paid out: `s_j - swap(s, i, j, amount)_j`.
pub fn out_amount<R: SwapRule + ?Sized>(
    rule: &R,
    s: &ReserveN,
    i: usize,
    j: usize,
    amount: f64,
) -> Result<f64> {
    let t = swap(rule, s, i, j, amount)?;
    Ok(s.get(j) - t.get(j))
}

/// States visited by a chain of primitive swaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<ReserveN>,
    pub moves: Vec<Move>,
}

/// Folds [`swap`] over `moves`, stopping with [`Error::Chain`] at the first
/// step that fails or leaves the rule's domain.
pub fn chain<R: SwapRule + ?Sized>(rule: &R, s0: &ReserveN, moves: &[Move]) -> Result<Trajectory> {
    if !rule.in_domain(s0) {
        return Err(Error::Domain(format!(
            "chain start {:?} is outside the domain of {}",
            s0.as_slice(),
            rule.name()
        )));
    }
    let mut states = Vec::with_capacity(moves.len() + 1);
    states.push(s0.clone());
    for (k, m) in moves.iter().enumerate() {
        let prev = states.last().expect("chain has a start");
        let fail = |reason: String, states: &[ReserveN]| Error::Chain {
            step: k + 1,
            reason,
            states: states.iter().map(|s| s.as_slice().to_vec()).collect(),
        };
        let next = match swap(rule, prev, m.token_in, m.token_out, m.amount) {
            Ok(next) => next,
            Err(e) => return Err(fail(e.to_string(), &states)),
        };
        if !rule.in_domain(&next) {
            return Err(fail(
                format!("output {:?} is outside the domain", next.as_slice()),
                &states,
            ));
        }
        states.push(next);
    }
    Ok(Trajectory {
        states,
        moves: moves.to_vec(),
    })
}

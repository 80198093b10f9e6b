//! Fee-paying swaps and liquidity scaling.
//!
//! A fee-paying swap of gross size `dx` at rate `φ` prices only the
//! effective input `(1 - φ)·dx` with the fee-free rule and keeps the whole
//! `dx` in the input reserve. Equivalently: a fee-free swap along the
//! current orbit followed by a one-sided injection of `φ·dx`, which moves
//! the state to a higher orbit. Injecting first and then swapping gives a
//! different output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{rel_close, rel_close_all, Reserve2, ReserveN, WeightVector};
use crate::swap::{swap, Direction, SwapRule};

/// Relative tolerance for the decomposition identity and the fee-free
/// drift check.
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-12;

/// Fee injections below this size relative to the input reserve are not
/// expected to move the invariant measurably.
pub const DRIFT_RESOLUTION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeeConfig {
    phi: f64,
}

impl FeeConfig {
    pub fn new(phi: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&phi) {
            return Err(Error::Config(format!("fee rate {phi} is outside [0, 1)")));
        }
        Ok(Self { phi })
    }

    pub fn rate(&self) -> f64 {
        self.phi
    }
}

fn require_two_asset<R: SwapRule + ?Sized>(rule: &R) -> Result<()> {
    if rule.dimension() != 2 {
        return Err(Error::Usage(format!(
            "fee swaps are defined for two-asset rules, {} has {} tokens",
            rule.name(),
            rule.dimension()
        )));
    }
    Ok(())
}

fn fee_free<R: SwapRule + ?Sized>(
    rule: &R,
    s: Reserve2,
    direction: Direction,
    amount: f64,
) -> Result<Reserve2> {
    let (i, j) = direction.pair();
    let t = swap(rule, &ReserveN::from(s), i, j, amount)?;
    Reserve2::try_from(&t)
}

fn inject(s: Reserve2, direction: Direction, amount: f64) -> Reserve2 {
    match direction {
        Direction::XIn => Reserve2 {
            x: s.x + amount,
            ..s
        },
        Direction::YIn => Reserve2 {
            y: s.y + amount,
            ..s
        },
    }
}

/// Output reserve for the effective input, input reserve grown by the
/// full `dx`.
pub fn fee_swap<R: SwapRule + ?Sized>(
    rule: &R,
    s: Reserve2,
    direction: Direction,
    dx: f64,
    fee: FeeConfig,
) -> Result<Reserve2> {
    require_two_asset(rule)?;
    if !s.is_valid() {
        return Err(Error::Domain(format!("invalid state ({}, {})", s.x, s.y)));
    }
    if !(dx.is_finite() && dx >= 0.0) {
        return Err(Error::Usage(format!(
            "swap amount {dx} is not a nonnegative number"
        )));
    }
    let priced = fee_free(rule, s, direction, (1.0 - fee.phi) * dx)?;
    Ok(match direction {
        Direction::XIn => Reserve2 {
            x: s.x + dx,
            y: priced.y,
        },
        Direction::YIn => Reserve2 {
            x: priced.x,
            y: s.y + dx,
        },
    })
}

fn output(s: Reserve2, t: Reserve2, direction: Direction) -> f64 {
    match direction {
        Direction::XIn => s.y - t.y,
        Direction::YIn => s.x - t.x,
    }
}

/// The three evaluation orders of a fee-paying swap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    /// Direct [`fee_swap`].
    pub direct: Reserve2,
    /// Fee-free swap of the effective input, then inject the fee.
    pub swap_then_inject: Reserve2,
    /// Inject the fee, then fee-free swap of the effective input.
    pub inject_then_swap: Reserve2,
    pub output_direct: f64,
    pub output_swap_then_inject: f64,
    pub output_inject_then_swap: f64,
    /// `|output_swap_then_inject - output_inject_then_swap|`.
    pub order_difference: f64,
    pub direct_matches_decomposition: bool,
    pub order_sensitive: bool,
    pub passed: bool,
}

pub fn decompose_check<R: SwapRule + ?Sized>(
    rule: &R,
    s: Reserve2,
    direction: Direction,
    dx: f64,
    fee: FeeConfig,
) -> Result<DecompositionReport> {
    let direct = fee_swap(rule, s, direction, dx, fee)?;
    let effective = (1.0 - fee.phi) * dx;
    let retained = fee.phi * dx;
    let swap_then_inject = inject(
        fee_free(rule, s, direction, effective)?,
        direction,
        retained,
    );
    let inject_then_swap = fee_free(rule, inject(s, direction, retained), direction, effective)?;

    let (a, b, c) = (
        output(s, direct, direction),
        output(s, swap_then_inject, direction),
        output(s, inject_then_swap, direction),
    );
    let order_difference = (b - c).abs();
    let matches = rel_close_all(
        &[direct.x, direct.y],
        &[swap_then_inject.x, swap_then_inject.y],
        DECOMPOSITION_TOLERANCE,
    ) && rel_close(a, b, DECOMPOSITION_TOLERANCE);
    let order_sensitive = order_difference > 0.0;
    let orders_ok = if retained > 0.0 {
        order_sensitive
    } else {
        rel_close(b, c, DECOMPOSITION_TOLERANCE)
    };
    Ok(DecompositionReport {
        direct,
        swap_then_inject,
        inject_then_swap,
        output_direct: a,
        output_swap_then_inject: b,
        output_inject_then_swap: c,
        order_difference,
        direct_matches_decomposition: matches,
        order_sensitive,
        passed: matches && orders_ok,
    })
}

/// States and invariant values along a sequence of fee-paying swaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSeries {
    pub states: Vec<Reserve2>,
    pub invariant_values: Vec<f64>,
}

impl DriftSeries {
    pub fn is_strictly_increasing(&self) -> bool {
        self.invariant_values.windows(2).all(|w| w[1] > w[0])
    }

    /// Largest relative deviation from the first value.
    pub fn max_relative_drift(&self) -> f64 {
        let first = self.invariant_values[0];
        self.invariant_values
            .iter()
            .map(|v| (v - first).abs() / first)
            .fold(0.0, f64::max)
    }
}

/// Folds [`fee_swap`] over `trades`, recording the rule's invariant after
/// each step.
pub fn fee_drift<R: SwapRule + ?Sized>(
    rule: &R,
    s0: Reserve2,
    trades: &[(Direction, f64)],
    fee: FeeConfig,
) -> Result<DriftSeries> {
    let w = rule.weights().ok_or_else(|| {
        Error::Usage(format!(
            "rule {} has no weighted-product invariant to track",
            rule.name()
        ))
    })?;
    let phi = |s: Reserve2| ReserveN::from(s).phi(&w);
    let mut states = vec![s0];
    let mut invariant_values = vec![phi(s0)?];
    let mut current = s0;
    for &(direction, dx) in trades {
        current = fee_swap(rule, current, direction, dx, fee)?;
        states.push(current);
        invariant_values.push(phi(current)?);
    }
    Ok(DriftSeries {
        states,
        invariant_values,
    })
}

/// Whether a fee-paying trade is large enough that its drift must show up:
/// `φ·dx` above [`DRIFT_RESOLUTION`] relative to the input reserve.
pub fn drift_resolvable(s: Reserve2, direction: Direction, dx: f64, fee: FeeConfig) -> bool {
    let reserve = match direction {
        Direction::XIn => s.x,
        Direction::YIn => s.y,
    };
    fee.phi * dx > DRIFT_RESOLUTION * reserve
}

/// Fee-free series must stay constant within [`DECOMPOSITION_TOLERANCE`];
/// with a fee, every resolvable trade must strictly raise the invariant.
pub fn drift_conforms(series: &DriftSeries, trades: &[(Direction, f64)], fee: FeeConfig) -> bool {
    if fee.phi == 0.0 {
        return series.max_relative_drift() <= DECOMPOSITION_TOLERANCE;
    }
    trades.iter().enumerate().all(|(k, &(direction, dx))| {
        !drift_resolvable(series.states[k], direction, dx, fee)
            || series.invariant_values[k + 1] > series.invariant_values[k]
    })
}

/// `∏ f_i^{w_i}`: the factor by which rescaling reserves by `factors`
/// multiplies the invariant.
pub fn scaling_factor(w: &WeightVector, factors: &[f64]) -> Result<f64> {
    if factors.len() != w.dim() {
        return Err(Error::Usage(format!(
            "{} factors for {} weights",
            factors.len(),
            w.dim()
        )));
    }
    if let Some(bad) = factors.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
        return Err(Error::Domain(format!("scale factor {bad} is not positive")));
    }
    Ok(factors
        .iter()
        .zip(w.as_slice())
        .map(|(f, wi)| wi * f.ln())
        .sum::<f64>()
        .exp())
}

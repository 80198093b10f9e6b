//! Constant-function market maker swap mechanics, axiom conformance checks
//! and log-space classification of trading orbits.
//!
//! * [`state`]: reserve vectors, the Pareto order, log coordinates and the
//!   weighted-product invariant.
//! * [`swap`]: the [`SwapRule`] abstraction and the built-in rules.
//! * [`harness`]: seeded conformance checks with witness shrinking.
//! * [`classify`]: orbit sampling, total-least-squares line and hyperplane
//!   fits and the level-set verification built on them.
//! * [`fees`]: fee-paying swaps, invariant drift and liquidity scaling.
//! * [`cli`]: the command-line front end.

pub mod classify;
pub mod cli;
pub mod error;
pub mod fees;
pub mod harness;
pub mod report;
pub mod sampling;
pub mod state;
pub mod swap;

pub use error::{Error, Result};
pub use state::{LogPoint, Reserve2, ReserveN, WeightVector};
pub use swap::{
    chain, make_rule, out_amount, swap, BuiltinRule, Direction, Move, RuleSpec, SwapRule,
    Trajectory,
};

//! Conditional portfolio policies built from first and second moment
//! functions of asset returns.
//!
//! Conditional on a feature `f`, the policy that maximizes the unconditional
//! Sharpe ratio allocates proportionally to `A(f)⁻¹μ(f)`, where `A` is the
//! second moment matrix of returns, rather than to the Markowitz direction
//! `Σ(f)⁻¹μ(f)`. The two differ state by state by the factor
//! `1 + μᵀΣ⁻¹μ`. The same direction solves mean-variance and
//! approximate-Kelly problems with different overall scale.
//!
//! Modules:
//! - [`moments`]: moment pairs, the rank-one identity, Hansen ratios, scaling constants.
//! - [`discrete`]: finite-state markets, policy evaluation, omitted-state analysis.
//! - [`hedging`]: expectation-orthogonality constraints and basis portfolios.
//! - [`lcem`]: Monte Carlo under a linear conditional expectation model.
//! - [`leverage`]: nonparametric optimal-leverage curves.
//! - [`io`] and [`cli`]: file formats and the `smm` command.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod discrete;
pub mod error;
pub mod hedging;
pub mod io;
pub mod lcem;
pub mod leverage;
pub mod linalg;
pub mod moments;

pub use discrete::{evaluate, markowitz_policy, merge_states, q_of, smm_policy, DiscreteMarket, Policy};
pub use error::{Result, SmmError};
pub use moments::{
    conditional_q, itas, markowitz_direction, optimal_objective_value, scaling_constant, smm_direction, tas,
    MomentInput, MomentPair, Objective, PerfSummary,
};

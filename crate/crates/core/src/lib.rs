//! Quality-ladder dynamics with innovation and imitation.
//!
//! This crate implements three tightly linked layers of one model family:
//!
//! * **Mean-field ladders** ([`ladder`], [`density`]): a continuum of firms
//!   on quality levels relabeled relative to the frontier. Each period a
//!   firm innovates with probability `a` (keeping its relative level) or
//!   slips one level; fallen firms re-enter by imitation, either with
//!   exogenous target weights `q_i` or with density-dependent weights
//!   proportional to the mass above them. Closed-form stationary profiles
//!   and their iterative oracles live here.
//! * **Endogenous support** ([`bellman`]): firms choose whether to pay a
//!   cost to leapfrog (or imitate), producing a threshold policy whose
//!   induced support length feeds back into the stationary profile.
//! * **Branching random walks with selection** ([`brw`], [`analysis`]): the
//!   finite-population counterpart. `N`-particle and window-`L` selection
//!   rules, the deterministic speed function `v(gamma)`, finite-size
//!   velocity predictions, and front-shape estimators.
//!
//! Everything is deterministic given a seed; see [`seeding`] for the RNG
//! contract.

// Guards are written `!(x > 0.0)` on purpose: unlike `x <= 0.0`, the negated
// form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bellman;
pub mod brw;
pub mod density;
pub mod error;
pub mod ladder;
pub mod seeding;

pub use error::{Error, Result};

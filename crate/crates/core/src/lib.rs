//! Bayesian two-stage sampling design for microplastic monitoring.
//!
//! A campaign first decides how many quadrants `m` to sample and count, then,
//! once the total count `n` is known, spends whatever budget remains on
//! polymer categorization of a fraction `q` of the particles. Abundance is
//! modelled as Poisson counts with a Gamma prior (shape/rate), composition as
//! Multinomial class counts with a Dirichlet prior.
//!
//! Module map:
//!
//! - [`distributions`]: parameter types, samplers, densities and moments.
//! - [`posterior`]: conjugate updates, HPD intervals, density grids and
//!   synthetic "expected observation" data.
//! - [`loss`]: realized and prior-expected variance-reduction losses plus
//!   Monte Carlo oracles.
//! - [`cost`]: the normalized budget model and the implied categorization
//!   fraction.
//! - [`design`]: the optimizer over `m`, performance curves and sensitivity
//!   sweeps.
//! - [`config`] and [`campaign`]: the JSON config and campaign CSV formats.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod campaign;
pub mod config;
pub mod cost;
pub mod design;
pub mod distributions;
mod error;
pub mod loss;
pub mod posterior;
pub mod rng;

pub use error::{Error, Result};

/// Polymer classes of interest, in the default class order.
pub const DEFAULT_CLASS_NAMES: [&str; 10] = [
    "PE", "PP", "PET", "PS", "PA", "PVC", "PU", "AC", "PES", "NPP",
];

/// Floor of a non-negative real that is meant to be an integer count.
///
/// Products such as `m * A * lambda` or `n * q` may land a few ulps below an
/// exact integer; a relative guard of 1e-12 keeps those on the integer.
pub(crate) fn floor_count(x: f64) -> u64 {
    if !(x > 0.0) {
        return 0;
    }
    (x * (1.0 + 1e-12)).floor() as u64
}

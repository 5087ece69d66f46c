//! Variance-based sensitivity analysis and stochastic order checks.
//!
//! The crate is `no_std` with `alloc`. Everything here is a pure function of
//! its inputs: input laws are described by their quantile functions, Sobol
//! indices are computed either in closed form for structured output functions
//! ([`hoeffding`]) or by pick-freeze Monte Carlo for black-box models
//! ([`montecarlo`]), and the order relations between input laws are verified
//! on quantile grids ([`orders`]). The financial output functions used in the
//! bundled experiments live in [`models`].
//!
//! File formats, the CLI, and parallel evaluation live in the `ordersense`
//! companion crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod distributions;
pub mod error;
pub mod hoeffding;
pub mod math;
pub mod models;
pub mod montecarlo;
pub mod orders;
pub mod quadrature;
pub mod rng;

pub use distributions::{Distribution, InputVector, Law};
pub use error::{Error, Result};
pub use hoeffding::{DecompositionResult, ScalarFn, StructuredFunction};
pub use montecarlo::{Model, SobolEstimate};
pub use orders::{OrderReport, Relation, Verdict};

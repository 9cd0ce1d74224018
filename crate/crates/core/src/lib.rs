//! Regression with compositional data in pivot logratio coordinates.
//!
//! Compositions (time budgets, proportions, percentages) carry only relative
//! information. This crate represents them in pivot coordinates, where the
//! first coordinate of pivot `l` summarizes part `l` against the geometric mean
//! of the rest, and fits three model families on top:
//!
//! - compositional covariates with a gaussian or binary response
//!   ([`models::fit_comp_covariates`]),
//! - a compositional response with ordinary covariates
//!   ([`models::fit_comp_response`]),
//! - one part regressed on the remaining parts
//!   ([`models::fit_within_composition`]).
//!
//! Each family is fitted once per pivot. The orthogonal (base-2) coordinate
//! scheme makes a unit coefficient mean "doubling the relative dominance";
//! [`interpret`] converts between schemes and reads coefficients as
//! dominance factors.
//!
//! # Modules
//!
//! - [`simplex`] - compositions, pivot coordinates, variation matrix
//! - [`statdist`] - t, F and normal tails
//! - [`lsq`] - ordinary least squares with inference
//! - [`glm`] - logistic regression by Fisher scoring
//! - [`models`] - the pivot-wise model families and the raw baseline
//! - [`interpret`] - scheme transforms and dominance factors
//! - [`data`] - datasets, CSV input/output, zero handling
//! - [`synth`] - seeded synthetic datasets with planted effects

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod glm;
pub mod interpret;
pub mod lsq;
pub mod models;
pub mod simplex;
pub mod statdist;
pub mod synth;

pub use error::{Error, Result};

//! Submodular maximization over cheap anytime confidence bounds.
//!
//! The crate is organized around four layers:
//!
//! * [`submodular`]: oracle and bound contracts plus the greedy family of
//!   maximizers, including the bound-driven PAC greedy.
//! * [`entropy`]: discrete beliefs, plug-in entropy estimation and its
//!   concentration and bias bounds, and a Hoeffding bound provider.
//! * [`sensor`]: conditionally independent sensor models, exact and sampled
//!   conditional entropy, observation coarsening, and the conditional-entropy
//!   bound provider.
//! * [`tracking`]: a grid-world target tracking simulator that selects
//!   sensors every timestep with any of the maximizers.
//!
//! [`verify`] bundles the statistical validation suites.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entropy;
pub mod error;
pub mod rng;
pub mod sensor;
pub mod submodular;
pub mod tracking;
pub mod verify;

pub use error::{Error, Result};

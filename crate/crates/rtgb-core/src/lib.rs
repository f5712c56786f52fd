//! Recurrent temporal Gaussian-Bernoulli restricted Boltzmann machines.
//!
//! This crate learns the dynamics of continuous video-like sequences with a
//! recurrent temporal Gaussian-Bernoulli RBM (RTGB-RBM), extracts probabilistic
//! state-transition rules between the binary hidden variables, and predicts
//! future frames either from the model itself or from the extracted rules.
//!
//! Components:
//! - [`gbrbm`]: the static Gaussian-Bernoulli RBM (energy, conditionals,
//!   exact partition/likelihood oracles for small hidden layers)
//! - [`temporal`]: the recurrent temporal model (hidden-mean recurrence,
//!   contrastive-divergence training, rollout prediction, exact transition oracle)
//! - [`rules`]: transition-rule extraction via Gibbs sampling, rule application,
//!   rule-based prediction, and the canonical text format
//! - [`sim`]: bouncing-ball and moving-sprite sequence generators
//! - [`eval`]: prediction loss, hidden-unit feature maps, PGM encoding
//! - [`data`]: dataset containers and binary hidden-state patterns
//!
//! The crate is `no_std`-compatible (with `alloc`); all floating-point
//! transcendentals route through `libm` so results are identical with and
//! without the `std` feature.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod data;
pub mod eval;
pub mod exec;
pub mod gbrbm;
pub mod math;
pub mod rng;
pub mod rules;
pub mod sim;
pub mod temporal;

mod error;

pub use error::{Error, Result};

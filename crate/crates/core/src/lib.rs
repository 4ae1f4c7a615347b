//! Core algorithms for multi-modal graph representation learning.
//!
//! The crate is organized around a small dense-matrix kernel with
//! reverse-mode automatic differentiation ([`numcore`]), graph
//! construction and quality metrics ([`graphbuild`]), a synthetic
//! two-modality Gaussian generator with label-controlled graph samplers
//! ([`synthgen`]), neural layers and losses ([`nn`]), the integration
//! model zoo ([`models`]), and the evaluation harness ([`eval`]).
//!
//! The crate is `no_std`-compatible (with `alloc`); everything that
//! touches the file system, clocks, or threads lives in the companion
//! `graphomic` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod eval;
pub mod graphbuild;
pub mod models;
pub mod nn;
pub mod numcore;
pub mod rng;
pub mod synthgen;

pub use numcore::{Matrix, NumError};
pub use rng::SplitRng;

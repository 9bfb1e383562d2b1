//! Numerical core for group linear non-Gaussian component analysis.
//!
//! Everything here is a pure function of its inputs and seeds. The crate is
//! `no_std` (it needs `alloc`); enabling the `rayon` feature pulls in `std`
//! and runs independent restarts, subjects and resamples on a thread pool
//! without changing any result.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod contrast;
pub mod dimtest;
pub mod error;
pub mod eval;
pub mod fields;
pub mod ica;
pub mod linalg;
pub mod par;
pub mod pipeline;
pub mod rng;
pub mod sim;
pub mod special;
pub mod stats;

pub use error::{Error, Result};

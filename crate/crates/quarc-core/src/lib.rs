//! Algorithmic core of the quarc classifier: a small dense statevector
//! simulator, parameterized circuit templates with data re-uploading,
//! feature encodings, a parameter-shift training engine, one-vs-rest
//! multiclass assembly, and analysis routines (landscapes, harmonic
//! scans, robustness sweeps, hardware timing estimates).
//!
//! The crate is `no_std` + `alloc`; everything that touches files, wall
//! clocks, or thread pools lives in the companion `quarc-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod circuit;
pub mod dataset;
pub mod encoding;
pub mod error;
mod fmath;
pub mod model;
pub mod multiclass;
pub mod pipeline;
pub mod rng;
pub mod state;
pub mod train;

pub use error::Error;

pub type Result<T> = core::result::Result<T, Error>;

//! Finite-dimensional Galerkin truncations of bilinear Schrödinger systems
//! `ψ' = (A + u(t) B) ψ`, with unitary propagation, periodic control shapes,
//! and the averaging estimates that govern small-amplitude population
//! transfer.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats and the
//! command-line front end live in the companion `qgalerkin-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod averaging;
pub mod controls;
pub mod error;
pub mod linalg;
pub mod propagator;
pub mod spectral;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

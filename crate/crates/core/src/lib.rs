//! Grover walks on spidernets.
//!
//! The crate computes the return amplitude `⟨ψ₀⁺, Uⁿψ₀⁺⟩` of the Grover walk
//! on a spidernet `S(a,b,c)` along three independent routes:
//!
//! * [`grover`]: the walk `U = SC` on the half-edge space of an explicit,
//!   radius-truncated graph built by [`spidernet`];
//! * [`reduction`]: the one-dimensional `(p,q)`-quantum walk on `Z₊` (and its
//!   finite-path cutoff, with the complete eigensystem);
//! * [`meixner`] + [`analysis`]: the spectral integral against the free
//!   Meixner law, together with localization constants derived from its atom.

pub mod analysis;
pub mod error;
pub mod grover;
pub mod meixner;
pub mod reduction;
pub mod spidernet;
pub mod tridiag;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

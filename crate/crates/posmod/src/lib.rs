//! Antenna-array weight design for positional modulation under a two-ray
//! (line-of-sight plus single specular reflection) propagation model.
//!
//! The crate covers the full design-and-evaluation pipeline:
//!
//! - [`geometry`]: two-ray path geometry for a desired receiver and a ring of
//!   eavesdropper positions (angles, path lengths, phase shifts, attenuations).
//! - [`array`]: antenna layouts and steering vectors/matrices.
//! - [`targets`]: per-symbol desired responses (constellation at the desired
//!   location, low-magnitude scrambled responses on the ring).
//! - [`closed_form`]: equality-constrained least-squares weight design for a
//!   fixed array, solved through the KKT system, plus a literal evaluation of
//!   the published closed-form expression for cross-checking.
//! - [`sparse`]: antenna-location selection on a dense candidate grid via
//!   group-sparse convex programming with iterative reweighting.
//! - [`ber`]: Monte Carlo bit-error-rate evaluation over eavesdropper rings.
//! - [`config`] / [`runner`]: experiment configuration and orchestration used
//!   by the `posmod` command-line tool.
//!
//! All lengths are expressed in carrier wavelengths, which makes the phase
//! and attenuation expressions unit-free. Angles are radians internally;
//! degrees appear only at configuration and CLI boundaries.

pub mod array;
pub mod ber;
pub mod channel;
pub mod closed_form;
pub mod config;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod runner;
pub mod sparse;
pub mod targets;

pub use error::{Error, Result};

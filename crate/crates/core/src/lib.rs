//! Monte Carlo and analysis toolkit for searches for Pauli-forbidden Kα
//! X-rays from electrons in a current-carrying copper conductor.
//!
//! - [`physics`]: electron counts, the signal coefficient K and the
//!   transition lines.
//! - [`transport`]: photon emission in the copper cylinder,
//!   self-absorption and the acceptance of the CCD ring.
//! - [`ccd`]: energy smearing, synthetic frames, cluster finding.
//! - [`analysis`]: spectra, on/off subtraction, ROI counts, limits and
//!   projections.
//! - [`pipeline`]: configuration files and the batch stages behind the
//!   `pepsim` binary.
//!
//! Every random draw comes from [`rng::SeedTree`], keyed by a master seed,
//! a stage name and an index, so results do not depend on thread count.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod ccd;
pub mod error;
pub mod kv;
pub mod physics;
pub mod pipeline;
pub mod rng;
pub mod transport;

pub use error::{Error, Result};

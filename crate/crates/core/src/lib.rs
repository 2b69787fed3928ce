//! Blind null-space learning for MIMO spectrum sharing.
//!
//! A secondary transmitter reconstructs the Gram matrix `G = H*H` of its
//! interference channel to a primary receiver from scalar energy beacons
//! alone, then transmits inside the learned null space. The same learner
//! drives a two-user spatial channel sharing protocol.
//!
//! The crate is `no_std` and only needs `alloc`. IO, configuration and the
//! command line live in the companion `ebcl-harness` crate.
//!
//! Module map:
//! - [`cmatrix`]: dense complex matrices, Hermitian eigensolver, SVD,
//!   pseudo-inverse and projectors.
//! - [`channel`]: seeded random streams, ZMSW channel draws and the signal model.
//! - [`beacon`]: the primary-side beacon emitter (ideal, sample-averaged, projected).
//! - [`ebcl`]: probe schedule, closed-form Gram reconstruction and precoders.
//! - [`sharing`]: two-user spatial channel sharing, achievable rates and
//!   Monte Carlo validators.
//! - [`stats`]: small statistics helpers (moments, Kolmogorov-Smirnov).

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod beacon;
pub mod channel;
pub mod cmatrix;
pub mod ebcl;
mod error;
pub mod sharing;
pub mod stats;

pub use beacon::{Beacon, BeaconEmitter, BeaconMode, BeaconNoise, BeaconTrace, SamplingPath};
pub use channel::{AntennaConfig, ChannelSet, Rng};
pub use cmatrix::{ComplexMatrix, HermitianEig, Svd};
pub use ebcl::{LearnedGram, Precoder, ProbeLabel, ProbeVector};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use sharing::{RateReport, Scheme, SharingOutcome};

//! Hadamard coded modulation (HCM) and ACO-OFDM modem primitives for
//! peak-power-limited intensity-modulation / direct-detection optical links.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure
//! computation over caller-owned buffers; randomness is injected through
//! `RngCore` so callers control seeding.
//!
//! Module map:
//!
//! * [`transforms`]: binary Hadamard matrices, the fast Walsh-Hadamard
//!   transform and a radix-2 DFT.
//! * [`hcm`]: PAM mapping, HCM / DC-removed HCM encoding, decoding,
//!   interleaving and cyclic prefix handling.
//! * [`aco_ofdm`]: the ACO-OFDM baseline modem and square QAM.
//! * [`channel`]: power normalization, the ideal LED hard limiter, FIR
//!   dispersion and AWGN.
//! * [`interleaver_opt`]: intra-symbol interleaver search against ISI.
//! * [`analysis`]: closed-form statistics and BER expressions.
//! * [`link`]: end-to-end symbol chains used by Monte Carlo drivers.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod aco_ofdm;
pub mod analysis;
pub mod channel;
mod error;
pub mod hcm;
pub mod interleaver_opt;
pub mod link;
pub mod transforms;

pub use error::{Error, Result};

//! Simulation of reverse reconciliation with soft information for
//! discrete-modulation CV-QKD.
//!
//! Alice sends PAM-4 symbols over an AWGN channel. Bob quantizes the output
//! into four equiprobable regions, labels them with bit pairs to form the raw
//! key and discloses a syndrome. With soft reverse reconciliation he also
//! discloses the per-sample metric `N`, the conditional CDF of his
//! observation inside its region, which is uniform and independent of his
//! decision yet sharpens Alice's LLRs. Alice then recovers Bob's frame by
//! syndrome-based belief propagation.

pub mod audit;
pub mod channel;
pub mod cli;
pub mod error;
pub mod ldpc;
pub mod llr;
pub mod metrics;
pub mod quantizer;
pub mod simulator;
pub mod softmetric;

pub use error::{Error, Result};

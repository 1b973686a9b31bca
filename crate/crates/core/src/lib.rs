//! Energy-efficiency simulator for generalized spatial modulation with
//! sub-connected hybrid precoding (GSM-HP) in multi-user mm-Wave massive MIMO,
//! compared against full-digital zero-forcing precoding (FDP).
//!
//! Pipeline per Monte-Carlo drop: [`channel`] draws users and a geometric
//! channel, [`codebook`] enumerates the antenna-group activation patterns,
//! [`precoding`] builds zero-forcing precoders per pattern, [`capacity`]
//! evaluates the closed-form rate, and [`power`] charges the base-station power
//! model. [`sweep`] averages over drops and runs parameter sweeps.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod channel;
pub mod codebook;
pub mod config;
pub mod error;
pub mod linalg;
pub mod params;
pub mod power;
pub mod precoding;
pub mod rng;
pub mod sweep;

pub use config::SimConfig;
pub use error::{Error, Result};
pub use params::{ChannelParams, RadioParams, SystemGeometry};
pub use power::{PowerBreakdown, Scheme};
pub use precoding::RfMode;
pub use sweep::{evaluate_point, run_sweep, write_csv, SweepRecord, SweepSpec};

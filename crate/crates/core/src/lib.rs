//! Simulator for a zero-forcing multi-way massive MIMO relay.
//!
//! `K` single-antenna users exchange data through an `M`-antenna
//! amplify-and-forward relay over `K − 1` time slots. The relay estimates
//! its channels from uplink pilots, combines with a zero-forcing (or
//! maximum-ratio) receiver, permutes the streams and precodes them back.
//!
//! The crate offers both a closed-form spectral efficiency and a Monte Carlo
//! estimate of the same quantity, plus statistical oracles for the
//! random-matrix identities that connect them.
//!
//! Runnable entry points live in `examples/`:
//!
//! - `channel_estimation`: pilot training statistics and channel draws
//! - `zf_processing`: receiver, precoder, permutation and relay matrix
//! - `power_normalization`: the relay amplification factor
//! - `closed_form_se`: the analytic per-user and sum rate
//! - `monte_carlo_se`: simulated rate with confidence interval
//! - `figure1_sweep`: sum rate versus user count
//! - `figure2_cdf`: sum-rate distribution over random drops
//! - `noise_term_oracles`: Monte Carlo checks of the matrix identities

pub mod channel;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod moments;
pub mod oracles;
pub mod processing;
pub mod se;

pub use channel::{estimation_stats, ChannelRealization, FadingProfile, SystemConfig};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, RngStream, C64};
pub use processing::{alpha_analytic, alpha_mc, Processing, ProcessingSet, QTriple};
pub use se::{se_closed_form, se_monte_carlo, Method, SeReport};

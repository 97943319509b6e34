//! Link-level simulation of AI-driven radio access components.
//!
//! * [`waveform`]: QPSK, OFDM, Rayleigh channels, AWGN, PAPR.
//! * [`pa`]: Rapp amplifier, class-B energy model, distortion measurement.
//! * [`precoder`]: min-norm zero forcing and the peak-reducing neurodynamic
//!   precoder that uses the excess antennas, plus the energy-efficiency sweep.
//! * [`dbn`]: restricted Boltzmann machines, CD-1, deep belief network classifier.
//! * [`sas`]: synthetic WiFi/LTE captures, spectral features, datasets and the
//!   spectrum-access decision policy.
//! * [`experiment`]: config-driven experiment commands behind the `airan` binary.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod dbn;
pub mod error;
pub mod experiment;
pub mod format;
pub mod linalg;
pub mod pa;
pub mod precoder;
pub mod rng;
pub mod sas;
pub mod waveform;

pub use error::{Error, Result};
pub use rng::RngStream;

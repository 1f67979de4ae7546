//! Simulation and analysis of a fully connected measurement-device-independent
//! QKD network with weak coherent time-bin sources.
//!
//! * [`model`]: intensity classes, time-bin qubits, links and gain tallies.
//! * [`sim`]: relay interference, click statistics, Monte-Carlo and analytic
//!   tallies, HOM scans and four-fold coincidences.
//! * [`finite_key`]: Chernoff bounds, decoy-state linear programs and the
//!   secure key rate.
//! * [`optimize`]: protocol parameter search and rate-versus-loss curves.
//! * [`network`]: wavelength assignment and time-division schedules.
//!
//! ```
//! use qnet_core::finite_key::{key_rate, RateInputs};
//!
//! let report = key_rate(&RateInputs {
//!     s11_lower: 1.02e-4,
//!     e11ph_upper: 0.1455,
//!     s_zz: 5.147e-5,
//!     e_zz: 2.92e-3,
//!     z: 0.636,
//!     p_z: 0.754,
//!     f: 1.16,
//!     clock_hz: 1e8,
//! })?;
//! assert!(report.rate_bps > 150.0 && report.rate_bps < 180.0);
//! # Ok::<(), qnet_core::Error>(())
//! ```

pub mod error;
pub mod finite_key;
pub mod model;
pub mod network;
pub mod optimize;
pub mod sim;

pub use error::{Error, Result};
pub use model::{
    encode, itu_channel_frequency, transmittance, Basis, Bit, GainTally, IntensityClass, IntensityProtocol, LinkModel,
    ProtocolParams, Tag, TallyEntry, TimeBinQubit,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/encoding.md")]
    mod encoding {}
    #[doc = include_str!("../../../book/src/interference.md")]
    mod interference {}
    #[doc = include_str!("../../../book/src/finite_key.md")]
    mod finite_key {}
    #[doc = include_str!("../../../book/src/optimization.md")]
    mod optimization {}
    #[doc = include_str!("../../../book/src/network.md")]
    mod network {}
}

//! Fully connected n-user networks: wavelength assignment for the WDM
//! architecture and time-division schedules that share relay hardware.

mod render;
mod tdm;
mod wdm;

pub use render::{schedule_table, topology_table, user_label};
pub use tdm::{build_tdm_schedule, Slot, TdmSchedule};
pub use wdm::{plan_full_mesh, ColoredEdge, Topology};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Wdm,
    Tdm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceCounts {
    pub wavelengths: usize,
    pub bsm_modules: usize,
    pub time_bins: usize,
    pub encoders_per_user: usize,
}

pub(crate) fn check_users(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::OutOfRange { name: "n_users", value: n as f64, expected: ">= 2" });
    }
    Ok(())
}

/// `⌈log₂ n⌉`.
pub fn ceil_log2(n: usize) -> u32 {
    n.next_power_of_two().trailing_zeros()
}

/// Encoders (and wavelengths) per user in the TDM scheme: `3k/2` for even
/// `k = ⌈log₂ n⌉`, `(3k − 1)/2` for odd `k`.
pub fn tdm_encoders(n: usize) -> usize {
    let k = ceil_log2(n) as usize;
    if k.is_multiple_of(2) {
        3 * k / 2
    } else {
        (3 * k - 1) / 2
    }
}

pub fn resource_counts(n: usize, scheme: Scheme) -> Result<ResourceCounts> {
    check_users(n)?;
    Ok(match scheme {
        Scheme::Wdm => {
            let wavelengths = if n.is_multiple_of(2) { n - 1 } else { n };
            ResourceCounts { wavelengths, bsm_modules: n * (n - 1) / 2, time_bins: 1, encoders_per_user: wavelengths }
        }
        Scheme::Tdm => {
            let padded = n.next_power_of_two();
            let enc = tdm_encoders(n);
            ResourceCounts { wavelengths: enc, bsm_modules: padded - 1, time_bins: padded / 2, encoders_per_user: enc }
        }
    })
}

//! Secure key rate of the four-intensity protocol.

use serde::{Deserialize, Serialize};

use super::chernoff::h2;
use crate::error::{check_probability, check_range, Result};

/// Error-correction inefficiency.
pub const DEFAULT_F: f64 = 1.16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateInputs {
    pub s11_lower: f64,
    pub e11ph_upper: f64,
    pub s_zz: f64,
    pub e_zz: f64,
    /// Signal intensity.
    pub z: f64,
    pub p_z: f64,
    pub f: f64,
    pub clock_hz: f64,
}

/// Flat result record of a key-rate evaluation. The ℋ fields are set only by
/// the full pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRateReport {
    pub s11_lower: f64,
    pub e11ph_upper: f64,
    pub s_zz: f64,
    pub e_zz: f64,
    pub f: f64,
    pub z: f64,
    pub p_z: f64,
    pub clock_hz: f64,
    pub rate_per_pulse: f64,
    pub rate_bps: f64,
    pub epsilon: Option<f64>,
    pub h_low: Option<f64>,
    pub h_high: Option<f64>,
    /// ℋ at which the minimum rate was attained.
    pub h_min: Option<f64>,
    pub lp_evaluations: Option<usize>,
}

/// `R = max(0, p_z²·{z²e^(−2z)·s11·[1 − H(e11)] − f·S_zz·H(E_zz)})`.
pub fn key_rate(inputs: &RateInputs) -> Result<KeyRateReport> {
    let RateInputs { s11_lower, e11ph_upper, s_zz, e_zz, z, p_z, f, clock_hz } = *inputs;
    check_probability("s11_lower", s11_lower)?;
    check_range("e11ph_upper", e11ph_upper, (0.0..=0.5).contains(&e11ph_upper), "[0, 0.5]")?;
    check_probability("s_zz", s_zz)?;
    check_probability("e_zz", e_zz)?;
    check_range("z", z, z >= 0.0 && z.is_finite(), ">= 0")?;
    check_probability("p_z", p_z)?;
    check_range("f", f, f >= 1.0 && f.is_finite(), ">= 1")?;
    check_range("clock_hz", clock_hz, clock_hz > 0.0 && clock_hz.is_finite(), "> 0")?;
    let single = z * z * (-2.0 * z).exp() * s11_lower * (1.0 - h2(e11ph_upper));
    let leak = f * s_zz * h2(e_zz);
    let rate_per_pulse = (p_z * p_z * (single - leak)).max(0.0);
    Ok(KeyRateReport {
        s11_lower,
        e11ph_upper,
        s_zz,
        e_zz,
        f,
        z,
        p_z,
        clock_hz,
        rate_per_pulse,
        rate_bps: rate_per_pulse * clock_hz,
        epsilon: None,
        h_low: None,
        h_high: None,
        h_min: None,
        lp_evaluations: None,
    })
}

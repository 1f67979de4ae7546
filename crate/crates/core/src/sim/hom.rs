//! Hong-Ou-Mandel interference of two phase-randomized weak coherent pulses.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bsm::click_prob;
use crate::error::{check_range, Error, Result};
use crate::model::LinkModel;

const HOM_PHASE_NODES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombState {
    Soliton,
    Chaotic,
}

/// One comb line treated as a Lorentzian laser line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    pub linewidth_hz: f64,
    pub state: CombState,
}

impl SourceModel {
    pub fn new(linewidth_hz: f64, state: CombState) -> Result<Self> {
        check_range("linewidth_hz", linewidth_hz, linewidth_hz >= 0.0 && linewidth_hz.is_finite(), ">= 0")?;
        Ok(SourceModel { linewidth_hz, state })
    }

    /// g1 across a time-bin separation.
    pub fn coherence(&self, tau_s: f64) -> Result<f64> {
        coherence_factor(self.linewidth_hz, tau_s)
    }
}

/// First-order coherence of a Lorentzian line of FWHM Δν after delay τ:
/// `exp(−π·Δν·τ)`.
pub fn coherence_factor(linewidth_hz: f64, tau_s: f64) -> Result<f64> {
    check_range("linewidth_hz", linewidth_hz, linewidth_hz >= 0.0, ">= 0")?;
    check_range("tau_s", tau_s, tau_s >= 0.0, ">= 0")?;
    Ok((-PI * linewidth_hz * tau_s).exp())
}

/// Interference contrast that yields HOM visibility `v` in the weak-pulse
/// limit, from `V = κ²/2`.
pub fn kappa_for_visibility(v: f64) -> Result<f64> {
    check_range("visibility", v, (0.0..=0.5).contains(&v), "[0, 0.5]")?;
    Ok((2.0 * v).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomScanResult {
    /// `(delay_s, coincidence / C_far)`.
    pub points: Vec<(f64, f64)>,
    pub c_zero: f64,
    pub c_far: f64,
    pub visibility: f64,
}

/// RMS width of the pulse amplitude overlap, taking `pulse_width_s` as the
/// intensity FWHM.
pub fn pulse_sigma(link: &LinkModel) -> f64 {
    link.pulse_width_s / (2.0 * (2.0 * 2f64.ln()).sqrt())
}

/// Interference contrast at relative delay `tau_s`.
pub fn kappa_at_delay(link: &LinkModel, tau_s: f64) -> f64 {
    let s = pulse_sigma(link);
    link.mode_overlap * (-tau_s * tau_s / (2.0 * s * s)).exp() * link.coherence_factor
}

/// Phase-averaged probability that both detectors click in the same window.
pub fn hom_coincidence(link: &LinkModel, mu: f64, kappa: f64) -> f64 {
    let a = link.transmittance_left() * mu;
    let b = link.transmittance_right() * mu;
    let base = 0.5 * (a + b);
    let amp = kappa * (a * b).sqrt();
    let pd = link.dark_prob;
    (0..HOM_PHASE_NODES)
        .map(|k| {
            let c = (TAU * k as f64 / HOM_PHASE_NODES as f64).cos();
            click_prob(base + amp * c, pd) * click_prob(base - amp * c, pd)
        })
        .sum::<f64>()
        / HOM_PHASE_NODES as f64
}

/// Coincidence scan over relative delay. `C_far` averages the points lying
/// more than three dip widths from zero; if there are none it falls back to
/// the fully distinguishable coincidence.
pub fn hom_scan(link: &LinkModel, mu: f64, delays: &[f64]) -> Result<HomScanResult> {
    check_range("mu", mu, mu > 0.0 && mu.is_finite(), "> 0")?;
    if delays.is_empty() {
        return Err(Error::Invalid("delay list is empty".into()));
    }
    link.validate()?;
    let raw: Vec<(f64, f64)> =
        delays.iter().map(|&tau| (tau, hom_coincidence(link, mu, kappa_at_delay(link, tau)))).collect();
    let dip_sigma = pulse_sigma(link) / 2f64.sqrt();
    let far: Vec<f64> = raw.iter().filter(|(tau, _)| tau.abs() > 3.0 * dip_sigma).map(|(_, c)| *c).collect();
    let c_far =
        if far.is_empty() { hom_coincidence(link, mu, 0.0) } else { far.iter().sum::<f64>() / far.len() as f64 };
    let c_zero = hom_coincidence(link, mu, kappa_at_delay(link, 0.0));
    let visibility = if c_far > 0.0 { ((c_far - c_zero) / c_far).clamp(0.0, 1.0) } else { 0.0 };
    Ok(HomScanResult {
        points: raw.into_iter().map(|(t, c)| (t, if c_far > 0.0 { c / c_far } else { 0.0 })).collect(),
        c_zero,
        c_far,
        visibility,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HomCounts {
    pub rounds: u64,
    pub coincidences: u64,
}

/// Sampled coincidences at a fixed contrast. Shard `i` uses ChaCha stream `i`.
pub fn hom_monte_carlo(
    link: &LinkModel,
    mu: f64,
    kappa: f64,
    n_rounds: u64,
    seed: u64,
    shards: usize,
) -> Result<HomCounts> {
    check_range("mu", mu, mu > 0.0, "> 0")?;
    check_range("kappa", kappa, (0.0..=1.0).contains(&kappa), "[0, 1]")?;
    if n_rounds == 0 || shards == 0 {
        return Err(Error::Invalid("n_rounds and shards must be > 0".into()));
    }
    let a = link.transmittance_left() * mu;
    let b = link.transmittance_right() * mu;
    let base = 0.5 * (a + b);
    let amp = kappa * (a * b).sqrt();
    let pd = link.dark_prob;
    let per = n_rounds / shards as u64;
    let extra = n_rounds % shards as u64;
    let coincidences = (0..shards)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let rounds = per + u64::from((i as u64) < extra);
            let mut hits = 0u64;
            for _ in 0..rounds {
                let c = (rng.random::<f64>() * TAU).cos();
                let d1 = rng.random::<f64>() < click_prob(base + amp * c, pd);
                let d2 = rng.random::<f64>() < click_prob(base - amp * c, pd);
                hits += u64::from(d1 && d2);
            }
            hits
        })
        .sum();
    Ok(HomCounts { rounds: n_rounds, coincidences })
}

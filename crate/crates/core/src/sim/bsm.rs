//! Beam-splitter interference of two attenuated coherent time-bin pulses and
//! threshold-detector click statistics.

use num_complex::Complex64;

use crate::error::{check_probability, check_range, Result};
use crate::model::{LinkModel, TimeBinQubit};

/// Mean photon numbers reaching each detector in each time bin.
/// Index 0 is the early bin, 1 the late bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorMeans {
    pub d1: [f64; 2],
    pub d2: [f64; 2],
}

impl DetectorMeans {
    pub fn total(&self) -> f64 {
        self.d1[0] + self.d1[1] + self.d2[0] + self.d2[1]
    }
}

/// Click pattern of one relay round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BsmOutcome {
    pub d1_early: bool,
    pub d1_late: bool,
    pub d2_early: bool,
    pub d2_late: bool,
}

impl BsmOutcome {
    /// Ψ⁻: one click per detector, in opposite bins, and nothing else.
    pub fn psi_minus(&self) -> bool {
        (self.d1_early && self.d2_late && !self.d1_late && !self.d2_early)
            || (self.d1_late && self.d2_early && !self.d1_early && !self.d2_late)
    }

    pub fn clicks(&self) -> usize {
        [self.d1_early, self.d1_late, self.d2_early, self.d2_late].iter().filter(|c| **c).count()
    }
}

/// Per-bin output of a 50:50 beam splitter fed by the two arms, with
/// interference contrast κ = ζ·g1 applied to the cross term.
pub fn mean_detector_counts(ql: &TimeBinQubit, qr: &TimeBinQubit, link: &LinkModel, phase_rel: f64) -> DetectorMeans {
    detector_means_raw(
        [ql.amp_early, ql.amp_late],
        [qr.amp_early, qr.amp_late],
        link.transmittance_left(),
        link.transmittance_right(),
        link.kappa(),
        phase_rel,
    )
}

pub(crate) fn detector_means_raw(
    amp_l: [Complex64; 2],
    amp_r: [Complex64; 2],
    t_l: f64,
    t_r: f64,
    kappa: f64,
    phase_rel: f64,
) -> DetectorMeans {
    let (sl, sr) = (t_l.sqrt(), t_r.sqrt());
    let rot = Complex64::from_polar(1.0, phase_rel);
    let mut out = DetectorMeans { d1: [0.0; 2], d2: [0.0; 2] };
    for bin in 0..2 {
        let a = amp_l[bin] * sl;
        let b = amp_r[bin] * sr * rot;
        let base = 0.5 * (a.norm_sqr() + b.norm_sqr());
        let cross = kappa * (a * b.conj()).re;
        out.d1[bin] = (base + cross).max(0.0);
        out.d2[bin] = (base - cross).max(0.0);
    }
    out
}

/// Threshold detector: `1 − (1 − p_d)·e^(−n)`.
pub fn click_probability(mean_count: f64, dark_prob: f64) -> Result<f64> {
    check_range("mean_count", mean_count, mean_count >= 0.0, ">= 0")?;
    check_probability("dark_prob", dark_prob)?;
    Ok(click_prob(mean_count, dark_prob))
}

#[inline]
pub(crate) fn click_prob(n: f64, pd: f64) -> f64 {
    1.0 - no_click_prob(n, pd)
}

#[inline]
pub(crate) fn no_click_prob(n: f64, pd: f64) -> f64 {
    (1.0 - pd) * (-n).exp()
}

/// Probability of a Ψ⁻ announcement given the detector means.
pub fn psi_minus_probability(m: &DetectorMeans, dark_prob: f64) -> f64 {
    let c = |n| click_prob(n, dark_prob);
    let q = |n| no_click_prob(n, dark_prob);
    c(m.d1[0]) * c(m.d2[1]) * q(m.d1[1]) * q(m.d2[0]) + c(m.d1[1]) * c(m.d2[0]) * q(m.d1[0]) * q(m.d2[1])
}

//! Phase-averaged expected Ψ⁻ gains and error rates.

use std::f64::consts::TAU;

use serde::Serialize;

use super::bsm::{detector_means_raw, psi_minus_probability};
use crate::error::{Error, Result};
use crate::model::{encode, Bit, IntensityProtocol, LinkModel, Tag};

pub const DEFAULT_PHASE_NODES: usize = 128;

/// Expected Ψ⁻ probability per sent pair and conditional error fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectedGain {
    pub gain: f64,
    pub qber: f64,
}

pub fn expected_gains(link: &LinkModel, protocol: &IntensityProtocol, pair: (Tag, Tag)) -> Result<ExpectedGain> {
    expected_gains_with(link, protocol, pair, DEFAULT_PHASE_NODES)
}

/// Trapezoid quadrature over the relative phase (exact for the periodic
/// integrand up to aliasing) and an average over the four bit pairs.
pub fn expected_gains_with(
    link: &LinkModel,
    protocol: &IntensityProtocol,
    (l, r): (Tag, Tag),
    phase_nodes: usize,
) -> Result<ExpectedGain> {
    if l.basis() != r.basis() {
        return Err(Error::CrossBasis(l, r));
    }
    if phase_nodes < 1 {
        return Err(Error::Invalid("phase_nodes must be >= 1".into()));
    }
    link.validate()?;
    let basis = l.basis();
    let (t_l, t_r, kappa, pd) = (link.transmittance_left(), link.transmittance_right(), link.kappa(), link.dark_prob);
    let mut total = 0.0;
    let mut wrong = 0.0;
    for bit_l in [Bit::Zero, Bit::One] {
        for bit_r in [Bit::Zero, Bit::One] {
            let ql = encode(basis, bit_l, protocol.mu(l))?;
            let qr = encode(basis, bit_r, protocol.mu(r))?;
            let mut p = 0.0;
            for k in 0..phase_nodes {
                let phase = TAU * k as f64 / phase_nodes as f64;
                let m = detector_means_raw(
                    [ql.amp_early, ql.amp_late],
                    [qr.amp_early, qr.amp_late],
                    t_l,
                    t_r,
                    kappa,
                    phase,
                );
                p += psi_minus_probability(&m, pd);
            }
            p /= (4 * phase_nodes) as f64;
            total += p;
            if bit_l == bit_r {
                wrong += p;
            }
        }
    }
    Ok(ExpectedGain { gain: total, qber: if total > 0.0 { wrong / total } else { 0.0 } })
}

/// Expected gains for `(z,z)` and the nine X-basis combinations.
pub fn expected_table(link: &LinkModel, protocol: &IntensityProtocol) -> Result<Vec<((Tag, Tag), ExpectedGain)>> {
    crate::model::same_basis_pairs().map(|pair| expected_gains(link, protocol, pair).map(|g| (pair, g))).collect()
}

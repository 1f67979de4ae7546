//! Rate-versus-loss curves and four-fold coincidence rates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::search::{objective, optimize_protocol_with, OptimizerOptions};
use crate::error::{check_range, Error, Result};
use crate::model::LinkModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolMode {
    Fixed,
    Reoptimized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub loss_db: f64,
    pub rate_per_pulse: f64,
    pub rate_bps: f64,
    pub z: f64,
    pub y: f64,
    pub x: f64,
    pub p_z: f64,
    pub p_y: f64,
    pub p_x: f64,
}

/// Key rate per pulse at each total loss, split evenly between the arms of
/// `link`. Fixed mode uses `opts.start`; reoptimized mode searches from it.
pub fn rate_vs_loss(
    link: &LinkModel,
    losses_db: &[f64],
    n_pulses: u64,
    mode: ProtocolMode,
    opts: &OptimizerOptions,
) -> Result<Vec<CurvePoint>> {
    for (i, l) in losses_db.iter().enumerate() {
        check_range("loss_db", *l, *l >= 0.0 && l.is_finite(), ">= 0")?;
        if i > 0 && losses_db[i - 1] > *l {
            return Err(Error::Invalid("losses must be sorted ascending".into()));
        }
    }
    losses_db
        .par_iter()
        .map(|&loss| {
            let l = link.with_total_loss(loss);
            let (params, rate) = match mode {
                ProtocolMode::Fixed => (
                    opts.start,
                    objective(&l, &opts.start, n_pulses, opts)?
                        .ok_or_else(|| Error::InvalidProtocol("start point lies outside the search region".into()))?,
                ),
                ProtocolMode::Reoptimized => {
                    let r = optimize_protocol_with(&l, n_pulses, opts)?;
                    (r.protocol.params(), r.rate_per_pulse)
                }
            };
            Ok(CurvePoint {
                loss_db: loss,
                rate_per_pulse: rate,
                rate_bps: rate * opts.clock_hz,
                z: params.z,
                y: params.y,
                x: params.x,
                p_z: params.p_z,
                p_y: params.p_y,
                p_x: params.p_x,
            })
        })
        .collect()
}

/// Rate of same-cycle coincidences between two independent success streams.
pub fn simultaneity_rate(rate1_hz: f64, rate2_hz: f64, clock_hz: f64) -> Result<f64> {
    check_range("clock_hz", clock_hz, clock_hz > 0.0 && clock_hz.is_finite(), "> 0")?;
    check_range("rate1_hz", rate1_hz, (0.0..=clock_hz).contains(&rate1_hz), "[0, clock_hz]")?;
    check_range("rate2_hz", rate2_hz, (0.0..=clock_hz).contains(&rate2_hz), "[0, clock_hz]")?;
    Ok(rate1_hz * rate2_hz / clock_hz)
}

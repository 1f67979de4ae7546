//! Chernoff intervals for observed frequencies, the binary entropy, and the
//! interval of the joint-constraint quantity ℋ.

use serde::Serialize;

use crate::error::{check_probability, check_range, Error, Result};
use crate::model::{GainTally, IntensityProtocol, Tag};

/// Failure probability used throughout the security analysis.
pub const DEFAULT_EPSILON: f64 = 1e-10;

/// `b = −ln(ε/2)`.
pub fn chernoff_b(epsilon: f64) -> Result<f64> {
    check_range("epsilon", epsilon, epsilon > 0.0 && epsilon < 1.0, "(0, 1)")?;
    Ok(-(epsilon / 2.0).ln())
}

/// Relative half-width `δ = (b + √(b² + 8·b·ns)) / (2·ns)`.
pub fn chernoff_delta(ns: f64, epsilon: f64) -> Result<f64> {
    check_range("ns", ns, ns > 0.0 && ns.is_finite(), "> 0")?;
    let b = chernoff_b(epsilon)?;
    Ok((b + (b * b + 8.0 * b * ns).sqrt()) / (2.0 * ns))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernoffBound {
    pub epsilon: f64,
    pub b: f64,
    /// Infinite when nothing was observed.
    pub delta: f64,
    pub observed: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Confidence interval on the expected frequency behind `success / sent`.
///
/// With no successes the upper bound is the zero-observation tail `b/sent`.
/// When `δ ≥ 1` the upper bound `S/(1−δ)` is undefined and the trivial bound
/// 1 is used.
pub fn expectation_bounds(success: u64, sent: u64, epsilon: f64) -> Result<ChernoffBound> {
    if sent == 0 {
        return Err(Error::OutOfRange { name: "sent", value: 0.0, expected: "> 0" });
    }
    if success > sent {
        return Err(Error::Invalid(format!("success {success} exceeds sent {sent}")));
    }
    let b = chernoff_b(epsilon)?;
    let observed = success as f64 / sent as f64;
    if success == 0 {
        return Ok(ChernoffBound {
            epsilon,
            b,
            delta: f64::INFINITY,
            observed,
            lower: 0.0,
            upper: (b / sent as f64).min(1.0),
        });
    }
    let delta = chernoff_delta(success as f64, epsilon)?;
    let upper = if delta < 1.0 { (observed / (1.0 - delta)).min(1.0) } else { 1.0 };
    Ok(ChernoffBound { epsilon, b, delta, observed, lower: observed / (1.0 + delta), upper })
}

/// Shannon binary entropy in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_probability("p", p)?;
    Ok(h2(p))
}

pub(crate) fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Bounds on `ℋ = a0·⟨S_ox⟩ + b0·⟨S_xo⟩ − a0·b0·⟨S_oo⟩`, the X-basis gain
/// contributed by rounds where one side's x pulse was vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HInterval {
    pub a0: f64,
    pub b0: f64,
    pub h_low: f64,
    pub h_high: f64,
}

impl HInterval {
    /// Zero-width interval from exact expected gains.
    pub fn exact(mu_x: f64, s_ox: f64, s_xo: f64, s_oo: f64) -> Self {
        let a0 = (-mu_x).exp();
        let h = a0 * s_ox + a0 * s_xo - a0 * a0 * s_oo;
        HInterval { a0, b0: a0, h_low: h, h_high: h }
    }

    pub fn width(&self) -> f64 {
        self.h_high - self.h_low
    }

    pub fn contains(&self, h: f64) -> bool {
        h >= self.h_low && h <= self.h_high
    }
}

/// Chernoff interval on ℋ. When `(o,x)` and `(x,o)` were sent equally
/// often, the pooled bound on their summed counts is intersected with the
/// per-source one.
pub fn h_interval(tally: &GainTally, protocol: &IntensityProtocol, epsilon: f64) -> Result<HInterval> {
    let ox = tally.require(Tag::O, Tag::X)?;
    let xo = tally.require(Tag::X, Tag::O)?;
    let oo = tally.require(Tag::O, Tag::O)?;
    let a0 = (-protocol.mu(Tag::X)).exp();
    let b0 = a0;
    let s_ox = expectation_bounds(ox.success, ox.sent, epsilon)?;
    let s_xo = expectation_bounds(xo.success, xo.sent, epsilon)?;
    let s_oo = expectation_bounds(oo.success, oo.sent, epsilon)?;
    let mut h_low = a0 * s_ox.lower + b0 * s_xo.lower - a0 * b0 * s_oo.upper;
    let mut h_high = a0 * s_ox.upper + b0 * s_xo.upper - a0 * b0 * s_oo.lower;
    if ox.sent == xo.sent {
        let pooled = expectation_bounds(ox.success + xo.success, ox.sent + xo.sent, epsilon)?;
        h_low = h_low.max(2.0 * a0 * pooled.lower - a0 * b0 * s_oo.upper);
        h_high = h_high.min(2.0 * a0 * pooled.upper - a0 * b0 * s_oo.lower);
    }
    Ok(HInterval { a0, b0, h_low, h_high })
}

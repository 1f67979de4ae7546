//! Full finite-key chain: Chernoff bounds, both decoy programs across the ℋ
//! range, and the minimum key rate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chernoff::DEFAULT_EPSILON;
use super::lp::{DecoyLp, HConstraint, DEFAULT_N_CUT};
use super::rate::{key_rate, KeyRateReport, RateInputs, DEFAULT_F};
use crate::error::{Error, Result};
use crate::model::{GainTally, IntensityProtocol, Tag};

const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub epsilon: f64,
    pub f: f64,
    pub n_cut: usize,
    pub grid_points: usize,
    /// Golden-section steps around the best grid point.
    pub refine_steps: usize,
    pub vacuum_error_half: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            epsilon: DEFAULT_EPSILON,
            f: DEFAULT_F,
            n_cut: DEFAULT_N_CUT,
            grid_points: 21,
            refine_steps: 16,
            vacuum_error_half: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Point {
    h: f64,
    s11: f64,
    e11: f64,
    rate: f64,
}

pub fn finite_key_pipeline(
    tally: &GainTally,
    protocol: &IntensityProtocol,
    epsilon: f64,
    f: f64,
) -> Result<KeyRateReport> {
    finite_key_pipeline_with(tally, protocol, &PipelineOptions { epsilon, f, ..PipelineOptions::default() })
}

pub fn finite_key_pipeline_with(
    tally: &GainTally,
    protocol: &IntensityProtocol,
    opts: &PipelineOptions,
) -> Result<KeyRateReport> {
    if tally.is_empty() {
        return Err(Error::EmptyTally);
    }
    if opts.grid_points < 2 {
        return Err(Error::OutOfRange { name: "grid_points", value: opts.grid_points as f64, expected: ">= 2" });
    }
    let zz = tally.require(Tag::Z, Tag::Z)?;
    if zz.sent == 0 {
        return Err(Error::Invalid("no (z, z) pulses were sent".into()));
    }
    let zz_err = zz.error.ok_or_else(|| Error::Invalid("the (z, z) entry needs an error count".into()))?;
    let s_zz = zz.gain();
    let e_zz = if zz.success == 0 { 0.0 } else { zz_err as f64 / zz.success as f64 };

    let mut lp = DecoyLp::from_tally(tally, protocol, opts.epsilon, opts.n_cut)?;
    lp.vacuum_error_half = opts.vacuum_error_half;
    let interval = lp.h_interval().expect("built from a tally");
    // ℋ is a sum of non-negative gains.
    let lo = interval.h_low.max(0.0);
    let hi = interval.h_high.max(lo);

    let rate_inputs = |s11: f64, e11: f64| RateInputs {
        s11_lower: s11,
        e11ph_upper: e11,
        s_zz,
        e_zz,
        z: protocol.mu(Tag::Z),
        p_z: protocol.probability(Tag::Z),
        f: opts.f,
        clock_hz: protocol.clock_hz,
    };
    let evaluate = |h: f64| -> Result<Option<Point>> {
        let s11 = match lp.min_y11(HConstraint::Pinned(h)) {
            Ok(v) => v.min(1.0),
            Err(Error::InfeasibleLp(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let e11 = if s11 > 0.0 {
            match lp.max_t11(HConstraint::Pinned(h)) {
                Ok(t) => (t / s11).min(0.5),
                Err(Error::InfeasibleLp(_)) => return Ok(None),
                Err(e) => return Err(e),
            }
        } else {
            0.5
        };
        let rate = key_rate(&rate_inputs(s11, e11))?.rate_per_pulse;
        Ok(Some(Point { h, s11, e11, rate }))
    };

    let n = opts.grid_points;
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let evaluated: Vec<Option<Point>> = grid.par_iter().map(|&h| evaluate(h)).collect::<Result<_>>()?;
    let mut evaluations = n;
    let mut best = evaluated
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.map(|p| (i, p)))
        .min_by(|a, b| a.1.rate.total_cmp(&b.1.rate).then(a.0.cmp(&b.0)))
        .ok_or_else(|| Error::InfeasibleLp("no feasible ℋ value in the Chernoff interval".into()))?;

    if opts.refine_steps > 0 && hi > lo {
        let i = best.0;
        let (mut a, mut b) = (grid[i.saturating_sub(1)], grid[(i + 1).min(n - 1)]);
        let score = |p: &Option<Point>| p.map_or(f64::INFINITY, |p| p.rate);
        let mut c = b - GOLDEN * (b - a);
        let mut d = a + GOLDEN * (b - a);
        let mut pc = evaluate(c)?;
        let mut pd = evaluate(d)?;
        evaluations += 2;
        for _ in 0..opts.refine_steps {
            for p in [pc, pd].into_iter().flatten() {
                if p.rate < best.1.rate {
                    best = (i, p);
                }
            }
            if score(&pc) <= score(&pd) {
                b = d;
                d = c;
                pd = pc;
                c = b - GOLDEN * (b - a);
                pc = evaluate(c)?;
            } else {
                a = c;
                c = d;
                pc = pd;
                d = a + GOLDEN * (b - a);
                pd = evaluate(d)?;
            }
            evaluations += 1;
        }
        for p in [pc, pd].into_iter().flatten() {
            if p.rate < best.1.rate {
                best = (i, p);
            }
        }
    }

    let p = best.1;
    let mut report = key_rate(&rate_inputs(p.s11, p.e11))?;
    report.epsilon = Some(opts.epsilon);
    report.h_low = Some(interval.h_low);
    report.h_high = Some(interval.h_high);
    report.h_min = Some(p.h);
    report.lp_evaluations = Some(evaluations);
    Ok(report)
}

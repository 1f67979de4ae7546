//! Bounded compass search over the six protocol parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finite_key::{finite_key_pipeline_with, PipelineOptions};
use crate::model::{IntensityProtocol, LinkModel, ProtocolParams};
use crate::sim::analytic_tally;

pub const MU_MIN: f64 = 1e-4;
pub const MU_MAX: f64 = 1.0;
pub const P_MIN: f64 = 1e-3;
pub const P_MAX: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizerOptions {
    pub start: ProtocolParams,
    /// Total starts: the start point plus `restarts - 1` seeded perturbations.
    pub restarts: usize,
    pub seed: u64,
    pub clock_hz: f64,
    /// Initial step per coordinate, `(z, y, x, p_z, p_y, p_x)`.
    pub initial_step: [f64; 6],
    pub min_step: f64,
    /// Relative improvement per sweep below which steps are halved.
    pub sweep_tolerance: f64,
    pub max_sweeps: usize,
    pub pipeline: PipelineOptions,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            start: ProtocolParams::BASELINE_30DB,
            restarts: 3,
            seed: 0,
            clock_hz: 100e6,
            initial_step: [0.05, 0.02, 0.01, 0.02, 0.01, 0.02],
            min_step: 1e-3,
            sweep_tolerance: 1e-3,
            max_sweeps: 60,
            pipeline: PipelineOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracePoint {
    pub params: [f64; 6],
    pub rate_per_pulse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub protocol: IntensityProtocol,
    pub rate_per_pulse: f64,
    pub trace: Vec<TracePoint>,
}

/// True when the parameters lie inside the search box and on the simplex.
pub fn in_bounds(p: &ProtocolParams) -> bool {
    let mu_ok = |m: f64| m > MU_MIN && m <= MU_MAX;
    let pr_ok = |q: f64| (P_MIN..=P_MAX).contains(&q);
    mu_ok(p.z)
        && mu_ok(p.y)
        && mu_ok(p.x)
        && p.z > p.y
        && p.y > p.x
        && pr_ok(p.p_z)
        && pr_ok(p.p_y)
        && pr_ok(p.p_x)
        && pr_ok(p.p_o())
}

/// Key rate per pulse of the analytic expected tally, or `None` outside the
/// search region. Inconsistent programs count as zero rate.
pub fn objective(
    link: &LinkModel,
    params: &ProtocolParams,
    n_pulses: u64,
    opts: &OptimizerOptions,
) -> Result<Option<f64>> {
    if !in_bounds(params) {
        return Ok(None);
    }
    let protocol = IntensityProtocol::from_params(*params, opts.clock_hz, n_pulses)?;
    let tally = analytic_tally(link, &protocol, n_pulses, None)?;
    match finite_key_pipeline_with(&tally, &protocol, &opts.pipeline) {
        Ok(r) => Ok(Some(r.rate_per_pulse)),
        Err(Error::InfeasibleLp(_)) => Ok(Some(0.0)),
        Err(e) => Err(e),
    }
}

pub fn optimize_protocol(link: &LinkModel, n_pulses: u64, epsilon: f64, f: f64) -> Result<OptimizationResult> {
    let mut opts = OptimizerOptions::default();
    opts.pipeline.epsilon = epsilon;
    opts.pipeline.f = f;
    optimize_protocol_with(link, n_pulses, &opts)
}

/// Compass search from each start: every sweep tries `±step` on each
/// coordinate in turn and keeps any improvement. A sweep that improves the
/// rate by less than `sweep_tolerance` halves the steps; the search ends
/// once every step is below `min_step`. Starts run concurrently and the best
/// result wins, ties going to the lexicographically smallest parameters.
pub fn optimize_protocol_with(link: &LinkModel, n_pulses: u64, opts: &OptimizerOptions) -> Result<OptimizationResult> {
    link.validate()?;
    if link.transmittance_left() <= 0.0 || link.transmittance_right() <= 0.0 {
        return Err(Error::InvalidLink("transmittance must be positive".into()));
    }
    if !in_bounds(&opts.start) {
        return Err(Error::InvalidProtocol("start point lies outside the search region".into()));
    }
    if opts.restarts == 0 {
        return Err(Error::Invalid("restarts must be >= 1".into()));
    }
    let starts = start_points(opts);
    let runs: Vec<(ProtocolParams, f64, Vec<TracePoint>)> =
        starts.into_par_iter().map(|s| compass(link, n_pulses, opts, s)).collect::<Result<_>>()?;
    let mut trace = Vec::new();
    let mut best: Option<(ProtocolParams, f64)> = None;
    for (p, r, t) in runs {
        trace.extend(t);
        let better = match best {
            None => true,
            Some((bp, br)) => r > br || (r == br && lex_less(&p.to_vec(), &bp.to_vec())),
        };
        if better {
            best = Some((p, r));
        }
    }
    let (params, rate) = best.expect("at least one start");
    Ok(OptimizationResult {
        protocol: IntensityProtocol::from_params(params, opts.clock_hz, n_pulses)?,
        rate_per_pulse: rate,
        trace,
    })
}

fn lex_less(a: &[f64; 6], b: &[f64; 6]) -> bool {
    a.iter().zip(b).find(|(x, y)| x != y).is_some_and(|(x, y)| x < y)
}

fn start_points(opts: &OptimizerOptions) -> Vec<ProtocolParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = vec![opts.start];
    while out.len() < opts.restarts {
        let base = opts.start.to_vec();
        let mut candidate = opts.start;
        for _ in 0..1000 {
            let v: Vec<f64> = base.iter().map(|x| x * rng.random_range(0.7..1.3)).collect();
            let p = ProtocolParams::from_slice(&v);
            if in_bounds(&p) {
                candidate = p;
                break;
            }
        }
        out.push(candidate);
    }
    out
}

fn compass(
    link: &LinkModel,
    n_pulses: u64,
    opts: &OptimizerOptions,
    start: ProtocolParams,
) -> Result<(ProtocolParams, f64, Vec<TracePoint>)> {
    let mut trace = Vec::new();
    let eval = |p: &ProtocolParams, trace: &mut Vec<TracePoint>| -> Result<Option<f64>> {
        let r = objective(link, p, n_pulses, opts)?;
        if let Some(rate) = r {
            trace.push(TracePoint { params: p.to_vec(), rate_per_pulse: rate });
        }
        Ok(r)
    };
    let mut x = start.to_vec();
    let mut fx = eval(&start, &mut trace)?.expect("start is in bounds");
    let mut step = opts.initial_step;
    for _ in 0..opts.max_sweeps {
        if step.iter().all(|s| *s < opts.min_step) {
            break;
        }
        let before = fx;
        for i in 0..6 {
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[i] += dir * step[i];
                let p = ProtocolParams::from_slice(&y);
                if let Some(fy) = eval(&p, &mut trace)? {
                    if fy > fx {
                        x = y;
                        fx = fy;
                        break;
                    }
                }
            }
        }
        let gain = if before > 0.0 {
            (fx - before) / before
        } else if fx > 0.0 {
            1.0
        } else {
            0.0
        };
        if gain < opts.sweep_tolerance {
            for s in &mut step {
                *s *= 0.5;
            }
        }
    }
    Ok((ProtocolParams::from_slice(&x), fx, trace))
}

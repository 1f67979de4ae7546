//! Round-by-round relay simulation and analytic expected tallies.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bsm::{click_prob, detector_means_raw};
use super::gains::expected_gains;
use crate::error::{Error, Result};
use crate::model::{encode, same_basis_pairs, Bit, GainTally, IntensityProtocol, LinkModel, Tag, TallyEntry};

pub const DEFAULT_SHARDS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    /// Sample every round: intensities, bits, relative phase and clicks.
    MonteCarlo,
    /// `success = round(N_lr·S_lr)`, `error = round(success·E_lr)`.
    Analytic,
    /// Analytic expectations with Poisson success counts and binomial
    /// error counts.
    AnalyticPoisson,
}

pub fn simulate_tally(
    link: &LinkModel,
    protocol: &IntensityProtocol,
    n_rounds: u64,
    seed: u64,
    mode: SimMode,
) -> Result<GainTally> {
    simulate_tally_sharded(link, protocol, n_rounds, seed, mode, DEFAULT_SHARDS)
}

/// Monte-Carlo rounds are split into `shards` contiguous blocks. Shard `i`
/// draws from the ChaCha stream `i` of `seed`, so the result depends on the
/// seed and the shard count but not on the thread pool.
pub fn simulate_tally_sharded(
    link: &LinkModel,
    protocol: &IntensityProtocol,
    n_rounds: u64,
    seed: u64,
    mode: SimMode,
    shards: usize,
) -> Result<GainTally> {
    if n_rounds == 0 {
        return Err(Error::Invalid("n_rounds must be > 0".into()));
    }
    link.validate()?;
    match mode {
        SimMode::MonteCarlo => {
            if shards == 0 {
                return Err(Error::Invalid("shards must be > 0".into()));
            }
            let engine = RoundEngine::new(link, protocol)?;
            let per = n_rounds / shards as u64;
            let extra = n_rounds % shards as u64;
            let tally = (0..shards)
                .into_par_iter()
                .map(|i| {
                    let rounds = per + u64::from((i as u64) < extra);
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(i as u64);
                    engine.run(rounds, &mut rng)
                })
                .reduce(GainTally::new, |a, b| a.merge(&b));
            Ok(with_all_pairs(tally))
        }
        SimMode::Analytic => analytic_tally(link, protocol, n_rounds, None),
        SimMode::AnalyticPoisson => analytic_tally(link, protocol, n_rounds, Some(seed)),
    }
}

/// Expected tally for `n_pulses` pairs; with a seed, counts are sampled.
pub fn analytic_tally(
    link: &LinkModel,
    protocol: &IntensityProtocol,
    n_pulses: u64,
    sample_seed: Option<u64>,
) -> Result<GainTally> {
    let mut rng = sample_seed.map(ChaCha8Rng::seed_from_u64);
    let mut tally = GainTally::new();
    for (l, r) in same_basis_pairs() {
        let sent = protocol.sent_for(n_pulses, l, r);
        let g = expected_gains(link, protocol, (l, r))?;
        let mean = sent as f64 * g.gain;
        let (success, error) = match rng.as_mut() {
            None => {
                let s = mean.round() as u64;
                (s, (s as f64 * g.qber).round() as u64)
            }
            Some(rng) => {
                let s = if mean > 0.0 {
                    let draw: f64 = Poisson::new(mean).map_err(|e| Error::Invalid(e.to_string()))?.sample(rng);
                    (draw as u64).min(sent)
                } else {
                    0
                };
                let e = if s > 0 && g.qber > 0.0 {
                    Binomial::new(s, g.qber.min(1.0)).map_err(|e| Error::Invalid(e.to_string()))?.sample(rng)
                } else {
                    0
                };
                (s, e)
            }
        };
        tally.insert(l, r, TallyEntry::new(sent, success, Some(error.min(success))))?;
    }
    Ok(tally)
}

fn with_all_pairs(mut tally: GainTally) -> GainTally {
    for (l, r) in same_basis_pairs() {
        if tally.get(l, r).is_none() {
            tally.insert(l, r, TallyEntry::new(0, 0, Some(0))).expect("same-basis pair");
        }
    }
    tally
}

struct RoundEngine {
    cumulative: [f64; 4],
    amps: [[[Complex64; 2]; 2]; 4],
    t_l: f64,
    t_r: f64,
    kappa: f64,
    dark: f64,
}

impl RoundEngine {
    fn new(link: &LinkModel, protocol: &IntensityProtocol) -> Result<Self> {
        let mut cumulative = [0.0; 4];
        let mut acc = 0.0;
        let mut amps = [[[Complex64::new(0.0, 0.0); 2]; 2]; 4];
        for (i, tag) in Tag::ALL.into_iter().enumerate() {
            acc += protocol.probability(tag);
            cumulative[i] = acc;
            for (b, bit) in [Bit::Zero, Bit::One].into_iter().enumerate() {
                let q = encode(tag.basis(), bit, protocol.mu(tag))?;
                amps[i][b] = [q.amp_early, q.amp_late];
            }
        }
        cumulative[3] = f64::INFINITY;
        Ok(RoundEngine {
            cumulative,
            amps,
            t_l: link.transmittance_left(),
            t_r: link.transmittance_right(),
            kappa: link.kappa(),
            dark: link.dark_prob,
        })
    }

    fn draw_tag(&self, rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.random();
        self.cumulative.iter().position(|c| u < *c).unwrap_or(3)
    }

    fn run(&self, rounds: u64, rng: &mut ChaCha8Rng) -> GainTally {
        let mut tally = GainTally::new();
        for _ in 0..rounds {
            let il = self.draw_tag(rng);
            let ir = self.draw_tag(rng);
            let bl: bool = rng.random();
            let br: bool = rng.random();
            let phase = rng.random::<f64>() * TAU;
            let (l, r) = (Tag::ALL[il], Tag::ALL[ir]);
            let m = detector_means_raw(
                self.amps[il][bl as usize],
                self.amps[ir][br as usize],
                self.t_l,
                self.t_r,
                self.kappa,
                phase,
            );
            let mut click = |n: f64| rng.random::<f64>() < click_prob(n, self.dark);
            let outcome = super::bsm::BsmOutcome {
                d1_early: click(m.d1[0]),
                d1_late: click(m.d1[1]),
                d2_early: click(m.d2[0]),
                d2_late: click(m.d2[1]),
            };
            if l.basis() != r.basis() {
                continue;
            }
            let success = outcome.psi_minus();
            tally.add_round(l, r, success, success && bl == br);
        }
        tally
    }
}

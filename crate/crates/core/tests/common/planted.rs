//! Planted photon-number yield models and their exact gains, computed
//! independently of the library's truncated expansion.

use qnet_core::{IntensityClass, IntensityProtocol, Tag};
use rand::Rng;

pub const PLANT_CUT: usize = 14;

pub fn poisson(n: usize, mu: f64) -> f64 {
    if mu == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let ln_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    (-mu + n as f64 * mu.ln() - ln_fact).exp()
}

#[derive(Debug, Clone)]
pub struct Plant {
    pub y: Vec<Vec<f64>>,
    pub e: Vec<Vec<f64>>,
}

impl Plant {
    pub fn gain(&self, mu_l: f64, mu_r: f64) -> f64 {
        self.sum(mu_l, mu_r, |n, m| self.y[n][m])
    }

    pub fn error_gain(&self, mu_l: f64, mu_r: f64) -> f64 {
        self.sum(mu_l, mu_r, |n, m| self.y[n][m] * self.e[n][m])
    }

    fn sum(&self, mu_l: f64, mu_r: f64, f: impl Fn(usize, usize) -> f64) -> f64 {
        let mut s = 0.0;
        for n in 0..=PLANT_CUT {
            for m in 0..=PLANT_CUT {
                s += poisson(n, mu_l) * poisson(m, mu_r) * f(n, m);
            }
        }
        s
    }

    pub fn y11(&self) -> f64 {
        self.y[1][1]
    }

    pub fn e11(&self) -> f64 {
        self.e[1][1]
    }
}

/// Threshold-detector-like yields with random efficiencies, dark floor and
/// per-entry jitter. Vacuum-side rounds carry error rate 1/2 when
/// `vacuum_half`, otherwise every error rate is drawn from `[0, 0.5]`.
pub fn random_plant<R: Rng>(rng: &mut R, vacuum_half: bool) -> Plant {
    let eta_a: f64 = rng.random_range(1e-3..0.3);
    let eta_b: f64 = rng.random_range(1e-3..0.3);
    let dark: f64 = rng.random_range(0.0..1e-5);
    let k = PLANT_CUT + 1;
    let mut y = vec![vec![0.0; k]; k];
    let mut e = vec![vec![0.0; k]; k];
    for n in 0..k {
        for m in 0..k {
            let pa = 1.0 - (1.0 - eta_a).powi(n as i32);
            let pb = 1.0 - (1.0 - eta_b).powi(m as i32);
            let jitter: f64 = rng.random_range(0.5..1.0);
            y[n][m] = (0.5 * pa * pb * jitter + dark * rng.random_range(0.0..1.0)).min(1.0);
            e[n][m] = if vacuum_half && (n == 0 || m == 0) { 0.5 } else { rng.random_range(0.0..0.5) };
        }
    }
    Plant { y, e }
}

pub fn random_protocol<R: Rng>(rng: &mut R) -> IntensityProtocol {
    let x: f64 = rng.random_range(0.02..0.15);
    let y: f64 = rng.random_range(x + 0.05..0.45);
    let z: f64 = rng.random_range(y + 0.1..0.9);
    protocol(z, y, x)
}

pub fn protocol(z: f64, y: f64, x: f64) -> IntensityProtocol {
    IntensityProtocol::new(
        [
            IntensityClass { tag: Tag::Z, mu: z, probability: 0.7 },
            IntensityClass { tag: Tag::Y, mu: y, probability: 0.1 },
            IntensityClass { tag: Tag::X, mu: x, probability: 0.15 },
            IntensityClass { tag: Tag::O, mu: 0.0, probability: 0.05 },
        ],
        1e8,
        1,
    )
    .unwrap()
}

type Rows = Vec<((Tag, Tag), f64)>;

/// Exact gains and error gains of all nine X-basis combinations.
pub fn exact_rows(plant: &Plant, p: &IntensityProtocol) -> (Rows, Rows) {
    let mut gains = Vec::new();
    let mut errors = Vec::new();
    for l in Tag::DECOYS {
        for r in Tag::DECOYS {
            gains.push(((l, r), plant.gain(p.mu(l), p.mu(r))));
            errors.push(((l, r), plant.error_gain(p.mu(l), p.mu(r))));
        }
    }
    (gains, errors)
}

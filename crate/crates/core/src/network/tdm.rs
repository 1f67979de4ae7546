use std::collections::BTreeMap;

use serde::Serialize;

use super::{check_users, resource_counts, Scheme};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Slot {
    pub bin: usize,
    pub bsm: usize,
    /// Always `users[0] < users[1]`.
    pub users: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TdmSchedule {
    pub n_users: usize,
    /// Users after padding to a power of two.
    pub padded_users: usize,
    pub bins: usize,
    pub bsm_count: usize,
    pub wavelength_count: usize,
    pub encoders_per_user: usize,
    /// Fraction of cycles in which a given pair is measured.
    pub duty_cycle: f64,
    /// Ordered by bin, then module.
    pub slots: Vec<Slot>,
}

impl TdmSchedule {
    pub fn slot(&self, bin: usize, bsm: usize) -> Option<&Slot> {
        self.slots.iter().find(|s| s.bin == bin && s.bsm == bsm)
    }

    /// Largest number of slots one user occupies within a single bin.
    pub fn max_concurrent(&self) -> usize {
        let mut count = vec![vec![0usize; self.n_users]; self.bins];
        for s in &self.slots {
            for u in s.users {
                count[s.bin][u] += 1;
            }
        }
        count.into_iter().flatten().max().unwrap_or(0)
    }
}

type Layout = BTreeMap<(usize, usize), (usize, usize)>;

struct Level {
    slots: Layout,
    bins: usize,
    modules: usize,
    /// Bins whose user load complements each other, folded together when
    /// the schedule doubles again.
    partner: Option<Vec<usize>>,
}

/// Recursive doubling. A `2h`-user schedule reuses the `h`-user one on
/// subnet 1 (users `0..h`) and subnet 2 (users `h..2h`): internal pairs of
/// subnet 1, the two cross directions, then internal pairs of subnet 2 each
/// take a group of bins. Partner bins of the smaller schedule share a bin
/// group on twice the modules. One extra module carries the diagonal pairs
/// `(i, i+h)`, one per bin, each placed where its users are least busy.
/// Users beyond `n` are padding; their slots are dropped.
pub fn build_tdm_schedule(n: usize) -> Result<TdmSchedule> {
    check_users(n)?;
    let padded = n.next_power_of_two();
    let level = build(padded);
    let counts = resource_counts(n, Scheme::Tdm)?;
    let slots: Vec<Slot> = level
        .slots
        .iter()
        .filter(|(_, (u, v))| *u < n && *v < n)
        .map(|(&(bin, bsm), &(u, v))| Slot { bin, bsm, users: [u.min(v), u.max(v)] })
        .collect();
    Ok(TdmSchedule {
        n_users: n,
        padded_users: padded,
        bins: level.bins,
        bsm_count: level.modules,
        wavelength_count: counts.wavelengths,
        encoders_per_user: counts.encoders_per_user,
        duty_cycle: 1.0 / level.bins as f64,
        slots,
    })
}

fn build(m: usize) -> Level {
    if m == 2 {
        return Level { slots: BTreeMap::from([((0, 0), (0, 1))]), bins: 1, modules: 1, partner: None };
    }
    let h = m / 2;
    let prev = build(h);
    let k = prev.modules;
    let lift = |u: usize, s: usize| u + s * h;
    let mut out = Layout::new();
    let (bins, partner) = match &prev.partner {
        None => {
            for (&(_, b), &(u, v)) in &prev.slots {
                let (i, j) = (u.min(v), u.max(v));
                out.insert((0, b), (lift(i, 0), lift(j, 0)));
                out.insert((0, k + b), (lift(i, 1), lift(j, 1)));
                out.insert((1, b), (lift(i, 0), lift(j, 1)));
                out.insert((1, k + b), (lift(i, 1), lift(j, 0)));
            }
            (2, vec![1, 0])
        }
        Some(part) => {
            let firsts: Vec<usize> = (0..prev.bins).filter(|&b| b < part[b]).collect();
            let fb = firsts.len();
            let mut folded = Layout::new();
            for (f, &b) in firsts.iter().enumerate() {
                for (&(bin, bsm), &pair) in &prev.slots {
                    if bin == b {
                        folded.insert((f, bsm), pair);
                    } else if bin == part[b] {
                        folded.insert((f, k + bsm), pair);
                    }
                }
            }
            for (&(f, bsm), &(u, v)) in &folded {
                let (i, j) = (u.min(v), u.max(v));
                out.insert((f, bsm), (lift(i, 0), lift(j, 0)));
                out.insert((fb + f, bsm), (lift(i, 0), lift(j, 1)));
                out.insert((2 * fb + f, bsm), (lift(i, 1), lift(j, 0)));
                out.insert((3 * fb + f, bsm), (lift(i, 1), lift(j, 1)));
            }
            let mut partner = vec![0; 4 * fb];
            for f in 0..fb {
                partner[f] = 3 * fb + f;
                partner[3 * fb + f] = f;
                partner[fb + f] = 2 * fb + f;
                partner[2 * fb + f] = fb + f;
            }
            (4 * fb, partner)
        }
    };
    let diag = 2 * k;
    let mut left: Vec<usize> = (0..h).collect();
    for bin in 0..bins {
        let mut load = vec![0usize; m];
        for (&(b, _), &(u, v)) in &out {
            if b == bin {
                load[u] += 1;
                load[v] += 1;
            }
        }
        let (pos, &i) = left
            .iter()
            .enumerate()
            .min_by_key(|(_, &i)| (load[lift(i, 0)].max(load[lift(i, 1)]), i))
            .expect("one diagonal per bin");
        left.remove(pos);
        out.insert((bin, diag), (lift(i, 0), lift(i, 1)));
    }
    Level { slots: out, bins, modules: 2 * k + 1, partner: Some(partner) }
}

//! Per-cycle success streams and four-fold coincidences between two links.

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::error::{check_probability, check_range, Error, Result};

/// One flag per clock cycle, packed 64 to a word.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CycleFlags {
    words: Vec<u64>,
    len: usize,
}

impl CycleFlags {
    pub fn new(len: usize) -> Self {
        CycleFlags { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn from_bools(flags: &[bool]) -> Self {
        let mut s = CycleFlags::new(flags.len());
        for (i, f) in flags.iter().enumerate() {
            if *f {
                s.set(i);
            }
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn set(&mut self, i: usize) {
        assert!(i < self.len, "cycle {i} out of range");
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// Independent Bernoulli(p) flags, drawn by geometric gaps.
    pub fn bernoulli<R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R) -> Result<Self> {
        check_probability("p", p)?;
        let mut s = CycleFlags::new(len);
        if p == 0.0 {
            return Ok(s);
        }
        let gaps = Geometric::new(p).map_err(|e| Error::Invalid(e.to_string()))?;
        let mut i = gaps.sample(rng);
        while i < len as u64 {
            s.set(i as usize);
            i += 1 + gaps.sample(rng);
        }
        Ok(s)
    }
}

/// Cycles in which both streams flag a success. A window no longer than one
/// clock period only resolves same-cycle events.
pub fn four_fold_count(stream1: &CycleFlags, stream2: &CycleFlags, window_s: f64, clock_hz: f64) -> Result<u64> {
    if stream1.len() != stream2.len() {
        return Err(Error::LengthMismatch(stream1.len(), stream2.len()));
    }
    check_range("clock_hz", clock_hz, clock_hz > 0.0, "> 0")?;
    check_range("window_s", window_s, window_s > 0.0 && window_s <= 1.0 / clock_hz, "(0, 1/clock_hz]")?;
    Ok(stream1.words.iter().zip(&stream2.words).map(|(a, b)| u64::from((a & b).count_ones())).sum())
}

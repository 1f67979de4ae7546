//! Decoy-state linear programs over a truncated photon-number expansion.
//!
//! Unknowns are the yields `Y_nm` (probability of a Ψ⁻ event given `n` and
//! `m` photons) and, for the phase-error program, the erroneous yields
//! `T_nm ≤ Y_nm`, for `n, m ≤ n_cut`. A source `(l, r)` predicts the gain
//! `Σ P_n(mu_l)·P_m(mu_r)·Y_nm + t` where `t ∈ [0, tail]` covers the photon
//! numbers above the cutoff.

use super::chernoff::{expectation_bounds, h_interval, HInterval};
use super::program::Program;
use crate::error::{Error, Result};
use crate::model::{GainTally, IntensityProtocol, Tag};

pub const DEFAULT_N_CUT: usize = 7;

/// Poisson mass `e^(−mu)·mu^n/n!`.
pub fn poisson(n: usize, mu: f64) -> f64 {
    let mut p = (-mu).exp();
    for k in 1..=n {
        p *= mu / k as f64;
    }
    p
}

/// One weighted member of a (possibly pooled) source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceTerm {
    pub l: Tag,
    pub r: Tag,
    pub weight: f64,
}

/// `lower ≤ Σ weight·gain(l, r) ≤ upper`, in gain per sent pair.
#[derive(Debug, Clone, PartialEq)]
pub struct GainRow {
    pub terms: Vec<SourceTerm>,
    pub lower: f64,
    pub upper: f64,
}

impl GainRow {
    pub fn single(l: Tag, r: Tag, lower: f64, upper: f64) -> Self {
        GainRow { terms: vec![SourceTerm { l, r, weight: 1.0 }], lower, upper }
    }
}

/// How the ℋ combination enters a solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HConstraint {
    None,
    /// Within the program's interval, widened by the truncation tails.
    Interval,
    /// Equal to a given value.
    Pinned(f64),
}

#[derive(Debug, Clone)]
pub struct DecoyLp {
    mu: [f64; 4],
    n_cut: usize,
    gain_rows: Vec<GainRow>,
    error_rows: Vec<GainRow>,
    h: Option<HInterval>,
    /// Fix `T_0m = Y_0m/2` and `T_n0 = Y_n0/2`: with vacuum on one side the
    /// announced bits are uncorrelated.
    pub vacuum_error_half: bool,
}

fn tag_index(t: Tag) -> usize {
    Tag::ALL.iter().position(|x| *x == t).expect("tag")
}

impl DecoyLp {
    pub fn new(
        protocol: &IntensityProtocol,
        n_cut: usize,
        gain_rows: Vec<GainRow>,
        error_rows: Vec<GainRow>,
        h: Option<HInterval>,
    ) -> Result<Self> {
        if n_cut < 2 {
            return Err(Error::OutOfRange { name: "n_cut", value: n_cut as f64, expected: ">= 2" });
        }
        for row in gain_rows.iter().chain(&error_rows) {
            for t in &row.terms {
                if t.l.basis() != t.r.basis() {
                    return Err(Error::CrossBasis(t.l, t.r));
                }
            }
        }
        let mut mu = [0.0; 4];
        for tag in Tag::ALL {
            mu[tag_index(tag)] = protocol.mu(tag);
        }
        Ok(DecoyLp { mu, n_cut, gain_rows, error_rows, h, vacuum_error_half: true })
    }

    /// Chernoff rows for every X-basis entry with pulses sent, pooled rows
    /// for each mirrored pair `(l,r)+(r,l)`, error rows where error counts
    /// are known, and the ℋ interval.
    pub fn from_tally(tally: &GainTally, protocol: &IntensityProtocol, epsilon: f64, n_cut: usize) -> Result<Self> {
        if tally.is_empty() {
            return Err(Error::EmptyTally);
        }
        let h = h_interval(tally, protocol, epsilon)?;
        let mut gain_rows = Vec::new();
        let mut error_rows = Vec::new();
        for ((l, r), e) in tally.iter() {
            if l == Tag::Z || e.sent == 0 {
                continue;
            }
            let g = expectation_bounds(e.success, e.sent, epsilon)?;
            gain_rows.push(GainRow::single(l, r, g.lower, g.upper));
            if let Some(err) = e.error {
                let b = expectation_bounds(err, e.sent, epsilon)?;
                error_rows.push(GainRow::single(l, r, b.lower, b.upper));
            }
        }
        for (i, l) in Tag::DECOYS.into_iter().enumerate() {
            for r in Tag::DECOYS.into_iter().skip(i + 1) {
                let (Some(a), Some(b)) = (tally.get(l, r), tally.get(r, l)) else { continue };
                if a.sent == 0 || b.sent == 0 {
                    continue;
                }
                let sent = a.sent + b.sent;
                let terms = vec![
                    SourceTerm { l, r, weight: a.sent as f64 / sent as f64 },
                    SourceTerm { l: r, r: l, weight: b.sent as f64 / sent as f64 },
                ];
                let g = expectation_bounds(a.success + b.success, sent, epsilon)?;
                gain_rows.push(GainRow { terms: terms.clone(), lower: g.lower, upper: g.upper });
                if let (Some(ea), Some(eb)) = (a.error, b.error) {
                    let eb = expectation_bounds(ea + eb, sent, epsilon)?;
                    error_rows.push(GainRow { terms, lower: eb.lower, upper: eb.upper });
                }
            }
        }
        DecoyLp::new(protocol, n_cut, gain_rows, error_rows, Some(h))
    }

    /// Zero-width rows from exact expected gains (infinite statistics).
    /// Each interval is widened by `rel_tol` of its value so that a model
    /// reproducing the gains exactly stays feasible in floating point.
    pub fn exact(
        protocol: &IntensityProtocol,
        gains: &[((Tag, Tag), f64)],
        error_gains: &[((Tag, Tag), f64)],
        n_cut: usize,
        rel_tol: f64,
    ) -> Result<Self> {
        let widen = |v: f64| (v * (1.0 - rel_tol), v * (1.0 + rel_tol));
        let rows = |src: &[((Tag, Tag), f64)]| {
            src.iter()
                .map(|&((l, r), v)| {
                    let (lo, hi) = widen(v);
                    GainRow::single(l, r, lo, hi)
                })
                .collect::<Vec<_>>()
        };
        let find = |l, r| gains.iter().find(|(p, _)| *p == (l, r)).map(|(_, v)| *v);
        let h = match (find(Tag::O, Tag::X), find(Tag::X, Tag::O), find(Tag::O, Tag::O)) {
            (Some(ox), Some(xo), Some(oo)) => {
                let mut h = HInterval::exact(protocol.mu(Tag::X), ox, xo, oo);
                let pad = rel_tol * (h.a0 * (ox + xo) + h.a0 * h.b0 * oo);
                h.h_low -= pad;
                h.h_high += pad;
                Some(h)
            }
            _ => None,
        };
        DecoyLp::new(protocol, n_cut, rows(gains), rows(error_gains), h)
    }

    pub fn h_interval(&self) -> Option<HInterval> {
        self.h
    }

    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    pub fn gain_rows(&self) -> &[GainRow] {
        &self.gain_rows
    }

    pub fn error_rows(&self) -> &[GainRow] {
        &self.error_rows
    }

    fn k(&self) -> usize {
        self.n_cut + 1
    }

    fn mu_of(&self, t: Tag) -> f64 {
        self.mu[tag_index(t)]
    }

    /// Truncated coefficients and tail mass of a weighted source sum.
    fn expand(&self, terms: &[SourceTerm]) -> (Vec<f64>, f64) {
        let k = self.k();
        let mut c = vec![0.0; k * k];
        let mut tail = 0.0;
        for t in terms {
            let pl: Vec<f64> = (0..k).map(|n| poisson(n, self.mu_of(t.l))).collect();
            let pr: Vec<f64> = (0..k).map(|m| poisson(m, self.mu_of(t.r))).collect();
            let mut covered = 0.0;
            for n in 0..k {
                for m in 0..k {
                    let v = pl[n] * pr[m];
                    c[n * k + m] += t.weight * v;
                    covered += v;
                }
            }
            tail += t.weight * (1.0 - covered).max(0.0);
        }
        (c, tail)
    }

    fn h_coefficients(&self, h: &HInterval) -> (Vec<f64>, f64, f64) {
        let (c_ox, t_ox) = self.expand(&[SourceTerm { l: Tag::O, r: Tag::X, weight: 1.0 }]);
        let (c_xo, t_xo) = self.expand(&[SourceTerm { l: Tag::X, r: Tag::O, weight: 1.0 }]);
        let (c_oo, t_oo) = self.expand(&[SourceTerm { l: Tag::O, r: Tag::O, weight: 1.0 }]);
        let c = (0..c_ox.len()).map(|i| h.a0 * c_ox[i] + h.b0 * c_xo[i] - h.a0 * h.b0 * c_oo[i]).collect();
        (c, h.a0 * t_ox + h.b0 * t_xo, h.a0 * h.b0 * t_oo)
    }

    /// Minimum of `Y_11` over all yield models consistent with the rows.
    pub fn min_y11(&self, h: HConstraint) -> Result<f64> {
        let k = self.k();
        let mut lp = Program::new(true);
        let y: Vec<usize> = (0..k * k).map(|_| lp.add_var(1.0)).collect();
        lp.set_objective(y[k + 1]);
        self.add_rows(&mut lp, &y, &self.gain_rows, None);
        self.add_h(&mut lp, &y, h)?;
        Ok(lp.solve()?.max(0.0))
    }

    /// Maximum of `T_11` over all yield and error models consistent with the
    /// rows. Pinned vacuum-side cells enter the error rows as `Y/2` directly.
    pub fn max_t11(&self, h: HConstraint) -> Result<f64> {
        let k = self.k();
        let mut lp = Program::new(false);
        let y: Vec<usize> = (0..k * k).map(|_| lp.add_var(1.0)).collect();
        let mut cells = Vec::with_capacity(k * k);
        for n in 0..k {
            for m in 0..k {
                let i = n * k + m;
                if self.vacuum_error_half && (n == 0 || m == 0) {
                    cells.push((y[i], 0.5));
                } else {
                    let t = lp.add_var(1.0);
                    lp.add_row([(t, 1.0), (y[i], -1.0)], f64::NEG_INFINITY, 0.0);
                    cells.push((t, 1.0));
                }
            }
        }
        let (t_vars, factor): (Vec<usize>, Vec<f64>) = cells.into_iter().unzip();
        lp.set_objective(t_vars[k + 1]);
        self.add_rows(&mut lp, &y, &self.gain_rows, None);
        self.add_rows(&mut lp, &t_vars, &self.error_rows, Some(&factor));
        self.add_h(&mut lp, &y, h)?;
        Ok(lp.solve()?.max(0.0))
    }

    fn add_rows(&self, lp: &mut Program, vars: &[usize], rows: &[GainRow], factor: Option<&[f64]>) {
        for row in rows {
            let (mut c, tail) = self.expand(&row.terms);
            if let Some(f) = factor {
                c.iter_mut().zip(f).for_each(|(c, f)| *c *= f);
            }
            lp.add_row(vars.iter().copied().zip(c), row.lower - tail, row.upper);
        }
    }

    fn add_h(&self, lp: &mut Program, y: &[usize], h: HConstraint) -> Result<()> {
        let interval = match (h, self.h) {
            (HConstraint::None, _) => return Ok(()),
            (_, None) => return Err(Error::Invalid("program has no ℋ interval".into())),
            (_, Some(iv)) => iv,
        };
        let (c, tail_plus, tail_minus) = self.h_coefficients(&interval);
        let (lo, hi) = match h {
            HConstraint::Pinned(v) => (v - tail_plus, v + tail_minus),
            _ => (interval.h_low - tail_plus, interval.h_high + tail_minus),
        };
        lp.add_row(y.iter().copied().zip(c), lo, hi);
        Ok(())
    }
}

/// Lower bound on the single-photon-pair yield, with ℋ constrained to its
/// Chernoff interval.
pub fn estimate_s11_lower(tally: &GainTally, protocol: &IntensityProtocol, epsilon: f64, n_cut: usize) -> Result<f64> {
    DecoyLp::from_tally(tally, protocol, epsilon, n_cut)?.min_y11(HConstraint::Interval)
}

/// Upper bound on the single-photon phase error, `min(T_11,max / s11, 1/2)`.
pub fn estimate_e11ph_upper(
    tally: &GainTally,
    protocol: &IntensityProtocol,
    epsilon: f64,
    n_cut: usize,
    s11_lower: f64,
) -> Result<f64> {
    if s11_lower.is_nan() || s11_lower <= 0.0 {
        return Err(Error::OutOfRange { name: "s11_lower", value: s11_lower, expected: "> 0" });
    }
    let t11 = DecoyLp::from_tally(tally, protocol, epsilon, n_cut)?.max_t11(HConstraint::Interval)?;
    Ok((t11 / s11_lower).min(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{IntensityClass, TallyEntry};

    #[test]
    fn poisson_mass() {
        assert!((poisson(0, 0.5) - (-0.5f64).exp()).abs() < 1e-16);
        assert!((poisson(2, 0.5) - 0.125 * (-0.5f64).exp()).abs() < 1e-16);
        let s: f64 = (0..30).map(|n| poisson(n, 0.7)).sum();
        assert!((s - 1.0).abs() < 1e-14);
    }

    fn vacuum_only() -> IntensityProtocol {
        IntensityProtocol::new(
            [
                IntensityClass { tag: Tag::Z, mu: 0.5, probability: 0.0 },
                IntensityClass { tag: Tag::Y, mu: 0.2, probability: 0.0 },
                IntensityClass { tag: Tag::X, mu: 0.1, probability: 0.0 },
                IntensityClass { tag: Tag::O, mu: 0.0, probability: 1.0 },
            ],
            1e8,
            1,
        )
        .unwrap()
    }

    #[test]
    fn vacuum_only_constraint_leaves_y11_free() {
        let lp = DecoyLp::exact(&vacuum_only(), &[((Tag::O, Tag::O), 0.0)], &[], 7, 0.0).unwrap();
        assert_eq!(lp.min_y11(HConstraint::None).unwrap(), 0.0);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let p = IntensityProtocol::baseline();
        let rows = [GainRow::single(Tag::O, Tag::O, 0.5, 0.6)];
        let lp = DecoyLp::new(&p, 7, vec![rows[0].clone(), GainRow::single(Tag::O, Tag::O, 0.0, 0.1)], vec![], None)
            .unwrap();
        assert!(matches!(lp.min_y11(HConstraint::None), Err(Error::InfeasibleLp(_))));
    }

    #[test]
    fn e11_requires_positive_s11() {
        let mut t = GainTally::new();
        t.insert(Tag::O, Tag::O, TallyEntry::new(10, 0, None)).unwrap();
        let r = estimate_e11ph_upper(&t, &IntensityProtocol::baseline(), 1e-10, 7, 0.0);
        assert!(matches!(r, Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn n_cut_below_two_rejected() {
        assert!(DecoyLp::new(&IntensityProtocol::baseline(), 1, vec![], vec![], None).is_err());
    }
}

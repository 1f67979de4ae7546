//! Bounded linear programs with two-sided rows, equilibrated before they
//! reach the simplex solver.

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{Error, Result};

/// Solver variables carry `x·VALUE_SCALE` so row bounds near 1e-7 stay well
/// above the solver's absolute tolerance.
const VALUE_SCALE: f64 = 1e6;
/// Coefficients this far below a row's largest are moved into its bounds.
const DROP_REL: f64 = 1e-9;

#[derive(Debug, Clone)]
struct Row {
    terms: Vec<(usize, f64)>,
    lo: f64,
    hi: f64,
}

/// Variables are non-negative with finite upper bounds; rows are
/// `lo ≤ Σ a·x ≤ hi` with either side possibly infinite.
#[derive(Debug, Clone)]
pub(crate) struct Program {
    minimize: bool,
    objective: Option<usize>,
    upper: Vec<f64>,
    rows: Vec<Row>,
}

impl Program {
    pub(crate) fn new(minimize: bool) -> Self {
        Program { minimize, objective: None, upper: Vec::new(), rows: Vec::new() }
    }

    pub(crate) fn add_var(&mut self, upper: f64) -> usize {
        self.upper.push(upper);
        self.upper.len() - 1
    }

    pub(crate) fn set_objective(&mut self, var: usize) {
        self.objective = Some(var);
    }

    /// Adds `lo ≤ Σ a·x ≤ hi`. Negligible coefficients are dropped and the
    /// bounds widened by the most they could contribute; sides that no
    /// assignment within the variable bounds can violate are left out.
    pub(crate) fn add_row(&mut self, terms: impl IntoIterator<Item = (usize, f64)>, lo: f64, hi: f64) {
        let terms: Vec<(usize, f64)> = terms.into_iter().filter(|(_, a)| *a != 0.0).collect();
        let max = terms.iter().fold(0.0f64, |m, (_, a)| m.max(a.abs()));
        if max == 0.0 {
            return;
        }
        let (mut lo, mut hi) = (lo, hi);
        let mut kept = Vec::with_capacity(terms.len());
        for (j, a) in terms {
            if a.abs() < DROP_REL * max {
                let reach = a * self.upper[j];
                if reach > 0.0 {
                    lo -= reach;
                } else {
                    hi -= reach;
                }
            } else {
                kept.push((j, a));
            }
        }
        let reach_min: f64 = kept.iter().map(|&(j, a)| (a * self.upper[j]).min(0.0)).sum();
        let reach_max: f64 = kept.iter().map(|&(j, a)| (a * self.upper[j]).max(0.0)).sum();
        let lo = if lo > reach_min { lo } else { f64::NEG_INFINITY };
        let hi = if hi < reach_max { hi } else { f64::INFINITY };
        if lo.is_finite() || hi.is_finite() {
            self.rows.push(Row { terms: kept, lo, hi });
        }
    }

    /// Optimal value of the objective variable. Two-sided rows are first
    /// posed against bounded slacks; if the simplex loses its basis the
    /// program is re-posed with paired one-sided rows.
    pub(crate) fn solve(&self) -> Result<f64> {
        match self.solve_form(true) {
            Err(Error::Solver(_)) => self.solve_form(false),
            other => other,
        }
    }

    fn solve_form(&self, ranged: bool) -> Result<f64> {
        let obj = self.objective.ok_or_else(|| Error::Invalid("program has no objective".into()))?;
        let row_scale: Vec<f64> =
            self.rows.iter().map(|r| 1.0 / r.terms.iter().fold(0.0f64, |m, (_, a)| m.max(a.abs()))).collect();
        let mut col_max = vec![0.0f64; self.upper.len()];
        for (r, s) in self.rows.iter().zip(&row_scale) {
            for &(j, a) in &r.terms {
                col_max[j] = col_max[j].max((a * s).abs());
            }
        }
        let col_scale: Vec<f64> = col_max.iter().map(|&m| if m > 0.0 { 1.0 / m } else { 1.0 }).collect();

        let direction = if self.minimize { OptimizationDirection::Minimize } else { OptimizationDirection::Maximize };
        let mut lp = Problem::new(direction);
        let vars: Vec<_> = (0..self.upper.len())
            .map(|j| {
                let c = if j == obj { 1.0 } else { 0.0 };
                lp.add_var(c, (0.0, VALUE_SCALE * self.upper[j] / col_scale[j]))
            })
            .collect();
        for (r, s) in self.rows.iter().zip(&row_scale) {
            let mut terms: Vec<_> = r.terms.iter().map(|&(j, a)| (vars[j], a * s * col_scale[j])).collect();
            let (lo, hi) = (r.lo * s * VALUE_SCALE, r.hi * s * VALUE_SCALE);
            match (lo.is_finite(), hi.is_finite()) {
                (true, true) if lo == hi => lp.add_constraint(terms, ComparisonOp::Eq, lo),
                (true, true) if ranged => {
                    terms.push((lp.add_var(0.0, (lo, hi)), -1.0));
                    lp.add_constraint(terms, ComparisonOp::Eq, 0.0);
                }
                (true, true) => {
                    lp.add_constraint(terms.clone(), ComparisonOp::Ge, lo);
                    lp.add_constraint(terms, ComparisonOp::Le, hi);
                }
                (true, false) => lp.add_constraint(terms, ComparisonOp::Ge, lo),
                (false, true) => lp.add_constraint(terms, ComparisonOp::Le, hi),
                (false, false) => {}
            }
        }
        let sol = match lp.solve() {
            Ok(outcome) => outcome.into_solution().map_err(|_| Error::Solver("solve interrupted".into()))?,
            Err(microlp::Error::Infeasible) => {
                return Err(Error::InfeasibleLp("no yield model matches the observed gains".into()))
            }
            Err(e) => return Err(Error::Solver(e.to_string())),
        };
        Ok(sol.var_value(vars[obj]) * col_scale[obj] / VALUE_SCALE)
    }
}

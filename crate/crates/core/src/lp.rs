//! Dense bounded-variable primal simplex.
//!
//! Maximizes `cᵀx` subject to rows `aᵢᵀx {≤,=,≥} bᵢ` and per-variable bounds
//! `l ≤ x ≤ u` (either side may be infinite). Phase one drives artificial
//! variables out of a slack/artificial starting basis; nonbasic variables sit
//! at one of their bounds (or at zero when free). Pricing is Dantzig's rule
//! and switches to Bland's rule after a fixed number of pivots, so every
//! solve is deterministic.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Phase-one objective below `-FEAS_TOL` means infeasible.
pub const FEAS_TOL: f64 = 1e-7;
/// Reduced-cost optimality tolerance.
pub const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// All variables start in `[0, ∞)`.
    pub fn maximize(objective: Vec<f64>) -> LinearProgram {
        let n = objective.len();
        LinearProgram {
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint { coeffs, sense, rhs });
        self
    }

    pub fn bound(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|c| {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            match c.sense {
                Sense::Le => (lhs - c.rhs).max(0.0),
                Sense::Ge => (c.rhs - lhs).max(0.0),
                Sense::Eq => (lhs - c.rhs).abs(),
            }
        });
        let bounds =
            (0..self.num_vars()).map(|j| (self.lower[j] - x[j]).max(x[j] - self.upper[j]).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Malformed(
                "bound vectors do not match objective".into(),
            ));
        }
        for (r, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(LpError::Malformed(format!(
                    "row {r} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(LpError::Malformed(format!("row {r} is not finite")));
            }
        }
        for j in 0..n {
            if self.lower[j] > self.upper[j] || self.lower[j] == f64::INFINITY {
                return Err(LpError::Malformed(format!(
                    "variable {j} has bounds [{}, {}]",
                    self.lower[j], self.upper[j]
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    /// Meaningful only when `status` is `Optimal`.
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("simplex gave up after {0} pivots")]
    NumericalFailure(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic(usize),
    Lower,
    Upper,
    /// Nonbasic free variable held at zero.
    Zero,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `B⁻¹ [A | I | G]`, row-major.
    t: Vec<f64>,
    /// Original columns, kept for the final refinement solve.
    a: Vec<f64>,
    rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    value: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    pivots: usize,
    bland_after: usize,
    max_pivots: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.cols + j]
    }

    fn build(lp: &LinearProgram) -> Tableau {
        let m = lp.constraints.len();
        let n = lp.num_vars();
        let cols = n + 2 * m;
        let mut a = vec![0.0; m * cols];
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        let mut value = vec![0.0; cols];
        let mut state = vec![State::Lower; cols];
        for j in 0..n {
            (value[j], state[j]) = if lower[j].is_finite() {
                (lower[j], State::Lower)
            } else if upper[j].is_finite() {
                (upper[j], State::Upper)
            } else {
                (0.0, State::Zero)
            };
        }
        lower.resize(cols, 0.0);
        upper.resize(cols, 0.0);

        let mut basis = Vec::with_capacity(m);
        let mut pivot = Vec::with_capacity(m);
        for (i, c) in lp.constraints.iter().enumerate() {
            let row = &mut a[i * cols..(i + 1) * cols];
            row[..n].copy_from_slice(&c.coeffs);
            let slack = n + i;
            let art = n + m + i;
            row[slack] = 1.0;
            (lower[slack], upper[slack]) = match c.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            let residual = c.rhs - (0..n).map(|j| c.coeffs[j] * value[j]).sum::<f64>();
            if residual >= lower[slack] && residual <= upper[slack] {
                value[slack] = residual;
                state[slack] = State::Basic(i);
                basis.push(slack);
                pivot.push(1.0);
                // artificial stays fixed at zero
            } else {
                let parked = residual.clamp(lower[slack], upper[slack]);
                value[slack] = parked;
                state[slack] = if parked == lower[slack] {
                    State::Lower
                } else {
                    State::Upper
                };
                let excess = residual - parked;
                let sign = excess.signum();
                row[art] = sign;
                upper[art] = f64::INFINITY;
                value[art] = excess.abs();
                state[art] = State::Basic(i);
                basis.push(art);
                pivot.push(sign);
            }
        }
        let mut t = a.clone();
        for i in 0..m {
            let p = pivot[i];
            for v in &mut t[i * cols..(i + 1) * cols] {
                *v /= p;
            }
        }
        Tableau {
            rows: m,
            cols,
            t,
            a,
            rhs: lp.constraints.iter().map(|c| c.rhs).collect(),
            lower,
            upper,
            value,
            state,
            basis,
            pivots: 0,
            bland_after: 50 + 10 * (m + cols),
            max_pivots: 5_000 + 100 * (m + cols),
        }
    }

    fn reduced_cost(&self, cost: &[f64], j: usize) -> f64 {
        let mut d = cost[j];
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                d -= cb * self.at(i, j);
            }
        }
        d
    }

    /// Entering variable and its direction of motion.
    fn price(&self, cost: &[f64]) -> Option<(usize, f64)> {
        let bland = self.pivots >= self.bland_after;
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.cols {
            if matches!(self.state[j], State::Basic(_)) || self.upper[j] <= self.lower[j] {
                continue;
            }
            let d = self.reduced_cost(cost, j);
            let dir = match self.state[j] {
                State::Lower if d > OPT_TOL => 1.0,
                State::Upper if d < -OPT_TOL => -1.0,
                State::Zero if d.abs() > OPT_TOL => d.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(_, _, score)| d.abs() > score) {
                best = Some((j, dir, d.abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn iterate(&mut self, cost: &[f64]) -> Result<Outcome, LpError> {
        loop {
            let Some((enter, dir)) = self.price(cost) else {
                return Ok(Outcome::Optimal);
            };
            if self.pivots >= self.max_pivots {
                return Err(LpError::NumericalFailure(self.pivots));
            }
            self.pivots += 1;
            let bland = self.pivots >= self.bland_after;

            let mut step = self.upper[enter] - self.lower[enter];
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let alpha = self.at(i, enter);
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let rate = -dir * alpha;
                let var = self.basis[i];
                let limit = if rate < 0.0 {
                    (self.value[var] - self.lower[var]) / -rate
                } else {
                    (self.upper[var] - self.value[var]) / rate
                };
                if !limit.is_finite() {
                    continue;
                }
                let limit = limit.max(0.0);
                let better = if limit < step - 1e-12 {
                    true
                } else if (limit - step).abs() <= 1e-12 {
                    match leave {
                        // prefer a bound flip over a degenerate pivot
                        None => false,
                        Some((r, _)) if bland => var < self.basis[r],
                        Some((r, _)) => alpha.abs() > self.at(r, enter).abs(),
                    }
                } else {
                    false
                };
                if better {
                    step = limit;
                    leave = Some((i, rate));
                }
            }
            if !step.is_finite() {
                return Ok(Outcome::Unbounded);
            }

            self.value[enter] += dir * step;
            for i in 0..self.rows {
                let var = self.basis[i];
                self.value[var] -= dir * step * self.at(i, enter);
            }

            match leave {
                None => {
                    (self.value[enter], self.state[enter]) = if dir > 0.0 {
                        (self.upper[enter], State::Upper)
                    } else {
                        (self.lower[enter], State::Lower)
                    };
                }
                Some((r, rate)) => {
                    let out = self.basis[r];
                    (self.value[out], self.state[out]) = if rate < 0.0 {
                        (self.lower[out], State::Lower)
                    } else {
                        (self.upper[out], State::Upper)
                    };
                    self.pivot(r, enter);
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, enter: usize) {
        let cols = self.cols;
        let p = self.at(r, enter);
        for v in &mut self.t[r * cols..(r + 1) * cols] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.t[r * cols..(r + 1) * cols].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let factor = self.at(i, enter);
            if factor == 0.0 {
                continue;
            }
            let row = &mut self.t[i * cols..(i + 1) * cols];
            for (v, pr) in row.iter_mut().zip(&pivot_row) {
                *v -= factor * pr;
            }
        }
        self.basis[r] = enter;
        self.state[enter] = State::Basic(r);
    }

    /// Recompute basic values from the original columns to shed accumulated
    /// pivoting error.
    fn refine(&mut self) {
        let m = self.rows;
        if m == 0 {
            return;
        }
        let b = DMatrix::from_fn(m, m, |i, k| self.a[i * self.cols + self.basis[k]]);
        let rhs = DVector::from_fn(m, |i, _| {
            let mut r = self.rhs[i];
            for j in 0..self.cols {
                if !matches!(self.state[j], State::Basic(_)) {
                    r -= self.a[i * self.cols + j] * self.value[j];
                }
            }
            r
        });
        if let Some(xb) = b.lu().solve(&rhs) {
            if xb.iter().all(|v| v.is_finite()) {
                for k in 0..m {
                    self.value[self.basis[k]] = xb[k];
                }
            }
        }
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpResult, LpError> {
    lp.check()?;
    let n = lp.num_vars();
    let m = lp.constraints.len();
    let mut tab = Tableau::build(lp);

    let artificials: Vec<usize> = (n + m..n + 2 * m)
        .filter(|&j| matches!(tab.state[j], State::Basic(_)))
        .collect();
    if !artificials.is_empty() {
        let mut phase1 = vec![0.0; tab.cols];
        for &j in &artificials {
            phase1[j] = -1.0;
        }
        tab.iterate(&phase1)?;
        tab.refine();
        let infeasibility: f64 = artificials.iter().map(|&j| tab.value[j].abs()).sum();
        if infeasibility > FEAS_TOL {
            return Ok(LpResult {
                status: LpStatus::Infeasible,
                x: vec![0.0; n],
                objective: f64::NAN,
            });
        }
        for &j in &artificials {
            tab.upper[j] = 0.0;
        }
    }

    let mut cost = lp.objective.clone();
    cost.resize(tab.cols, 0.0);
    if let Outcome::Unbounded = tab.iterate(&cost)? {
        return Ok(LpResult {
            status: LpStatus::Unbounded,
            x: vec![0.0; n],
            objective: f64::INFINITY,
        });
    }
    tab.refine();
    let x: Vec<f64> = (0..n)
        .map(|j| {
            let v = tab.value[j];
            if v < lp.lower[j] && v > lp.lower[j] - BOUND_TOL {
                lp.lower[j]
            } else if v > lp.upper[j] && v < lp.upper[j] + BOUND_TOL {
                lp.upper[j]
            } else {
                v
            }
        })
        .collect();
    Ok(LpResult {
        status: LpStatus::Optimal,
        objective: lp.objective_value(&x),
        x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_box_sum() {
        let mut lp = LinearProgram::maximize(vec![1.0, 1.0]);
        lp.constrain(vec![1.0, 1.0], Sense::Le, 1.0);
        lp.bound(0, 0.0, 1.0).bound(1, 0.0, 1.0);
        let r = solve_lp(&lp).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn row_beyond_box_is_infeasible() {
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.constrain(vec![1.0], Sense::Ge, 2.0);
        lp.bound(0, 0.0, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = LinearProgram::maximize(vec![1.0, 0.0]);
        lp.constrain(vec![1.0, -1.0], Sense::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_and_free_variable() {
        // max -x0 - x1 s.t. x0 - x1 = 3, x1 free, x0 in [0, 10]
        let mut lp = LinearProgram::maximize(vec![-1.0, -1.0]);
        lp.constrain(vec![1.0, -1.0], Sense::Eq, 3.0);
        lp.bound(0, 0.0, 10.0)
            .bound(1, f64::NEG_INFINITY, f64::INFINITY);
        let r = solve_lp(&lp).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        // x1 = x0 - 3, objective = -2 x0 + 3, best at x0 = 0
        assert!((r.x[0] - 0.0).abs() < 1e-9);
        assert!((r.x[1] + 3.0).abs() < 1e-9);
    }

    #[test]
    fn crossed_bounds_are_malformed() {
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.bound(0, 2.0, 1.0);
        assert!(matches!(solve_lp(&lp), Err(LpError::Malformed(_))));
    }

    #[test]
    fn no_rows_goes_to_best_bounds() {
        let mut lp = LinearProgram::maximize(vec![2.0, -1.0]);
        lp.bound(0, 0.0, 3.0).bound(1, -1.0, 4.0);
        let r = solve_lp(&lp).unwrap();
        assert_eq!(r.x, vec![3.0, -1.0]);
    }
}

//! Supporter maximization with transient states.
//!
//! Each agent `i` gets a binary indicator `z_i` tied to its asymptotic
//! opinion by the big-M row
//!
//! ```text
//! (x* - L) z_i - Σ_r a_ir p_r ≤ x_i(+∞)|_{p=0} - L
//! ```
//!
//! where `a_ir = h_i^(k) π_r / c_r` is the effect of one dollar paid to
//! recurrent agent `r ∈ E_k` on `x_i(+∞)`, and `L` is the smallest
//! zero-payment asymptotic opinion. Rearranged this is
//! `z_i ≤ 1 + (x_i(+∞) - x*) / (x* - L)`, and since `x_i(+∞) ≥ L` always,
//! `z_i = 1` is attainable exactly when `i` is a supporter.
//!
//! The search is lexicographic. A first branch-and-bound pass maximizes
//! `Σ z_i`. A second pass keeps `Σ z_i` at that optimum and maximizes the
//! total asymptotic opinion `Σ_i x_i(+∞)`, so leftover budget is spent where
//! it moves opinions the most. Only recurrent agents carry payment
//! variables; transient payments never reach any limit opinion.

use serde::Serialize;
use thiserror::Error;

use crate::chain::ChainAnalysis;
use crate::exec::Execution;
use crate::lp::{solve_lp, LinearProgram, LpError, LpStatus, Sense};
use crate::model::{Instance, PaymentPlan, BUDGET_TOL, TOL};

pub const DEFAULT_NODE_LIMIT: usize = 200_000;

/// Largest instance the subset-enumeration oracle accepts.
pub const ORACLE_MAX_AGENTS: usize = 15;

const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MilpError {
    /// Every agent already meets the threshold; nothing to optimize.
    #[error("lower bound {lower_bound} already meets threshold {threshold}")]
    DegenerateL { lower_bound: f64, threshold: f64 },
    #[error("instance has {0} agents, the oracle handles at most {ORACLE_MAX_AGENTS}")]
    TooLarge(usize),
    #[error("budgets must be sorted ascending")]
    UnsortedBudgets,
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Optimality {
    Proven,
    /// Node limit reached; best incumbent returned.
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Zero-payment plan already makes everyone a supporter.
    Trivial,
    BranchAndBound,
    BruteForce,
    KnapsackExact,
    KnapsackFptas,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub plan: PaymentPlan,
    pub supporter_count: usize,
    pub optimality: Optimality,
    pub node_count: usize,
    pub method: Method,
}

impl MilpSolution {
    /// Builds the plan and recounts supporters from the chain analysis.
    pub fn from_payments(
        instance: &Instance,
        analysis: &ChainAnalysis,
        payments: Vec<f64>,
        optimality: Optimality,
        node_count: usize,
        method: Method,
    ) -> MilpSolution {
        let mut plan = PaymentPlan::from_payments(instance, payments);
        plan.supporters = analysis.supporters(&plan.expressed_opinions, instance.threshold());
        MilpSolution {
            supporter_count: plan.supporters.len(),
            plan,
            optimality,
            node_count,
            method,
        }
    }

    pub fn trivial(instance: &Instance, analysis: &ChainAnalysis) -> MilpSolution {
        MilpSolution::from_payments(
            instance,
            analysis,
            vec![0.0; instance.len()],
            Optimality::Proven,
            0,
            Method::Trivial,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MilpOptions {
    pub node_limit: usize,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions {
            node_limit: DEFAULT_NODE_LIMIT,
        }
    }
}

/// Linearized supporter-maximization problem for one instance.
#[derive(Debug, Clone)]
pub struct MilpInstance<'a> {
    pub instance: &'a Instance,
    pub analysis: &'a ChainAnalysis,
    /// Agents that carry a payment variable.
    pub recurrent: Vec<usize>,
    /// `effect[i][r]`: change in `x_i(+∞)` per dollar paid to `recurrent[r]`.
    pub effect: Vec<Vec<f64>>,
    /// `x_i(+∞)` with no payments.
    pub base: Vec<f64>,
    pub caps: Vec<f64>,
    pub lower_bound: f64,
    pub threshold: f64,
    pub budget: f64,
}

/// Smallest zero-payment asymptotic opinion over all agents.
pub fn lower_bound(instance: &Instance, analysis: &ChainAnalysis) -> f64 {
    analysis
        .asymptotic_opinions(instance.true_opinions())
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

pub fn build_milp<'a>(
    instance: &'a Instance,
    analysis: &'a ChainAnalysis,
) -> Result<MilpInstance<'a>, MilpError> {
    let n = instance.len();
    let threshold = instance.threshold();
    let base = analysis.asymptotic_opinions(instance.true_opinions());
    let lower_bound = base.iter().copied().fold(f64::INFINITY, f64::min);
    if lower_bound >= threshold - TOL {
        return Err(MilpError::DegenerateL {
            lower_bound,
            threshold,
        });
    }
    let recurrent = analysis.decomposition.recurrent();
    let effect = (0..n)
        .map(|i| {
            recurrent
                .iter()
                .map(|&j| analysis.limit_coefficient(i, j) / instance.costs()[j])
                .collect()
        })
        .collect();
    let caps = recurrent.iter().map(|&j| instance.payment_cap(j)).collect();
    Ok(MilpInstance {
        instance,
        analysis,
        recurrent,
        effect,
        base,
        caps,
        lower_bound,
        threshold,
        budget: instance.budget(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Goal {
    Supporters,
    /// Total asymptotic opinion with at least this many supporters.
    TotalOpinion {
        min_supporters: usize,
    },
}

#[derive(Debug, Clone)]
struct Incumbent {
    value: f64,
    payments: Vec<f64>,
}

impl MilpInstance<'_> {
    pub fn num_agents(&self) -> usize {
        self.base.len()
    }

    fn num_payments(&self) -> usize {
        self.recurrent.len()
    }

    pub fn asymptotic(&self, payments: &[f64]) -> Vec<f64> {
        self.effect
            .iter()
            .zip(&self.base)
            .map(|(row, b)| b + row.iter().zip(payments).map(|(a, p)| a * p).sum::<f64>())
            .collect()
    }

    pub fn count_supporters(&self, payments: &[f64]) -> usize {
        self.asymptotic(payments)
            .iter()
            .filter(|&&x| x >= self.threshold - TOL)
            .count()
    }

    /// Objective weights of the second pass: `Σ_i a_ir`.
    fn opinion_weights(&self) -> Vec<f64> {
        (0..self.num_payments())
            .map(|r| self.effect.iter().map(|row| row[r]).sum())
            .collect()
    }

    fn total_opinion(&self, payments: &[f64]) -> f64 {
        self.asymptotic(payments).iter().sum()
    }

    /// LP relaxation; variables are `[p_0.., z_0..]`.
    fn relaxation(&self, goal: Goal, fixed: &[Option<bool>]) -> LinearProgram {
        let np = self.num_payments();
        let n = self.num_agents();
        let mut objective = vec![0.0; np + n];
        match goal {
            Goal::Supporters => objective[np..].fill(1.0),
            Goal::TotalOpinion { .. } => objective[..np].copy_from_slice(&self.opinion_weights()),
        }
        let mut lp = LinearProgram::maximize(objective);
        let margin = self.threshold - self.lower_bound;
        for i in 0..n {
            let mut row = vec![0.0; np + n];
            for (slot, a) in row.iter_mut().zip(&self.effect[i]) {
                *slot = -a;
            }
            row[np + i] = margin;
            lp.constrain(row, Sense::Le, self.base[i] - self.lower_bound);
        }
        let mut budget_row = vec![0.0; np + n];
        budget_row[..np].fill(1.0);
        lp.constrain(budget_row, Sense::Le, self.budget);
        if let Goal::TotalOpinion { min_supporters } = goal {
            let mut row = vec![0.0; np + n];
            row[np..].fill(1.0);
            lp.constrain(row, Sense::Ge, min_supporters as f64);
        }
        for r in 0..np {
            lp.bound(r, 0.0, self.caps[r]);
        }
        for (i, f) in fixed.iter().enumerate() {
            let (lo, hi) = match f {
                None => (0.0, 1.0),
                Some(false) => (0.0, 0.0),
                Some(true) => (1.0, 1.0),
            };
            lp.bound(np + i, lo, hi);
        }
        lp
    }

    fn evaluate(&self, goal: Goal, payments: &[f64]) -> Option<f64> {
        let count = self.count_supporters(payments);
        match goal {
            Goal::Supporters => Some(count as f64),
            Goal::TotalOpinion { min_supporters } => {
                (count >= min_supporters).then(|| self.total_opinion(payments))
            }
        }
    }

    fn improves(goal: Goal, candidate: f64, incumbent: &Option<Incumbent>) -> bool {
        match incumbent {
            None => true,
            Some(inc) => match goal {
                Goal::Supporters => candidate > inc.value + 0.5,
                Goal::TotalOpinion { .. } => candidate > inc.value + TOL,
            },
        }
    }

    fn prunable(goal: Goal, bound: f64, incumbent: &Option<Incumbent>) -> bool {
        match incumbent {
            None => false,
            Some(inc) => match goal {
                Goal::Supporters => (bound + INTEGRALITY_TOL).floor() <= inc.value,
                Goal::TotalOpinion { .. } => bound <= inc.value + TOL,
            },
        }
    }

    /// Depth-first branch and bound over the indicators, `z = 1` child first.
    /// Returns the best incumbent and whether the tree was exhausted.
    fn search(
        &self,
        goal: Goal,
        mut incumbent: Option<Incumbent>,
        node_limit: usize,
        nodes: &mut usize,
    ) -> Result<(Option<Incumbent>, bool), MilpError> {
        let np = self.num_payments();
        let mut stack = vec![vec![None; self.num_agents()]];
        while let Some(fixed) = stack.pop() {
            if *nodes >= node_limit {
                return Ok((incumbent, false));
            }
            *nodes += 1;
            let relaxed = solve_lp(&self.relaxation(goal, &fixed))?;
            match relaxed.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => continue,
                LpStatus::Unbounded => unreachable!("every variable is boxed"),
            }
            let payments: Vec<f64> = relaxed.x[..np]
                .iter()
                .zip(&self.caps)
                .map(|(p, cap)| p.clamp(0.0, *cap))
                .collect();
            // Any relaxed payment vector is a feasible plan.
            if let Some(value) = self.evaluate(goal, &payments) {
                if Self::improves(goal, value, &incumbent) {
                    incumbent = Some(Incumbent { value, payments });
                }
            }
            let bound = match goal {
                Goal::Supporters => relaxed.objective,
                Goal::TotalOpinion { .. } => relaxed.objective + self.base.iter().sum::<f64>(),
            };
            if Self::prunable(goal, bound, &incumbent) {
                continue;
            }
            let branch = relaxed.x[np..]
                .iter()
                .enumerate()
                .filter(|&(i, _)| fixed[i].is_none())
                .map(|(i, &z)| (i, z.min(1.0 - z)))
                .filter(|&(_, frac)| frac > INTEGRALITY_TOL)
                .fold(None, |best: Option<(usize, f64)>, (i, frac)| match best {
                    Some((_, b)) if b >= frac => best,
                    _ => Some((i, frac)),
                });
            let Some((var, _)) = branch else {
                continue;
            };
            let mut down = fixed.clone();
            down[var] = Some(false);
            let mut up = fixed;
            up[var] = Some(true);
            stack.push(down);
            stack.push(up);
        }
        Ok((incumbent, true))
    }

    fn expand(&self, payments: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.num_agents()];
        for (r, &j) in self.recurrent.iter().enumerate() {
            full[j] = payments[r];
        }
        full
    }
}

pub fn solve_milp(milp: &MilpInstance, options: &MilpOptions) -> Result<MilpSolution, MilpError> {
    let mut nodes = 0;
    let zero = vec![0.0; milp.num_payments()];
    let start = Incumbent {
        value: milp.count_supporters(&zero) as f64,
        payments: zero,
    };
    let (best, exhausted) = milp.search(
        Goal::Supporters,
        Some(start),
        options.node_limit,
        &mut nodes,
    )?;
    let best = best.expect("seeded with the zero plan");
    let count = best.value.round() as usize;

    let goal = Goal::TotalOpinion {
        min_supporters: count,
    };
    let seed = Incumbent {
        value: milp.total_opinion(&best.payments),
        payments: best.payments,
    };
    let (refined, refined_exhausted) =
        milp.search(goal, Some(seed), options.node_limit, &mut nodes)?;
    let refined = refined.expect("seeded with the first-pass plan");

    let optimality = if exhausted && refined_exhausted {
        Optimality::Proven
    } else {
        Optimality::Heuristic
    };
    Ok(MilpSolution::from_payments(
        milp.instance,
        milp.analysis,
        milp.expand(&refined.payments),
        optimality,
        nodes,
        Method::BranchAndBound,
    ))
}

/// Full pipeline for one budget: trivial plan when every agent already
/// supports, otherwise branch and bound.
pub fn maximize_supporters(
    instance: &Instance,
    analysis: &ChainAnalysis,
    options: &MilpOptions,
) -> Result<MilpSolution, MilpError> {
    match build_milp(instance, analysis) {
        Ok(milp) => solve_milp(&milp, options),
        Err(MilpError::DegenerateL { .. }) => Ok(MilpSolution::trivial(instance, analysis)),
        Err(e) => Err(e),
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(current.clone());
        let Some(pos) = (0..k).rev().find(|&p| current[p] < n - k + p) else {
            return out;
        };
        current[pos] += 1;
        for q in pos + 1..k {
            current[q] = current[q - 1] + 1;
        }
    }
}

/// Rows `x_i(+∞) ≥ x*` for every `i` in `set`, payment caps, and optionally
/// the budget.
fn subset_program(
    milp: &MilpInstance,
    set: &[usize],
    objective: Vec<f64>,
    budget: Option<f64>,
) -> LinearProgram {
    let np = milp.num_payments();
    let mut lp = LinearProgram::maximize(objective);
    for &i in set {
        lp.constrain(
            milp.effect[i].clone(),
            Sense::Ge,
            milp.threshold - milp.base[i],
        );
    }
    if let Some(b) = budget {
        lp.constrain(vec![1.0; np], Sense::Le, b);
    }
    for r in 0..np {
        lp.bound(r, 0.0, milp.caps[r]);
    }
    lp
}

/// Exhaustive check over supporter sets, largest first.
///
/// A set is achievable when the cheapest payments lifting all of its members
/// to the threshold fit the budget. Among achievable sets of the largest
/// size, the one admitting the highest total asymptotic opinion wins
/// (first in lexicographic order on ties).
pub fn brute_force_oracle(
    instance: &Instance,
    analysis: &ChainAnalysis,
    budget: f64,
    exec: Execution,
) -> Result<MilpSolution, MilpError> {
    let n = instance.len();
    if n > ORACLE_MAX_AGENTS {
        return Err(MilpError::TooLarge(n));
    }
    let instance = &instance
        .with_budget(budget)
        .expect("budget checked by caller");
    let milp = match build_milp(instance, analysis) {
        Ok(m) => m,
        Err(MilpError::DegenerateL { .. }) => {
            let mut s = MilpSolution::trivial(instance, analysis);
            s.method = Method::BruteForce;
            return Ok(s);
        }
        Err(e) => return Err(e),
    };
    let np = milp.num_payments();
    let weights = milp.opinion_weights();

    for size in (0..=n).rev() {
        let sets = combinations(n, size);
        let cheapest = exec.map(&sets, |set| {
            let lp = subset_program(&milp, set, vec![-1.0; np], None);
            solve_lp(&lp).map(|r| match r.status {
                LpStatus::Optimal if -r.objective <= budget + 1e-7 => Some(-r.objective),
                _ => None,
            })
        });
        let achievable: Vec<Vec<usize>> = sets
            .into_iter()
            .zip(cheapest)
            .map(|(s, c)| c.map(|c| c.map(|_| s)))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .flatten()
            .collect();
        if achievable.is_empty() {
            continue;
        }
        let best = exec.map(&achievable, |set| {
            let lp = subset_program(&milp, set, weights.clone(), Some(budget));
            solve_lp(&lp).map(|r| (r.status == LpStatus::Optimal).then_some(r))
        });
        let mut winner: Option<(f64, Vec<f64>)> = None;
        for r in best {
            let Some(r) = r? else { continue };
            if winner.as_ref().is_none_or(|(v, _)| r.objective > v + TOL) {
                winner = Some((r.objective, r.x));
            }
        }
        let Some((_, payments)) = winner else {
            continue;
        };
        let payments: Vec<f64> = payments
            .iter()
            .zip(&milp.caps)
            .map(|(p, cap)| p.clamp(0.0, *cap))
            .collect();
        return Ok(MilpSolution::from_payments(
            instance,
            analysis,
            milp.expand(&payments),
            Optimality::Proven,
            0,
            Method::BruteForce,
        ));
    }
    unreachable!("the empty set is always achievable")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub budget: f64,
    pub solution: MilpSolution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCurve {
    pub points: Vec<SweepPoint>,
}

impl SweepCurve {
    pub fn supporter_counts(&self) -> Vec<usize> {
        self.points
            .iter()
            .map(|p| p.solution.supporter_count)
            .collect()
    }
}

/// Solves every budget independently; points come back in input order.
pub fn budget_sweep(
    instance: &Instance,
    analysis: &ChainAnalysis,
    budgets: &[f64],
    options: &MilpOptions,
    exec: Execution,
) -> Result<SweepCurve, MilpError> {
    if budgets.windows(2).any(|w| w[0] > w[1]) {
        return Err(MilpError::UnsortedBudgets);
    }
    let solved = exec.map(budgets, |&budget| {
        let at = instance
            .with_budget(budget)
            .expect("budgets are validated by the caller");
        maximize_supporters(&at, analysis, options).map(|solution| SweepPoint { budget, solution })
    });
    Ok(SweepCurve {
        points: solved.into_iter().collect::<Result<_, _>>()?,
    })
}

/// True when a plan honours the budget and every payment cap.
pub fn plan_is_feasible(instance: &Instance, plan: &PaymentPlan) -> bool {
    plan.total_spend <= instance.budget() + BUDGET_TOL
        && plan
            .payments
            .iter()
            .enumerate()
            .all(|(i, &p)| p >= 0.0 && p <= instance.payment_cap(i) + TOL)
}

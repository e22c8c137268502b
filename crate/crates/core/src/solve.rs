//! End-to-end solving: pick knapsack or MILP mode and produce a plan.

use thiserror::Error;

use crate::chain::{ChainAnalysis, ChainError};
use crate::class_budget::{min_budget_for_class, ClassBudgetError, ClassBudgetResult};
use crate::decompose::decompose;
use crate::knapsack::{knapsack_exact, knapsack_fptas, KnapsackItem, KnapsackSolution};
use crate::milp::{maximize_supporters, Method, MilpError, MilpOptions, MilpSolution, Optimality};
use crate::model::{confidence_matrix, Instance};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Mode {
    /// Knapsack when there are no transient agents, MILP otherwise.
    #[default]
    Auto,
    Knapsack,
    Milp,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveOptions {
    pub mode: Mode,
    /// Use the FPTAS with this ε instead of the exact knapsack DP.
    pub epsilon: Option<f64>,
    pub milp: MilpOptions,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("knapsack mode needs an instance without transient agents ({0} found); use MILP mode")]
    TransientsPresent(usize),
    #[error("epsilon {0} must lie in (0, 1)")]
    BadEpsilon(f64),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    ClassBudget(#[from] ClassBudgetError),
    #[error(transparent)]
    Milp(#[from] MilpError),
}

/// Decompose and analyze the chain of an instance.
pub fn analyze(instance: &Instance) -> Result<ChainAnalysis, ChainError> {
    let matrix = confidence_matrix(instance);
    let decomposition = decompose(&matrix);
    ChainAnalysis::new(&matrix, decomposition)
}

/// Cheapest plan lifting class `k` to the threshold, over the class members.
pub fn class_budget(
    instance: &Instance,
    analysis: &ChainAnalysis,
    k: usize,
) -> Result<ClassBudgetResult, ClassBudgetError> {
    let members = &analysis.decomposition.classes[k];
    let opinions: Vec<f64> = members
        .iter()
        .map(|&j| instance.true_opinions()[j])
        .collect();
    let costs: Vec<f64> = members.iter().map(|&j| instance.costs()[j]).collect();
    min_budget_for_class(&analysis.pi[k], &opinions, &costs, instance.threshold())
}

/// Knapsack over ergodic classes. Only exact when nothing is transient.
pub fn solve_knapsack(
    instance: &Instance,
    analysis: &ChainAnalysis,
    epsilon: Option<f64>,
) -> Result<(MilpSolution, KnapsackSolution), SolveError> {
    let transients = analysis.decomposition.transient.len();
    if transients > 0 {
        return Err(SolveError::TransientsPresent(transients));
    }
    let per_class = (0..analysis.num_classes())
        .map(|k| class_budget(instance, analysis, k))
        .collect::<Result<Vec<_>, _>>()?;
    let items: Vec<KnapsackItem> = per_class
        .iter()
        .enumerate()
        .map(|(k, r)| KnapsackItem {
            class_index: k,
            value: analysis.decomposition.classes[k].len() as u64,
            weight: r.total,
        })
        .collect();
    let (chosen, method, optimality) = match epsilon {
        None => (
            knapsack_exact(&items, instance.budget()),
            Method::KnapsackExact,
            Optimality::Proven,
        ),
        Some(eps) => {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(SolveError::BadEpsilon(eps));
            }
            (
                knapsack_fptas(&items, instance.budget(), eps),
                Method::KnapsackFptas,
                Optimality::Heuristic,
            )
        }
    };
    let mut payments = vec![0.0; instance.len()];
    for &k in &chosen.selected {
        for (r, &j) in analysis.decomposition.classes[k].iter().enumerate() {
            payments[j] = per_class[k].payments[r];
        }
    }
    let solution = MilpSolution::from_payments(instance, analysis, payments, optimality, 0, method);
    Ok((solution, chosen))
}

pub fn solve(
    instance: &Instance,
    analysis: &ChainAnalysis,
    options: &SolveOptions,
) -> Result<MilpSolution, SolveError> {
    let use_knapsack = match options.mode {
        Mode::Knapsack => true,
        Mode::Milp => false,
        Mode::Auto => !analysis.decomposition.has_transients(),
    };
    if use_knapsack {
        Ok(solve_knapsack(instance, analysis, options.epsilon)?.0)
    } else {
        Ok(maximize_supporters(instance, analysis, &options.milp)?)
    }
}

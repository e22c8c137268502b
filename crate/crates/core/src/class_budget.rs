//! Cheapest way to lift one ergodic class's consensus to a target.
//!
//! Members are funded in decreasing order of influence per dollar
//! (`π_j / c_j`). Everyone ahead of the critical member is paid up to
//! opinion 1, the critical member gets exactly what closes the gap, and the
//! rest get nothing.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassBudgetError {
    #[error("target consensus {0} exceeds 1")]
    InfeasibleThreshold(f64),
    #[error("target consensus {target} outside [{low}, 1]")]
    TargetOutOfRange { target: f64, low: f64 },
}

/// Payments are listed in class-member order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassBudgetResult {
    pub payments: Vec<f64>,
    /// Position (within the class) of the member receiving the partial top-up.
    pub critical_item: Option<usize>,
    pub total: f64,
    pub feasible: bool,
}

/// Member positions sorted by `π_j / c_j` descending, ties by position.
///
/// Compares cross-products so the order does not depend on division noise.
pub fn funding_order(pi: &[f64], costs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pi.len()).collect();
    order.sort_by(|&a, &b| {
        let lhs = pi[a] * costs[b];
        let rhs = pi[b] * costs[a];
        rhs.partial_cmp(&lhs)
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

pub fn min_budget_for_class(
    pi: &[f64],
    opinions: &[f64],
    costs: &[f64],
    target: f64,
) -> Result<ClassBudgetResult, ClassBudgetError> {
    if target > 1.0 {
        return Err(ClassBudgetError::InfeasibleThreshold(target));
    }
    let n = pi.len();
    let mut payments = vec![0.0; n];
    let current: f64 = pi.iter().zip(opinions).map(|(p, x)| p * x).sum();
    if current >= target {
        return Ok(ClassBudgetResult {
            payments,
            critical_item: None,
            total: 0.0,
            feasible: true,
        });
    }

    let mut gap = target - current;
    let mut critical_item = None;
    for j in funding_order(pi, costs) {
        let cap = costs[j] * (1.0 - opinions[j]);
        let gain = pi[j] * (1.0 - opinions[j]);
        // Rounding can leave a few ulps of gap after the last member at target 1.
        if gain >= gap - 1e-12 {
            payments[j] = (costs[j] * gap / pi[j]).min(cap);
            critical_item = Some(j);
            break;
        }
        payments[j] = cap;
        gap -= gain;
    }
    if critical_item.is_none() {
        return Err(ClassBudgetError::InfeasibleThreshold(target));
    }
    Ok(ClassBudgetResult {
        total: payments.iter().sum(),
        payments,
        critical_item,
        feasible: true,
    })
}

/// Minimum spend to reach each target consensus. Convex and nondecreasing
/// in the target.
pub fn class_cost_curve(
    pi: &[f64],
    opinions: &[f64],
    costs: &[f64],
    targets: &[f64],
) -> Result<Vec<f64>, ClassBudgetError> {
    let low: f64 = pi.iter().zip(opinions).map(|(p, x)| p * x).sum();
    targets
        .iter()
        .map(|&t| {
            if t < low - 1e-12 || t > 1.0 + 1e-12 {
                return Err(ClassBudgetError::TargetOutOfRange { target: t, low });
            }
            min_budget_for_class(pi, opinions, costs, t.min(1.0)).map(|r| r.total)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI2: [f64; 4] = [5.0 / 39.0, 20.0 / 39.0, 10.0 / 39.0, 4.0 / 39.0];
    const X2: [f64; 4] = [0.8, 0.1, 0.2, 0.4];
    const C2: [f64; 4] = [600.0, 200.0, 900.0, 700.0];

    #[test]
    fn second_class_pays_only_j() {
        let r = min_budget_for_class(&PI2, &X2, &C2, 0.5).unwrap();
        assert_eq!(r.critical_item, Some(1));
        assert!((r.payments[1] - 99.0).abs() < 1e-9);
        assert_eq!(r.payments[0], 0.0);
        assert_eq!(r.payments[2], 0.0);
        assert!((r.total - 99.0).abs() < 1e-9);
    }

    #[test]
    fn first_class_pays_only_a() {
        let pi = [20.0 / 47.0, 15.0 / 47.0, 12.0 / 47.0];
        let r = min_budget_for_class(&pi, &[0.5, 0.3, 0.4], &[1000.0, 800.0, 1200.0], 0.5).unwrap();
        assert_eq!(r.critical_item, Some(0));
        assert!((r.total - 210.0).abs() < 1e-9);
    }

    #[test]
    fn satisfied_class_costs_nothing() {
        let r = min_budget_for_class(&PI2, &X2, &C2, 0.2).unwrap();
        assert_eq!(r.total, 0.0);
        assert_eq!(r.critical_item, None);
    }

    #[test]
    fn threshold_above_one_is_rejected() {
        assert!(matches!(
            min_budget_for_class(&PI2, &X2, &C2, 1.01),
            Err(ClassBudgetError::InfeasibleThreshold(_))
        ));
    }

    #[test]
    fn cost_curve_endpoints() {
        let low: f64 = PI2.iter().zip(X2).map(|(p, x)| p * x).sum();
        let curve = class_cost_curve(&PI2, &X2, &C2, &[low, 0.5, 1.0]).unwrap();
        assert_eq!(curve[0], 0.0);
        assert!((curve[1] - 99.0).abs() < 1e-9);
        // 600·0.2 + 200·0.9 + 900·0.8 + 700·0.6
        assert!((curve[2] - 1440.0).abs() < 1e-9);
        assert!(class_cost_curve(&PI2, &X2, &C2, &[0.1]).is_err());
    }

    #[test]
    fn tie_keeps_index_order() {
        assert_eq!(funding_order(&[0.5, 0.5], &[2.0, 2.0]), vec![0, 1]);
        assert_eq!(funding_order(&[0.2, 0.8], &[1.0, 1.0]), vec![1, 0]);
    }
}

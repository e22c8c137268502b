//! 0-1 knapsack over ergodic classes: value is the class size, weight its
//! price tag. Weights are real dollars, so the DP runs over values.

use serde::Serialize;

/// Budget slack when deciding whether a selection fits.
const FIT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KnapsackItem {
    pub class_index: usize,
    pub value: u64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnapsackSolution {
    /// Class indices of the chosen items, ascending item order.
    pub selected: Vec<usize>,
    pub total_value: u64,
    pub total_weight: f64,
}

impl KnapsackSolution {
    fn from_picks(items: &[KnapsackItem], picks: &[usize]) -> KnapsackSolution {
        KnapsackSolution {
            selected: picks.iter().map(|&i| items[i].class_index).collect(),
            total_value: picks.iter().map(|&i| items[i].value).sum(),
            total_weight: picks.iter().map(|&i| items[i].weight).sum(),
        }
    }
}

/// `suffix[i][v]`: least weight reaching value exactly `v` with items `i..`.
fn suffix_table(values: &[u64], weights: &[f64]) -> Vec<Vec<f64>> {
    let n = values.len();
    let cap: usize = values.iter().sum::<u64>() as usize;
    let mut table = vec![vec![f64::INFINITY; cap + 1]; n + 1];
    table[n][0] = 0.0;
    for i in (0..n).rev() {
        let (upper, lower) = table.split_at_mut(i + 1);
        let (row, next) = (&mut upper[i], &lower[0]);
        row.copy_from_slice(next);
        let v = values[i] as usize;
        for total in v..=cap {
            let with = next[total - v] + weights[i];
            if with < row[total] {
                row[total] = with;
            }
        }
    }
    table
}

/// Best value within `budget`, least weight among those, then the
/// lexicographically smallest set of item positions.
fn solve_by_value(values: &[u64], weights: &[f64], budget: f64) -> Vec<usize> {
    let table = suffix_table(values, weights);
    let limit = budget + FIT_TOL;
    let Some(best) = (0..table[0].len()).rev().find(|&v| table[0][v] <= limit) else {
        return Vec::new();
    };
    let mut remaining_value = best;
    let mut remaining_weight = table[0][best];
    let mut picks = Vec::new();
    for i in 0..values.len() {
        let v = values[i] as usize;
        if v <= remaining_value {
            let rest = table[i + 1][remaining_value - v];
            let with = rest + weights[i];
            if rest.is_finite() && with <= remaining_weight + 1e-9 * (1.0 + remaining_weight) {
                picks.push(i);
                remaining_value -= v;
                remaining_weight = rest;
            }
        }
    }
    picks
}

pub fn knapsack_exact(items: &[KnapsackItem], budget: f64) -> KnapsackSolution {
    let values: Vec<u64> = items.iter().map(|it| it.value).collect();
    let weights: Vec<f64> = items.iter().map(|it| it.weight).collect();
    let picks = solve_by_value(&values, &weights, budget);
    KnapsackSolution::from_picks(items, &picks)
}

/// Value-scaling approximation: total value is at least `(1 - ε)·OPT`.
///
/// Values are truncated to `⌊v / K⌋` with `K = ε·v_max / m`, where `v_max` is
/// the largest value among items that fit on their own.
pub fn knapsack_fptas(items: &[KnapsackItem], budget: f64, epsilon: f64) -> KnapsackSolution {
    assert!(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
    let limit = budget + FIT_TOL;
    let fitting: Vec<usize> = (0..items.len())
        .filter(|&i| items[i].weight <= limit)
        .collect();
    let Some(v_max) = fitting.iter().map(|&i| items[i].value).max() else {
        return KnapsackSolution::from_picks(items, &[]);
    };
    let scale = epsilon * v_max as f64 / fitting.len() as f64;
    let scaled: Vec<u64> = if scale <= 1.0 {
        fitting.iter().map(|&i| items[i].value).collect()
    } else {
        fitting
            .iter()
            .map(|&i| (items[i].value as f64 / scale).floor() as u64)
            .collect()
    };
    let weights: Vec<f64> = fitting.iter().map(|&i| items[i].weight).collect();
    let picks: Vec<usize> = solve_by_value(&scaled, &weights, budget)
        .into_iter()
        .map(|p| fitting[p])
        .collect();
    KnapsackSolution::from_picks(items, &picks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked_items() -> Vec<KnapsackItem> {
        vec![
            KnapsackItem {
                class_index: 0,
                value: 3,
                weight: 210.0,
            },
            KnapsackItem {
                class_index: 1,
                value: 4,
                weight: 99.0,
            },
        ]
    }

    #[test]
    fn both_classes_fit_at_309() {
        let s = knapsack_exact(&worked_items(), 309.0);
        assert_eq!(s.selected, vec![0, 1]);
        assert_eq!(s.total_value, 7);
    }

    #[test]
    fn only_second_class_at_99() {
        let s = knapsack_exact(&worked_items(), 99.0);
        assert_eq!(s.selected, vec![1]);
        assert_eq!(s.total_value, 4);
    }

    #[test]
    fn zero_budget_selects_nothing() {
        let s = knapsack_exact(&worked_items(), 0.0);
        assert!(s.selected.is_empty());
        assert_eq!(s.total_value, 0);
    }

    #[test]
    fn free_items_are_taken() {
        let items = [KnapsackItem {
            class_index: 5,
            value: 2,
            weight: 0.0,
        }];
        assert_eq!(knapsack_exact(&items, 0.0).selected, vec![5]);
    }

    #[test]
    fn fptas_is_exact_on_tiny_instances() {
        assert_eq!(knapsack_fptas(&worked_items(), 309.0, 0.1).total_value, 7);
        let single = [KnapsackItem {
            class_index: 0,
            value: 9,
            weight: 5.0,
        }];
        for eps in [0.01, 0.5, 0.99] {
            assert_eq!(knapsack_fptas(&single, 5.0, eps).selected, vec![0]);
        }
    }

    #[test]
    fn equal_value_prefers_lighter_then_earlier() {
        let items = [
            KnapsackItem {
                class_index: 0,
                value: 2,
                weight: 5.0,
            },
            KnapsackItem {
                class_index: 1,
                value: 2,
                weight: 3.0,
            },
            KnapsackItem {
                class_index: 2,
                value: 2,
                weight: 3.0,
            },
        ];
        assert_eq!(knapsack_exact(&items, 5.0).selected, vec![1]);
    }
}

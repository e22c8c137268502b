#![allow(dead_code)]

use std::path::PathBuf;

use obo::model::{self, Instance};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn worked_instance() -> Instance {
    model::load_instance(fixture("worked_example.json")).expect("fixture loads")
}

pub fn agent_ids(instance: &Instance, ids: &[usize]) -> Vec<String> {
    ids.iter().map(|&i| instance.agents()[i].clone()).collect()
}

pub fn ids_of(instance: &Instance, names: &str) -> Vec<usize> {
    names
        .chars()
        .map(|c| instance.index_of(&c.to_string()).unwrap())
        .collect()
}

/// Minimum of `Σ p_j` subject to `Σ π_j (x_j + p_j / c_j) ≥ target` and
/// `0 ≤ p_j ≤ c_j (1 - x_j)`, by enumerating basic solutions: every member is
/// at zero or at its cap except at most one, which closes the gap exactly.
pub fn class_budget_by_enumeration(pi: &[f64], x: &[f64], c: &[f64], target: f64) -> f64 {
    let n = pi.len();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        let at_cap = |j: usize| mask & (1 << j) != 0;
        let spend: f64 = (0..n)
            .filter(|&j| at_cap(j))
            .map(|j| c[j] * (1.0 - x[j]))
            .sum();
        let reached: f64 = (0..n)
            .map(|j| pi[j] * if at_cap(j) { 1.0 } else { x[j] })
            .sum();
        if reached >= target - 1e-12 {
            best = best.min(spend);
            continue;
        }
        for s in (0..n).filter(|&j| !at_cap(j)) {
            let dp = c[s] * (target - reached) / pi[s];
            if dp <= c[s] * (1.0 - x[s]) + 1e-12 {
                best = best.min(spend + dp);
            }
        }
    }
    best
}

/// Best value over all subsets of `(value, weight)` items fitting `budget`.
pub fn knapsack_by_enumeration(items: &[(u64, f64)], budget: f64) -> u64 {
    let n = items.len();
    (0u32..(1 << n))
        .filter_map(|mask| {
            let (v, w) = (0..n)
                .filter(|&i| mask & (1 << i) != 0)
                .fold((0, 0.0), |(v, w), i| (v + items[i].0, w + items[i].1));
            (w <= budget + 1e-7).then_some(v)
        })
        .max()
        .unwrap_or(0)
}

/// Solve a small dense system by Gaussian elimination with partial pivoting.
fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for (r, row) in rest.iter_mut().enumerate() {
            let f = row[col] / pivot_row[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[col + 1 + r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Optimum of `max cᵀx, A x ≤ b, 0 ≤ x ≤ u` by enumerating every vertex
/// (n tight constraints out of the rows and the 2n bounds).
pub fn lp_by_vertex_enumeration(c: &[f64], a: &[Vec<f64>], b: &[f64], u: &[f64]) -> Option<f64> {
    let n = c.len();
    let mut hyperplanes: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().copied()).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        hyperplanes.push((e.clone(), 0.0));
        hyperplanes.push((e, u[j]));
    }
    let total = hyperplanes.len();
    let mut best: Option<f64> = None;
    let mut pick: Vec<usize> = (0..n).collect();
    loop {
        let rows: Vec<Vec<f64>> = pick.iter().map(|&h| hyperplanes[h].0.clone()).collect();
        let rhs: Vec<f64> = pick.iter().map(|&h| hyperplanes[h].1).collect();
        if let Some(x) = gauss(rows, rhs) {
            let feasible = x
                .iter()
                .zip(u)
                .all(|(v, ub)| *v >= -1e-9 && *v <= ub + 1e-9)
                && a.iter().zip(b).all(|(row, bi)| {
                    row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= bi + 1e-9
                });
            if feasible {
                let obj: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
                best = Some(best.map_or(obj, |b: f64| b.max(obj)));
            }
        }
        let Some(pos) = (0..n).rev().find(|&p| pick[p] < total - n + p) else {
            return best;
        };
        pick[pos] += 1;
        for q in pos + 1..n {
            pick[q] = pick[q - 1] + 1;
        }
    }
}

/// Textbook weight-indexed 0/1 knapsack for integer weights.
pub fn knapsack_by_weight_dp(items: &[(u64, u64)], capacity: u64) -> u64 {
    let cap = capacity as usize;
    let mut best = vec![0u64; cap + 1];
    for &(v, w) in items {
        let w = w as usize;
        for c in (w..=cap).rev() {
            best[c] = best[c].max(best[c - w] + v);
        }
    }
    best[cap]
}

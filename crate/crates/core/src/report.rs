//! JSON and CSV renderings of results. Reals are rounded to 12 significant
//! digits so repeated runs produce byte-identical files.

use serde_json::{json, Map, Value};

use crate::chain::ChainAnalysis;
use crate::class_budget::ClassBudgetResult;
use crate::decompose::Decomposition;
use crate::milp::{MilpSolution, SweepCurve};
use crate::model::Instance;

pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn num(x: f64) -> Value {
    json!(round_sig(x))
}

/// Integral values print without a fractional part.
pub fn fmt_real(x: f64) -> String {
    let r = round_sig(x);
    if r.fract() == 0.0 && r.abs() < 1e15 {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

fn names(instance: &Instance, ids: &[usize]) -> Value {
    ids.iter()
        .map(|&i| Value::String(instance.agents()[i].clone()))
        .collect()
}

fn per_agent(instance: &Instance, ids: &[usize], values: &[f64]) -> Value {
    let mut map = Map::new();
    for (&i, &v) in ids.iter().zip(values) {
        map.insert(instance.agents()[i].clone(), num(v));
    }
    Value::Object(map)
}

fn all_agents(instance: &Instance, values: &[f64]) -> Value {
    let ids: Vec<usize> = (0..instance.len()).collect();
    per_agent(instance, &ids, values)
}

pub fn decomposition_json(instance: &Instance, d: &Decomposition) -> Value {
    json!({
        "transient": names(instance, &d.transient),
        "classes": d.classes.iter().map(|c| names(instance, c)).collect::<Vec<_>>(),
    })
}

/// Structure plus the zero-payment forecast.
pub fn analysis_json(instance: &Instance, analysis: &ChainAnalysis) -> Value {
    let d = &analysis.decomposition;
    let opinions = instance.true_opinions();
    let consensus = analysis.consensus_opinions(opinions);
    let asymptotic = analysis.asymptotic_opinions(opinions);
    let classes: Vec<Value> = d
        .classes
        .iter()
        .enumerate()
        .map(|(k, members)| {
            json!({
                "members": names(instance, members),
                "pi": per_agent(instance, members, &analysis.pi[k]),
                "hitting": all_agents(instance, &analysis.hitting[k]),
                "consensus": num(consensus[k]),
            })
        })
        .collect();
    json!({
        "transient": names(instance, &d.transient),
        "classes": classes,
        "asymptotic": all_agents(instance, &asymptotic),
        "lower_bound": num(asymptotic.iter().copied().fold(f64::INFINITY, f64::min)),
    })
}

pub fn class_budget_json(
    instance: &Instance,
    members: &[usize],
    class: usize,
    result: &ClassBudgetResult,
) -> Value {
    json!({
        "class": class,
        "members": names(instance, members),
        "payments": per_agent(instance, members, &result.payments),
        "critical_item": result.critical_item.map(|r| instance.agents()[members[r]].clone()),
        "total": num(result.total),
        "feasible": result.feasible,
    })
}

pub fn solution_json(instance: &Instance, s: &MilpSolution) -> Value {
    json!({
        "payments": all_agents(instance, &s.plan.payments),
        "supporters": names(instance, &s.plan.supporters),
        "total_spend": num(s.plan.total_spend),
        "supporter_count": s.supporter_count,
        "optimality": s.optimality,
        "node_count": s.node_count,
        "method": s.method,
    })
}

pub fn sweep_json(instance: &Instance, curve: &SweepCurve) -> Value {
    let points: Vec<Value> = curve
        .points
        .iter()
        .map(|p| {
            let mut v = solution_json(instance, &p.solution);
            v.as_object_mut()
                .expect("object")
                .shift_insert(0, "budget".into(), num(p.budget));
            v
        })
        .collect();
    json!({ "points": points })
}

pub const CSV_HEADER: &str = "budget,supporters,total_spend";

pub fn csv_row(budget: f64, s: &MilpSolution) -> String {
    format!(
        "{},{},{}",
        fmt_real(budget),
        s.supporter_count,
        fmt_real(s.plan.total_spend)
    )
}

pub fn sweep_csv(curve: &SweepCurve) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in &curve.points {
        out.push_str(&csv_row(p.budget, &p.solution));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(98.99999999999997), 99.0);
        assert_eq!(fmt_real(0.0), "0");
        assert_eq!(fmt_real(113.35), "113.35");
        assert_eq!(fmt_real(309.00000000000006), "309");
    }
}

//! Problem instances, the confidence matrix and payment plans.
//!
//! Costs are stored in dollars per full unit of opinion, so that an agent
//! paid `p` dollars expresses `true_opinion + p / cost`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance used when comparing against constraints.
pub const TOL: f64 = 1e-9;

/// Slack allowed on the budget constraint of a returned plan.
pub const BUDGET_TOL: f64 = 1e-6;

/// One violated instance constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Violation {
    /// Agent has no outgoing weight, so its row cannot be normalized.
    NonStochasticRow {
        agent: String,
    },
    NoSelfConfidence {
        agent: String,
    },
    OpinionOutOfRange {
        agent: String,
        value: f64,
    },
    NonpositiveCost {
        agent: String,
        value: f64,
    },
    NegativeWeight {
        from: String,
        to: String,
        value: f64,
    },
    NegativeBudget {
        value: f64,
    },
    ThresholdOutOfRange {
        value: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonStochasticRow { agent } => {
                write!(f, "agent {agent} has no outgoing confidence weight")
            }
            Violation::NoSelfConfidence { agent } => {
                write!(f, "agent {agent} has zero self-confidence")
            }
            Violation::OpinionOutOfRange { agent, value } => {
                write!(f, "opinion {value} of agent {agent} is outside [0, 1]")
            }
            Violation::NonpositiveCost { agent, value } => {
                write!(f, "cost {value} of agent {agent} is not strictly positive")
            }
            Violation::NegativeWeight { from, to, value } => {
                write!(f, "edge {from} -> {to} has negative weight {value}")
            }
            Violation::NegativeBudget { value } => write!(f, "budget {value} is negative"),
            Violation::ThresholdOutOfRange { value } => {
                write!(f, "threshold {value} is outside (0, 1]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid instance: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct ValidationError(pub Vec<Violation>);

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("parse error in field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

/// How the `costs` array of an instance file is denominated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostUnit {
    /// Dollars per full unit of opinion.
    #[default]
    #[serde(rename = "per_unit")]
    PerUnit,
    /// Dollars per +0.1 of opinion; multiplied by 10 on ingest.
    #[serde(rename = "per_0.1")]
    PerTenth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawEdge {
    pub from: String,
    pub to: String,
    pub w: f64,
}

/// Instance file contents before any checking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawInstance {
    pub agents: Vec<String>,
    pub edges: Vec<RawEdge>,
    pub opinions: Vec<f64>,
    pub costs: Vec<f64>,
    #[serde(default)]
    pub cost_unit: CostUnit,
    pub threshold: f64,
    pub budget: f64,
}

/// A validated problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    agents: Vec<String>,
    weights: BTreeMap<(usize, usize), f64>,
    true_opinions: Vec<f64>,
    costs: Vec<f64>,
    threshold: f64,
    budget: f64,
}

impl Instance {
    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    /// Nonzero confidence weights keyed by `(from, to)`.
    pub fn weights(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.weights
    }

    pub fn true_opinions(&self) -> &[f64] {
        &self.true_opinions
    }

    /// Dollars per full unit of opinion.
    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn with_budget(&self, budget: f64) -> Result<Instance, ValidationError> {
        if !budget.is_finite() || budget < 0.0 {
            return Err(ValidationError(vec![Violation::NegativeBudget {
                value: budget,
            }]));
        }
        Ok(Instance {
            budget,
            ..self.clone()
        })
    }

    pub fn index_of(&self, agent: &str) -> Option<usize> {
        self.agents.iter().position(|a| a == agent)
    }

    /// Largest payment agent `i` can absorb before its opinion reaches 1.
    pub fn payment_cap(&self, i: usize) -> f64 {
        self.costs[i] * (1.0 - self.true_opinions[i])
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            agents: self.agents.clone(),
            edges: self
                .weights
                .iter()
                .map(|(&(i, j), &w)| RawEdge {
                    from: self.agents[i].clone(),
                    to: self.agents[j].clone(),
                    w,
                })
                .collect(),
            opinions: self.true_opinions.clone(),
            costs: self.costs.clone(),
            cost_unit: CostUnit::PerUnit,
            threshold: self.threshold,
            budget: self.budget,
        }
    }
}

/// Structural problems with the raw data (reported as parse errors).
fn check_shape(raw: &RawInstance) -> Result<HashMap<&str, usize>, LoadError> {
    let field = |field: &str, message: String| LoadError::Field {
        field: field.to_string(),
        message,
    };
    if raw.agents.is_empty() {
        return Err(field("agents", "agent list is empty".into()));
    }
    let mut index = HashMap::with_capacity(raw.agents.len());
    for (i, a) in raw.agents.iter().enumerate() {
        if index.insert(a.as_str(), i).is_some() {
            return Err(field(
                &format!("agents[{i}]"),
                format!("duplicate agent id `{a}`"),
            ));
        }
    }
    let n = raw.agents.len();
    if raw.opinions.len() != n {
        return Err(field(
            "opinions",
            format!("expected {n} entries, found {}", raw.opinions.len()),
        ));
    }
    if raw.costs.len() != n {
        return Err(field(
            "costs",
            format!("expected {n} entries, found {}", raw.costs.len()),
        ));
    }
    let mut seen = HashMap::new();
    for (e, edge) in raw.edges.iter().enumerate() {
        for (end, name) in [("from", &edge.from), ("to", &edge.to)] {
            if !index.contains_key(name.as_str()) {
                return Err(field(
                    &format!("edges[{e}].{end}"),
                    format!("unknown agent `{name}`"),
                ));
            }
        }
        if !edge.w.is_finite() {
            return Err(field(
                &format!("edges[{e}].w"),
                "weight is not finite".into(),
            ));
        }
        if let Some(prev) = seen.insert((edge.from.as_str(), edge.to.as_str()), e) {
            return Err(field(
                &format!("edges[{e}]"),
                format!("duplicate of edges[{prev}] ({} -> {})", edge.from, edge.to),
            ));
        }
    }
    for (name, values) in [("opinions", &raw.opinions), ("costs", &raw.costs)] {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(field(&format!("{name}[{i}]"), "value is not finite".into()));
        }
    }
    Ok(index)
}

/// Check every instance constraint, collecting all violations.
pub fn validate(raw: &RawInstance) -> Result<Instance, LoadError> {
    let index = check_shape(raw)?;
    let n = raw.agents.len();
    let scale = match raw.cost_unit {
        CostUnit::PerUnit => 1.0,
        CostUnit::PerTenth => 10.0,
    };

    let mut violations = Vec::new();
    let mut weights = BTreeMap::new();
    for edge in &raw.edges {
        if edge.w < 0.0 {
            violations.push(Violation::NegativeWeight {
                from: edge.from.clone(),
                to: edge.to.clone(),
                value: edge.w,
            });
        } else if edge.w > 0.0 {
            weights.insert((index[edge.from.as_str()], index[edge.to.as_str()]), edge.w);
        }
    }
    let mut row_sum = vec![0.0; n];
    for (&(i, _), &w) in &weights {
        row_sum[i] += w;
    }
    for (i, (agent, &sum)) in raw.agents.iter().zip(&row_sum).enumerate() {
        if sum <= 0.0 {
            violations.push(Violation::NonStochasticRow {
                agent: agent.clone(),
            });
        }
        if !weights.contains_key(&(i, i)) {
            violations.push(Violation::NoSelfConfidence {
                agent: agent.clone(),
            });
        }
        let x = raw.opinions[i];
        if !(0.0..=1.0).contains(&x) {
            violations.push(Violation::OpinionOutOfRange {
                agent: agent.clone(),
                value: x,
            });
        }
        if raw.costs[i] <= 0.0 {
            violations.push(Violation::NonpositiveCost {
                agent: agent.clone(),
                value: raw.costs[i],
            });
        }
    }
    if !(raw.threshold > 0.0 && raw.threshold <= 1.0) {
        violations.push(Violation::ThresholdOutOfRange {
            value: raw.threshold,
        });
    }
    if !raw.budget.is_finite() || raw.budget < 0.0 {
        violations.push(Violation::NegativeBudget { value: raw.budget });
    }
    if !violations.is_empty() {
        return Err(ValidationError(violations).into());
    }

    Ok(Instance {
        agents: raw.agents.clone(),
        weights,
        true_opinions: raw.opinions.clone(),
        costs: raw.costs.iter().map(|c| c * scale).collect(),
        threshold: raw.threshold,
        budget: raw.budget,
    })
}

pub fn parse_instance(text: &str) -> Result<Instance, LoadError> {
    let raw: RawInstance = serde_json::from_str(text).map_err(|e| LoadError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    validate(&raw)
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, LoadError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_instance(&text)
}

pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(&instance.to_raw()).map_err(std::io::Error::other)?;
    fs::write(path, text + "\n")
}

/// Row-stochastic confidence matrix: `A[i][j] = w_ij / W_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceMatrix(DMatrix<f64>);

impl ConfidenceMatrix {
    /// Wrap a dense matrix that is already row-stochastic with positive diagonal.
    pub fn from_dense(m: DMatrix<f64>) -> Option<ConfidenceMatrix> {
        if !m.is_square() {
            return None;
        }
        for i in 0..m.nrows() {
            let row = m.row(i);
            if row.iter().any(|&v| v.is_nan() || v < 0.0) || m[(i, i)] <= 0.0 {
                return None;
            }
            if (row.sum() - 1.0).abs() > 1e-12 {
                return None;
            }
        }
        Some(ConfidenceMatrix(m))
    }

    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nrows() == 0
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// `x(t+1) = A x(t)`.
    pub fn step(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.0[(i, j)] * x[j]).sum())
            .collect()
    }
}

pub fn confidence_matrix(instance: &Instance) -> ConfidenceMatrix {
    let n = instance.len();
    let mut row_sum = vec![0.0; n];
    for (&(i, _), &w) in &instance.weights {
        row_sum[i] += w;
    }
    let mut m = DMatrix::zeros(n, n);
    for (&(i, j), &w) in &instance.weights {
        m[(i, j)] = w / row_sum[i];
    }
    ConfidenceMatrix(m)
}

/// Payments and what they buy.
#[derive(Debug, Clone, PartialEq)]
pub struct PaymentPlan {
    pub payments: Vec<f64>,
    pub expressed_opinions: Vec<f64>,
    pub supporters: Vec<usize>,
    pub total_spend: f64,
}

impl PaymentPlan {
    /// Builds the plan's expressed opinions; `supporters` must be filled in
    /// by the caller once asymptotic opinions are known.
    pub fn from_payments(instance: &Instance, payments: Vec<f64>) -> PaymentPlan {
        let expressed_opinions = expressed_opinions(instance, &payments);
        let total_spend = payments.iter().sum();
        PaymentPlan {
            payments,
            expressed_opinions,
            supporters: Vec::new(),
            total_spend,
        }
    }

    pub fn to_file(&self, instance: &Instance) -> PlanFile {
        PlanFile {
            payments: instance
                .agents()
                .iter()
                .cloned()
                .zip(self.payments.iter().copied())
                .collect(),
            supporters: self
                .supporters
                .iter()
                .map(|&i| instance.agents()[i].clone())
                .collect(),
            total_spend: self.total_spend,
        }
    }
}

/// `x_i(0) = x̂_i(0) + p_i / c_i`.
pub fn expressed_opinions(instance: &Instance, payments: &[f64]) -> Vec<f64> {
    instance
        .true_opinions
        .iter()
        .zip(&instance.costs)
        .zip(payments)
        .map(|((x, c), p)| x + p / c)
        .collect()
}

/// On-disk form of a [`PaymentPlan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub payments: IndexMap<String, f64>,
    pub supporters: Vec<String>,
    pub total_spend: f64,
}

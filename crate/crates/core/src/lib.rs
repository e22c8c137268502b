//! Budget-optimal opinion promotion on directed confidence networks.
//!
//! Agents repeatedly average the opinions of the agents they trust
//! (`x(t+1) = A x(t)`). Paying agent `i` the amount `p_i` shifts its starting
//! opinion by `p_i / c_i`. Given a budget, the goal is to maximize the number
//! of agents whose limiting opinion reaches a threshold.
//!
//! The pipeline is:
//!
//! 1. [`model`]: validate the instance and build the row-stochastic
//!    confidence matrix;
//! 2. [`decompose`]: split the equivalent Markov chain into transient agents
//!    and closed ergodic classes;
//! 3. [`chain`]: stationary distributions, hitting probabilities and the
//!    resulting limit opinions;
//! 4. either [`class_budget`] + [`knapsack`] (no transient agents) or
//!    [`milp`] on top of [`lp`] (general case).
//!
//! ```
//! use obo::{model, solve};
//!
//! let instance = model::parse_instance(r#"{
//!     "agents": ["a", "b"],
//!     "edges": [{"from": "a", "to": "a", "w": 1}, {"from": "b", "to": "b", "w": 1}],
//!     "opinions": [0.2, 0.4], "costs": [10, 10], "threshold": 0.5, "budget": 1.0
//! }"#).unwrap();
//! let analysis = solve::analyze(&instance).unwrap();
//! let best = solve::solve(&instance, &analysis, &Default::default()).unwrap();
//! assert_eq!(best.supporter_count, 1);
//! ```

pub mod chain;
pub mod class_budget;
pub mod decompose;
pub mod exec;
pub mod generate;
pub mod knapsack;
pub mod lp;
pub mod milp;
pub mod model;
pub mod report;
pub mod solve;

pub use chain::ChainAnalysis;
pub use decompose::Decomposition;
pub use exec::Execution;
pub use milp::{MilpSolution, SweepCurve};
pub use model::{ConfidenceMatrix, Instance, PaymentPlan};

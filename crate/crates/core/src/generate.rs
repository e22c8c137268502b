//! Seeded random instances for property tests and benchmarks.
//!
//! Every generated instance has strictly positive self-confidence, at least
//! one closed class, and transient agents that each point into some class,
//! so the structure the generator intends is the structure `decompose` finds.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{validate, CostUnit, Instance, RawEdge, RawInstance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shape {
    pub min_agents: usize,
    pub max_agents: usize,
    pub max_classes: usize,
    /// When false every agent is recurrent.
    pub transients: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            min_agents: 2,
            max_agents: 10,
            max_classes: 3,
            transients: true,
        }
    }
}

fn weight<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen_range(1..=20) as f64 / 10.0
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random instance; the budget is drawn up to the cost of paying every
/// agent to opinion 1.
pub fn random_instance(rng: &mut impl Rng, shape: Shape) -> Instance {
    let n = rng.gen_range(shape.min_agents..=shape.max_agents);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let n_transient = if shape.transients && n > 1 {
        rng.gen_range(0..n)
    } else {
        0
    };
    let n_recurrent = n - n_transient;
    let m = rng.gen_range(1..=shape.max_classes.min(n_recurrent).max(1));
    // split the recurrent agents into m nonempty classes
    let mut cuts: Vec<usize> = (1..n_recurrent).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(m - 1).collect();
    cuts.sort_unstable();
    let mut classes = Vec::with_capacity(m);
    let mut start = 0;
    for end in cuts.into_iter().chain(std::iter::once(n_recurrent)) {
        classes.push(order[start..end].to_vec());
        start = end;
    }
    let transients = &order[n_recurrent..];

    let mut edges = std::collections::BTreeMap::new();
    for class in &classes {
        for (pos, &i) in class.iter().enumerate() {
            edges.insert((i, i), weight(rng));
            if class.len() > 1 {
                edges.insert((i, class[(pos + 1) % class.len()]), weight(rng));
                for &j in class {
                    if j != i && rng.gen_bool(0.3) {
                        edges.insert((i, j), weight(rng));
                    }
                }
            }
        }
    }
    let recurrent: Vec<usize> = classes.iter().flatten().copied().collect();
    for &t in transients {
        edges.insert((t, t), weight(rng));
        let target = recurrent[rng.gen_range(0..recurrent.len())];
        edges.insert((t, target), weight(rng));
        for j in 0..n {
            if j != t && rng.gen_bool(0.25) {
                edges.insert((t, j), weight(rng));
            }
        }
    }

    let opinions: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let costs: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..100.0)).collect();
    let full: f64 = (0..n).map(|i| costs[i] * (1.0 - opinions[i])).sum();
    let raw = RawInstance {
        agents: (0..n).map(|i| format!("v{i}")).collect(),
        edges: edges
            .into_iter()
            .map(|((i, j), w)| RawEdge {
                from: format!("v{i}"),
                to: format!("v{j}"),
                w,
            })
            .collect(),
        opinions,
        costs,
        cost_unit: CostUnit::PerUnit,
        threshold: rng.gen_range(0.2..0.95),
        budget: rng.gen_range(0.0..full * 0.6),
    };
    validate(&raw).expect("generated instances are valid")
}

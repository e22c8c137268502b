//! Transient / ergodic-class decomposition of the confidence chain.

use nalgebra::DMatrix;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::model::ConfidenceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Membership {
    Transient,
    Class(usize),
}

/// Partition of the agents into transient states and closed classes.
///
/// Classes are ordered by their smallest member and members are listed in
/// ascending index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub transient: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
    pub class_of: Vec<Membership>,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.class_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_of.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn has_transients(&self) -> bool {
        !self.transient.is_empty()
    }

    pub fn is_recurrent(&self, agent: usize) -> bool {
        matches!(self.class_of[agent], Membership::Class(_))
    }

    /// All recurrent agents, ascending.
    pub fn recurrent(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_recurrent(i)).collect()
    }
}

/// Closed strongly connected components become ergodic classes; every other
/// state is transient. An edge `i -> j` exists iff `A[i][j] > 0`.
pub fn decompose(matrix: &ConfidenceMatrix) -> Decomposition {
    let n = matrix.len();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, n);
    let nodes: Vec<NodeIndex> = (0..n).map(|_| graph.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if i != j && matrix.get(i, j) > 0.0 {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }

    let mut component = vec![0usize; n];
    let sccs = tarjan_scc(&graph);
    for (c, scc) in sccs.iter().enumerate() {
        for v in scc {
            component[v.index()] = c;
        }
    }
    let mut closed = vec![true; sccs.len()];
    for e in graph.raw_edges() {
        let (s, t) = (e.source().index(), e.target().index());
        if component[s] != component[t] {
            closed[component[s]] = false;
        }
    }

    let mut classes: Vec<Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|&(c, _)| closed[c])
        .map(|(_, scc)| {
            let mut members: Vec<usize> = scc.iter().map(|v| v.index()).collect();
            members.sort_unstable();
            members
        })
        .collect();
    classes.sort_by_key(|members| members[0]);

    let mut class_of = vec![Membership::Transient; n];
    for (k, members) in classes.iter().enumerate() {
        for &i in members {
            class_of[i] = Membership::Class(k);
        }
    }
    let transient = (0..n)
        .filter(|&i| class_of[i] == Membership::Transient)
        .collect();

    Decomposition {
        transient,
        classes,
        class_of,
    }
}

/// Restriction of `A` to one class. Rows stay stochastic because classes are
/// closed.
pub fn submatrix(matrix: &ConfidenceMatrix, members: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(members.len(), members.len(), |r, c| {
        matrix.get(members[r], members[c])
    })
}

//! Stationary distributions, hitting probabilities and asymptotic opinions.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::decompose::{submatrix, Decomposition, Membership};
use crate::model::ConfidenceMatrix;

/// Residual bound for the dense linear solves.
pub const SOLVE_RESIDUAL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("singular linear system while computing {0}")]
    SingularSystem(&'static str),
    #[error("no convergence after {steps} steps (last change {change:e})")]
    NonConvergence { steps: usize, change: f64 },
}

fn lu_solve(
    system: DMatrix<f64>,
    rhs: &DVector<f64>,
    what: &'static str,
) -> Result<DVector<f64>, ChainError> {
    let scale = system.amax().max(1.0);
    let lu = system.clone().lu();
    let min_pivot = lu.u().diagonal().amin();
    if min_pivot <= 1e-13 * scale {
        return Err(ChainError::SingularSystem(what));
    }
    let x = lu.solve(rhs).ok_or(ChainError::SingularSystem(what))?;
    if (&system * &x - rhs).amax() > SOLVE_RESIDUAL {
        return Err(ChainError::SingularSystem(what));
    }
    Ok(x)
}

/// Normalized left eigenvector of a class matrix for eigenvalue 1.
///
/// Solves `(Eᵀ - I) π = 0` with the last balance equation replaced by
/// `Σ π = 1`.
pub fn stationary_distribution(class_matrix: &DMatrix<f64>) -> Result<Vec<f64>, ChainError> {
    let n = class_matrix.nrows();
    let mut system = class_matrix.transpose() - DMatrix::identity(n, n);
    system.row_mut(n - 1).fill(1.0);
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let pi = lu_solve(system, &rhs, "stationary distribution")?;
    if pi.iter().any(|&p| p < -1e-12) {
        return Err(ChainError::SingularSystem("stationary distribution"));
    }
    Ok(pi.iter().map(|&p| p.max(0.0)).collect())
}

/// Probability of absorption into `decomposition.classes[class]` from each
/// agent. Only the transient block is solved: `(I - A_FF) h_F = A_FE 1`.
pub fn hitting_probabilities(
    matrix: &ConfidenceMatrix,
    decomposition: &Decomposition,
    class: usize,
) -> Result<Vec<f64>, ChainError> {
    let n = matrix.len();
    let mut h: Vec<f64> = (0..n)
        .map(|i| match decomposition.class_of[i] {
            Membership::Class(k) if k == class => 1.0,
            _ => 0.0,
        })
        .collect();
    let transient = &decomposition.transient;
    if transient.is_empty() {
        return Ok(h);
    }
    let t = transient.len();
    let system = DMatrix::from_fn(t, t, |r, c| {
        let delta = if r == c { 1.0 } else { 0.0 };
        delta - matrix.get(transient[r], transient[c])
    });
    let rhs = DVector::from_fn(t, |r, _| {
        decomposition.classes[class]
            .iter()
            .map(|&j| matrix.get(transient[r], j))
            .sum()
    });
    let solved = lu_solve(system, &rhs, "hitting probabilities")?;
    for (r, &i) in transient.iter().enumerate() {
        h[i] = solved[r].clamp(0.0, 1.0);
    }
    Ok(h)
}

/// `Σ_j π_j x_j` over one class.
pub fn consensus_opinion(pi: &[f64], opinions: &[f64]) -> f64 {
    pi.iter().zip(opinions).map(|(p, x)| p * x).sum()
}

/// Structural analysis of the chain: everything that does not depend on the
/// opinions.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainAnalysis {
    pub decomposition: Decomposition,
    /// `pi[k][r]` is the stationary weight of `decomposition.classes[k][r]`.
    pub pi: Vec<Vec<f64>>,
    /// `hitting[k][i]` is the probability of absorption into class `k` from `i`.
    pub hitting: Vec<Vec<f64>>,
}

impl ChainAnalysis {
    pub fn new(
        matrix: &ConfidenceMatrix,
        decomposition: Decomposition,
    ) -> Result<ChainAnalysis, ChainError> {
        let pi = decomposition
            .classes
            .iter()
            .map(|members| stationary_distribution(&submatrix(matrix, members)))
            .collect::<Result<Vec<_>, _>>()?;
        let hitting = (0..decomposition.num_classes())
            .map(|k| hitting_probabilities(matrix, &decomposition, k))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ChainAnalysis {
            decomposition,
            pi,
            hitting,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.decomposition.len()
    }

    pub fn num_classes(&self) -> usize {
        self.pi.len()
    }

    /// Stationary weight of agent `j` inside its own class (0 for transients).
    pub fn influence(&self, j: usize) -> f64 {
        match self.decomposition.class_of[j] {
            Membership::Transient => 0.0,
            Membership::Class(k) => {
                let r = self.decomposition.classes[k]
                    .binary_search(&j)
                    .expect("class members are sorted");
                self.pi[k][r]
            }
        }
    }

    /// Coefficient of `x_j(0)` in `x_i(+∞)`: `h_i^(k) π_j^(k)` for `j ∈ E_k`.
    pub fn limit_coefficient(&self, i: usize, j: usize) -> f64 {
        match self.decomposition.class_of[j] {
            Membership::Transient => 0.0,
            Membership::Class(k) => self.hitting[k][i] * self.influence(j),
        }
    }

    pub fn consensus_opinions(&self, opinions: &[f64]) -> Vec<f64> {
        self.decomposition
            .classes
            .iter()
            .zip(&self.pi)
            .map(|(members, pi)| {
                let xs: Vec<f64> = members.iter().map(|&j| opinions[j]).collect();
                consensus_opinion(pi, &xs)
            })
            .collect()
    }

    /// `x_i(+∞) = Σ_k h_i^(k) O_k`, which reduces to `O_k` inside class `k`.
    pub fn asymptotic_opinions(&self, opinions: &[f64]) -> Vec<f64> {
        let consensus = self.consensus_opinions(opinions);
        (0..self.num_agents())
            .map(|i| match self.decomposition.class_of[i] {
                Membership::Class(k) => consensus[k],
                Membership::Transient => self
                    .hitting
                    .iter()
                    .zip(&consensus)
                    .map(|(h, o)| h[i] * o)
                    .sum(),
            })
            .collect()
    }

    /// Agents whose asymptotic opinion is at least `threshold - TOL`.
    pub fn supporters(&self, opinions: &[f64], threshold: f64) -> Vec<usize> {
        self.asymptotic_opinions(opinions)
            .iter()
            .enumerate()
            .filter(|&(_, &x)| x >= threshold - crate::model::TOL)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Runs `x <- A x` until the max-norm change drops below `tol`.
pub fn iterate_dynamics(
    matrix: &ConfidenceMatrix,
    opinions: &[f64],
    max_steps: usize,
    tol: f64,
) -> Result<(Vec<f64>, usize), ChainError> {
    let mut x = opinions.to_vec();
    let mut change = f64::INFINITY;
    for step in 1..=max_steps {
        let next = matrix.step(&x);
        change = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = next;
        if change < tol {
            return Ok((x, step));
        }
    }
    Err(ChainError::NonConvergence {
        steps: max_steps,
        change,
    })
}

/// `A^(2^squarings)` by repeated squaring.
pub fn matrix_power_by_squaring(matrix: &ConfidenceMatrix, squarings: u32) -> DMatrix<f64> {
    let mut m = matrix.as_matrix().clone();
    for _ in 0..squarings {
        m = &m * &m;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_class_is_certain() {
        let pi = stationary_distribution(&DMatrix::from_element(1, 1, 1.0)).unwrap();
        assert_eq!(pi, vec![1.0]);
    }

    #[test]
    fn two_state_stationary() {
        // π = (b, a) / (a + b) for [[1-a, a], [b, 1-b]]
        let e = DMatrix::from_row_slice(2, 2, &[0.7, 0.3, 0.1, 0.9]);
        let pi = stationary_distribution(&e).unwrap();
        assert!((pi[0] - 0.25).abs() < 1e-12);
        assert!((pi[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn reducible_class_is_singular() {
        let e = DMatrix::<f64>::identity(2, 2);
        assert_eq!(
            stationary_distribution(&e),
            Err(ChainError::SingularSystem("stationary distribution"))
        );
    }

    #[test]
    fn uniform_opinions_are_a_fixed_point() {
        let pi = [0.2, 0.3, 0.5];
        assert!((consensus_opinion(&pi, &[0.4; 3]) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn constant_vector_converges_in_one_step() {
        let m = ConfidenceMatrix::from_dense(DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.0, 1.0]))
            .unwrap();
        let (x, steps) = iterate_dynamics(&m, &[0.3, 0.3], 10, 1e-12).unwrap();
        assert_eq!(steps, 1);
        assert_eq!(x, vec![0.3, 0.3]);
    }

    #[test]
    fn non_convergence_is_reported() {
        let m =
            ConfidenceMatrix::from_dense(DMatrix::from_row_slice(2, 2, &[0.99, 0.01, 0.01, 0.99]))
                .unwrap();
        let err = iterate_dynamics(&m, &[0.0, 1.0], 5, 1e-12).unwrap_err();
        assert!(matches!(err, ChainError::NonConvergence { steps: 5, .. }));
    }
}

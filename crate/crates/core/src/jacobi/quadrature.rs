use serde::{Deserialize, Serialize};

use super::eigen::symmetric_tridiagonal_eigen;
use super::TridiagonalMatrix;
use crate::error::{Error, Result};

/// Gauss rule for a probability measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Polynomials up to this degree are integrated exactly.
    pub exactness_degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Golub-Welsch: nodes are the eigenvalues of the truncation, weights the
/// squared first components of the normalized eigenvectors.
pub fn gauss_quadrature(truncation: &TridiagonalMatrix) -> Result<QuadratureRule> {
    if let Some((i, &a)) = truncation
        .offdiagonal
        .iter()
        .enumerate()
        .find(|(_, &a)| !(a > 0.0 && a.is_finite()))
    {
        return Err(Error::NonPositiveCoefficient {
            index: i as i64 + 1,
            value: a,
        });
    }
    let eig = symmetric_tridiagonal_eigen(&truncation.diagonal, &truncation.offdiagonal, &[0])?;
    let weights = eig.rows[0].iter().map(|c| c * c).collect();
    Ok(QuadratureRule {
        exactness_degree: 2 * truncation.dimension() - 1,
        nodes: eig.values,
        weights,
    })
}

/// Gauss-Chebyshev rule of the first kind for `(1/pi) dx / sqrt(1 - x^2)`.
pub fn gauss_chebyshev(size: usize) -> QuadratureRule {
    let h = std::f64::consts::PI / size as f64;
    let mut nodes: Vec<f64> = (0..size).map(|i| ((i as f64 + 0.5) * h).cos()).collect();
    nodes.reverse();
    QuadratureRule {
        nodes,
        weights: vec![1.0 / size as f64; size],
        exactness_degree: 2 * size - 1,
    }
}

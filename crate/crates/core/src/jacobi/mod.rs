//! Jacobi matrices: finite truncations, Gauss rules, band walks and the
//! 2x2 block fold of a doubly infinite matrix.

mod band;
mod eigen;
mod quadrature;

pub use band::{band_entry, moment_entry, BandOperator};
pub use eigen::{symmetric_tridiagonal_eigen, TridiagonalEigen};
pub use quadrature::{gauss_chebyshev, gauss_quadrature, QuadratureRule};

use nalgebra::Matrix2;

use crate::bilateral::BilateralCoefficients;
use crate::error::{Error, Result};
use crate::families::MeasureFamily;
use crate::recurrence::CoefficientSequence;

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    /// `b_0 .. b_{N-1}`
    pub diagonal: Vec<f64>,
    /// `a_1 .. a_{N-1}`
    pub offdiagonal: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn dimension(&self) -> usize {
        self.diagonal.len()
    }
}

/// Top-left `size x size` block of `J`.
pub fn truncate(coeffs: &CoefficientSequence, size: usize) -> Result<TridiagonalMatrix> {
    if size == 0 {
        return Err(Error::InvalidParameter(
            "truncation size must be at least 1".into(),
        ));
    }
    if let Some(cutoff) = coeffs.cutoff() {
        if size > cutoff {
            return Err(Error::IndexBeyondSupport {
                index: size as i64,
                cutoff,
            });
        }
    }
    Ok(TridiagonalMatrix {
        diagonal: (0..size).map(|n| coeffs.b(n)).collect(),
        offdiagonal: (1..size).map(|n| coeffs.a(n)).collect(),
    })
}

/// `B_0 .. B_depth` and `A_1 .. A_depth` of the semi-infinite block matrix
/// pairing indices `-n-1` and `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedBlocks {
    pub diagonal: Vec<Matrix2<f64>>,
    pub offdiagonal: Vec<Matrix2<f64>>,
}

impl FoldedBlocks {
    /// `B_n`
    pub fn b_block(&self, n: usize) -> Matrix2<f64> {
        self.diagonal[n]
    }

    /// `A_n` for `n >= 1`
    pub fn a_block(&self, n: usize) -> Matrix2<f64> {
        self.offdiagonal[n - 1]
    }
}

pub fn fold_block(bilateral: &BilateralCoefficients, depth: usize) -> FoldedBlocks {
    let mut diagonal = Vec::with_capacity(depth + 1);
    let a0 = bilateral.a(0);
    diagonal.push(Matrix2::new(bilateral.b(-1), a0, a0, bilateral.b(0)));
    for n in 1..=depth as i64 {
        diagonal.push(Matrix2::new(bilateral.b(-n - 1), 0.0, 0.0, bilateral.b(n)));
    }
    let offdiagonal = (1..=depth as i64)
        .map(|n| Matrix2::new(bilateral.a(-n), 0.0, 0.0, bilateral.a(n)))
        .collect();
    FoldedBlocks {
        diagonal,
        offdiagonal,
    }
}

/// Entry `(r, s)` of `J` as a matrix over Z, zero off the band and at
/// negative indices.
fn semi_infinite_entry(coeffs: &CoefficientSequence, r: i64, s: i64) -> f64 {
    if r < 0 || s < 0 {
        return 0.0;
    }
    match r - s {
        0 => coeffs.b(r as usize),
        1 | -1 => coeffs.a(r.max(s) as usize),
        _ => 0.0,
    }
}

fn bilateral_entry(bilateral: &BilateralCoefficients, i: i64, j: i64) -> f64 {
    match i - j {
        0 => bilateral.b(i),
        1 | -1 => bilateral.a(i.max(j)),
        _ => 0.0,
    }
}

/// Largest entrywise deviation `|(J_n)_{n+i,n+j} - J_{i,j}|` over the
/// window `|i|, |j| <= window`, where `J_n` is the member with parameter
/// `n` and `J` the doubly infinite limit.
pub fn window_convergence(
    family: &MeasureFamily,
    bilateral: &BilateralCoefficients,
    n: usize,
    window: usize,
) -> Result<f64> {
    if window == 0 || n <= window {
        return Err(Error::InvalidParameter(format!(
            "window convergence needs 1 <= window < n, got window {window} and n {n}"
        )));
    }
    let member = family.member(n);
    let n = n as i64;
    let w = window as i64;
    let mut worst = 0.0_f64;
    for i in -w..=w {
        for j in (i - 1).max(-w)..=(i + 1).min(w) {
            let finite = semi_infinite_entry(&member, n + i, n + j);
            worst = worst.max((finite - bilateral_entry(bilateral, i, j)).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_read_off() {
        let t = truncate(&CoefficientSequence::chebyshev_u(), 2).unwrap();
        assert_eq!(t.diagonal, vec![0.0, 0.0]);
        assert_eq!(t.offdiagonal, vec![0.5]);
        let lag = CoefficientSequence::laguerre(0.0);
        let t = truncate(&lag, 3).unwrap();
        assert_eq!(t.diagonal, vec![1.0, 3.0, 5.0]);
        assert_eq!(t.offdiagonal, vec![1.0, 2.0]);
        assert!(truncate(&lag, 0).is_err());
    }

    #[test]
    fn one_point_rule() {
        let rule = gauss_quadrature(&TridiagonalMatrix {
            diagonal: vec![0.75],
            offdiagonal: vec![],
        })
        .unwrap();
        assert_eq!(rule.nodes, vec![0.75]);
        assert_eq!(rule.weights, vec![1.0]);
        assert_eq!(rule.exactness_degree, 1);
    }

    #[test]
    fn chebyshev_u_rules() {
        let c = CoefficientSequence::chebyshev_u();
        let rule = gauss_quadrature(&truncate(&c, 2).unwrap()).unwrap();
        assert!((rule.nodes[0] + 0.5).abs() < 1e-15 && (rule.nodes[1] - 0.5).abs() < 1e-15);
        assert!((rule.weights[0] - 0.5).abs() < 1e-15 && (rule.weights[1] - 0.5).abs() < 1e-15);
        // Catalan(2) / 4^2
        let rule = gauss_quadrature(&truncate(&c, 20).unwrap()).unwrap();
        assert!((rule.integrate(|x| x.powi(4)) - 0.125).abs() < 1e-14);
    }

    #[test]
    fn rejects_zero_coupling() {
        let t = TridiagonalMatrix {
            diagonal: vec![0.0, 1.0],
            offdiagonal: vec![0.0],
        };
        assert!(matches!(
            gauss_quadrature(&t),
            Err(Error::NonPositiveCoefficient { index: 1, .. })
        ));
    }

    #[test]
    fn folded_blocks() {
        let blocks = fold_block(&BilateralCoefficients::constant(0.5, 0.0), 3);
        assert_eq!(blocks.b_block(0), Matrix2::new(0.0, 0.5, 0.5, 0.0));
        assert_eq!(blocks.a_block(3), Matrix2::new(0.5, 0.0, 0.0, 0.5));
        assert_eq!(blocks.b_block(2), Matrix2::zeros());

        let beta = 1.0;
        let laguerre_minus = BilateralCoefficients::from_fn(
            move |k| {
                if k < 0 {
                    (-(k as f64) * (beta - k as f64)).sqrt()
                } else {
                    0.0
                }
            },
            |_| 0.0,
        );
        let blocks = fold_block(&laguerre_minus, 2);
        assert!((blocks.a_block(2)[(0, 0)] - 6.0_f64.sqrt()).abs() < 1e-15);
        assert_eq!(blocks.a_block(2)[(1, 1)], 0.0);
    }

    #[test]
    fn gauss_chebyshev_moments() {
        let rule = gauss_chebyshev(16);
        assert!((rule.integrate(|x| x * x) - 0.5).abs() < 1e-15);
        assert!((rule.integrate(|x| x.powi(4)) - 0.375).abs() < 1e-15);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
    }
}

//! Implicit-shift QL for symmetric tridiagonal matrices.
//!
//! Only the requested rows of the eigenvector matrix are accumulated, which
//! is all Gauss quadrature (row 0) and the folded 2x2 spectral measure
//! (rows of `e_{-1}` and `e_0`) need.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 50;
const RELATIVE_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct TridiagonalEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// `rows[r][j]` is component `tracked[r]` of the normalized eigenvector
    /// belonging to `values[j]`.
    pub rows: Vec<Vec<f64>>,
}

/// Eigenvalues of the symmetric tridiagonal matrix with `diag` on the
/// diagonal and `off[i]` coupling rows `i` and `i + 1`.
pub fn symmetric_tridiagonal_eigen(
    diag: &[f64],
    off: &[f64],
    tracked: &[usize],
) -> Result<TridiagonalEigen> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::InvalidParameter(format!(
            "tridiagonal shape mismatch: {} diagonal and {} off-diagonal entries",
            n,
            off.len()
        )));
    }
    if let Some(&bad) = tracked.iter().find(|&&r| r >= n) {
        return Err(Error::InvalidParameter(format!(
            "tracked row {bad} outside dimension {n}"
        )));
    }

    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z: Vec<Vec<f64>> = tracked
        .iter()
        .map(|&r| {
            let mut row = vec![0.0; n];
            row[r] = 1.0;
            row
        })
        .collect();

    let norm = (0..n)
        .map(|i| d[i].abs() + e[i].abs() + if i > 0 { e[i - 1].abs() } else { 0.0 })
        .fold(0.0_f64, f64::max);
    let absolute = RELATIVE_TOLERANCE * norm;

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= absolute {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::EigenNoConvergence {
                    index: l,
                    iterations: MAX_SWEEPS,
                    residual: e[l].abs(),
                });
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0_f64, 1.0_f64, 0.0_f64);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    Ok(TridiagonalEigen {
        values: order.iter().map(|&i| d[i]).collect(),
        rows: z
            .iter()
            .map(|row| order.iter().map(|&i| row[i]).collect())
            .collect(),
    })
}

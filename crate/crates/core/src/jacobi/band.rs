//! Entries of powers of tridiagonal operators by walking the band.

use crate::bilateral::BilateralCoefficients;
use crate::error::{Error, Result};
use crate::recurrence::CoefficientSequence;

/// A symmetric tridiagonal operator indexed by Z.
pub trait BandOperator {
    fn diagonal(&self, i: i64) -> f64;
    /// Entry `(i - 1, i)`.
    fn coupling(&self, i: i64) -> f64;
}

/// Semi-infinite `J` embedded in Z with zero rows and columns at negative
/// indices.
impl BandOperator for CoefficientSequence {
    fn diagonal(&self, i: i64) -> f64 {
        if i < 0 {
            0.0
        } else {
            self.b(i as usize)
        }
    }

    fn coupling(&self, i: i64) -> f64 {
        if i <= 0 {
            0.0
        } else {
            self.a(i as usize)
        }
    }
}

impl BandOperator for BilateralCoefficients {
    fn diagonal(&self, i: i64) -> f64 {
        self.b(i)
    }

    fn coupling(&self, i: i64) -> f64 {
        self.a(i)
    }
}

/// `<J^power e_from, e_to>`, exactly zero when `|from - to| > power`.
/// The walk always starts at the smaller index, so the result is
/// bitwise symmetric in `from` and `to`.
pub fn band_entry<O: BandOperator + ?Sized>(op: &O, power: u32, from: i64, to: i64) -> f64 {
    let (from, to) = (from.min(to), from.max(to));
    let m = power as i64;
    if (from - to).abs() > m {
        return 0.0;
    }
    let lo = from - m;
    let width = (2 * m + 1) as usize;
    let diag: Vec<f64> = (0..width).map(|i| op.diagonal(lo + i as i64)).collect();
    // coupling[i] joins window positions i - 1 and i
    let coupling: Vec<f64> = (0..=width).map(|i| op.coupling(lo + i as i64)).collect();

    let mut v = vec![0.0; width];
    let mut w = vec![0.0; width];
    v[m as usize] = 1.0;
    // after `step` applications the support is [m - step, m + step]
    for step in 1..=m as usize {
        let first = m as usize - step;
        let last = m as usize + step;
        for i in first..=last {
            let mut acc = diag[i] * v[i];
            if i > 0 {
                acc += coupling[i] * v[i - 1];
            }
            if i + 1 < width {
                acc += coupling[i + 1] * v[i + 1];
            }
            w[i] = acc;
        }
        std::mem::swap(&mut v, &mut w);
    }
    v[(to - lo) as usize]
}

/// `<J^m e_{n+k}, e_{n+l}> = integral of x^m p_{n+k} p_{n+l} dmu`.
pub fn moment_entry(coeffs: &CoefficientSequence, n: i64, k: i64, l: i64, m: u32) -> Result<f64> {
    for index in [n + k, n + l] {
        if index < 0 {
            return Err(Error::NegativeIndex { index, minimum: 0 });
        }
        if let Some(cutoff) = coeffs.cutoff() {
            if index >= cutoff as i64 {
                return Err(Error::IndexBeyondSupport { index, cutoff });
            }
        }
    }
    Ok(band_entry(coeffs, m, n + k, n + l))
}

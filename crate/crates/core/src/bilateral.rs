//! Doubly infinite Jacobi matrices and their vector symbols.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::recurrence::{eval_associated, eval_orthonormal, CoefficientSequence};

type ZRule = Arc<dyn Fn(i64) -> f64 + Send + Sync>;

/// Entries `a_k, b_k` (`k` in Z) of a doubly infinite Jacobi matrix: `b_k`
/// on the diagonal, `a_k` coupling rows `k - 1` and `k`.
///
/// `a_k = 0` is tolerated so limits that reduce to a semi-infinite matrix
/// can be represented; `a_k < 0` is rejected when it is read.
#[derive(Clone)]
pub struct BilateralCoefficients {
    off: ZRule,
    diag: ZRule,
    constant: Option<(f64, f64)>,
}

impl fmt::Debug for BilateralCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let window: Vec<(i64, f64, f64)> = (-2..=2).map(|k| (k, self.a(k), self.b(k))).collect();
        f.debug_struct("BilateralCoefficients")
            .field("constant", &self.constant)
            .field("window (k, a_k, b_k)", &window)
            .finish()
    }
}

impl BilateralCoefficients {
    pub fn from_fn<A, B>(a: A, b: B) -> Self
    where
        A: Fn(i64) -> f64 + Send + Sync + 'static,
        B: Fn(i64) -> f64 + Send + Sync + 'static,
    {
        Self {
            off: Arc::new(a),
            diag: Arc::new(b),
            constant: None,
        }
    }

    /// `a_k = off`, `b_k = diag` for every `k`.
    pub fn constant(off: f64, diag: f64) -> Self {
        Self {
            off: Arc::new(move |_| off),
            diag: Arc::new(move |_| diag),
            constant: Some((off, diag)),
        }
    }

    /// `Some((a, b))` when built by [`BilateralCoefficients::constant`].
    pub fn as_constant(&self) -> Option<(f64, f64)> {
        self.constant
    }

    pub fn a(&self, k: i64) -> f64 {
        (self.off)(k)
    }

    pub fn b(&self, k: i64) -> f64 {
        (self.diag)(k)
    }

    pub(crate) fn checked_a(&self, k: i64) -> Result<f64> {
        let a = self.a(k);
        if a >= 0.0 && a.is_finite() {
            Ok(a)
        } else {
            Err(Error::NonPositiveCoefficient { index: k, value: a })
        }
    }

    /// `J+`: coefficients `(a_{n+1}, b_n)_{n>=0}`.
    pub fn plus_side(&self) -> CoefficientSequence {
        let off = Arc::clone(&self.off);
        let diag = Arc::clone(&self.diag);
        let seq = CoefficientSequence::from_fn(move |m| off(m as i64), move |m| diag(m as i64));
        if self.a(1) == 0.0 {
            seq.with_cutoff(1)
        } else {
            seq
        }
    }

    /// `J-`: coefficients `(a_{-n-1}, b_{-n-1})_{n>=0}`.
    pub fn minus_side(&self) -> CoefficientSequence {
        let off = Arc::clone(&self.off);
        let diag = Arc::clone(&self.diag);
        let seq =
            CoefficientSequence::from_fn(move |m| off(-(m as i64)), move |m| diag(-(m as i64) - 1));
        if self.a(-1) == 0.0 {
            seq.with_cutoff(1)
        } else {
            seq
        }
    }
}

/// `(A_n(x), B_n(x))`, the image of the basis vector `e_n` in `L_2(mu)`.
///
/// For `n >= 0` this is `(-(a_0/a_1) p_{n-1}^{(1)}(x), p_n(x))`, for `n < 0`
/// it is `(q_{|n|-1}(x), -(a_0/a_{-1}) q_{|n|-2}^{(1)}(x))`. Degree `-1`
/// terms are zero. When `a_0 = 0` the two halves decouple and the cross
/// component is zero.
pub fn eval_vector_symbol(bilateral: &BilateralCoefficients, n: i64, x: f64) -> Result<(f64, f64)> {
    let a0 = bilateral.checked_a(0)?;
    if n >= 0 {
        let plus = bilateral.plus_side();
        let cross = if a0 == 0.0 {
            0.0
        } else {
            let a1 = positive(bilateral, 1)?;
            -(a0 / a1) * eval_associated(&plus, n - 1, x)?
        };
        Ok((cross, eval_orthonormal(&plus, n, x)?))
    } else {
        let minus = bilateral.minus_side();
        let m = -n;
        let cross = if a0 == 0.0 {
            0.0
        } else {
            let am1 = positive(bilateral, -1)?;
            -(a0 / am1) * eval_associated(&minus, m - 2, x)?
        };
        Ok((eval_orthonormal(&minus, m - 1, x)?, cross))
    }
}

fn positive(bilateral: &BilateralCoefficients, k: i64) -> Result<f64> {
    let a = bilateral.a(k);
    if a > 0.0 && a.is_finite() {
        Ok(a)
    } else {
        Err(Error::NonPositiveCoefficient { index: k, value: a })
    }
}

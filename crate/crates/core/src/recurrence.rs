//! Orthonormal polynomials from their three-term recurrence
//!
//! `x p_n(x) = a_{n+1} p_{n+1}(x) + b_n p_n(x) + a_n p_{n-1}(x)` with
//! `p_{-1} = 0` and `p_0 = 1`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub(crate) type IndexRule = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// Semi-infinite recurrence data `(a_n)_{n>=1}`, `(b_n)_{n>=0}`.
///
/// Coefficients are rules, not stored arrays, so members of a family whose
/// length depends on the family parameter share one representation. A
/// `cutoff` of `N` marks a measure supported on `N` points: `a_n = b_n = 0`
/// for `n >= N` and polynomials are meaningful up to degree `N`.
#[derive(Clone)]
pub struct CoefficientSequence {
    off: IndexRule,
    diag: IndexRule,
    cutoff: Option<usize>,
    shift: usize,
}

impl fmt::Debug for CoefficientSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<(f64, f64)> = (0..4).map(|n| (self.a(n + 1), self.b(n))).collect();
        f.debug_struct("CoefficientSequence")
            .field("cutoff", &self.cutoff)
            .field("shift", &self.shift)
            .field("head (a_{n+1}, b_n)", &head)
            .finish()
    }
}

impl CoefficientSequence {
    pub fn from_fn<A, B>(a: A, b: B) -> Self
    where
        A: Fn(usize) -> f64 + Send + Sync + 'static,
        B: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        Self {
            off: Arc::new(a),
            diag: Arc::new(b),
            cutoff: None,
            shift: 0,
        }
    }

    /// Finite support on `n` points.
    pub fn with_cutoff(mut self, n: usize) -> Self {
        self.cutoff = Some(n);
        self
    }

    pub fn constant(a: f64, b: f64) -> Self {
        Self::from_fn(move |_| a, move |_| b)
    }

    /// Chebyshev polynomials of the second kind, orthonormal for
    /// `(2/pi) sqrt(1 - x^2) dx` on `[-1, 1]`.
    pub fn chebyshev_u() -> Self {
        Self::constant(0.5, 0.0)
    }

    /// Orthonormal Laguerre polynomials for `x^alpha e^{-x} / Gamma(alpha + 1)`.
    pub fn laguerre(alpha: f64) -> Self {
        Self::from_fn(
            move |n| {
                let n = n as f64;
                (n * (n + alpha)).sqrt()
            },
            move |n| 2.0 * n as f64 + alpha + 1.0,
        )
    }

    /// Orthonormal Hermite polynomials for `e^{-x^2} / sqrt(pi)`.
    pub fn hermite() -> Self {
        Self::from_fn(|n| (n as f64 / 2.0).sqrt(), |_| 0.0)
    }

    /// Orthonormal Jacobi polynomials for `(1-x)^alpha (1+x)^beta` on `[-1, 1]`.
    pub fn jacobi(alpha: f64, beta: f64) -> Self {
        Self::from_fn(
            move |n| jacobi_a(n as f64, alpha, beta),
            move |n| jacobi_b(n as f64, alpha, beta),
        )
    }

    /// Finite sequence with `b = (b_0..b_{N-1})` and `a = (a_1..a_{N-1})`.
    pub fn from_vecs(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if b.is_empty() || a.len() + 1 != b.len() {
            return Err(Error::InvalidParameter(format!(
                "need len(a) = len(b) - 1 >= 0, got {} and {}",
                a.len(),
                b.len()
            )));
        }
        let n = b.len();
        let a = Arc::new(a);
        let b = Arc::new(b);
        Ok(Self::from_fn(
            move |i| {
                if i >= 1 && i <= a.len() {
                    a[i - 1]
                } else {
                    0.0
                }
            },
            move |i| b.get(i).copied().unwrap_or(0.0),
        )
        .with_cutoff(n))
    }

    pub fn cutoff(&self) -> Option<usize> {
        self.cutoff
    }

    /// `a_n`; zero for `n = 0` and at or beyond the cutoff.
    pub fn a(&self, n: usize) -> f64 {
        if n == 0 || self.cutoff.is_some_and(|c| n >= c) {
            return 0.0;
        }
        (self.off)(n + self.shift)
    }

    /// `b_n`; zero at or beyond the cutoff.
    pub fn b(&self, n: usize) -> f64 {
        if self.cutoff.is_some_and(|c| n >= c) {
            return 0.0;
        }
        (self.diag)(n + self.shift)
    }

    /// The sequence with the first `by` rows and columns of `J` deleted.
    pub fn shifted(&self, by: usize) -> Self {
        Self {
            off: Arc::clone(&self.off),
            diag: Arc::clone(&self.diag),
            cutoff: self.cutoff.map(|c| c.saturating_sub(by)),
            shift: self.shift + by,
        }
    }

    /// Divisor used to produce `p_n` from the recurrence. At the cutoff
    /// degree `N` the orthonormal `p_N` does not exist; we use divisor 1,
    /// so `p_N` is the polynomial vanishing on the support.
    fn divisor(&self, n: usize) -> Result<f64> {
        if self.cutoff == Some(n) {
            return Ok(1.0);
        }
        let a = self.a(n);
        if a > 0.0 && a.is_finite() {
            Ok(a)
        } else {
            Err(Error::NonPositiveCoefficient {
                index: n as i64,
                value: a,
            })
        }
    }

    fn check_degree(&self, n: i64) -> Result<()> {
        if n < -1 {
            return Err(Error::NegativeIndex {
                index: n,
                minimum: -1,
            });
        }
        match self.cutoff {
            Some(c) if n > c as i64 => Err(Error::IndexBeyondSupport {
                index: n,
                cutoff: c,
            }),
            _ => Ok(()),
        }
    }
}

pub(crate) fn jacobi_a(n: f64, alpha: f64, beta: f64) -> f64 {
    let s = alpha + beta;
    let sq = if n == 1.0 {
        // the generic formula is 0/0 when alpha + beta = -1
        4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + s).powi(2) * (3.0 + s))
    } else {
        4.0 * n * (n + alpha) * (n + beta) * (n + s)
            / ((2.0 * n + s - 1.0) * (2.0 * n + s).powi(2) * (2.0 * n + s + 1.0))
    };
    sq.sqrt()
}

pub(crate) fn jacobi_b(n: f64, alpha: f64, beta: f64) -> f64 {
    let s = alpha + beta;
    if n == 0.0 {
        (beta - alpha) / (s + 2.0)
    } else {
        (beta * beta - alpha * alpha) / ((2.0 * n + s) * (2.0 * n + s + 2.0))
    }
}

/// `p_n(x)` by forward recurrence.
pub fn eval_orthonormal(coeffs: &CoefficientSequence, n: i64, x: f64) -> Result<f64> {
    coeffs.check_degree(n)?;
    if n == -1 {
        return Ok(0.0);
    }
    let values = eval_orthonormal_upto(coeffs, n as usize, x)?;
    Ok(values[n as usize])
}

/// `p_0(x), ..., p_n(x)`.
pub fn eval_orthonormal_upto(coeffs: &CoefficientSequence, n: usize, x: f64) -> Result<Vec<f64>> {
    coeffs.check_degree(n as i64)?;
    let mut values = Vec::with_capacity(n + 1);
    values.push(1.0);
    let mut prev = 0.0;
    let mut cur = 1.0;
    for j in 0..n {
        let rhs = (x - coeffs.b(j)).mul_add(cur, -coeffs.a(j) * prev);
        let next = rhs / coeffs.divisor(j + 1)?;
        prev = cur;
        cur = next;
        values.push(cur);
    }
    Ok(values)
}

/// Associated polynomial `p_n^{(1)}(x)`: the orthonormal polynomial of the
/// sequence with its first row and column deleted.
pub fn eval_associated(coeffs: &CoefficientSequence, n: i64, x: f64) -> Result<f64> {
    eval_orthonormal(&coeffs.shifted(1), n, x)
}

/// `gamma_n = 1 / (a_1 ... a_n)`.
pub fn leading_coefficient(coeffs: &CoefficientSequence, n: usize) -> Result<f64> {
    coeffs.check_degree(n as i64)?;
    let mut gamma = 1.0_f64;
    for j in 1..=n {
        gamma /= coeffs.divisor(j)?;
        if !gamma.is_finite() || gamma == 0.0 {
            return Err(Error::Overflow { degree: n });
        }
    }
    Ok(gamma)
}

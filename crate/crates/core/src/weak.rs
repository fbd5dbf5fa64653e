//! Both sides of the weak limit
//! `int f p_{n+k} p_{n+l} dmu_n -> int f (A_k, B_k) dmu (A_l, B_l)^T`
//! and convergence tables over `n`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::bilateral::eval_vector_symbol;
use crate::error::{Error, Result};
use crate::families::{DualHahnMode, LatticePoint, LimitData, MeasureFamily};
use crate::jacobi::{
    band_entry, gauss_chebyshev, gauss_quadrature, moment_entry, symmetric_tridiagonal_eigen,
    truncate, QuadratureRule,
};
use crate::recurrence::CoefficientSequence;

/// Two successive quadrature sizes must agree to this (relative to max(1, |value|)).
const AGREEMENT: f64 = 1e-8;
const MIN_RULE: usize = 64;
const MAX_RULE: usize = 4096;
/// Errors at or below this count as exact when judging trends.
const EXACT_ERROR: f64 = 1e-12;

type Callable = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum TestFunction {
    /// `x^m`, evaluated exactly through powers of the Jacobi matrix.
    Monomial(u32),
    /// A bounded continuous (piecewise smooth) function, integrated by
    /// quadrature or lattice sums.
    Callable { label: String, f: Callable },
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TestFunction({})", self.label())
    }
}

impl TestFunction {
    pub fn callable<F>(label: &str, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        TestFunction::Callable {
            label: label.to_string(),
            f: Arc::new(f),
        }
    }

    /// Accepts `1`, `x`, `x^m`, `cos`, `sin`, `atan`, `abs`, `gauss`
    /// (`exp(-x^2)`) and `sech`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let monomial = match t {
            "1" => Some(0),
            "x" => Some(1),
            _ => t
                .strip_prefix("x^")
                .or_else(|| t.strip_prefix("x**"))
                .map(|m| {
                    m.parse::<u32>().map_err(|_| {
                        Error::InvalidParameter(format!("bad monomial degree in '{t}'"))
                    })
                })
                .transpose()?,
        };
        if let Some(m) = monomial {
            return Ok(TestFunction::Monomial(m));
        }
        let f: fn(f64) -> f64 = match t {
            "cos" => f64::cos,
            "sin" => f64::sin,
            "atan" => f64::atan,
            "abs" => f64::abs,
            "gauss" => |x| (-x * x).exp(),
            "sech" => |x| 1.0 / x.cosh(),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unknown test function '{t}' (use 1, x, x^m, cos, sin, atan, abs, gauss, sech)"
                )))
            }
        };
        Ok(TestFunction::callable(t, f))
    }

    pub fn label(&self) -> String {
        match self {
            TestFunction::Monomial(0) => "1".into(),
            TestFunction::Monomial(1) => "x".into(),
            TestFunction::Monomial(m) => format!("x^{m}"),
            TestFunction::Callable { label, .. } => label.clone(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Monomial(m) => x.powi(*m as i32),
            TestFunction::Callable { f, .. } => f(x),
        }
    }
}

/// Run `eval` at `start, 2 start, ...` until two sizes agree. `exact_at`
/// marks a size from which the rule is exact.
fn adaptive<F>(start: usize, exact_at: Option<usize>, mut eval: F) -> Result<f64>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut size = start;
    if let Some(top) = exact_at {
        if size >= top {
            return eval(top);
        }
    }
    let mut previous = eval(size)?;
    loop {
        let next = (2 * size).min(exact_at.unwrap_or(usize::MAX));
        if next > MAX_RULE {
            let last = eval(MAX_RULE.max(size))?;
            return Err(Error::QuadratureNoConvergence {
                size: MAX_RULE,
                last,
                previous,
            });
        }
        let current = eval(next)?;
        if exact_at == Some(next)
            || (current - previous).abs() <= AGREEMENT * current.abs().max(1.0)
        {
            return Ok(current);
        }
        previous = current;
        size = next;
    }
}

fn rule_sum(rule: &QuadratureRule, mut term: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    let mut total = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        if w > 0.0 {
            total += w * term(x)?;
        }
    }
    Ok(total)
}

fn start_size(n: usize, k: i64, l: i64) -> usize {
    MIN_RULE.max(2 * (n + k.unsigned_abs() as usize + l.unsigned_abs() as usize) + 8)
}

/// `int f p_i p_j dmu` for the measure of `coeffs`, by Gauss rules. The
/// products `w p_i p_j` at the nodes are read off the tracked eigenvector
/// rows, which keeps tiny weights and large polynomial values apart.
fn gauss_pair(
    coeffs: &CoefficientSequence,
    i: usize,
    j: usize,
    f: &TestFunction,
    start: usize,
) -> Result<f64> {
    adaptive(start, coeffs.cutoff(), |size| {
        let t = truncate(coeffs, size)?;
        let eig = symmetric_tridiagonal_eigen(&t.diagonal, &t.offdiagonal, &[i, j])?;
        Ok(eig
            .values
            .iter()
            .zip(eig.rows[0].iter().zip(&eig.rows[1]))
            .map(|(&x, (u, v))| f.eval(x) * u * v)
            .sum())
    })
}

/// `sum_j f(x_j) p_i(x_j) p_l(x_j) pi_j` over the full support. The
/// products `sqrt(pi_j) p_i(x_j)` are the components of the normalized
/// eigenvectors of the `N x N` Jacobi matrix; reading them off the
/// eigensolver avoids the forward recurrence, which loses all accuracy at
/// lattice points far into the tail.
fn lattice_sum(
    member: &CoefficientSequence,
    lattice: &[LatticePoint],
    i: usize,
    l: usize,
    f: &TestFunction,
) -> Result<f64> {
    let t = truncate(member, lattice.len())?;
    let eig = symmetric_tridiagonal_eigen(&t.diagonal, &t.offdiagonal, &[i, l])?;
    Ok(lattice
        .iter()
        .zip(eig.rows[0].iter().zip(&eig.rows[1]))
        .map(|(point, (u, v))| f.eval(point.point) * u * v)
        .sum())
}

fn absolute_index(family: &MeasureFamily, n: usize, k: i64) -> Result<usize> {
    let index = n as i64 + family.convention().offset(k)?;
    if index < 0 {
        return Err(Error::NegativeIndex { index, minimum: 0 });
    }
    Ok(index as usize)
}

/// `int f(x) p_{n+k}(x; mu_n) p_{n+l}(x; mu_n) dmu_n(x)`, with `k, l` read
/// through the family's index convention.
pub fn lhs_integral(
    family: &MeasureFamily,
    n: usize,
    k: i64,
    l: i64,
    f: &TestFunction,
) -> Result<f64> {
    if n < family.first_member() {
        return Err(Error::InvalidParameter(format!(
            "n = {n} is below the first member {} of '{}'",
            family.first_member(),
            family.name()
        )));
    }
    let member = family.member(n);
    let i = absolute_index(family, n, k)?;
    let j = absolute_index(family, n, l)?;
    if let Some(cutoff) = member.cutoff() {
        if let Some(&index) = [i, j].iter().find(|&&index| index >= cutoff) {
            return Err(Error::IndexBeyondSupport {
                index: index as i64,
                cutoff,
            });
        }
    }
    match f {
        TestFunction::Monomial(m) => moment_entry(&member, 0, i as i64, j as i64, *m),
        TestFunction::Callable { .. } => match family.support(n) {
            Some(lattice) => lattice_sum(&member, &lattice, i, j, f),
            None => gauss_pair(&member, i, j, f, start_size(n, k, l)),
        },
    }
}

/// `int f (A_k, B_k) dmu (A_l, B_l)^T` for the limit matrix measure.
pub fn rhs_limit(limit: &LimitData, k: i64, l: i64, f: &TestFunction) -> Result<f64> {
    let (k, l) = (k.min(l), k.max(l));
    let ko = limit.convention.offset(k)?;
    let lo = limit.convention.offset(l)?;
    match f {
        TestFunction::Monomial(m) => Ok(band_entry(&limit.bilateral, *m, ko, lo)),
        TestFunction::Callable { .. } => {
            let measure = limit.measure.as_ref().ok_or(Error::MeasureUnavailable)?;
            let bil = &limit.bilateral;
            adaptive(start_size(0, ko, lo), None, |size| {
                measure.integrate_pair(
                    |x| f.eval(x),
                    |x| eval_vector_symbol(bil, ko, x),
                    |x| eval_vector_symbol(bil, lo, x),
                    size,
                )
            })
        }
    }
}

fn chebyshev_t(k: u32, u: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, u);
    if k == 0 {
        return prev;
    }
    for _ in 1..k {
        let next = 2.0 * u * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `(1/pi) int f(x) T_k((x - b)/a) / sqrt(a^2 - (x - b)^2) dx` over
/// `[b - a, b + a]`.
pub fn chebyshev_limit_integral(f: &TestFunction, k: u32, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "half width must be positive, got {a}"
        )));
    }
    let start = MIN_RULE.max(k as usize + 8);
    adaptive(start, None, |size| {
        Ok(gauss_chebyshev(size).integrate(|u| f.eval(b + a * u) * chebyshev_t(k, u)))
    })
}

/// Classical `L_n^beta(x)` for `n = 0..=top`.
fn laguerre_classical(top: usize, beta: f64, x: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(top + 1);
    v.push(1.0);
    if top >= 1 {
        v.push(1.0 + beta - x);
    }
    for n in 1..top {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 + beta - x) * v[n] - (nf + beta) * v[n - 1]) / (nf + 1.0);
        v.push(next);
    }
    v
}

/// Physicists' `H_n(x)` for `n = 0..=top`.
fn hermite_classical(top: usize, x: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(top + 1);
    v.push(1.0);
    if top >= 1 {
        v.push(2.0 * x);
    }
    for n in 1..top {
        let next = 2.0 * x * v[n] - 2.0 * n as f64 * v[n - 1];
        v.push(next);
    }
    v
}

fn ln_factorial(n: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// Limits of the dual Hahn families in classical normalization: for
/// Laguerre
/// `(-1)^{k+l} / sqrt(h_{k-1} h_{l-1}) int f L_{k-1}^beta L_{l-1}^beta x^beta e^{-x} / Gamma(beta+1) dx`
/// with `h_j = binom(j + beta, j)`, and for Hermite
/// `1 / sqrt(2^{k+l-2} (k-1)! (l-1)!) int f H_{k-1} H_{l-1} e^{-x^2} / sqrt(pi) dx`.
pub fn dual_hahn_limit_rhs(mode: DualHahnMode, k: u32, l: u32, f: &TestFunction) -> Result<f64> {
    if k < 1 || l < 1 {
        return Err(Error::InvalidParameter(format!(
            "k and l must be >= 1, got {k} and {l}"
        )));
    }
    let (i, j) = ((k - 1) as usize, (l - 1) as usize);
    let top = i.max(j);
    let start = MIN_RULE.max(2 * (i + j) + 8);
    match mode {
        DualHahnMode::Laguerre { beta } => {
            if !(beta > -1.0) {
                return Err(Error::InvalidParameter(format!(
                    "beta must exceed -1, got {beta}"
                )));
            }
            let ln_h = |n: usize| {
                libm::lgamma(n as f64 + beta + 1.0) - libm::lgamma(beta + 1.0) - ln_factorial(n)
            };
            let sign = if (k + l).is_multiple_of(2) { 1.0 } else { -1.0 };
            let scale = sign * (-0.5 * (ln_h(i) + ln_h(j))).exp();
            let weight = CoefficientSequence::laguerre(beta);
            let integral = adaptive(start, None, |size| {
                let rule = gauss_quadrature(&truncate(&weight, size)?)?;
                rule_sum(&rule, |x| {
                    let v = laguerre_classical(top, beta, x);
                    Ok(f.eval(x) * v[i] * v[j])
                })
            })?;
            Ok(scale * integral)
        }
        DualHahnMode::Hermite => {
            let ln_norm =
                (i + j) as f64 * std::f64::consts::LN_2 + ln_factorial(i) + ln_factorial(j);
            let scale = (-0.5 * ln_norm).exp();
            let weight = CoefficientSequence::hermite();
            let integral = adaptive(start, None, |size| {
                let rule = gauss_quadrature(&truncate(&weight, size)?)?;
                rule_sum(&rule, |x| {
                    let v = hermite_classical(top, x);
                    Ok(f.eval(x) * v[i] * v[j])
                })
            })?;
            Ok(scale * integral)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRecord {
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_error: f64,
}

impl ConvergenceRecord {
    pub fn new(n: usize, lhs: f64, rhs: f64) -> Self {
        Self {
            n,
            lhs,
            rhs,
            abs_error: (lhs - rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum TableRow {
    Ok(ConvergenceRecord),
    Failed { n: usize, error: String },
}

impl TableRow {
    pub fn n(&self) -> usize {
        match self {
            TableRow::Ok(r) => r.n,
            TableRow::Failed { n, .. } => *n,
        }
    }

    pub fn record(&self) -> Option<&ConvergenceRecord> {
        match self {
            TableRow::Ok(r) => Some(r),
            TableRow::Failed { .. } => None,
        }
    }
}

/// Behaviour of `abs_error` over the last three rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    /// Strictly decreasing.
    Decreasing,
    /// All three at rounding level.
    Exact,
    NotDecreasing,
    /// Fewer than three rows.
    Insufficient,
    /// One of the three rows failed.
    Failed,
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Trend::Decreasing => "decreasing",
            Trend::Exact => "exact",
            Trend::NotDecreasing => "not decreasing",
            Trend::Insufficient => "insufficient",
            Trend::Failed => "failed",
        };
        f.write_str(s)
    }
}

fn trend_of(rows: &[TableRow]) -> Trend {
    if rows.len() < 3 {
        return Trend::Insufficient;
    }
    let tail: Option<Vec<f64>> = rows[rows.len() - 3..]
        .iter()
        .map(|r| r.record().map(|r| r.abs_error))
        .collect();
    let Some(errors) = tail else {
        return Trend::Failed;
    };
    if errors.iter().all(|&e| e <= EXACT_ERROR) {
        Trend::Exact
    } else if errors.windows(2).all(|w| w[1] < w[0]) {
        Trend::Decreasing
    } else {
        Trend::NotDecreasing
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<TableRow>,
    pub trend: Trend,
}

impl ConvergenceTable {
    pub fn last(&self) -> Option<&TableRow> {
        self.rows.last()
    }

    /// Final row succeeded with `abs_error < threshold` and the errors
    /// decrease (or are exact).
    pub fn passes(&self, threshold: f64) -> bool {
        let small = matches!(self.last(), Some(TableRow::Ok(r)) if r.abs_error < threshold);
        small && matches!(self.trend, Trend::Decreasing | Trend::Exact)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,lhs,rhs,abs_error\n");
        for row in &self.rows {
            match row {
                TableRow::Ok(r) => out.push_str(&format!(
                    "{},{:e},{:e},{:e}\n",
                    r.n, r.lhs, r.rhs, r.abs_error
                )),
                TableRow::Failed { n, .. } => out.push_str(&format!("{n},NaN,NaN,NaN\n")),
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.rows).expect("table rows serialize")
    }
}

/// `(n, lhs, rhs, |lhs - rhs|)` for each `n` in `ns`. A failing row is
/// recorded and the remaining rows are still computed.
pub fn convergence_table(
    family: &MeasureFamily,
    limit: &LimitData,
    k: i64,
    l: i64,
    f: &TestFunction,
    ns: &[usize],
) -> Result<ConvergenceTable> {
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "ns must be strictly increasing".into(),
        ));
    }
    let rhs = rhs_limit(limit, k, l, f);
    let rows: Vec<TableRow> = ns
        .iter()
        .map(|&n| {
            let outcome = rhs.clone().and_then(|rhs| {
                lhs_integral(family, n, k, l, f).map(|lhs| ConvergenceRecord::new(n, lhs, rhs))
            });
            match outcome {
                Ok(record) => TableRow::Ok(record),
                Err(e) => TableRow::Failed {
                    n,
                    error: e.to_string(),
                },
            }
        })
        .collect();
    let trend = trend_of(&rows);
    Ok(ConvergenceTable { rows, trend })
}

//! Stieltjes transforms, functions of the second kind and the 2x2 spectral
//! matrix measure of a doubly infinite Jacobi matrix.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::bilateral::{eval_vector_symbol, BilateralCoefficients};
use crate::error::{Error, Result};
use crate::jacobi::{gauss_quadrature, symmetric_tridiagonal_eigen, truncate};
use crate::recurrence::CoefficientSequence;

const FRACTION_TOLERANCE: f64 = 1e-13;
const INITIAL_DEPTH: usize = 64;
const MAX_DEPTH: usize = 100_000;
const DENOMINATOR_TOLERANCE: f64 = 1e-12;

/// Stieltjes transform of the constant tail with off-diagonal `a` and
/// diagonal `b`: the root of `a^2 t^2 - (z - b) t + 1 = 0` of smaller modulus.
fn constant_tail(a: f64, b: f64, z: Complex64) -> Complex64 {
    let w = z - b;
    if a == 0.0 {
        return 1.0 / w;
    }
    let s = (w * w - 4.0 * a * a).sqrt();
    let big = if (w + s).norm() >= (w - s).norm() {
        w + s
    } else {
        w - s
    };
    2.0 / big
}

/// `t_j = m^{(j)}(z)` for `j = 0..=keep`, the Stieltjes transforms of the
/// `j`-times shifted sequence, from a backward sweep starting at `depth`.
/// The sweep is seeded with the transform of a constant tail frozen at the
/// local coefficients, which is exact for eventually constant sequences.
fn shifted_transforms(
    coeffs: &CoefficientSequence,
    z: Complex64,
    depth: usize,
    keep: usize,
) -> Vec<Complex64> {
    let (start, mut t) = match coeffs.cutoff() {
        Some(cutoff) if cutoff <= depth => (cutoff, Complex64::new(0.0, 0.0)),
        _ => (
            depth,
            constant_tail(coeffs.a(depth + 1), coeffs.b(depth), z),
        ),
    };
    let mut out = vec![Complex64::new(0.0, 0.0); keep + 1];
    for j in (0..start).rev() {
        let a = coeffs.a(j + 1);
        t = 1.0 / (z - coeffs.b(j) - a * a * t);
        if j <= keep {
            out[j] = t;
        }
    }
    out
}

/// Deepen the backward sweep until the extracted value settles.
fn settle<F>(
    coeffs: &CoefficientSequence,
    z: Complex64,
    keep: usize,
    extract: F,
) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Complex64,
{
    let mut depth = INITIAL_DEPTH.max(2 * keep + 32);
    if coeffs.cutoff().is_some_and(|c| c <= depth) {
        return Ok(extract(&shifted_transforms(coeffs, z, depth, keep)));
    }
    let mut previous = extract(&shifted_transforms(coeffs, z, depth, keep));
    loop {
        if depth >= MAX_DEPTH {
            let last = extract(&shifted_transforms(coeffs, z, depth, keep));
            return Err(Error::FractionNoConvergence {
                depth,
                last,
                previous,
            });
        }
        depth = (2 * depth).min(MAX_DEPTH);
        let current = extract(&shifted_transforms(coeffs, z, depth, keep));
        if !current.is_finite() {
            return Err(Error::FractionNoConvergence {
                depth,
                last: current,
                previous,
            });
        }
        if (current - previous).norm() <= FRACTION_TOLERANCE * current.norm() {
            return Ok(current);
        }
        previous = current;
    }
}

/// `integral dmu(x) / (z - x)` as the continued fraction
/// `1/(z - b_0 - a_1^2/(z - b_1 - a_2^2/(...)))`.
///
/// Valid for `z` off the real axis, or real `z` outside the convex hull of
/// the support.
pub fn stieltjes_m(coeffs: &CoefficientSequence, z: Complex64) -> Result<Complex64> {
    settle(coeffs, z, 0, |t| t[0])
}

/// Function of the second kind `p~_n(z) = integral p_n(x) / (z - x) dmu(x)`,
/// normalized by `a_0 p~_{-1} = 1`.
///
/// Evaluated as `p~_0 * prod_{j=1..n} a_j m^{(j)}(z)`, which follows the
/// minimal solution without the growth of a forward recurrence.
pub fn second_kind(
    coeffs: &CoefficientSequence,
    n: i64,
    z: Complex64,
    a0: f64,
) -> Result<Complex64> {
    match n {
        i64::MIN..=-2 => Err(Error::NegativeIndex {
            index: n,
            minimum: -1,
        }),
        -1 => Ok(Complex64::new(1.0 / a0, 0.0)),
        _ => {
            let n = n as usize;
            settle(coeffs, z, n, |t| {
                (1..=n).fold(t[0], |acc, j| acc * coeffs.a(j) * t[j])
            })
        }
    }
}

/// Stieltjes transform of the matrix measure,
/// `[[m11, m12], [m12, m22]]` with `m_ij = integral dmu_ij(x) / (z - x)`.
pub fn matrix_stieltjes(
    bilateral: &BilateralCoefficients,
    z: Complex64,
) -> Result<Matrix2<Complex64>> {
    let a0 = bilateral.checked_a(0)?;
    let p0 = stieltjes_m(&bilateral.plus_side(), z)?;
    let q0 = stieltjes_m(&bilateral.minus_side(), z)?;
    let denominator = 1.0 - a0 * a0 * p0 * q0;
    if denominator.norm() < DENOMINATOR_TOLERANCE {
        return Err(Error::DegenerateDenominator {
            z,
            value: denominator,
        });
    }
    let m12 = a0 * p0 * q0 / denominator;
    Ok(Matrix2::new(q0 / denominator, m12, m12, p0 / denominator))
}

/// Columns `r = (z - J)^{-1} e_0` and `s = (z - J)^{-1} e_{-1}` of the
/// resolvent restricted to indices `first..first + len`.
#[derive(Debug, Clone)]
pub struct ResolventColumns {
    pub first: i64,
    pub r: Vec<Complex64>,
    pub s: Vec<Complex64>,
}

impl ResolventColumns {
    pub fn r_at(&self, k: i64) -> Complex64 {
        self.r[(k - self.first) as usize]
    }

    pub fn s_at(&self, k: i64) -> Complex64 {
        self.s[(k - self.first) as usize]
    }
}

/// Solve `(z - J) r = e_0` and `(z - J) s = e_{-1}` directly on the index
/// window `[-truncation, truncation]`.
pub fn resolvent_columns(
    bilateral: &BilateralCoefficients,
    z: Complex64,
    truncation: usize,
) -> Result<ResolventColumns> {
    if truncation < 1 {
        return Err(Error::InvalidParameter(
            "resolvent truncation must be at least 1".into(),
        ));
    }
    let first = -(truncation as i64);
    let len = 2 * truncation + 1;
    let index = |i: usize| first + i as i64;
    let diag: Vec<Complex64> = (0..len).map(|i| z - bilateral.b(index(i))).collect();
    // lower[i] couples positions i - 1 and i
    let lower: Vec<f64> = (0..len).map(|i| -bilateral.a(index(i))).collect();

    // Thomas algorithm shared by both right-hand sides
    let mut upper_mod = vec![Complex64::new(0.0, 0.0); len];
    let mut pivots = vec![Complex64::new(0.0, 0.0); len];
    let mut r = vec![Complex64::new(0.0, 0.0); len];
    let mut s = vec![Complex64::new(0.0, 0.0); len];
    let e0 = (0 - first) as usize;
    let em1 = e0 - 1;
    let scale = diag.iter().map(|d| d.norm()).fold(1.0_f64, f64::max);
    for i in 0..len {
        let mut pivot = diag[i];
        let mut rhs_r = Complex64::new(if i == e0 { 1.0 } else { 0.0 }, 0.0);
        let mut rhs_s = Complex64::new(if i == em1 { 1.0 } else { 0.0 }, 0.0);
        if i > 0 {
            pivot -= lower[i] * upper_mod[i - 1];
            rhs_r -= lower[i] * r[i - 1];
            rhs_s -= lower[i] * s[i - 1];
        }
        if pivot.norm() <= f64::EPSILON * scale {
            return Err(Error::SingularSystem { z, row: index(i) });
        }
        pivots[i] = pivot;
        if i + 1 < len {
            upper_mod[i] = lower[i + 1] / pivot;
        }
        r[i] = rhs_r / pivot;
        s[i] = rhs_s / pivot;
    }
    for i in (0..len - 1).rev() {
        r[i] = r[i] - upper_mod[i] * r[i + 1];
        s[i] = s[i] - upper_mod[i] * s[i + 1];
    }
    Ok(ResolventColumns { first, r, s })
}

/// Independent route to [`matrix_stieltjes`]: `[[s_{-1}, s_0], [r_{-1}, r_0]]`
/// from the truncated linear system.
pub fn resolvent_oracle(
    bilateral: &BilateralCoefficients,
    z: Complex64,
    truncation: usize,
) -> Result<Matrix2<Complex64>> {
    let cols = resolvent_columns(bilateral, z, truncation)?;
    Ok(Matrix2::new(
        cols.s_at(-1),
        cols.s_at(0),
        cols.r_at(-1),
        cols.r_at(0),
    ))
}

/// `(1/pi) Im F(x - i epsilon)`: the Poisson-smoothed density of the
/// measure whose Stieltjes transform is `F`.
pub fn invert_stieltjes<F: Fn(Complex64) -> Complex64>(transform: F, x: f64, epsilon: f64) -> f64 {
    transform(Complex64::new(x, -epsilon)).im / std::f64::consts::PI
}

/// Default smoothing for density estimates.
pub const DEFAULT_EPSILON: f64 = 1e-4;

/// Densities `(mu11, mu12, mu22)` at `x`, Richardson-extrapolated over the
/// smoothing widths `epsilon` and `epsilon / 2`.
pub fn density_matrix(bilateral: &BilateralCoefficients, x: f64, epsilon: f64) -> Result<[f64; 3]> {
    let at = |eps: f64| -> Result<[f64; 3]> {
        let m = matrix_stieltjes(bilateral, Complex64::new(x, -eps))?;
        let pi = std::f64::consts::PI;
        Ok([m[(0, 0)].im / pi, m[(0, 1)].im / pi, m[(1, 1)].im / pi])
    };
    let coarse = at(epsilon)?;
    let fine = at(epsilon / 2.0)?;
    Ok([
        2.0 * fine[0] - coarse[0],
        2.0 * fine[1] - coarse[1],
        2.0 * fine[2] - coarse[2],
    ])
}

/// Matrix orthonormal polynomial
/// `P_n(t) = [[q_n, -(a_0/a_{-1}) q_{n-1}^{(1)}], [-(a_0/a_1) p_{n-1}^{(1)}, p_n]]`.
///
/// Its rows are the vector symbols of `e_{-n-1}` and `e_n`.
pub fn matrix_orthopoly(
    bilateral: &BilateralCoefficients,
    n: usize,
    t: f64,
) -> Result<Matrix2<f64>> {
    let (q, q_cross) = eval_vector_symbol(bilateral, -(n as i64) - 1, t)?;
    let (p_cross, p) = eval_vector_symbol(bilateral, n as i64, t)?;
    Ok(Matrix2::new(q, q_cross, p_cross, p))
}

/// The 2x2 spectral matrix measure, closed form or discretized.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixMeasure {
    /// Constant matrix with diagonal `center` and off-diagonal
    /// `half_width / 2`: arcsine densities on `[center - half_width,
    /// center + half_width]`.
    Arcsine { center: f64, half_width: f64 },
    /// Limit that reduces to `J-` of the Laguerre polynomials `L^beta`:
    /// `mu11 = x^beta e^{-x} / Gamma(beta + 1)` on `[0, inf)`, `mu12 = 0`,
    /// and `mu22` the unit mass at 0 carried by the decoupled zero block.
    LaguerreHalf { beta: f64 },
    /// As `LaguerreHalf` with the Hermite weight `e^{-x^2} / sqrt(pi)`.
    HermiteHalf,
    /// Atoms `(node, weight matrix)`.
    Discrete(Vec<(f64, Matrix2<f64>)>),
}

impl MatrixMeasure {
    /// Spectral measure of the finite section on indices `-half..half-1`.
    pub fn discretize(bilateral: &BilateralCoefficients, half: usize) -> Result<Self> {
        if half < 1 {
            return Err(Error::InvalidParameter(
                "discretization needs half >= 1".into(),
            ));
        }
        let first = -(half as i64);
        let len = 2 * half;
        let diag: Vec<f64> = (0..len).map(|i| bilateral.b(first + i as i64)).collect();
        let off = (1..len)
            .map(|i| bilateral.checked_a(first + i as i64))
            .collect::<Result<Vec<f64>>>()?;
        let eig = symmetric_tridiagonal_eigen(&diag, &off, &[half - 1, half])?;
        Ok(MatrixMeasure::Discrete(
            eig.values
                .iter()
                .enumerate()
                .map(|(j, &x)| {
                    let u = eig.rows[0][j];
                    let v = eig.rows[1][j];
                    (x, Matrix2::new(u * u, u * v, u * v, v * v))
                })
                .collect(),
        ))
    }

    /// Absolutely continuous densities `(mu11, mu12, mu22)` for closed forms.
    pub fn density(&self, x: f64) -> Option<[f64; 3]> {
        let pi = std::f64::consts::PI;
        match *self {
            MatrixMeasure::Arcsine { center, half_width } => {
                let u = x - center;
                if u.abs() >= half_width {
                    return Some([0.0; 3]);
                }
                let base = 1.0 / (pi * (half_width * half_width - u * u).sqrt());
                Some([base, base * u / half_width, base])
            }
            MatrixMeasure::LaguerreHalf { beta } => {
                if x <= 0.0 {
                    return Some([0.0; 3]);
                }
                let w = (beta * x.ln() - x - libm::lgamma(beta + 1.0)).exp();
                Some([w, 0.0, 0.0])
            }
            MatrixMeasure::HermiteHalf => Some([(-x * x).exp() / pi.sqrt(), 0.0, 0.0]),
            MatrixMeasure::Discrete(_) => None,
        }
    }

    /// Atoms of a discretization with about `size` nodes; exact for
    /// polynomials of degree below `2 size` on closed forms.
    pub fn atoms(&self, size: usize) -> Result<Vec<(f64, Matrix2<f64>)>> {
        let size = size.max(1);
        let half = |coeffs: CoefficientSequence| -> Result<Vec<(f64, Matrix2<f64>)>> {
            let rule = gauss_quadrature(&truncate(&coeffs, size)?)?;
            let mut atoms: Vec<(f64, Matrix2<f64>)> = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&x, &w)| (x, Matrix2::new(w, 0.0, 0.0, 0.0)))
                .collect();
            atoms.push((0.0, Matrix2::new(0.0, 0.0, 0.0, 1.0)));
            Ok(atoms)
        };
        match self {
            MatrixMeasure::Arcsine { center, half_width } => {
                let h = std::f64::consts::PI / size as f64;
                Ok((0..size)
                    .map(|i| {
                        let u = ((i as f64 + 0.5) * h).cos();
                        let w = 1.0 / size as f64;
                        (center + half_width * u, Matrix2::new(w, w * u, w * u, w))
                    })
                    .collect())
            }
            MatrixMeasure::LaguerreHalf { beta } => half(CoefficientSequence::laguerre(*beta)),
            MatrixMeasure::HermiteHalf => half(CoefficientSequence::hermite()),
            MatrixMeasure::Discrete(atoms) => Ok(atoms.clone()),
        }
    }

    /// `integral f(x) u(x)^T dmu(x) v(x)` on a discretization of `size` nodes.
    pub fn integrate_pair<F, U, V>(&self, f: F, u: U, v: V, size: usize) -> Result<f64>
    where
        F: Fn(f64) -> f64,
        U: Fn(f64) -> Result<(f64, f64)>,
        V: Fn(f64) -> Result<(f64, f64)>,
    {
        let mut total = 0.0;
        for (x, w) in self.atoms(size)? {
            let (u1, u2) = u(x)?;
            let (v1, v2) = v(x)?;
            let form =
                u1 * (w[(0, 0)] * v1 + w[(0, 1)] * v2) + u2 * (w[(1, 0)] * v1 + w[(1, 1)] * v2);
            total += f(x) * form;
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn chebyshev_sqrt(z: Complex64) -> Complex64 {
        (z - 1.0).sqrt() * (z + 1.0).sqrt()
    }

    #[test]
    fn chebyshev_transform() {
        let m = stieltjes_m(&CoefficientSequence::chebyshev_u(), c(0.0, 2.0)).unwrap();
        let expected = (4.0 - 2.0 * 5.0_f64.sqrt()) * c(0.0, 1.0);
        assert!((m - expected).norm() < 1e-14);
        assert!((m - c(0.0, -0.472_135_954_999_579_4)).norm() < 1e-14);
    }

    #[test]
    fn one_point_measure() {
        let seq = CoefficientSequence::from_vecs(vec![], vec![0.3]).unwrap();
        let z = c(1.0, 0.5);
        assert!((stieltjes_m(&seq, z).unwrap() - 1.0 / (z - 0.3)).norm() < 1e-15);
    }

    #[test]
    fn laguerre_transform_off_support() {
        // -e E1(1), frozen from a 30-digit evaluation
        let m = stieltjes_m(&CoefficientSequence::laguerre(0.0), c(-1.0, 0.0)).unwrap();
        assert!((m.re + 0.596_347_362_323_194_1).abs() < 1e-10, "{m}");
        assert!(m.im.abs() < 1e-14);
    }

    #[test]
    fn laguerre_transform_against_quadrature() {
        let lag = CoefficientSequence::laguerre(0.0);
        let rule = gauss_quadrature(&truncate(&lag, 200).unwrap()).unwrap();
        let z = c(3.0, 1.5);
        let oracle: Complex64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| w / (z - x))
            .sum();
        let m = stieltjes_m(&lag, z).unwrap();
        assert!((m - oracle).norm() < 1e-9, "{m} vs {oracle}");
    }

    #[test]
    fn second_kind_recurrence_and_decay() {
        let cheb = CoefficientSequence::chebyshev_u();
        let z = c(0.3, 0.8);
        let p0 = second_kind(&cheb, 0, z, 0.5).unwrap();
        let p1 = second_kind(&cheb, 1, z, 0.5).unwrap();
        assert!((p1 - 2.0 * (z * p0 - 1.0)).norm() < 1e-13);
        assert_eq!(second_kind(&cheb, -1, z, 0.5).unwrap(), c(2.0, 0.0));

        let z = c(0.0, 2.0);
        let p0 = second_kind(&cheb, 0, z, 0.5).unwrap();
        let p5 = second_kind(&cheb, 5, z, 0.5).unwrap();
        assert!(p5.norm() < p0.norm());
        // three-term recurrence holds along the minimal solution
        for n in 1..10_i64 {
            let pm = second_kind(&cheb, n - 1, z, 0.5).unwrap();
            let p = second_kind(&cheb, n, z, 0.5).unwrap();
            let pp = second_kind(&cheb, n + 1, z, 0.5).unwrap();
            assert!((0.5 * pp + 0.5 * pm - z * p).norm() < 1e-13 * pm.norm());
        }
    }

    #[test]
    fn constant_matrix_transform_closed_forms() {
        let bil = BilateralCoefficients::constant(0.5, 0.0);
        let z = c(0.0, 2.0);
        let m = matrix_stieltjes(&bil, z).unwrap();
        let s = chebyshev_sqrt(z);
        assert!((m[(0, 0)] - 1.0 / s).norm() < 1e-14);
        assert!((m[(1, 1)] - c(0.0, -0.447_213_595_499_957_9)).norm() < 1e-14);
        assert!((m[(0, 1)] - (z - s) / s).norm() < 1e-14);
        assert!((m[(0, 1)] - c(-0.105_572_809_000_084_1, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn large_z_asymptotics() {
        let bil = BilateralCoefficients::from_fn(
            |k| 0.6 + 0.1 * (k as f64).cos(),
            |k| 0.2 * (k as f64 * 0.7).sin(),
        );
        let z = c(0.0, 1e6);
        let m = matrix_stieltjes(&bil, z).unwrap();
        assert!((m[(0, 0)] * z - 1.0).norm() < 1e-4);
        assert!((m[(1, 1)] * z - 1.0).norm() < 1e-4);
        assert!((m[(0, 1)] * z * z / bil.a(0) - 1.0).norm() < 1e-4);
    }

    #[test]
    fn resolvent_matches_formula_and_second_kind_ratio() {
        let bil = BilateralCoefficients::constant(0.5, 0.0);
        let z = c(0.0, 2.0);
        let direct = resolvent_oracle(&bil, z, 400).unwrap();
        let formula = matrix_stieltjes(&bil, z).unwrap();
        assert!((direct - formula).norm() < 1e-8);

        let cols = resolvent_columns(&bil, z, 400).unwrap();
        let plus = bil.plus_side();
        let p0 = second_kind(&plus, 0, z, 0.5).unwrap();
        let p1 = second_kind(&plus, 1, z, 0.5).unwrap();
        assert!((cols.r_at(1) - cols.r_at(0) * p1 / p0).norm() < 1e-12);
        let q0 = stieltjes_m(&bil.minus_side(), z).unwrap();
        assert!((cols.r_at(-1) - 0.5 * cols.r_at(0) * q0).norm() < 1e-12);
    }

    #[test]
    fn resolvent_agreement_tightens_away_from_axis() {
        let bil = BilateralCoefficients::from_fn(
            |k| 0.5 + 0.2 / (1.0 + (k * k) as f64),
            |k| 0.1 * (k as f64).tanh(),
        );
        let gap = |im: f64| {
            let z = c(0.2, im);
            (resolvent_oracle(&bil, z, 30).unwrap() - matrix_stieltjes(&bil, z).unwrap()).norm()
        };
        assert!(gap(5.0) < gap(0.5));
    }

    #[test]
    fn density_inversion_constant() {
        let bil = BilateralCoefficients::constant(0.5, 0.0);
        let d = density_matrix(&bil, 0.0, DEFAULT_EPSILON).unwrap();
        assert!((d[0] - 1.0 / std::f64::consts::PI).abs() < 1e-6);
        assert!((d[2] - 1.0 / std::f64::consts::PI).abs() < 1e-6);
        let d = density_matrix(&bil, 0.5, DEFAULT_EPSILON).unwrap();
        assert!((d[1] - 0.183_776_298_473_930_7).abs() < 1e-6);
        let outside = density_matrix(&bil, 1.5, DEFAULT_EPSILON).unwrap();
        assert!(outside.iter().all(|v| v.abs() < 1e-4));
    }

    #[test]
    fn point_mass_lorentzian() {
        let center = 0.4;
        let eps = 0.05;
        let transform = |z: Complex64| 1.0 / (z - center);
        let peak = invert_stieltjes(transform, center, eps);
        assert!((peak - 1.0 / (std::f64::consts::PI * eps)).abs() < 1e-12);
        // total mass by the trapezoid rule over a wide window
        let h = eps / 50.0;
        let mass: f64 = (-200_000..=200_000)
            .map(|i| invert_stieltjes(transform, center + i as f64 * h, eps) * h)
            .sum();
        assert!((mass - 1.0).abs() < 2e-3);
    }

    #[test]
    fn matrix_orthopoly_first_terms() {
        let bil = BilateralCoefficients::constant(0.5, 0.0);
        assert_eq!(matrix_orthopoly(&bil, 0, 0.4).unwrap(), Matrix2::identity());
        let p1 = matrix_orthopoly(&bil, 1, 0.4).unwrap();
        let expected = Matrix2::new(0.8, -1.0, -1.0, 0.8);
        assert!((p1 - expected).norm() < 1e-15);
    }

    #[test]
    fn discretized_measure_has_unit_mass() {
        let bil = BilateralCoefficients::constant(0.5, 0.0);
        let MatrixMeasure::Discrete(atoms) = MatrixMeasure::discretize(&bil, 60).unwrap() else {
            unreachable!()
        };
        let total = atoms.iter().fold(Matrix2::zeros(), |acc, (_, w)| acc + w);
        assert!((total - Matrix2::identity()).norm() < 1e-12);
    }
}

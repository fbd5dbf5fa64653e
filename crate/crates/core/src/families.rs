//! One-parameter families of measures `k -> mu_k` and the doubly infinite
//! matrices their recurrence coefficients converge to along the diagonal
//! `a_{n+j,n} -> a_j^0`, `b_{n+j,n} -> b_j^0`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bilateral::BilateralCoefficients;
use crate::error::{Error, Result};
use crate::recurrence::CoefficientSequence;
use crate::spectral::MatrixMeasure;

/// Probe parameters used when limits are estimated numerically.
pub const DEFAULT_PROBE: [usize; 4] = [1250, 2500, 5000, 10_000];

/// Relative disagreement above which a printed closed form is flagged.
const PRINTED_MISMATCH: f64 = 1e-6;

/// Support point of a discrete member with its probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticePoint {
    pub point: f64,
    pub weight: f64,
}

/// Variable in which `a_{n+k,n}` and `b_{n+k,n}` expand near the limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expansion {
    InverseN,
    InverseSqrtN,
}

impl Expansion {
    fn variable(self, n: usize) -> f64 {
        match self {
            Expansion::InverseN => 1.0 / n as f64,
            Expansion::InverseSqrtN => 1.0 / (n as f64).sqrt(),
        }
    }
}

/// How the offsets `k, l` of the limit theorem are read for a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndexConvention {
    /// `k` is the offset itself: `p_{n+k}`.
    Offset,
    /// `k >= 1` counts down from the top of a finite support: `p_{n-k}`.
    FromTop,
}

impl IndexConvention {
    pub fn offset(self, k: i64) -> Result<i64> {
        match self {
            IndexConvention::Offset => Ok(k),
            IndexConvention::FromTop if k >= 1 => Ok(-k),
            IndexConvention::FromTop => Err(Error::InvalidParameter(format!(
                "indices count down from the top of the support and must be >= 1, got {k}"
            ))),
        }
    }
}

/// Serializable description of a family: enough to rebuild the standard
/// constructors with [`FamilyDescriptor::build`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub cutoff_rule: String,
    pub scaling: String,
}

impl FamilyDescriptor {
    fn new(name: &str, params: &[(&str, f64)], cutoff_rule: &str, scaling: &str) -> Self {
        Self {
            name: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            cutoff_rule: cutoff_rule.to_string(),
            scaling: scaling.to_string(),
        }
    }

    fn param(&self, key: &str) -> Result<f64> {
        self.params.get(key).copied().ok_or_else(|| {
            Error::InvalidParameter(format!("family '{}' needs parameter '{key}'", self.name))
        })
    }

    fn param_or(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    pub fn build(&self) -> Result<(MeasureFamily, LimitData)> {
        match self.name.as_str() {
            "mab" => family_mab_perturbed(
                self.param("a")?,
                self.param("b")?,
                self.param_or("perturbation", 0.0),
            ),
            "rescaled-laguerre" => family_rescaled_power(
                RescaledBase::Laguerre {
                    alpha: self.param_or("alpha", 0.0),
                },
                self.param_or("power", 1.0),
            ),
            "rescaled-hermite" => {
                family_rescaled_power(RescaledBase::Hermite, self.param_or("power", 0.5))
            }
            "wall" => family_wall(self.param("b")?, self.param("c")?),
            "jacobi" => family_jacobi_growing(
                self.param("a")?,
                self.param("b")?,
                self.param_or("alpha", 0.0),
                self.param_or("beta", 0.0),
            ),
            "laguerre" => family_laguerre_growing(self.param("a")?, self.param_or("alpha", 0.0)),
            "dual-hahn-laguerre" => family_dual_hahn(
                self.param_or("alpha", 0.0),
                DualHahnMode::Laguerre {
                    beta: self.param("beta")?,
                },
                DualHahnScaling::Linear,
            ),
            "dual-hahn-hermite" => family_dual_hahn(
                self.param_or("alpha", 0.0),
                DualHahnMode::Hermite,
                DualHahnScaling::Hermite,
            ),
            other => Err(Error::InvalidParameter(format!(
                "no constructor for family '{other}'"
            ))),
        }
    }
}

type MemberRule = Arc<dyn Fn(usize) -> CoefficientSequence + Send + Sync>;
type SupportRule = Arc<dyn Fn(usize) -> Vec<LatticePoint> + Send + Sync>;
type RescaleRule = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// `k -> (a_{n,k}, b_{n,k})`, optionally with the explicit discrete support
/// of each member and the rescaling `c_k` that produced it.
#[derive(Clone)]
pub struct MeasureFamily {
    descriptor: FamilyDescriptor,
    members: MemberRule,
    support: Option<SupportRule>,
    rescale: Option<RescaleRule>,
    expansion: Expansion,
    convention: IndexConvention,
    first_member: usize,
}

impl fmt::Debug for MeasureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasureFamily")
            .field("descriptor", &self.descriptor)
            .field("discrete", &self.support.is_some())
            .field("expansion", &self.expansion)
            .field("first_member", &self.first_member)
            .finish()
    }
}

impl MeasureFamily {
    pub fn new<F>(descriptor: FamilyDescriptor, members: F) -> Self
    where
        F: Fn(usize) -> CoefficientSequence + Send + Sync + 'static,
    {
        Self {
            descriptor,
            members: Arc::new(members),
            support: None,
            rescale: None,
            expansion: Expansion::InverseN,
            convention: IndexConvention::Offset,
            first_member: 0,
        }
    }

    pub fn with_support<F>(mut self, support: F) -> Self
    where
        F: Fn(usize) -> Vec<LatticePoint> + Send + Sync + 'static,
    {
        self.support = Some(Arc::new(support));
        self
    }

    pub fn with_rescale<F>(mut self, rescale: F) -> Self
    where
        F: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        self.rescale = Some(Arc::new(rescale));
        self
    }

    pub fn with_expansion(mut self, expansion: Expansion) -> Self {
        self.expansion = expansion;
        self
    }

    pub fn with_convention(mut self, convention: IndexConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn convention(&self) -> IndexConvention {
        self.convention
    }

    pub fn with_first_member(mut self, first: usize) -> Self {
        self.first_member = first;
        self
    }

    pub fn name(&self) -> &str {
        &self.descriptor.name
    }

    pub fn descriptor(&self) -> &FamilyDescriptor {
        &self.descriptor
    }

    pub fn expansion(&self) -> Expansion {
        self.expansion
    }

    /// Smallest admissible parameter `k`.
    pub fn first_member(&self) -> usize {
        self.first_member
    }

    /// Recurrence coefficients of `mu_k`.
    pub fn member(&self, k: usize) -> CoefficientSequence {
        (self.members)(k)
    }

    /// `(a_{n,k}, b_{n,k})`
    pub fn coefficient(&self, n: usize, k: usize) -> (f64, f64) {
        let member = self.member(k);
        (member.a(n), member.b(n))
    }

    /// Support points and weights of `mu_k` for discrete families.
    pub fn support(&self, k: usize) -> Option<Vec<LatticePoint>> {
        self.support.as_ref().map(|s| s(k))
    }

    pub fn is_discrete(&self) -> bool {
        self.support.is_some()
    }

    pub fn rescale(&self, k: usize) -> Option<f64> {
        self.rescale.as_ref().map(|c| c(k))
    }
}

/// Closed-form constants as printed alongside a constant limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrintedLimit {
    pub off_diagonal: f64,
    pub diagonal: f64,
}

/// The limiting doubly infinite matrix of a family and what is known
/// about its spectral matrix measure.
#[derive(Debug, Clone)]
pub struct LimitData {
    pub bilateral: BilateralCoefficients,
    pub closed_form_note: String,
    /// Constants as stated in closed form, when they differ in provenance
    /// from `bilateral` (which always holds the values used downstream).
    pub printed: Option<PrintedLimit>,
    pub measure: Option<MatrixMeasure>,
    pub convention: IndexConvention,
    pub warnings: Vec<String>,
}

impl LimitData {
    /// Plotting window covering the bulk of the limit measure.
    pub fn density_window(&self) -> (f64, f64) {
        match &self.measure {
            Some(MatrixMeasure::Arcsine { center, half_width }) => {
                (center - 1.25 * half_width, center + 1.25 * half_width)
            }
            Some(MatrixMeasure::LaguerreHalf { beta }) => (-1.0, 2.0 * beta.max(0.0) + 12.0),
            Some(MatrixMeasure::HermiteHalf) => (-4.0, 4.0),
            _ => (-2.0, 2.0),
        }
    }

    fn constant(off: f64, diag: f64, note: String) -> Self {
        Self {
            bilateral: BilateralCoefficients::constant(off, diag),
            closed_form_note: note,
            printed: None,
            measure: Some(MatrixMeasure::Arcsine {
                center: diag,
                half_width: 2.0 * off,
            }),
            convention: IndexConvention::Offset,
            warnings: Vec::new(),
        }
    }

    /// Compare `(a_k^0, b_k^0)` with [`numeric_limit`] for every `k` in `ks`.
    pub fn validate(
        &self,
        family: &MeasureFamily,
        ks: impl IntoIterator<Item = i64>,
        probe: &[usize],
        tolerance: f64,
    ) -> Result<Vec<LimitCheck>> {
        ks.into_iter()
            .map(|k| {
                let numeric = numeric_limit(family, k, probe, tolerance)?;
                let expected = (self.bilateral.a(k), self.bilateral.b(k));
                let ok = (numeric.a - expected.0).abs() <= tolerance
                    && (numeric.b - expected.1).abs() <= tolerance;
                Ok(LimitCheck {
                    k,
                    numeric,
                    expected,
                    ok,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitCheck {
    pub k: i64,
    pub numeric: NumericLimit,
    pub expected: (f64, f64),
    pub ok: bool,
}

/// Extrapolated estimate of `(a_k^0, b_k^0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumericLimit {
    pub a: f64,
    pub b: f64,
    /// Disagreement between extrapolants using all probes and all but the
    /// first.
    pub a_spread: f64,
    pub b_spread: f64,
    pub converged: bool,
}

/// Polynomial extrapolation of `(h_i, s_i)` to `h = 0` (Neville).
fn extrapolate_to_zero(h: &[f64], s: &[f64]) -> f64 {
    let mut p = s.to_vec();
    let n = p.len();
    for level in 1..n {
        for i in 0..n - level {
            let (hi, hj) = (h[i], h[i + level]);
            p[i] = (hi * p[i + 1] - hj * p[i]) / (hi - hj);
        }
    }
    p[0]
}

fn extrapolate(samples: &[(f64, f64)]) -> (f64, f64) {
    let h: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let v: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let full = extrapolate_to_zero(&h, &v);
    if samples.len() < 2 {
        return (full, f64::INFINITY);
    }
    let reduced = extrapolate_to_zero(&h[1..], &v[1..]);
    (full, (full - reduced).abs())
}

/// Richardson-type estimate of `lim_n (a_{n+k,n}, b_{n+k,n})` from the
/// samples at `n` in `probe` (increasing; at most the last four are used).
pub fn numeric_limit(
    family: &MeasureFamily,
    k: i64,
    probe: &[usize],
    tolerance: f64,
) -> Result<NumericLimit> {
    if probe.is_empty() || probe.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "probe must be non-empty and increasing".into(),
        ));
    }
    let used = &probe[probe.len().saturating_sub(4)..];
    let mut a_samples = Vec::with_capacity(used.len());
    let mut b_samples = Vec::with_capacity(used.len());
    for &n in used {
        let index = n as i64 + k;
        if index < 0 || (index < 1 && k < 0) {
            return Err(Error::NegativeIndex { index, minimum: 1 });
        }
        if n < family.first_member() {
            return Err(Error::InvalidParameter(format!(
                "probe {n} is below the first member {}",
                family.first_member()
            )));
        }
        let member = family.member(n);
        let h = family.expansion().variable(n);
        a_samples.push((h, member.a(index as usize)));
        b_samples.push((h, member.b(index as usize)));
    }
    let (a, a_spread) = extrapolate(&a_samples);
    let (b, b_spread) = extrapolate(&b_samples);
    let converged =
        a_spread <= tolerance * a.abs().max(1.0) && b_spread <= tolerance * b.abs().max(1.0);
    Ok(NumericLimit {
        a,
        b,
        a_spread,
        b_spread,
        converged,
    })
}

/// Class `M(a, b)`: one measure for every parameter, with `a_n -> a/2`,
/// `b_n -> b`. The member has `a_n = a/2 + perturbation/n`, `b_n = b`.
pub fn family_mab_perturbed(
    a: f64,
    b: f64,
    perturbation: f64,
) -> Result<(MeasureFamily, LimitData)> {
    if !(a > 0.0) || !b.is_finite() || !perturbation.is_finite() || perturbation <= -a / 2.0 {
        return Err(Error::InvalidParameter(format!(
            "M(a, b) needs a > 0 and a/2 + perturbation > 0, got a = {a}, b = {b}, perturbation = {perturbation}"
        )));
    }
    let half = a / 2.0;
    let member = CoefficientSequence::from_fn(move |n| half + perturbation / n as f64, move |_| b);
    let descriptor = FamilyDescriptor::new(
        "mab",
        &[("a", a), ("b", b), ("perturbation", perturbation)],
        "none",
        "identity",
    );
    let family = MeasureFamily::new(descriptor, move |_| member.clone());
    let note = format!("constant limit a/2 = {half}, b = {b} of class M({a}, {b})");
    Ok((family, LimitData::constant(half, b, note)))
}

/// Class `M(a, b)` with the exact constant member (scaled Chebyshev U).
pub fn family_mab(a: f64, b: f64) -> Result<(MeasureFamily, LimitData)> {
    family_mab_perturbed(a, b, 0.0)
}

/// Class `M(a, b)` around a caller-supplied member whose coefficients
/// converge to `a/2` and `b`.
pub fn family_mab_with_member(
    a: f64,
    b: f64,
    member: CoefficientSequence,
) -> Result<(MeasureFamily, LimitData)> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "M(a, b) needs a > 0, got {a}"
        )));
    }
    let descriptor = FamilyDescriptor::new("mab-custom", &[("a", a), ("b", b)], "none", "identity");
    let family = MeasureFamily::new(descriptor, move |_| member.clone());
    let note = format!(
        "constant limit a/2 = {}, b = {b} of class M({a}, {b})",
        a / 2.0
    );
    Ok((family, LimitData::constant(a / 2.0, b, note)))
}

/// `a_{n,k} = a_n / c_k`, `b_{n,k} = b_n / c_k`: the polynomials `p_n(c_k x)`.
///
/// The limits `a/2 = lim a_n / c_n` and `b = lim b_n / c_n` are estimated
/// numerically; `c_{n+1} / c_n -> 1` is checked over the probe range.
pub fn family_rescaled<C>(
    base: CoefficientSequence,
    c: C,
    descriptor: FamilyDescriptor,
) -> Result<(MeasureFamily, LimitData)>
where
    C: Fn(usize) -> f64 + Send + Sync + 'static,
{
    let c: RescaleRule = Arc::new(c);
    let mut ratios = Vec::new();
    let mut a_samples = Vec::new();
    let mut b_samples = Vec::new();
    for &n in &DEFAULT_PROBE {
        let (cn, cn1) = (c(n), c(n + 1));
        if !(cn > 0.0 && cn1 >= cn) {
            return Err(Error::InvalidParameter(format!(
                "rescaling must be positive and increasing, c_{n} = {cn}, c_{} = {cn1}",
                n + 1
            )));
        }
        ratios.push(cn1 / cn - 1.0);
        let h = 1.0 / n as f64;
        a_samples.push((h, base.a(n) / cn));
        b_samples.push((h, base.b(n) / cn));
    }
    let settling = ratios.windows(2).all(|w| w[1] <= w[0]);
    if !settling || *ratios.last().unwrap_or(&1.0) > 1e-2 {
        return Err(Error::DegenerateLimit(format!(
            "c_(n+1)/c_n does not approach 1 over the probe range (last excess {:e})",
            ratios.last().unwrap_or(&f64::NAN)
        )));
    }
    let (half, _) = extrapolate(&a_samples);
    let (diag, _) = extrapolate(&b_samples);
    if !(half > 1e-6) {
        return Err(Error::DegenerateLimit(format!(
            "lim a_n / c_n = {half:e} is not positive"
        )));
    }
    let rule = Arc::clone(&c);
    let family = MeasureFamily::new(descriptor, move |k| {
        let base = base.clone();
        let ck = rule(k);
        let base_b = base.clone();
        CoefficientSequence::from_fn(move |n| base.a(n) / ck, move |n| base_b.b(n) / ck)
    })
    .with_rescale(move |k| c(k))
    .with_first_member(1);
    let note = format!(
        "rescaled measure: constant limit a/2 = {half:.9}, b = {diag:.9}, spectrum [{:.6}, {:.6}]",
        diag - 2.0 * half,
        diag + 2.0 * half
    );
    Ok((family, LimitData::constant(half, diag, note)))
}

/// Classical bases offered by [`family_rescaled_power`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RescaledBase {
    Laguerre { alpha: f64 },
    Hermite,
}

/// [`family_rescaled`] with `c_k = k^power`.
pub fn family_rescaled_power(base: RescaledBase, power: f64) -> Result<(MeasureFamily, LimitData)> {
    if !(power > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rescaling power must be positive, got {power}"
        )));
    }
    let (seq, descriptor) = match base {
        RescaledBase::Laguerre { alpha } => {
            if !(alpha > -1.0) {
                return Err(Error::InvalidParameter(format!(
                    "Laguerre needs alpha > -1, got {alpha}"
                )));
            }
            (
                CoefficientSequence::laguerre(alpha),
                FamilyDescriptor::new(
                    "rescaled-laguerre",
                    &[("alpha", alpha), ("power", power)],
                    "none",
                    "x -> k^power x",
                ),
            )
        }
        RescaledBase::Hermite => (
            CoefficientSequence::hermite(),
            FamilyDescriptor::new(
                "rescaled-hermite",
                &[("power", power)],
                "none",
                "x -> k^power x",
            ),
        ),
    };
    family_rescaled(seq, move |k| (k as f64).powf(power), descriptor)
}

fn wall_a(n: usize, b: f64, q: f64) -> f64 {
    let qn = q.powi(n as i32);
    qn * (b * (1.0 - qn) * (1.0 - b * q.powi(n as i32 - 1))).sqrt()
}

fn wall_b(n: usize, b: f64, q: f64) -> f64 {
    let qn = q.powi(n as i32);
    qn * (b + q - (1.0 + q) * b * qn)
}

/// Wall polynomials with `q = c^{1/k}`.
pub fn family_wall(b: f64, c: f64) -> Result<(MeasureFamily, LimitData)> {
    if !(b > 0.0 && b < 1.0 && c > 0.0 && c < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Wall family needs 0 < b < 1 and 0 < c < 1, got b = {b}, c = {c}"
        )));
    }
    let descriptor = FamilyDescriptor::new("wall", &[("b", b), ("c", c)], "none", "q = c^(1/k)");
    let family = MeasureFamily::new(descriptor, move |k| {
        let q = c.powf(1.0 / k.max(1) as f64);
        CoefficientSequence::from_fn(move |n| wall_a(n, b, q), move |n| wall_b(n, b, q))
    })
    .with_first_member(1);
    let half = c * (b * (1.0 - c) * (1.0 - b * c)).sqrt();
    let diag = (b + 1.0 - 2.0 * b * c) * c;
    let note =
        format!("Wall limit A/2 = c sqrt(b(1-c)(1-bc)) = {half:.9}, B = (b+1-2bc)c = {diag:.9}");
    let mut limit = LimitData::constant(half, diag, note);
    if half < 1e-3 {
        limit.warnings.push(format!(
            "A/2 = {half:e} is nearly zero; the family degenerates as c -> 1"
        ));
    }
    Ok((family, limit))
}

/// Jacobi polynomials `p_n^{(ak+alpha, bk+beta)}`.
pub fn family_jacobi_growing(
    a: f64,
    b: f64,
    alpha: f64,
    beta: f64,
) -> Result<(MeasureFamily, LimitData)> {
    if !(a > 0.0 && b > 0.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "growing Jacobi family needs a, b > 0, got a = {a}, b = {b}"
        )));
    }
    // first k with both parameters above -1
    let first = (0..)
        .find(|&k| a * k as f64 + alpha > -1.0 && b * k as f64 + beta > -1.0)
        .unwrap_or(1);
    let descriptor = FamilyDescriptor::new(
        "jacobi",
        &[("a", a), ("b", b), ("alpha", alpha), ("beta", beta)],
        "none",
        "identity",
    );
    let family = MeasureFamily::new(descriptor, move |k| {
        CoefficientSequence::jacobi(a * k as f64 + alpha, b * k as f64 + beta)
    })
    .with_first_member(first);
    let d = (a + b + 2.0).powi(2);
    let off = 2.0 * ((a + 1.0) * (b + 1.0) * (a + b + 1.0)).sqrt() / d;
    let diag = (b * b - a * a) / d;
    let note = format!(
        "Jacobi limit 2 sqrt((a+1)(b+1)(a+b+1))/(a+b+2)^2 = {off:.9}, (b^2-a^2)/(a+b+2)^2 = {diag:.9}"
    );
    Ok((family, LimitData::constant(off, diag, note)))
}

/// Laguerre polynomials `p_n^{ak+alpha}(kx)`.
///
/// The limit constants are computed from the coefficients. The closed form
/// `(a + 1, a + 2)` as usually printed is kept in `printed`; its
/// off-diagonal entry disagrees with the computed `sqrt(a + 1)` unless
/// `a = 0`, and the disagreement is reported in `warnings`.
pub fn family_laguerre_growing(a: f64, alpha: f64) -> Result<(MeasureFamily, LimitData)> {
    if !(a >= 0.0) || !(alpha > -1.0) {
        return Err(Error::InvalidParameter(format!(
            "growing Laguerre family needs a >= 0 and alpha > -1, got a = {a}, alpha = {alpha}"
        )));
    }
    let descriptor = FamilyDescriptor::new(
        "laguerre",
        &[("a", a), ("alpha", alpha)],
        "none",
        "x -> k x",
    );
    let family = MeasureFamily::new(descriptor, move |k| {
        let k = k.max(1) as f64;
        let order = a * k + alpha;
        CoefficientSequence::from_fn(
            move |n| {
                let n = n as f64;
                (n * (n + order)).sqrt() / k
            },
            move |n| (2.0 * n as f64 + order + 1.0) / k,
        )
    })
    .with_first_member(1);
    let numeric = numeric_limit(&family, 0, &DEFAULT_PROBE, 1e-8)?;
    let printed = PrintedLimit {
        off_diagonal: a + 1.0,
        diagonal: a + 2.0,
    };
    let mut limit = LimitData::constant(
        numeric.a,
        numeric.b,
        format!(
            "Laguerre limit computed from the coefficients: a^0 = {:.9} (sqrt(a+1) = {:.9}), b^0 = {:.9}; printed closed form (a+1, a+2) = ({}, {})",
            numeric.a,
            (a + 1.0).sqrt(),
            numeric.b,
            printed.off_diagonal,
            printed.diagonal
        ),
    );
    limit.printed = Some(printed);
    for (what, computed, stated) in [
        ("off-diagonal", numeric.a, printed.off_diagonal),
        ("diagonal", numeric.b, printed.diagonal),
    ] {
        if (computed - stated).abs() > PRINTED_MISMATCH * stated.abs().max(1.0) {
            limit.warnings.push(format!(
                "{what} limit: computed {computed:.9} differs from printed closed form {stated}"
            ));
        }
    }
    Ok((family, limit))
}

/// Which doubly infinite limit a dual Hahn family is scaled toward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DualHahnMode {
    /// Fixed `beta`; the limit is `J-` of Laguerre `L^beta`.
    Laguerre { beta: f64 },
    /// `beta = k/2`; the limit is `J-` of Hermite.
    Hermite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualHahnScaling {
    /// `x -> k x`
    Linear,
    /// `x -> k^{3/2} x + k^2/2`
    Hermite,
}

/// `ln |Gamma(x)|` and the sign of `Gamma(x)`.
fn ln_gamma_signed(x: f64) -> (f64, f64) {
    let (value, sign) = libm::lgamma_r(x);
    (value, if sign < 0 { -1.0 } else { 1.0 })
}

/// Dual Hahn weights `pi_j(alpha, beta, N)` on `x_j = j(j + alpha + beta + 1)`,
/// accumulated in log space.
pub fn dual_hahn_weights(alpha: f64, beta: f64, size: usize) -> Vec<f64> {
    let n = size as f64;
    let lg = |x: f64| ln_gamma_signed(x);
    (0..size)
        .map(|j| {
            let jf = j as f64;
            let mut log = lg(n).0 - lg(jf + 1.0).0 - lg(n - jf).0;
            let mut sign = 1.0;
            log += lg(beta + n).0 - lg(n + alpha + beta + jf + 1.0).0;
            log += lg(jf + alpha + 1.0).0 - lg(jf + beta + 1.0).0 - lg(alpha + 1.0).0;
            if j == 0 {
                // Gamma(s) * s = Gamma(s + 1), s = alpha + beta + 1
                let (v, s) = lg(alpha + beta + 2.0);
                log += v;
                sign *= s;
            } else {
                let (v, s) = lg(jf + alpha + beta + 1.0);
                log += v + (2.0 * jf + alpha + beta + 1.0).ln();
                sign *= s;
            }
            sign * log.exp()
        })
        .collect()
}

/// Dual Hahn polynomials `p_n(s x + t; alpha, beta_k, k)` on `k` points.
pub fn family_dual_hahn(
    alpha: f64,
    mode: DualHahnMode,
    scaling: DualHahnScaling,
) -> Result<(MeasureFamily, LimitData)> {
    if !(alpha > -1.0) {
        return Err(Error::InvalidParameter(format!(
            "dual Hahn needs alpha > -1, got {alpha}"
        )));
    }
    match (mode, scaling) {
        (DualHahnMode::Laguerre { beta }, DualHahnScaling::Linear) if beta > -1.0 => {}
        (DualHahnMode::Laguerre { beta }, DualHahnScaling::Linear) => {
            return Err(Error::InvalidParameter(format!(
                "dual Hahn needs beta > -1, got {beta}"
            )))
        }
        (DualHahnMode::Hermite, DualHahnScaling::Hermite) => {}
        _ => {
            return Err(Error::InvalidParameter(
                "dual Hahn: fixed beta pairs with x -> kx, beta = k/2 with x -> k^(3/2)x + k^2/2"
                    .into(),
            ))
        }
    }
    let beta_of = move |k: usize| match mode {
        DualHahnMode::Laguerre { beta } => beta,
        DualHahnMode::Hermite => k as f64 / 2.0,
    };
    // x = s * xi + t
    let affine = move |k: usize| {
        let kf = k as f64;
        match scaling {
            DualHahnScaling::Linear => (kf, 0.0),
            DualHahnScaling::Hermite => (kf.powf(1.5), kf * kf / 2.0),
        }
    };
    let members = move |k: usize| {
        let size = k.max(1);
        let nf = size as f64;
        let beta = beta_of(size);
        let (s, t) = affine(size);
        let raise = move |j: f64| (nf - 1.0 - j) * (alpha + 1.0 + j);
        let fall = move |j: f64| j * (nf + beta - j);
        CoefficientSequence::from_fn(
            move |n| {
                let n = n as f64;
                (fall(n) * raise(n - 1.0)).max(0.0).sqrt() / s
            },
            move |n| {
                let n = n as f64;
                (fall(n) + raise(n) - t) / s
            },
        )
        .with_cutoff(size)
    };
    let support = move |k: usize| {
        let size = k.max(1);
        let beta = beta_of(size);
        let (s, t) = affine(size);
        dual_hahn_weights(alpha, beta, size)
            .into_iter()
            .enumerate()
            .map(|(j, weight)| {
                let j = j as f64;
                LatticePoint {
                    point: (j * (j + alpha + beta + 1.0) - t) / s,
                    weight,
                }
            })
            .collect()
    };

    let (descriptor, limit, expansion) = match mode {
        DualHahnMode::Laguerre { beta } => {
            let bilateral = BilateralCoefficients::from_fn(
                move |j| {
                    if j < 0 {
                        (-(j as f64) * (beta - j as f64)).sqrt()
                    } else {
                        0.0
                    }
                },
                move |j| {
                    if j < 0 {
                        -2.0 * j as f64 + beta - 1.0
                    } else {
                        0.0
                    }
                },
            );
            (
                FamilyDescriptor::new(
                    "dual-hahn-laguerre",
                    &[("alpha", alpha), ("beta", beta)],
                    "member k has k support points",
                    "x -> k x",
                ),
                LimitData {
                    bilateral,
                    closed_form_note: format!(
                        "one-sided limit: a_j^0 = sqrt(-j(beta-j)), b_j^0 = -2j+beta-1 for j < 0, zero for j >= 0; J- of Laguerre L^{beta}"
                    ),
                    printed: None,
                    measure: Some(MatrixMeasure::LaguerreHalf { beta }),
                    convention: IndexConvention::FromTop,
                    warnings: Vec::new(),
                },
                Expansion::InverseN,
            )
        }
        DualHahnMode::Hermite => {
            let bilateral = BilateralCoefficients::from_fn(
                |j| {
                    if j < 0 {
                        (-(j as f64) / 2.0).sqrt()
                    } else {
                        0.0
                    }
                },
                |_| 0.0,
            );
            (
                FamilyDescriptor::new(
                    "dual-hahn-hermite",
                    &[("alpha", alpha)],
                    "member k has k support points",
                    "x -> k^(3/2) x + k^2/2",
                ),
                LimitData {
                    bilateral,
                    closed_form_note:
                        "one-sided limit: a_j^0 = sqrt(-j/2) for j < 0, zero otherwise, b^0 = 0; J- of Hermite"
                            .to_string(),
                    printed: None,
                    measure: Some(MatrixMeasure::HermiteHalf),
                    convention: IndexConvention::FromTop,
                    warnings: Vec::new(),
                },
                Expansion::InverseSqrtN,
            )
        }
    };
    let family = MeasureFamily::new(descriptor, members)
        .with_support(support)
        .with_rescale(move |k| affine(k).0)
        .with_expansion(expansion)
        .with_convention(IndexConvention::FromTop)
        .with_first_member(1);
    Ok((family, limit))
}

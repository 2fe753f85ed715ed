//! Factor vectors, infinite product states and finite sums of them.
//!
//! An infinite product state `⊗_α |φ_α⟩` over a countable ordered index set
//! is stored as a finite prefix of explicit factors followed by a [`TailRule`]
//! that generates every later factor. Indices are 1-based throughout.

use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// A vector in one factor space `H_α`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorVector {
    amplitudes: Vec<C64>,
    norm_sqr: f64,
}

impl FactorVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::ShapeMismatch("factor vector must have dim >= 1".into()));
        }
        if let Some(k) = amplitudes.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidAmplitude(format!(
                "entry {k} is not finite: {}",
                amplitudes[k]
            )));
        }
        let norm_sqr = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        Ok(FactorVector { amplitudes, norm_sqr })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Unit vector `e_k` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::IndexOutOfRange { index: k, len: dim });
        }
        let mut v = vec![ZERO; dim];
        v[k] = C64::new(1.0, 0.0);
        Self::new(v)
    }

    /// `|↑⟩`, the +1 eigenvector of `S_z`.
    pub fn spin_up() -> Self {
        Self::basis(2, 0).expect("valid basis vector")
    }

    /// `|↓⟩`.
    pub fn spin_down() -> Self {
        Self::basis(2, 1).expect("valid basis vector")
    }

    /// `|+⟩ = (|↑⟩ + |↓⟩)/√2`.
    pub fn spin_plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_real(&[h, h]).expect("finite")
    }

    /// `|-⟩ = (|↑⟩ - |↓⟩)/√2`.
    pub fn spin_minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_real(&[h, -h]).expect("finite")
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.norm_sqr
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr.sqrt()
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    ///
    /// Panics if the dimensions differ; state-level operations check shapes
    /// before reaching this.
    pub fn inner(&self, other: &FactorVector) -> C64 {
        assert_eq!(self.dim(), other.dim(), "factor dimension mismatch");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, c: C64) -> FactorVector {
        let amplitudes: Vec<C64> = self.amplitudes.iter().map(|a| a * c).collect();
        let norm_sqr = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        FactorVector { amplitudes, norm_sqr }
    }

    /// Divides by the modulus, keeping the phase. `None` for the zero vector.
    pub fn normalized(&self) -> Option<FactorVector> {
        if self.norm_sqr == 0.0 {
            return None;
        }
        Some(self.scale(C64::new(1.0 / self.norm(), 0.0)))
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm_sqr - 1.0).abs() <= tol
    }

    /// Entrywise comparison with absolute tolerance.
    pub fn approx_eq(&self, other: &FactorVector, tol: f64) -> bool {
        self.dim() == other.dim()
            && self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .all(|(a, b)| (a - b).norm() <= tol)
    }

    pub(crate) fn from_parts_unchecked(amplitudes: Vec<C64>) -> FactorVector {
        let norm_sqr = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        FactorVector { amplitudes, norm_sqr }
    }
}

/// Closed-form scalar deviation `d_k` driving a [`ParametricTail`].
///
/// `k` counts positions from the start of the index set (1-based). Every
/// variant carries its convergence class, so no family exists without one.
#[derive(Clone)]
pub enum Deviation {
    /// `d_k = amplitude` for `k <= last`, `0` afterwards.
    EventuallyConstant { amplitude: f64, last: usize },
    /// `d_k = amplitude * ratio^k`, `0 <= ratio < 1`.
    Geometric { amplitude: f64, ratio: f64 },
    /// `d_k = amplitude * k^-p`, `p > 0`.
    PSeries { amplitude: f64, p: f64 },
    /// Caller-supplied map. `certified_abs_sum`, when present, is the caller's
    /// certificate that `Σ_k |d_k|` is bounded by that value.
    Custom {
        name: String,
        f: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
        certified_abs_sum: Option<f64>,
    },
}

impl Deviation {
    pub fn value(&self, k: usize) -> f64 {
        match self {
            Deviation::EventuallyConstant { amplitude, last } => {
                if k <= *last {
                    *amplitude
                } else {
                    0.0
                }
            }
            Deviation::Geometric { amplitude, ratio } => amplitude * ratio.powf(k as f64),
            Deviation::PSeries { amplitude, p } => amplitude * (k as f64).powf(-p),
            Deviation::Custom { f, .. } => f(k),
        }
    }

    /// Short class tag: `eventually-constant`, `geometric`, `p-series` or
    /// `custom-certified`.
    pub fn class_name(&self) -> &'static str {
        match self {
            Deviation::EventuallyConstant { .. } => "eventually-constant",
            Deviation::Geometric { .. } => "geometric",
            Deviation::PSeries { .. } => "p-series",
            Deviation::Custom { .. } => "custom-certified",
        }
    }

    pub fn amplitude(&self) -> Option<f64> {
        match self {
            Deviation::EventuallyConstant { amplitude, .. }
            | Deviation::Geometric { amplitude, .. }
            | Deviation::PSeries { amplitude, .. } => Some(*amplitude),
            Deviation::Custom { .. } => None,
        }
    }

    /// Smallest `k0` such that `|d_k| < bound` for every `k >= k0`, when the
    /// class makes that computable.
    pub fn settles_below(&self, bound: f64) -> Option<usize> {
        match self {
            Deviation::EventuallyConstant { amplitude, last } => {
                if amplitude.abs() < bound {
                    Some(1)
                } else {
                    Some(last + 1)
                }
            }
            Deviation::Geometric { amplitude, ratio } => {
                if amplitude.abs() < bound || *ratio == 0.0 {
                    return Some(1);
                }
                // |a| r^k < bound  <=>  k > ln(bound/|a|)/ln r
                let k = ((bound / amplitude.abs()).ln() / ratio.ln()).floor() as usize + 1;
                Some(k.max(1))
            }
            Deviation::PSeries { amplitude, p } => {
                if amplitude.abs() < bound {
                    return Some(1);
                }
                let k = (amplitude.abs() / bound).powf(1.0 / p).floor() as usize + 1;
                Some(k.max(1))
            }
            Deviation::Custom { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidAmplitude(what.to_string()));
        match self {
            Deviation::EventuallyConstant { amplitude, .. } => {
                if !amplitude.is_finite() {
                    return bad("eventually-constant amplitude must be finite");
                }
            }
            Deviation::Geometric { amplitude, ratio } => {
                if !amplitude.is_finite() || !(0.0..1.0).contains(ratio) {
                    return bad("geometric family needs finite amplitude and 0 <= ratio < 1");
                }
            }
            Deviation::PSeries { amplitude, p } => {
                if !amplitude.is_finite() || !(p.is_finite() && *p > 0.0) {
                    return bad("p-series family needs finite amplitude and p > 0");
                }
            }
            Deviation::Custom {
                f, certified_abs_sum, ..
            } => {
                if let Some(b) = certified_abs_sum {
                    if !(b.is_finite() && *b >= 0.0) {
                        return bad("certified bound must be finite and nonnegative");
                    }
                }
                if let Some(k) = (1..=64).find(|&k| !f(k).is_finite()) {
                    return Err(Error::InvalidAmplitude(format!(
                        "custom deviation is not finite at k={k}"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Deviation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Deviation::EventuallyConstant { amplitude, last } => f
                .debug_struct("EventuallyConstant")
                .field("amplitude", amplitude)
                .field("last", last)
                .finish(),
            Deviation::Geometric { amplitude, ratio } => f
                .debug_struct("Geometric")
                .field("amplitude", amplitude)
                .field("ratio", ratio)
                .finish(),
            Deviation::PSeries { amplitude, p } => f
                .debug_struct("PSeries")
                .field("amplitude", amplitude)
                .field("p", p)
                .finish(),
            Deviation::Custom {
                name,
                certified_abs_sum,
                ..
            } => f
                .debug_struct("Custom")
                .field("name", name)
                .field("certified_abs_sum", certified_abs_sum)
                .finish_non_exhaustive(),
        }
    }
}

impl PartialEq for Deviation {
    fn eq(&self, other: &Self) -> bool {
        use Deviation::*;
        match (self, other) {
            (EventuallyConstant { amplitude: a, last: l }, EventuallyConstant { amplitude: b, last: m }) => {
                a == b && l == m
            }
            (Geometric { amplitude: a, ratio: r }, Geometric { amplitude: b, ratio: s }) => a == b && r == s,
            (PSeries { amplitude: a, p }, PSeries { amplitude: b, p: q }) => a == b && p == q,
            (Custom { f, .. }, Custom { f: g, .. }) => Arc::ptr_eq(f, g),
            _ => false,
        }
    }
}

/// How the deviation `d_k` moves a factor away from the base vector `v`.
#[derive(Debug, Clone, PartialEq)]
pub enum DeviationDirection {
    /// `φ_k = (1 + d_k) v`.
    Norm,
    /// `φ_k = cos(d_k) v + sin(d_k) w` with `w` a unit vector orthogonal to `v`.
    Rotation { toward: FactorVector },
}

/// Tail whose factors approach a unit base vector along a closed-form family.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricTail {
    base: FactorVector,
    direction: DeviationDirection,
    deviation: Deviation,
    normalized: bool,
    origin: usize,
}

impl ParametricTail {
    pub fn new(base: FactorVector, direction: DeviationDirection, deviation: Deviation) -> Result<Self> {
        if !base.is_unit(1e-12) {
            return Err(Error::InvalidAmplitude(format!(
                "parametric base vector must be unit norm, got norm² {}",
                base.norm_sqr()
            )));
        }
        if let DeviationDirection::Rotation { toward } = &direction {
            if toward.dim() != base.dim() {
                return Err(Error::ShapeMismatch(format!(
                    "rotation target has dim {}, base has dim {}",
                    toward.dim(),
                    base.dim()
                )));
            }
            if !toward.is_unit(1e-12) || base.inner(toward).norm() > 1e-12 {
                return Err(Error::InvalidAmplitude(
                    "rotation target must be a unit vector orthogonal to the base".into(),
                ));
            }
        }
        deviation.validate()?;
        Ok(ParametricTail {
            base,
            direction,
            deviation,
            normalized: false,
            origin: 0,
        })
    }

    pub fn base(&self) -> &FactorVector {
        &self.base
    }

    pub fn direction(&self) -> &DeviationDirection {
        &self.direction
    }

    pub fn deviation(&self) -> &Deviation {
        &self.deviation
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Deviation applied at absolute position `n`.
    pub fn deviation_at(&self, n: usize) -> f64 {
        self.deviation.value(n - self.origin)
    }

    /// Position offset relative to absolute indices.
    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn factor(&self, n: usize) -> FactorVector {
        let d = self.deviation_at(n);
        let raw = match &self.direction {
            DeviationDirection::Norm => self.base.scale(C64::new(1.0 + d, 0.0)),
            DeviationDirection::Rotation { toward } => {
                let (s, c) = d.sin_cos();
                let amps = self
                    .base
                    .amplitudes()
                    .iter()
                    .zip(toward.amplitudes())
                    .map(|(v, w)| v * c + w * s)
                    .collect();
                FactorVector::from_parts_unchecked(amps)
            }
        };
        if self.normalized {
            raw.normalized().unwrap_or(raw)
        } else {
            raw
        }
    }

    pub(crate) fn with_normalized(&self) -> ParametricTail {
        ParametricTail {
            normalized: true,
            ..self.clone()
        }
    }

    pub(crate) fn with_origin(&self, origin: usize) -> ParametricTail {
        ParametricTail { origin, ..self.clone() }
    }

    fn shifted(&self, by: usize) -> ParametricTail {
        ParametricTail {
            origin: self.origin + by,
            ..self.clone()
        }
    }
}

/// Generator of every factor beyond the explicit prefix.
#[derive(Debug, Clone, PartialEq)]
pub enum TailRule {
    /// Every later position carries the same vector.
    Constant(FactorVector),
    /// Position `n` carries `pattern[(n - 1 - origin) mod len]`.
    ///
    /// Needed for states in which a fixed fraction of all sites differs from a
    /// reference, such as one site in every `q`.
    Periodic {
        pattern: Vec<FactorVector>,
        origin: usize,
    },
    Parametric(ParametricTail),
}

impl TailRule {
    pub fn periodic(pattern: Vec<FactorVector>) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::ShapeMismatch("periodic tail needs a non-empty pattern".into()));
        }
        Ok(TailRule::Periodic { pattern, origin: 0 })
    }

    /// Factor at absolute position `n` (only meaningful past the prefix).
    pub fn factor(&self, n: usize) -> Cow<'_, FactorVector> {
        match self {
            TailRule::Constant(v) => Cow::Borrowed(v),
            TailRule::Periodic { pattern, origin } => {
                let q = pattern.len();
                // n > origin always holds for positions past the prefix
                Cow::Borrowed(&pattern[(n - 1 - origin) % q])
            }
            TailRule::Parametric(p) => Cow::Owned(p.factor(n)),
        }
    }

    /// Number of positions after which the tail repeats; 1 for constant and
    /// parametric tails (which have a single limit vector).
    pub fn period(&self) -> usize {
        match self {
            TailRule::Periodic { pattern, .. } => pattern.len(),
            _ => 1,
        }
    }

    /// The vector the tail factors approach, when there is a single one.
    pub fn limit_vector(&self) -> Option<&FactorVector> {
        match self {
            TailRule::Constant(v) => Some(v),
            TailRule::Periodic { pattern, .. } if pattern.iter().all(|v| v == &pattern[0]) => Some(&pattern[0]),
            TailRule::Periodic { .. } => None,
            TailRule::Parametric(p) => Some(p.base()),
        }
    }

    fn shifted(&self, by: usize) -> TailRule {
        match self {
            TailRule::Constant(v) => TailRule::Constant(v.clone()),
            TailRule::Periodic { pattern, origin } => TailRule::Periodic {
                pattern: pattern.clone(),
                origin: origin + by,
            },
            TailRule::Parametric(p) => TailRule::Parametric(p.shifted(by)),
        }
    }
}

/// `⊗_α |φ_α⟩` as an explicit prefix followed by a tail rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    prefix: Vec<FactorVector>,
    tail: TailRule,
    label: Option<String>,
}

impl ProductState {
    pub fn new(prefix: Vec<FactorVector>, tail: TailRule) -> Result<Self> {
        if let TailRule::Periodic { pattern, .. } = &tail {
            if pattern.is_empty() {
                return Err(Error::ShapeMismatch("periodic tail needs a non-empty pattern".into()));
            }
        }
        Ok(ProductState {
            prefix,
            tail,
            label: None,
        })
    }

    /// Same vector at every position.
    pub fn uniform(v: FactorVector) -> Self {
        ProductState {
            prefix: Vec::new(),
            tail: TailRule::Constant(v),
            label: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn prefix(&self) -> &[FactorVector] {
        &self.prefix
    }

    pub fn tail(&self) -> &TailRule {
        &self.tail
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    /// Factor at 1-based position `n`.
    pub fn factor(&self, n: usize) -> Cow<'_, FactorVector> {
        assert!(n >= 1, "positions are 1-based");
        match self.prefix.get(n - 1) {
            Some(v) => Cow::Borrowed(v),
            None => self.tail.factor(n),
        }
    }

    pub fn dim_at(&self, n: usize) -> usize {
        self.factor(n).dim()
    }

    /// Factors at positions `1..=n`.
    pub fn factors(&self, n: usize) -> impl Iterator<Item = Cow<'_, FactorVector>> + '_ {
        (1..=n).map(move |k| self.factor(k))
    }

    /// Checks that both states index factor spaces of equal dimension at
    /// every position.
    pub fn check_same_shape(&self, other: &ProductState) -> Result<()> {
        let explicit = self.prefix_len().max(other.prefix_len());
        let period = lcm(self.tail.period(), other.tail.period());
        for n in 1..=explicit + period {
            let (a, b) = (self.dim_at(n), other.dim_at(n));
            if a != b {
                return Err(Error::ShapeMismatch(format!("position {n}: dim {a} vs dim {b}")));
            }
        }
        Ok(())
    }

    /// Copies tail factors into the prefix up to position `upto`.
    pub fn materialize(&self, upto: usize) -> ProductState {
        let mut prefix = self.prefix.clone();
        for n in prefix.len() + 1..=upto {
            prefix.push(self.tail.factor(n).into_owned());
        }
        ProductState {
            prefix,
            tail: self.tail.clone(),
            label: self.label.clone(),
        }
    }

    /// Replaces the factor at position `n`, materializing the tail if needed.
    pub fn with_factor(&self, n: usize, v: FactorVector) -> ProductState {
        assert!(n >= 1, "positions are 1-based");
        let mut s = if n > self.prefix_len() {
            self.materialize(n)
        } else {
            self.clone()
        };
        s.prefix[n - 1] = v;
        s
    }

    /// New state with `v` at position 1 and every old factor shifted by one.
    pub fn prepend(&self, v: FactorVector) -> ProductState {
        let mut prefix = Vec::with_capacity(self.prefix.len() + 1);
        prefix.push(v);
        prefix.extend(self.prefix.iter().cloned());
        ProductState {
            prefix,
            tail: self.tail.shifted(1),
            label: self.label.clone(),
        }
    }

    pub(crate) fn from_parts(prefix: Vec<FactorVector>, tail: TailRule, label: Option<String>) -> Self {
        ProductState { prefix, tail, label }
    }

    /// True when every factor is unit norm within `tol`, decided from the
    /// structure of the tail.
    pub fn is_unit_normed(&self, tol: f64) -> bool {
        if !self.prefix.iter().all(|v| v.is_unit(tol)) {
            return false;
        }
        match &self.tail {
            TailRule::Constant(v) => v.is_unit(tol),
            TailRule::Periodic { pattern, .. } => pattern.iter().all(|v| v.is_unit(tol)),
            TailRule::Parametric(p) => match p.direction() {
                DeviationDirection::Rotation { .. } => true,
                DeviationDirection::Norm => {
                    if p.is_normalized() {
                        // zero-norm factors stay zero after normalization
                        match p.deviation().settles_below(0.5) {
                            Some(k0) => (self.prefix_len() + 1..k0 + p.origin() + 1).all(|n| p.factor(n).is_unit(tol)),
                            None => false,
                        }
                    } else {
                        p.deviation().amplitude() == Some(0.0)
                    }
                }
            },
        }
    }

    /// Von Neumann C-sequence test (norm product converges).
    pub fn is_c_sequence(&self) -> bool {
        crate::sectors::classify_sequence(self).is_convergent()
    }

    /// Von Neumann C0-sequence test (non-trivial convergent sequence).
    pub fn is_c0_sequence(&self) -> bool {
        crate::sectors::classify_sequence(self).is_non_trivial()
    }
}

/// `make_product_state`: validated constructor.
pub fn make_product_state(prefix: Vec<FactorVector>, tail: TailRule) -> Result<ProductState> {
    ProductState::new(prefix, tail)
}

/// Finite complex-weighted sum `Σ_m c_m ⊗_α |φ_α^m⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeState {
    terms: Vec<(C64, ProductState)>,
}

impl CompositeState {
    pub fn new(terms: Vec<(C64, ProductState)>) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::ShapeMismatch("composite state needs at least one term".into()));
        };
        if let Some(k) = terms.iter().position(|(c, _)| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidAmplitude(format!("coefficient {k} is not finite")));
        }
        for (_, s) in &terms[1..] {
            first.check_same_shape(s)?;
        }
        Ok(CompositeState { terms })
    }

    pub fn single(state: ProductState) -> Self {
        CompositeState {
            terms: vec![(C64::new(1.0, 0.0), state)],
        }
    }

    pub fn terms(&self) -> &[(C64, ProductState)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn check_same_shape(&self, other: &CompositeState) -> Result<()> {
        self.terms[0].1.check_same_shape(&other.terms[0].1)
    }
}

impl From<ProductState> for CompositeState {
    fn from(s: ProductState) -> Self {
        CompositeState::single(s)
    }
}

/// `d(Φ, Ψ) = ⟨Φ−Ψ|Φ−Ψ⟩` at truncation `n`.
///
/// Symmetric and exactly zero on identical arguments; rounding below zero is
/// clamped.
pub fn distance(a: &CompositeState, b: &CompositeState, n: usize) -> Result<f64> {
    use crate::overlaps::composite_overlap;
    a.check_same_shape(b)?;
    let aa = composite_overlap(a, a, n)?.re;
    let bb = composite_overlap(b, b, n)?.re;
    let ab = composite_overlap(a, b, n)?.re;
    let ba = composite_overlap(b, a, n)?.re;
    let d = (aa + bb) - (ab + ba);
    Ok(d.max(0.0))
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn factor_vector_rejects_bad_input() {
        assert!(matches!(FactorVector::new(vec![]), Err(Error::ShapeMismatch(_))));
        assert!(matches!(
            FactorVector::new(vec![c(f64::NAN, 0.0)]),
            Err(Error::InvalidAmplitude(_))
        ));
        assert!(matches!(
            FactorVector::new(vec![c(1.0, f64::INFINITY)]),
            Err(Error::InvalidAmplitude(_))
        ));
    }

    #[test]
    fn factor_vector_norm_is_cached() {
        let v = FactorVector::new(vec![c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        assert_eq!(v.norm_sqr(), 25.0);
        assert_eq!(v.norm(), 5.0);
        let u = v.normalized().unwrap();
        assert!((u.norm_sqr() - 1.0).abs() < 1e-15);
        assert_eq!(u.amplitudes()[1], c(0.0, 0.8));
    }

    #[test]
    fn inner_is_antilinear_in_bra() {
        let a = FactorVector::new(vec![c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let b = FactorVector::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(a.inner(&b), c(0.0, -1.0));
        assert_eq!(b.inner(&a), c(0.0, 1.0));
    }

    #[test]
    fn all_up_chain() {
        let s = make_product_state(
            vec![FactorVector::spin_up()],
            TailRule::Constant(FactorVector::spin_up()),
        )
        .unwrap();
        for n in 1..10 {
            assert_eq!(s.factor(n).as_ref(), &FactorVector::spin_up());
        }
    }

    #[test]
    fn periodic_tail_indexing() {
        let tail = TailRule::periodic(vec![FactorVector::spin_plus(), FactorVector::spin_up()]).unwrap();
        let s = ProductState::new(vec![], tail).unwrap();
        assert_eq!(s.factor(1).as_ref(), &FactorVector::spin_plus());
        assert_eq!(s.factor(2).as_ref(), &FactorVector::spin_up());
        assert_eq!(s.factor(7).as_ref(), &FactorVector::spin_plus());
        // materializing does not move the pattern
        let m = s.materialize(3);
        for n in 1..12 {
            assert_eq!(m.factor(n), s.factor(n));
        }
        // prepending shifts it by one
        let p = s.prepend(FactorVector::spin_down());
        for n in 1..12 {
            assert_eq!(p.factor(n + 1), s.factor(n));
        }
    }

    #[test]
    fn parametric_tail_factors() {
        let tail = ParametricTail::new(
            FactorVector::spin_up(),
            DeviationDirection::Norm,
            Deviation::PSeries { amplitude: 1.0, p: 2.0 },
        )
        .unwrap();
        assert!((tail.factor(2).norm() - 1.25).abs() < 1e-15);
        let rot = ParametricTail::new(
            FactorVector::spin_up(),
            DeviationDirection::Rotation {
                toward: FactorVector::spin_down(),
            },
            Deviation::Geometric {
                amplitude: 1.0,
                ratio: 0.5,
            },
        )
        .unwrap();
        let f = rot.factor(1);
        assert!((f.amplitudes()[0].re - 0.5f64.cos()).abs() < 1e-15);
        assert!((f.norm() - 1.0).abs() < 1e-15);
        let shifted = ProductState::new(vec![], TailRule::Parametric(rot.clone()))
            .unwrap()
            .prepend(FactorVector::spin_down());
        assert_eq!(shifted.factor(2).as_ref(), &rot.factor(1));
    }

    #[test]
    fn parametric_tail_validation() {
        let bad_ratio = ParametricTail::new(
            FactorVector::spin_up(),
            DeviationDirection::Norm,
            Deviation::Geometric {
                amplitude: 1.0,
                ratio: 1.5,
            },
        );
        assert!(bad_ratio.is_err());
        let not_orthogonal = ParametricTail::new(
            FactorVector::spin_up(),
            DeviationDirection::Rotation {
                toward: FactorVector::spin_plus(),
            },
            Deviation::Geometric {
                amplitude: 1.0,
                ratio: 0.5,
            },
        );
        assert!(not_orthogonal.is_err());
        let bad_custom = ParametricTail::new(
            FactorVector::spin_up(),
            DeviationDirection::Norm,
            Deviation::Custom {
                name: "nan".into(),
                f: Arc::new(|k| if k == 3 { f64::NAN } else { 0.0 }),
                certified_abs_sum: None,
            },
        );
        assert!(matches!(bad_custom, Err(Error::InvalidAmplitude(_))));
    }

    #[test]
    fn settles_below_is_tight() {
        let g = Deviation::Geometric {
            amplitude: 3.0,
            ratio: 0.5,
        };
        let k0 = g.settles_below(0.1).unwrap();
        assert!(g.value(k0).abs() < 0.1);
        assert!(g.value(k0 - 1).abs() >= 0.1);
        let p = Deviation::PSeries { amplitude: 2.0, p: 0.5 };
        let k0 = p.settles_below(0.5).unwrap();
        assert!(p.value(k0).abs() < 0.5);
        assert!(p.value(k0 - 1).abs() >= 0.5);
    }

    #[test]
    fn shape_checks() {
        let q = ProductState::uniform(FactorVector::spin_up());
        let t = ProductState::uniform(FactorVector::basis(3, 0).unwrap());
        assert!(q.check_same_shape(&t).is_err());
        let mixed = ProductState::new(
            vec![FactorVector::basis(3, 1).unwrap()],
            TailRule::Constant(FactorVector::spin_up()),
        )
        .unwrap();
        assert!(q.check_same_shape(&mixed).is_err());
        assert!(CompositeState::new(vec![(c(1.0, 0.0), q.clone()), (c(1.0, 0.0), t)]).is_err());
        assert!(CompositeState::new(vec![]).is_err());
    }

    #[test]
    fn distance_examples() {
        let up = CompositeState::single(ProductState::uniform(FactorVector::spin_up()));
        let down = CompositeState::single(ProductState::uniform(FactorVector::spin_down()));
        let plus = CompositeState::single(ProductState::uniform(FactorVector::spin_plus()));
        assert_eq!(distance(&up, &up, 17).unwrap(), 0.0);
        assert!((distance(&up, &down, 1).unwrap() - 2.0).abs() < 1e-15);
        assert!((distance(&up, &plus, 10).unwrap() - 1.9375).abs() < 1e-14);
        assert_eq!(distance(&up, &plus, 10).unwrap(), distance(&plus, &up, 10).unwrap());
    }

    #[test]
    fn trivial_scalar_state() {
        let one = FactorVector::new(vec![c(1.0, 0.0)]).unwrap();
        let s = make_product_state(vec![], TailRule::Constant(one)).unwrap();
        let ov = crate::overlaps::truncated_overlap(&s, &s, 5).unwrap();
        assert_eq!(ov, c(1.0, 0.0));
    }
}

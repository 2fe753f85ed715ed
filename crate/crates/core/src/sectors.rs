//! Sequence classes, sector equivalence and the finite-change closure.
//!
//! Two non-trivial convergent sequences are in the same sector when
//! `Σ_α |⟨φ_α|ψ_α⟩ − 1|` converges. Sectors are never enumerated; every
//! verdict is pairwise and carries a certificate that can be re-checked
//! against the states it was issued for.
//!
//! Tails are compared through their limits. Constant and periodic tails are
//! their own limit pattern; a parametric tail approaches its base vector `v`
//! with envelope `‖φ_n − v‖ ≤ |d_n|`. For two sequences approaching the same
//! `v`, the terms obey
//!
//! ```text
//! |⟨φ|ψ⟩ − 1| ≤ ‖φ−v‖‖ψ−v‖ + |⟨v|φ⟩ − 1| + |⟨v|ψ⟩ − 1|
//! ```
//!
//! so summability against `v` on both sides is enough for a same-sector
//! certificate, and summability on exactly one side proves different sectors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::ext_f64;
use crate::model::{lcm, Deviation, DeviationDirection, FactorVector, ParametricTail, ProductState, TailRule};

/// Per-term values below this are exact zeros.
pub const ZERO_TERM_TOL: f64 = 1e-12;
/// Per-term values above this are genuine gaps; in between is inconclusive.
pub const GAP_TOL: f64 = 1e-9;

/// Number of terms examined for tails that only admit numeric evidence.
const NUMERIC_BUDGET: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SequenceKind {
    NotConvergentSequence,
    ConvergentSequence,
    NonTrivialConvergentSequence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceEvidence {
    pub method: String,
    /// False when the class rests on partial sums rather than a proof.
    pub conclusive: bool,
    /// Limit of `∏ ‖φ_α‖` when known (`0`, a positive value, or `inf`).
    #[serde(with = "ext_f64::option")]
    pub norm_product: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceClass {
    pub kind: SequenceKind,
    pub evidence: SequenceEvidence,
}

impl SequenceClass {
    pub fn is_convergent(&self) -> bool {
        self.kind != SequenceKind::NotConvergentSequence
    }

    pub fn is_non_trivial(&self) -> bool {
        self.kind == SequenceKind::NonTrivialConvergentSequence
    }
}

fn class(kind: SequenceKind, method: &str, conclusive: bool, norm_product: Option<f64>) -> SequenceClass {
    SequenceClass {
        kind,
        evidence: SequenceEvidence {
            method: method.to_string(),
            conclusive,
            norm_product,
        },
    }
}

fn unit_norm(v: &FactorVector) -> bool {
    (v.norm() - 1.0).abs() <= ZERO_TERM_TOL
}

/// Classifies the norm sequence of `s` as C, C0 or neither.
pub fn classify_sequence(s: &ProductState) -> SequenceClass {
    use SequenceKind::*;
    let zero_in_prefix = s.prefix().iter().any(|v| v.norm_sqr() == 0.0);
    let prefix_norm: f64 = s.prefix().iter().map(|v| v.norm()).product();
    // A non-trivial sequence cannot contain a vanishing factor.
    let nontrivial_or_c = |method: &str, tail_limit: f64| {
        if zero_in_prefix {
            class(ConvergentSequence, method, true, Some(0.0))
        } else {
            class(
                NonTrivialConvergentSequence,
                method,
                true,
                Some(prefix_norm * tail_limit),
            )
        }
    };

    match s.tail() {
        TailRule::Constant(v) => {
            let n = v.norm();
            if unit_norm(v) {
                nontrivial_or_c("constant tail of unit norm", 1.0)
            } else if n < 1.0 {
                class(ConvergentSequence, "constant tail norm below one", true, Some(0.0))
            } else {
                class(
                    NotConvergentSequence,
                    "constant tail norm above one",
                    true,
                    Some(f64::INFINITY),
                )
            }
        }
        TailRule::Periodic { pattern, .. } => {
            let log_period: f64 = pattern.iter().map(|v| v.norm().ln()).sum();
            if pattern.iter().all(unit_norm) {
                nontrivial_or_c("periodic tail of unit norms", 1.0)
            } else if log_period < -ZERO_TERM_TOL {
                class(
                    ConvergentSequence,
                    "periodic tail with norm product below one per period",
                    true,
                    Some(0.0),
                )
            } else if log_period > ZERO_TERM_TOL {
                class(
                    NotConvergentSequence,
                    "periodic tail with norm product above one per period",
                    true,
                    Some(f64::INFINITY),
                )
            } else {
                // partial products cycle through distinct values
                class(
                    NotConvergentSequence,
                    "periodic tail with oscillating norm products",
                    true,
                    None,
                )
            }
        }
        TailRule::Parametric(p) => classify_parametric(s, p, zero_in_prefix),
    }
}

fn classify_parametric(s: &ProductState, p: &ParametricTail, zero_in_prefix: bool) -> SequenceClass {
    use SequenceKind::*;
    let start = s.prefix_len() + 1;
    let nontrivial = |method: &str, conclusive: bool| {
        if zero_in_prefix {
            class(ConvergentSequence, method, conclusive, Some(0.0))
        } else {
            class(NonTrivialConvergentSequence, method, conclusive, None)
        }
    };
    if matches!(p.direction(), DeviationDirection::Rotation { .. }) {
        return nontrivial("rotation family keeps unit norms", true);
    }
    // Norm direction: |φ_n| = |1 + d_n| (or 1 when normalized, 0 where 1 + d_n = 0).
    let dev = p.deviation();
    let zero_before = |upto_k: usize| (start..=upto_k + p.origin()).any(|n| 1.0 + p.deviation_at(n) == 0.0);
    match dev.settles_below(0.5) {
        Some(k0) => {
            if zero_before(k0) {
                return class(ConvergentSequence, "parametric tail has a zero factor", true, Some(0.0));
            }
        }
        None => {
            if zero_before(NUMERIC_BUDGET) {
                return class(ConvergentSequence, "parametric tail has a zero factor", true, Some(0.0));
            }
        }
    }
    if p.is_normalized() {
        let conclusive = !matches!(dev, Deviation::Custom { .. });
        return nontrivial("normalized family has unit norms", conclusive);
    }
    match dev {
        Deviation::EventuallyConstant { .. } => nontrivial("norm deviation vanishes eventually", true),
        Deviation::Geometric { .. } => nontrivial("geometric norm deviation is summable", true),
        Deviation::PSeries { amplitude, p: exp } => {
            if *exp > 1.0 || *amplitude == 0.0 {
                nontrivial("p-series norm deviation with p > 1 is summable", true)
            } else if *amplitude < 0.0 {
                class(
                    ConvergentSequence,
                    "p-series norm deviation with p <= 1, negative: norm product tends to 0",
                    true,
                    Some(0.0),
                )
            } else {
                class(
                    NotConvergentSequence,
                    "p-series norm deviation with p <= 1, positive: norm product diverges",
                    true,
                    Some(f64::INFINITY),
                )
            }
        }
        Deviation::Custom {
            certified_abs_sum: Some(_),
            ..
        } => nontrivial("custom family with certified absolute deviation sum", true),
        Deviation::Custom { .. } => {
            // numeric evidence only
            let half = start + NUMERIC_BUDGET / 2;
            let (mut sum, mut sum_half, mut log_norm) = (0.0f64, 0.0f64, 0.0f64);
            for n in start..start + NUMERIC_BUDGET {
                let d = p.deviation_at(n);
                sum += d.abs();
                log_norm += (1.0 + d).abs().ln();
                if n == half {
                    sum_half = sum;
                }
            }
            if sum - sum_half < GAP_TOL {
                let mut c = nontrivial("custom family: deviation partial sums settled", false);
                c.evidence.conclusive = false;
                c
            } else if log_norm > 50.0 {
                class(
                    NotConvergentSequence,
                    "custom family: norm partial products growing",
                    false,
                    None,
                )
            } else {
                class(
                    ConvergentSequence,
                    "custom family: partial sums not settled",
                    false,
                    None,
                )
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectorKind {
    SameSector,
    DifferentSector,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum SectorCertificate {
    /// Factors differ only at `differing_indices` inside the explicit region;
    /// the whole series `Σ |⟨φ_α|ψ_α⟩ − 1|` is at most `series_bound`.
    Convergent {
        differing_indices: Vec<usize>,
        #[serde(with = "ext_f64")]
        series_bound: f64,
    },
    /// In every block of `period` positions starting at `from`, some term is
    /// at least `gap`.
    ConstantGap {
        from: usize,
        period: usize,
        gap: f64,
    },
    /// The factors of `side` satisfy `|⟨v|φ_n⟩ − 1| ≥ coefficient · n^-exponent`
    /// for `n ≥ from`, where `v` is the limit vector both sequences share and
    /// `exponent ≤ 1`; the other side's series against `v` converges (or is
    /// the same divergent family with a different amplitude when `direct`).
    DivergentSeries {
        side: Side,
        from: usize,
        coefficient: f64,
        exponent: f64,
        direct: bool,
    },
    Undecided {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorVerdict {
    pub kind: SectorKind,
    pub certificate: SectorCertificate,
}

impl SectorVerdict {
    fn inconclusive(reason: impl Into<String>) -> Self {
        SectorVerdict {
            kind: SectorKind::Inconclusive,
            certificate: SectorCertificate::Undecided { reason: reason.into() },
        }
    }

    pub fn is_same(&self) -> bool {
        self.kind == SectorKind::SameSector
    }

    pub fn is_different(&self) -> bool {
        self.kind == SectorKind::DifferentSector
    }

    /// Re-checks the certificate against `a` and `b` on positions
    /// `1..=n_max`, independently of how it was produced.
    pub fn verify(&self, a: &ProductState, b: &ProductState, n_max: usize) -> bool {
        let term = |n: usize| (a.factor(n).inner(&b.factor(n)) - 1.0).norm();
        match &self.certificate {
            SectorCertificate::Convergent {
                differing_indices,
                series_bound,
            } => {
                let explicit = a.prefix_len().max(b.prefix_len());
                let listed_ok = (1..=explicit)
                    .all(|n| a.factor(n).approx_eq(&b.factor(n), ZERO_TERM_TOL) || differing_indices.contains(&n));
                let sum: f64 = (1..=n_max).map(term).sum();
                listed_ok && sum <= series_bound + 1e-9
            }
            SectorCertificate::ConstantGap { from, period, gap } => {
                let mut start = *from;
                let mut blocks = 0;
                while start + period - 1 <= n_max {
                    if !(start..start + period).any(|n| term(n) >= *gap) {
                        return false;
                    }
                    start += period;
                    blocks += 1;
                }
                blocks > 0
            }
            SectorCertificate::DivergentSeries {
                side,
                from,
                coefficient,
                exponent,
                ..
            } => {
                let s = match side {
                    Side::A => a,
                    Side::B => b,
                };
                let Some(v) = s.tail().limit_vector() else {
                    return false;
                };
                *exponent <= 1.0
                    && *coefficient > 0.0
                    && (*from..=n_max.max(*from)).all(|n| {
                        (v.inner(&s.factor(n)) - 1.0).norm() >= coefficient * (n as f64).powf(-exponent) * (1.0 - 1e-12)
                    })
            }
            SectorCertificate::Undecided { .. } => self.kind == SectorKind::Inconclusive,
        }
    }
}

/// How a tail approaches its limit pattern beyond a given position.
enum Approach {
    /// Factors equal the limit pattern.
    Exact,
    /// `Σ (‖φ_n − v‖²/2 + |⟨v|φ_n⟩ − 1|)` over the remaining positions is at most `bound`.
    Summable {
        bound: f64,
    },
    /// `|⟨v|φ_n⟩ − 1| ≥ coefficient n^-exponent` from `from` on, `exponent ≤ 1`.
    Divergent {
        from: usize,
        coefficient: f64,
        exponent: f64,
    },
    Unknown,
}

/// `Σ_{k ≥ k_start} |d_k|^m` in closed form, `None` if divergent or unknown.
fn deviation_power_sum(dev: &Deviation, k_start: usize, m: i32) -> Option<f64> {
    let ks = k_start.max(1) as f64;
    match dev {
        Deviation::EventuallyConstant { amplitude, last } => {
            let count = (*last as f64 - ks + 1.0).max(0.0);
            Some(count * amplitude.abs().powi(m))
        }
        Deviation::Geometric { amplitude, ratio } => {
            let rm = ratio.powi(m);
            Some(amplitude.abs().powi(m) * rm.powf(ks) / (1.0 - rm))
        }
        Deviation::PSeries { amplitude, p } => {
            if *amplitude == 0.0 {
                return Some(0.0);
            }
            let q = m as f64 * p;
            if q > 1.0 {
                // first term plus the integral bound on the rest
                Some(amplitude.abs().powi(m) * (ks.powf(-q) + ks.powf(1.0 - q) / (q - 1.0)))
            } else {
                None
            }
        }
        Deviation::Custom { certified_abs_sum, .. } => certified_abs_sum.map(|b| b.powi(m)),
    }
}

fn approach(tail: &TailRule, from: usize) -> Approach {
    let p = match tail {
        TailRule::Constant(_) | TailRule::Periodic { .. } => return Approach::Exact,
        TailRule::Parametric(p) => p,
    };
    let k_start = from - p.origin();
    let dev = p.deviation();
    match p.direction() {
        DeviationDirection::Rotation { .. } => {
            // ‖φ−v‖² = 4 sin²(d/2) ≤ d², 1 − cos d ≤ d²/2
            if let Some(s) = deviation_power_sum(dev, k_start, 2) {
                return Approach::Summable { bound: s };
            }
            match dev {
                Deviation::PSeries { amplitude, p: exp } => {
                    // 1 − cos x ≥ (11/24) x² once |x| ≤ 1
                    let k1 = dev.settles_below(1.0).unwrap_or(1).max(k_start);
                    Approach::Divergent {
                        from: k1 + p.origin(),
                        coefficient: 0.45 * amplitude * amplitude,
                        exponent: 2.0 * exp,
                    }
                }
                _ => Approach::Unknown,
            }
        }
        DeviationDirection::Norm if p.is_normalized() => {
            // factors are ±v, or 0 where 1 + d = 0; only finitely many differ from v
            let Some(k1) = dev.settles_below(1.0) else {
                return Approach::Unknown;
            };
            let mut bound = 0.0;
            for k in k_start..k1.max(k_start) {
                let s = 1.0 + dev.value(k);
                if s < 0.0 {
                    bound += 4.0;
                } else if s == 0.0 {
                    bound += 1.5;
                }
            }
            Approach::Summable { bound }
        }
        DeviationDirection::Norm => {
            // ‖φ−v‖ = |d|, |⟨v|φ⟩ − 1| = |d|
            match (
                deviation_power_sum(dev, k_start, 1),
                deviation_power_sum(dev, k_start, 2),
            ) {
                (Some(s1), Some(s2)) => Approach::Summable { bound: s1 + s2 / 2.0 },
                _ => Approach::Unknown,
            }
        }
    }
}

/// Same-sector decision for two non-trivial convergent sequences.
pub fn same_sector(a: &ProductState, b: &ProductState) -> Result<SectorVerdict> {
    a.check_same_shape(b)?;
    for (name, s) in [("a", a), ("b", b)] {
        let c = classify_sequence(s);
        if !c.is_non_trivial() {
            return Err(Error::PreconditionViolated(format!(
                "{name} is {:?}, not a non-trivial convergent sequence",
                c.kind
            )));
        }
    }

    let explicit = a.prefix_len().max(b.prefix_len());
    let term = |n: usize| (a.factor(n).inner(&b.factor(n)) - 1.0).norm();
    let differing: Vec<usize> = (1..=explicit)
        .filter(|&n| !a.factor(n).approx_eq(&b.factor(n), ZERO_TERM_TOL))
        .collect();
    let prefix_sum: f64 = (1..=explicit).map(term).sum();

    // Compare the limit patterns over one common period.
    let limit_a = limit_pattern(a.tail());
    let limit_b = limit_pattern(b.tail());
    let period = lcm(limit_a.period, limit_b.period);
    let mut gap = 0.0f64;
    let mut gap_offset = 0;
    for j in 0..period {
        let n = explicit + 1 + j;
        let g = (limit_a.at(n).inner(limit_b.at(n)) - 1.0).norm();
        if g > gap {
            gap = g;
            gap_offset = j;
        }
    }

    if gap > GAP_TOL {
        let parametric = [a.tail(), b.tail()]
            .into_iter()
            .filter_map(|t| match t {
                TailRule::Parametric(p) => Some(p),
                _ => None,
            })
            .collect::<Vec<_>>();
        if parametric.is_empty() {
            return Ok(SectorVerdict {
                kind: SectorKind::DifferentSector,
                certificate: SectorCertificate::ConstantGap {
                    from: explicit + 1,
                    period,
                    gap,
                },
            });
        }
        // Wait until every parametric factor is within tau of its limit; then
        // each term stays within gap/2 of the limiting gap.
        let n_gap = explicit + 1 + gap_offset;
        let (na, nb) = (limit_a.at(n_gap).norm(), limit_b.at(n_gap).norm());
        let tau = (gap / (2.0 * (na + nb + 1.0))).min(1.0);
        let mut from = explicit + 1;
        for p in parametric {
            match p.deviation().settles_below(tau) {
                Some(k) => from = from.max(k + p.origin()),
                None => {
                    return Ok(SectorVerdict::inconclusive(
                        "limit patterns differ but a custom family has no computable approach rate",
                    ))
                }
            }
        }
        return Ok(SectorVerdict {
            kind: SectorKind::DifferentSector,
            certificate: SectorCertificate::ConstantGap {
                from,
                period,
                gap: gap / 2.0,
            },
        });
    }
    if gap > ZERO_TERM_TOL {
        return Ok(SectorVerdict::inconclusive(format!(
            "limiting per-term value {gap:e} lies between {ZERO_TERM_TOL:e} and {GAP_TOL:e}"
        )));
    }

    // Same limit pattern; only parametric approach rates remain.
    let same = |bound: f64| SectorVerdict {
        kind: SectorKind::SameSector,
        certificate: SectorCertificate::Convergent {
            differing_indices: differing.clone(),
            series_bound: bound.max(0.0),
        },
    };
    if a.tail() == b.tail() {
        return Ok(same(prefix_sum));
    }
    let from = explicit + 1;
    match (approach(a.tail(), from), approach(b.tail(), from)) {
        (Approach::Exact, Approach::Exact) => Ok(same(prefix_sum)),
        (Approach::Exact, Approach::Summable { bound }) | (Approach::Summable { bound }, Approach::Exact) => {
            Ok(same(prefix_sum + bound))
        }
        (Approach::Summable { bound: x }, Approach::Summable { bound: y }) => Ok(same(prefix_sum + x + y)),
        (
            Approach::Divergent {
                from,
                coefficient,
                exponent,
            },
            Approach::Exact | Approach::Summable { .. },
        ) => Ok(divergent(Side::A, from, coefficient, exponent, false)),
        (
            Approach::Exact | Approach::Summable { .. },
            Approach::Divergent {
                from,
                coefficient,
                exponent,
            },
        ) => Ok(divergent(Side::B, from, coefficient, exponent, false)),
        (Approach::Divergent { .. }, Approach::Divergent { .. }) => {
            Ok(compare_divergent_rotations(a, b, from, prefix_sum, &differing))
        }
        _ => Ok(SectorVerdict::inconclusive(
            "custom family without a certified bound; series convergence undecidable",
        )),
    }
}

fn divergent(side: Side, from: usize, coefficient: f64, exponent: f64, direct: bool) -> SectorVerdict {
    SectorVerdict {
        kind: SectorKind::DifferentSector,
        certificate: SectorCertificate::DivergentSeries {
            side,
            from,
            coefficient,
            exponent,
            direct,
        },
    }
}

/// Two slowly rotating families toward the same vector with the same decay
/// law: `⟨φ_n|ψ_n⟩ = cos((a − b) x_n)`, so only the amplitude difference
/// matters.
fn compare_divergent_rotations(
    a: &ProductState,
    b: &ProductState,
    from: usize,
    prefix_sum: f64,
    differing: &[usize],
) -> SectorVerdict {
    let (TailRule::Parametric(pa), TailRule::Parametric(pb)) = (a.tail(), b.tail()) else {
        return SectorVerdict::inconclusive("unexpected tail combination");
    };
    let (
        DeviationDirection::Rotation { toward: wa },
        DeviationDirection::Rotation { toward: wb },
        Deviation::PSeries {
            amplitude: amp_a,
            p: p_a,
        },
        Deviation::PSeries {
            amplitude: amp_b,
            p: p_b,
        },
    ) = (pa.direction(), pb.direction(), pa.deviation(), pb.deviation())
    else {
        return SectorVerdict::inconclusive("two divergent families of different kinds");
    };
    if p_a != p_b || pa.origin() != pb.origin() || !wa.approx_eq(wb, ZERO_TERM_TOL) {
        return SectorVerdict::inconclusive("two divergent families with different decay laws or directions");
    }
    let delta = amp_a - amp_b;
    if delta.abs() <= ZERO_TERM_TOL {
        return SectorVerdict {
            kind: SectorKind::SameSector,
            certificate: SectorCertificate::Convergent {
                differing_indices: differing.to_vec(),
                series_bound: prefix_sum.max(0.0),
            },
        };
    }
    let diff = Deviation::PSeries {
        amplitude: delta,
        p: *p_a,
    };
    let k1 = diff.settles_below(1.0).unwrap_or(1).max(from - pa.origin());
    divergent(Side::A, k1 + pa.origin(), 0.45 * delta * delta, 2.0 * p_a, true)
}

struct LimitPattern<'a> {
    vectors: Vec<&'a FactorVector>,
    origin: usize,
    period: usize,
}

impl<'a> LimitPattern<'a> {
    fn at(&self, n: usize) -> &'a FactorVector {
        self.vectors[(n - 1 - self.origin) % self.period]
    }
}

fn limit_pattern(tail: &TailRule) -> LimitPattern<'_> {
    match tail {
        TailRule::Constant(v) => LimitPattern {
            vectors: vec![v],
            origin: 0,
            period: 1,
        },
        TailRule::Periodic { pattern, origin } => LimitPattern {
            vectors: pattern.iter().collect(),
            origin: *origin,
            period: pattern.len(),
        },
        TailRule::Parametric(p) => LimitPattern {
            vectors: vec![p.base()],
            origin: 0,
            period: 1,
        },
    }
}

/// Representative of the same sector with every factor of unit norm.
///
/// Each factor is divided by its modulus; phases are kept.
pub fn normed_representative(s: &ProductState) -> Result<ProductState> {
    if let Some(i) = s.prefix().iter().position(|v| v.norm_sqr() == 0.0) {
        return Err(Error::ZeroNormFactor { index: i + 1 });
    }
    let c = classify_sequence(s);
    if !c.is_non_trivial() {
        return Err(Error::PreconditionViolated(format!(
            "normed representative needs a non-trivial convergent sequence, got {:?}",
            c.kind
        )));
    }
    let prefix: Vec<FactorVector> = s
        .prefix()
        .iter()
        .map(|v| v.normalized().expect("nonzero norm checked above"))
        .collect();
    let tail = match s.tail() {
        TailRule::Constant(v) => TailRule::Constant(v.normalized().expect("unit norm tail")),
        TailRule::Periodic { pattern, origin } => TailRule::Periodic {
            pattern: pattern
                .iter()
                .map(|v| v.normalized().expect("unit norm tail"))
                .collect(),
            origin: *origin,
        },
        TailRule::Parametric(p) => match p.direction() {
            DeviationDirection::Rotation { .. } => TailRule::Parametric(p.clone()),
            DeviationDirection::Norm => TailRule::Parametric(p.with_normalized()),
        },
    };
    Ok(ProductState::from_parts(prefix, tail, s.label().map(str::to_string)))
}

/// Replaces finitely many factors. Indices past the prefix materialize the
/// tail up to the largest changed index.
pub fn apply_finite_change(s: &ProductState, changes: &BTreeMap<usize, FactorVector>) -> Result<ProductState> {
    let mut out = s.clone();
    for (&n, v) in changes {
        if n == 0 {
            return Err(Error::IndexOutOfRange { index: 0, len: 0 });
        }
        let dim = s.dim_at(n);
        if v.dim() != dim {
            return Err(Error::ShapeMismatch(format!(
                "change at position {n} has dim {}, factor space has dim {dim}",
                v.dim()
            )));
        }
        out = out.with_factor(n, v.clone());
    }
    Ok(out)
}

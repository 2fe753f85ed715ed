//! Truncated and asymptotic inner products of product states.
//!
//! `⟨Φ|Ψ⟩_N = ∏_{α ≤ N} ⟨φ_α|ψ_α⟩`. Up to 64 factors the product is formed
//! directly; beyond that it is carried as log-modulus plus phase so that
//! values such as `2^{-N/2}` survive for any `N`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{complex_vec, ext_f64};
use crate::logspace::{log_sum, LogComplex, ProductAccumulator, DIRECT_LIMIT};
use crate::model::{CompositeState, Deviation, DeviationDirection, ProductState, TailRule, C64};
use crate::products::{classify_product, ClassifyOptions, ComplexSequenceSpec, TailClass};
use crate::sectors::{same_sector, SectorKind};

fn check_truncation(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("truncation N must be at least 1".into()));
    }
    Ok(())
}

fn accumulate(a: &ProductState, b: &ProductState, n: usize) -> Result<ProductAccumulator> {
    check_truncation(n)?;
    a.check_same_shape(b)?;
    let mut acc = ProductAccumulator::new();
    for k in 1..=n {
        acc.push(a.factor(k).inner(&b.factor(k)));
        if acc.is_zero() {
            break;
        }
    }
    Ok(acc)
}

/// `∏_{α=1..N} ⟨a_α|b_α⟩`.
pub fn truncated_overlap(a: &ProductState, b: &ProductState, n: usize) -> Result<C64> {
    Ok(accumulate(a, b, n)?.value())
}

/// [`truncated_overlap`] in log form.
pub fn truncated_overlap_log(a: &ProductState, b: &ProductState, n: usize) -> Result<LogComplex> {
    Ok(accumulate(a, b, n)?.log())
}

/// `Σ_m Σ_k a_m* b_k ⟨a^m|b^k⟩_N` in log form.
pub fn composite_overlap_log(a: &CompositeState, b: &CompositeState, n: usize) -> Result<LogComplex> {
    check_truncation(n)?;
    a.check_same_shape(b)?;
    let mut terms = Vec::with_capacity(a.len() * b.len());
    for (ca, sa) in a.terms() {
        for (cb, sb) in b.terms() {
            let coeff = LogComplex::from_complex(ca.conj() * cb);
            terms.push(coeff * truncated_overlap_log(sa, sb, n)?);
        }
    }
    Ok(log_sum(&terms))
}

/// Scalar product of two composite states at truncation `N`.
pub fn composite_overlap(a: &CompositeState, b: &CompositeState, n: usize) -> Result<C64> {
    if n > DIRECT_LIMIT {
        return Ok(composite_overlap_log(a, b, n)?.to_complex());
    }
    check_truncation(n)?;
    a.check_same_shape(b)?;
    let mut sum = C64::new(0.0, 0.0);
    for (ca, sa) in a.terms() {
        for (cb, sb) in b.terms() {
            sum += ca.conj() * cb * truncated_overlap(sa, sb, n)?;
        }
    }
    Ok(sum)
}

/// Values of an overlap-like product at increasing truncations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapSweep {
    pub truncations: Vec<usize>,
    #[serde(with = "complex_vec")]
    pub values: Vec<C64>,
    /// Natural log of `|value|`; `-inf` for exact zeros.
    #[serde(with = "ext_f64::vec")]
    pub log_modulus: Vec<f64>,
}

impl OverlapSweep {
    pub(crate) fn with_capacity(n: usize) -> Self {
        OverlapSweep {
            truncations: Vec::with_capacity(n),
            values: Vec::with_capacity(n),
            log_modulus: Vec::with_capacity(n),
        }
    }

    pub(crate) fn push(&mut self, n: usize, value: LogComplex, direct: Option<C64>) {
        self.truncations.push(n);
        self.values.push(direct.unwrap_or_else(|| value.to_complex()));
        self.log_modulus.push(value.log_modulus);
    }

    pub fn len(&self) -> usize {
        self.truncations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truncations.is_empty()
    }

    pub fn log10_modulus(&self, i: usize) -> f64 {
        self.log_modulus[i] / std::f64::consts::LN_10
    }

    /// Smallest sampled `N` with `|value| < eps`, decided on the log form.
    pub fn first_below(&self, eps: f64) -> Option<usize> {
        let threshold = eps.ln();
        self.truncations
            .iter()
            .zip(&self.log_modulus)
            .find(|(_, &l)| l < threshold)
            .map(|(&n, _)| n)
    }
}

pub(crate) fn check_truncations(truncations: &[usize]) -> Result<()> {
    if truncations.first() == Some(&0) {
        return Err(Error::InvalidArgument("truncations must be at least 1".into()));
    }
    if let Some(w) = truncations.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "truncations must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// `⟨a|b⟩_N` for every `N` in `truncations`, in one pass over the factors.
pub fn overlap_sweep(a: &ProductState, b: &ProductState, truncations: &[usize]) -> Result<OverlapSweep> {
    check_truncations(truncations)?;
    a.check_same_shape(b)?;
    let mut out = OverlapSweep::with_capacity(truncations.len());
    let mut acc = ProductAccumulator::new();
    let mut k = 0;
    for &n in truncations {
        while k < n {
            k += 1;
            if acc.is_zero() {
                acc.push(C64::new(0.0, 0.0));
            } else {
                acc.push(a.factor(k).inner(&b.factor(k)));
            }
        }
        out.push(n, acc.log(), Some(acc.value()));
    }
    Ok(out)
}

/// `lim_N ⟨a|b⟩_N` for two non-trivial convergent sequences.
///
/// Different sectors give exactly 0. Within a sector the per-factor overlaps
/// form an infinite product whose (quasi-)convergence value is returned.
pub fn asymptotic_overlap(a: &ProductState, b: &ProductState) -> Result<C64> {
    let verdict = same_sector(a, b)?;
    match verdict.kind {
        SectorKind::DifferentSector => return Ok(C64::new(0.0, 0.0)),
        SectorKind::Inconclusive => {
            return Err(Error::InconclusiveSector(format!("{:?}", verdict.certificate)));
        }
        SectorKind::SameSector => {}
    }

    let explicit = a.prefix_len().max(b.prefix_len());
    let prefix: Vec<C64> = (1..=explicit).map(|n| a.factor(n).inner(&b.factor(n))).collect();
    let spec = match tail_class(a.tail(), b.tail(), explicit) {
        None => ComplexSequenceSpec::constant(prefix, C64::new(1.0, 0.0))?,
        Some(class) => {
            let (a, b) = (a.clone(), b.clone());
            ComplexSequenceSpec::closed_form(prefix, "per-factor overlap", Some(class), move |n| {
                a.factor(n).inner(&b.factor(n))
            })?
        }
    };
    let v = classify_product(&spec, ClassifyOptions::default())?;
    v.value()
        .ok_or_else(|| Error::InconclusiveProduct(format!("per-factor overlap product: {:?}", v.kind)))
}

/// Class of `n ↦ ⟨a_n|b_n⟩` past the explicit region, or `None` when every
/// tail term is 1 up to the same-sector zero tolerance.
fn tail_class(a: &TailRule, b: &TailRule, explicit: usize) -> Option<TailClass> {
    let rotating_equal = a == b
        && matches!(
            a,
            TailRule::Parametric(p) if matches!(p.direction(), DeviationDirection::Rotation { .. })
        );
    if rotating_equal {
        return None;
    }
    let classes: Vec<TailClass> = [a, b]
        .into_iter()
        .filter_map(|t| match t {
            TailRule::Parametric(p) => Some(parametric_class(p, explicit)),
            _ => None,
        })
        .collect();
    classes.into_iter().reduce(weaker)
}

fn parametric_class(p: &crate::model::ParametricTail, explicit: usize) -> TailClass {
    let rotation = matches!(p.direction(), DeviationDirection::Rotation { .. });
    if !rotation && p.is_normalized() {
        return match p.deviation().settles_below(1.0) {
            Some(k) => TailClass::EventuallyOne {
                from: (k + p.origin()).max(explicit + 1),
            },
            None => TailClass::Custom,
        };
    }
    match p.deviation() {
        Deviation::EventuallyConstant { last, .. } => TailClass::EventuallyOne {
            from: (last + 1 + p.origin()).max(explicit + 1),
        },
        Deviation::Geometric { ratio, .. } => TailClass::GeometricModulus {
            ratio: if rotation { ratio * ratio } else { *ratio },
        },
        Deviation::PSeries { p: exp, .. } => TailClass::PSeriesLogModulus {
            p: if rotation { 2.0 * exp } else { *exp },
        },
        Deviation::Custom { .. } => TailClass::Custom,
    }
}

/// The class that still holds for a product of two sequences.
fn weaker(x: TailClass, y: TailClass) -> TailClass {
    use TailClass::*;
    match (x, y) {
        (Custom, _) | (_, Custom) | (BoundedNonsummableArgument, _) | (_, BoundedNonsummableArgument) => Custom,
        (PSeriesLogModulus { p }, PSeriesLogModulus { p: q }) => PSeriesLogModulus { p: p.min(q) },
        (PSeriesLogModulus { p }, _) | (_, PSeriesLogModulus { p }) => PSeriesLogModulus { p },
        (GeometricModulus { ratio: r }, GeometricModulus { ratio: s }) => GeometricModulus { ratio: r.max(s) },
        (GeometricModulus { ratio }, _) | (_, GeometricModulus { ratio }) => GeometricModulus { ratio },
        (EventuallyOne { from: f }, EventuallyOne { from: g }) => EventuallyOne { from: f.max(g) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FactorVector, ParametricTail};
    use std::collections::BTreeMap;

    fn up() -> ProductState {
        ProductState::uniform(FactorVector::spin_up())
    }

    fn plus() -> ProductState {
        ProductState::uniform(FactorVector::spin_plus())
    }

    #[test]
    fn spin_pair_overlap() {
        let v = truncated_overlap(&up(), &plus(), 10).unwrap();
        assert!((v.re - 0.03125).abs() < 1e-16);
        assert_eq!(v.im, 0.0);
        assert_eq!(truncated_overlap(&up(), &up(), 1000).unwrap(), C64::new(1.0, 0.0));
        let deep = truncated_overlap_log(&up(), &plus(), 5000).unwrap();
        assert!((deep.log_modulus / (-2500.0 * std::f64::consts::LN_2) - 1.0).abs() < 1e-12);
        assert!(truncated_overlap(&up(), &plus(), 0).is_err());
    }

    #[test]
    fn composite_bell_like_norm() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let cat = CompositeState::new(vec![
            (C64::new(h, 0.0), up()),
            (C64::new(h, 0.0), ProductState::uniform(FactorVector::spin_down())),
        ])
        .unwrap();
        let v = composite_overlap(&cat, &cat, 8).unwrap();
        assert!((v - C64::new(1.0, 0.0)).norm() < 1e-15);
        let v = composite_overlap(&cat, &cat, 300).unwrap();
        assert!((v - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn sweep_first_below() {
        let sweep = overlap_sweep(&up(), &plus(), &(1..=200).collect::<Vec<_>>()).unwrap();
        assert_eq!(sweep.first_below(1e-6), Some(40));
        let same = overlap_sweep(&up(), &up(), &[1, 5, 50]).unwrap();
        assert_eq!(same.first_below(0.5), None);
        let v = FactorVector::from_real(&[0.9, (1.0f64 - 0.81).sqrt()]).unwrap();
        let sweep = overlap_sweep(&up(), &ProductState::uniform(v), &(1..=400).collect::<Vec<_>>()).unwrap();
        assert_eq!(sweep.first_below(1e-6), Some(132));
        assert!(overlap_sweep(&up(), &plus(), &[3, 3]).is_err());
        assert!(overlap_sweep(&up(), &plus(), &[0, 3]).is_err());
    }

    #[test]
    fn sweep_tracks_exact_zero() {
        let b = up().with_factor(3, FactorVector::spin_down());
        let sweep = overlap_sweep(&up(), &b, &[1, 2, 3, 100]).unwrap();
        assert_eq!(sweep.values[1], C64::new(1.0, 0.0));
        assert_eq!(sweep.values[2], C64::new(0.0, 0.0));
        assert_eq!(sweep.log_modulus[3], f64::NEG_INFINITY);
    }

    #[test]
    fn asymptotic_examples() {
        assert_eq!(asymptotic_overlap(&up(), &plus()).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(asymptotic_overlap(&up(), &up()).unwrap(), C64::new(1.0, 0.0));
        let b = up().with_factor(2, FactorVector::spin_down());
        assert_eq!(asymptotic_overlap(&up(), &b).unwrap(), C64::new(0.0, 0.0));
        let changes: BTreeMap<_, _> = (1..=4).map(|n| (n, FactorVector::spin_plus())).collect();
        let b = crate::sectors::apply_finite_change(&up(), &changes).unwrap();
        assert!((asymptotic_overlap(&up(), &b).unwrap().re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn asymptotic_parametric() {
        // cos(0.5^n) products converge; compare against a long direct product
        let t = ParametricTail::new(
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
        let s = ProductState::new(vec![], TailRule::Parametric(t)).unwrap();
        let got = asymptotic_overlap(&up(), &s).unwrap();
        let want: f64 = (1..200).map(|k| 0.5f64.powi(k).cos()).product();
        assert!((got.re - want).abs() < 1e-9, "{got} vs {want}");

        let t = ParametricTail::new(
            FactorVector::spin_up(),
            DeviationDirection::Rotation {
                toward: FactorVector::spin_down(),
            },
            Deviation::PSeries { amplitude: 1.0, p: 1.0 },
        )
        .unwrap();
        let s = ProductState::new(vec![], TailRule::Parametric(t)).unwrap();
        let got = asymptotic_overlap(&up(), &s).unwrap();
        // ∏ cos(1/n) = 0.3847...; partial product to 10^6 plus the tail estimate
        let mut want = 1.0f64;
        for k in 1..1_000_000u64 {
            want *= (1.0 / k as f64).cos();
        }
        want *= (-0.5e-6f64).exp();
        assert!((got.re - want).abs() < 1e-6, "{got} vs {want}");
    }
}

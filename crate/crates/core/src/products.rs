//! Convergence classification of infinite products of complex numbers.
//!
//! A product `∏ z_n` over an ordered countable index set converges to `Z` when
//! its partial products do; it quasi-converges when only `∏ |z_n|` converges,
//! in which case its value is taken to be 0. Structured tails (a constant
//! value, or a closed form with a declared class) are decided exactly; other
//! tails get a numeric verdict from their partial products, which may be
//! `Inconclusive`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{complex_serde, ext_f64};
use crate::logspace::ProductAccumulator;

type C64 = Complex64;

pub const DEFAULT_BUDGET: usize = 100_000;
pub const DEFAULT_TOL: f64 = 1e-10;

/// Relative slack used when deciding `|z| == 1` for a constant tail.
const UNIT_MODULUS_SLACK: f64 = 4.0 * f64::EPSILON;

/// Declared asymptotic behaviour of a closed-form tail `n ↦ z_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum TailClass {
    /// `z_n = 1` for every `n >= from`.
    EventuallyOne { from: usize },
    /// `|z_n - 1|` decays at least geometrically with the given ratio.
    GeometricModulus { ratio: f64 },
    /// `log z_n ≈ K n^-p` for some complex `K`.
    PSeriesLogModulus { p: f64 },
    /// `∏ |z_n|` converges to a finite nonzero value while the arguments
    /// have unbounded partial sums.
    BoundedNonsummableArgument,
    /// No structural claim; partial products only.
    Custom,
}

impl TailClass {
    pub fn tag(&self) -> &'static str {
        match self {
            TailClass::EventuallyOne { .. } => "eventually-one",
            TailClass::GeometricModulus { .. } => "geometric-modulus",
            TailClass::PSeriesLogModulus { .. } => "p-series-log-modulus",
            TailClass::BoundedNonsummableArgument => "bounded-nonsummable-argument",
            TailClass::Custom => "custom",
        }
    }
}

/// Everything after the explicit prefix.
#[derive(Clone)]
pub enum SequenceTail {
    Constant(C64),
    ClosedForm {
        name: String,
        f: Arc<dyn Fn(usize) -> C64 + Send + Sync>,
        class: Option<TailClass>,
    },
}

impl fmt::Debug for SequenceTail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceTail::Constant(z) => f.debug_tuple("Constant").field(z).finish(),
            SequenceTail::ClosedForm { name, class, .. } => f
                .debug_struct("ClosedForm")
                .field("name", name)
                .field("class", class)
                .finish_non_exhaustive(),
        }
    }
}

/// `z_1..z_P` followed by a tail. Positions are 1-based.
#[derive(Debug, Clone)]
pub struct ComplexSequenceSpec {
    prefix: Vec<C64>,
    tail: SequenceTail,
}

impl ComplexSequenceSpec {
    pub fn new(prefix: Vec<C64>, tail: SequenceTail) -> Result<Self> {
        let finite = |z: &C64| z.re.is_finite() && z.im.is_finite();
        if let Some(k) = prefix.iter().position(|z| !finite(z)) {
            return Err(Error::InvalidAmplitude(format!("prefix entry {} is not finite", k + 1)));
        }
        if let SequenceTail::Constant(z) = &tail {
            if !finite(z) {
                return Err(Error::InvalidAmplitude("constant tail value is not finite".into()));
            }
        }
        Ok(ComplexSequenceSpec { prefix, tail })
    }

    pub fn constant(prefix: Vec<C64>, z: C64) -> Result<Self> {
        Self::new(prefix, SequenceTail::Constant(z))
    }

    pub fn closed_form<F>(prefix: Vec<C64>, name: &str, class: Option<TailClass>, f: F) -> Result<Self>
    where
        F: Fn(usize) -> C64 + Send + Sync + 'static,
    {
        Self::new(
            prefix,
            SequenceTail::ClosedForm {
                name: name.to_string(),
                f: Arc::new(f),
                class,
            },
        )
    }

    pub fn prefix(&self) -> &[C64] {
        &self.prefix
    }

    pub fn tail(&self) -> &SequenceTail {
        &self.tail
    }

    /// Value at 1-based position `n`.
    pub fn term(&self, n: usize) -> C64 {
        match self.prefix.get(n - 1) {
            Some(z) => *z,
            None => match &self.tail {
                SequenceTail::Constant(z) => *z,
                SequenceTail::ClosedForm { f, .. } => f(n),
            },
        }
    }

    /// The sequence `|z_n|`, with the class carried over where it still holds.
    pub fn modulus(&self) -> ComplexSequenceSpec {
        let prefix = self.prefix.iter().map(|z| C64::new(z.norm(), 0.0)).collect();
        let tail = match &self.tail {
            SequenceTail::Constant(z) => SequenceTail::Constant(C64::new(z.norm(), 0.0)),
            SequenceTail::ClosedForm { name, f, class } => {
                let f = Arc::clone(f);
                let class = match class {
                    Some(c @ TailClass::EventuallyOne { .. })
                    | Some(c @ TailClass::GeometricModulus { .. })
                    | Some(c @ TailClass::PSeriesLogModulus { .. }) => Some(*c),
                    Some(TailClass::BoundedNonsummableArgument) | Some(TailClass::Custom) => Some(TailClass::Custom),
                    None => None,
                };
                SequenceTail::ClosedForm {
                    name: format!("|{name}|"),
                    f: Arc::new(move |n| C64::new(f(n).norm(), 0.0)),
                    class,
                }
            }
        };
        ComplexSequenceSpec { prefix, tail }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub budget: usize,
    pub tol: f64,
    /// Refuse numeric classification of tails without a structural class.
    pub require_exact: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            budget: DEFAULT_BUDGET,
            tol: DEFAULT_TOL,
            require_exact: false,
        }
    }
}

impl ClassifyOptions {
    pub fn new(budget: usize, tol: f64) -> Self {
        ClassifyOptions {
            budget,
            tol,
            require_exact: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum VerdictKind {
    ConvergesTo {
        #[serde(with = "complex_serde")]
        value: C64,
    },
    QuasiConvergesToZero,
    Diverges,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialSample {
    pub n: usize,
    #[serde(with = "complex_serde")]
    pub value: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub method: String,
    pub terms_examined: usize,
    pub partial_products: Vec<PartialSample>,
    /// `Σ log|z_n|` over the examined terms.
    #[serde(with = "ext_f64")]
    pub log_modulus_sum: f64,
    /// Change of the unwrapped argument sum over the last half of the
    /// examined terms.
    #[serde(with = "ext_f64")]
    pub argument_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceVerdict {
    #[serde(flatten)]
    pub kind: VerdictKind,
    pub diagnostics: Diagnostics,
}

impl ConvergenceVerdict {
    /// Converges in the quasi sense (including to zero).
    pub fn is_quasi_convergent(&self) -> bool {
        matches!(
            self.kind,
            VerdictKind::ConvergesTo { .. } | VerdictKind::QuasiConvergesToZero
        )
    }

    pub fn value(&self) -> Option<C64> {
        match self.kind {
            VerdictKind::ConvergesTo { value } => Some(value),
            VerdictKind::QuasiConvergesToZero => Some(C64::new(0.0, 0.0)),
            _ => None,
        }
    }
}

/// `log z` with full relative precision near `z = 1`.
fn log_near_one(z: C64) -> C64 {
    let w = z - 1.0;
    let log_mod = 0.5 * (2.0 * w.re + w.norm_sqr()).ln_1p();
    C64::new(log_mod, z.im.atan2(z.re))
}

/// Running statistics over examined terms.
struct Walk {
    acc: ProductAccumulator,
    log_mod: f64,
    arg: f64,
    examined: usize,
    samples: Vec<PartialSample>,
    next_sample: usize,
}

impl Walk {
    fn new() -> Self {
        Walk {
            acc: ProductAccumulator::new(),
            log_mod: 0.0,
            arg: 0.0,
            examined: 0,
            samples: Vec::new(),
            next_sample: 1,
        }
    }

    /// Returns `false` once an exact zero has been seen.
    fn push(&mut self, n: usize, z: C64) -> bool {
        self.examined = n;
        self.acc.push(z);
        if self.acc.is_zero() {
            self.log_mod = f64::NEG_INFINITY;
            self.samples.push(PartialSample {
                n,
                value: C64::new(0.0, 0.0),
            });
            return false;
        }
        let l = log_near_one(z);
        self.log_mod += l.re;
        self.arg += l.im;
        if n >= self.next_sample {
            self.samples.push(PartialSample {
                n,
                value: self.acc.value(),
            });
            while self.next_sample <= n {
                self.next_sample *= 2;
            }
        }
        true
    }

    fn finish(mut self, method: &str, drift: f64) -> Diagnostics {
        if self.samples.last().map(|s| s.n) != Some(self.examined) && self.examined > 0 {
            self.samples.push(PartialSample {
                n: self.examined,
                value: self.acc.value(),
            });
        }
        Diagnostics {
            method: method.to_string(),
            terms_examined: self.examined,
            partial_products: self.samples,
            log_modulus_sum: self.log_mod,
            argument_drift: drift,
        }
    }
}

fn verdict(kind: VerdictKind, diagnostics: Diagnostics) -> ConvergenceVerdict {
    ConvergenceVerdict { kind, diagnostics }
}

fn converges(value: C64) -> VerdictKind {
    VerdictKind::ConvergesTo { value }
}

/// Classifies `∏ z_n`.
pub fn classify_product(seq: &ComplexSequenceSpec, opts: ClassifyOptions) -> Result<ConvergenceVerdict> {
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tol must be positive, got {}",
            opts.tol
        )));
    }
    if opts.budget < seq.prefix.len() {
        return Err(Error::InvalidArgument(format!(
            "budget {} is smaller than the prefix length {}",
            opts.budget,
            seq.prefix.len()
        )));
    }
    if opts.require_exact {
        if let SequenceTail::ClosedForm { name, class, .. } = &seq.tail {
            if matches!(class, None | Some(TailClass::Custom)) {
                return Err(Error::UndeclaredTailClass(name.clone()));
            }
        }
    }

    let mut walk = Walk::new();
    for (i, z) in seq.prefix.iter().enumerate() {
        if !walk.push(i + 1, *z) {
            return Ok(verdict(
                converges(C64::new(0.0, 0.0)),
                walk.finish("zero factor in prefix", 0.0),
            ));
        }
    }
    let p = seq.prefix.len();

    match &seq.tail {
        SequenceTail::Constant(z) => Ok(classify_constant_tail(walk, p, *z, opts)),
        SequenceTail::ClosedForm { f, class, .. } => {
            let f = f.as_ref();
            match class.unwrap_or(TailClass::Custom) {
                TailClass::EventuallyOne { from } => Ok(classify_eventually_one(walk, p, f, from, opts)),
                TailClass::GeometricModulus { ratio } => Ok(classify_geometric(walk, p, f, ratio, opts)),
                TailClass::PSeriesLogModulus { p: exponent } => Ok(classify_p_series(walk, p, f, exponent, opts)),
                TailClass::BoundedNonsummableArgument => Ok(classify_nonsummable_argument(walk, p, f, opts)),
                TailClass::Custom => Ok(classify_numeric(walk, p, f, opts)),
            }
        }
    }
}

/// Value of the product in the quasi-convergence sense.
pub fn quasi_convergence_value(seq: &ComplexSequenceSpec, opts: ClassifyOptions) -> Result<C64> {
    let v = classify_product(seq, opts)?;
    v.value()
        .ok_or_else(|| Error::NotQuasiConvergent(format!("{:?}", v.kind)))
}

fn classify_constant_tail(walk: Walk, p: usize, z: C64, opts: ClassifyOptions) -> ConvergenceVerdict {
    let prefix_value = walk.acc.value();
    let prefix_log = walk.log_mod;
    let prefix_arg = walk.arg;
    let remaining = opts.budget.saturating_sub(p) as f64;
    let mut diag = walk.finish("closed form for constant tail", 0.0);

    if z == C64::new(0.0, 0.0) {
        diag.log_modulus_sum = f64::NEG_INFINITY;
        return verdict(converges(z), diag);
    }
    let log_z = log_near_one(z);
    diag.log_modulus_sum = prefix_log + remaining * log_z.re;
    diag.argument_drift = 0.5 * remaining * log_z.im;
    // partial products at p + 2^k, evaluated in closed form
    let mut k = 1usize;
    while p + k <= opts.budget {
        let lm = prefix_log + k as f64 * log_z.re;
        let ph = prefix_arg + k as f64 * log_z.im;
        diag.partial_products.push(PartialSample {
            n: p + k,
            value: if lm < -745.0 {
                C64::new(0.0, 0.0)
            } else {
                C64::from_polar(lm.exp(), ph)
            },
        });
        k *= 2;
    }

    if z == C64::new(1.0, 0.0) {
        return verdict(converges(prefix_value), diag);
    }
    if prefix_value == C64::new(0.0, 0.0) {
        return verdict(converges(prefix_value), diag);
    }
    let m = z.norm();
    let kind = if m < 1.0 - UNIT_MODULUS_SLACK {
        converges(C64::new(0.0, 0.0))
    } else if m > 1.0 + UNIT_MODULUS_SLACK {
        VerdictKind::Diverges
    } else {
        // unit modulus, constant nonzero argument: not summable
        VerdictKind::QuasiConvergesToZero
    };
    verdict(kind, diag)
}

fn classify_eventually_one(
    mut walk: Walk,
    p: usize,
    f: &(dyn Fn(usize) -> C64 + Send + Sync),
    from: usize,
    opts: ClassifyOptions,
) -> ConvergenceVerdict {
    let last = from.saturating_sub(1);
    if last > opts.budget {
        return verdict(
            VerdictKind::Inconclusive,
            walk.finish("eventually-one: budget below onset", 0.0),
        );
    }
    for n in p + 1..=last {
        if !walk.push(n, f(n)) {
            return verdict(
                converges(C64::new(0.0, 0.0)),
                walk.finish("eventually-one: zero factor", 0.0),
            );
        }
    }
    let value = walk.acc.value();
    verdict(converges(value), walk.finish("eventually-one: finite product", 0.0))
}

fn classify_geometric(
    mut walk: Walk,
    p: usize,
    f: &(dyn Fn(usize) -> C64 + Send + Sync),
    ratio: f64,
    opts: ClassifyOptions,
) -> ConvergenceVerdict {
    const MIN_TERMS: usize = 8;
    for n in p + 1..=opts.budget {
        let z = f(n);
        if !walk.push(n, z) {
            return verdict(
                converges(C64::new(0.0, 0.0)),
                walk.finish("geometric-modulus: zero factor", 0.0),
            );
        }
        let remainder = log_near_one(z).norm() * ratio / (1.0 - ratio);
        let current = walk.acc.value();
        if n >= p + MIN_TERMS && current.norm().max(1.0) * remainder.exp_m1() < opts.tol {
            return verdict(converges(current), walk.finish("geometric-modulus: tail bound", 0.0));
        }
    }
    verdict(
        VerdictKind::Inconclusive,
        walk.finish("geometric-modulus: budget exhausted", 0.0),
    )
}

/// Richardson elimination of the error terms `n^-e` for each exponent, using
/// partial sums at `n, 2n, 4n, ...`.
fn richardson(sums: &[C64], exponents: &[f64]) -> C64 {
    let mut level: Vec<C64> = sums.to_vec();
    for &e in exponents {
        if level.len() < 2 {
            break;
        }
        let w = 2f64.powf(e);
        level = level.windows(2).map(|s| (s[1] * w - s[0]) / (w - 1.0)).collect();
    }
    level[level.len() - 1]
}

fn classify_p_series(
    mut walk: Walk,
    p: usize,
    f: &(dyn Fn(usize) -> C64 + Send + Sync),
    exponent: f64,
    opts: ClassifyOptions,
) -> ConvergenceVerdict {
    if exponent > 1.0 {
        // S(n) = S - A n^(1-p) - B n^(-p) - C n^(-p-1) - ...
        let exps = [exponent - 1.0, exponent, exponent + 1.0];
        let mut checkpoint = (p + 1).max(32);
        let mut log_sum = C64::new(0.0, 0.0);
        let mut sums: Vec<C64> = Vec::new();
        let mut previous: Option<C64> = None;
        let prefix_log = C64::new(walk.log_mod, walk.arg);
        let mut n = p;
        while checkpoint <= opts.budget {
            while n < checkpoint {
                n += 1;
                let z = f(n);
                if !walk.push(n, z) {
                    return verdict(converges(C64::new(0.0, 0.0)), walk.finish("p-series: zero factor", 0.0));
                }
                log_sum += log_near_one(z);
            }
            sums.push(log_sum);
            if sums.len() > exps.len() {
                let window = &sums[sums.len() - exps.len() - 1..];
                let estimate = (prefix_log + richardson(window, &exps)).exp();
                if let Some(prev) = previous {
                    if (estimate - prev).norm() < opts.tol {
                        return verdict(
                            converges(estimate),
                            walk.finish("p-series: Richardson-extrapolated partial products", 0.0),
                        );
                    }
                }
                previous = Some(estimate);
            }
            checkpoint *= 2;
        }
        return verdict(
            VerdictKind::Inconclusive,
            walk.finish("p-series: extrapolation did not settle within budget", 0.0),
        );
    }

    // Non-summable logarithms: the sign of Re K decides the modulus.
    let half = p + (opts.budget - p) / 2;
    let (mut arg_half, mut mod_half) = (0.0, 0.0);
    let mut last = C64::new(1.0, 0.0);
    for n in p + 1..=opts.budget {
        last = f(n);
        if !walk.push(n, last) {
            return verdict(converges(C64::new(0.0, 0.0)), walk.finish("p-series: zero factor", 0.0));
        }
        if n == half {
            arg_half = walk.arg;
            mod_half = walk.log_mod;
        }
    }
    let drift = walk.arg - arg_half;
    let n = walk.examined.max(1) as f64;
    let k = log_near_one(last) * n.powf(exponent);
    let kind = if k.re < -1e-9 * k.norm() {
        converges(C64::new(0.0, 0.0))
    } else if k.re > 1e-9 * k.norm() {
        VerdictKind::Diverges
    } else if k.im != 0.0 && (walk.log_mod - mod_half).abs() < opts.tol {
        VerdictKind::QuasiConvergesToZero
    } else {
        VerdictKind::Inconclusive
    };
    verdict(kind, walk.finish("p-series: sign of leading log coefficient", drift))
}

fn classify_nonsummable_argument(
    mut walk: Walk,
    p: usize,
    f: &(dyn Fn(usize) -> C64 + Send + Sync),
    opts: ClassifyOptions,
) -> ConvergenceVerdict {
    let half = p + (opts.budget - p) / 2;
    let mut arg_half = walk.arg;
    for n in p + 1..=opts.budget {
        if !walk.push(n, f(n)) {
            return verdict(
                converges(C64::new(0.0, 0.0)),
                walk.finish("bounded-nonsummable-argument: zero factor", 0.0),
            );
        }
        if n == half {
            arg_half = walk.arg;
        }
    }
    let drift = walk.arg - arg_half;
    verdict(
        VerdictKind::QuasiConvergesToZero,
        walk.finish("bounded-nonsummable-argument: declared", drift),
    )
}

/// Partial-product heuristic for tails without a structural class.
///
/// The modulus must settle within `tol` between the middle and the end of the
/// budget; the value then either settles too (convergence) or the argument
/// sum moves by more than `4π` over that stretch (quasi-convergence).
fn classify_numeric(
    mut walk: Walk,
    p: usize,
    f: &(dyn Fn(usize) -> C64 + Send + Sync),
    opts: ClassifyOptions,
) -> ConvergenceVerdict {
    let half = p + (opts.budget - p) / 2;
    let (mut lm_half, mut arg_half, mut value_half) = (walk.log_mod, walk.arg, walk.acc.value());
    for n in p + 1..=opts.budget {
        if !walk.push(n, f(n)) {
            return verdict(converges(C64::new(0.0, 0.0)), walk.finish("numeric: zero factor", 0.0));
        }
        if n == half {
            lm_half = walk.log_mod;
            arg_half = walk.arg;
            value_half = walk.acc.value();
        }
    }
    let drift = walk.arg - arg_half;
    let lm_end = walk.log_mod;
    let value_end = walk.acc.value();
    let ln_tol = opts.tol.ln();
    let kind = if lm_end < ln_tol && lm_end <= lm_half {
        converges(C64::new(0.0, 0.0))
    } else if lm_end > -ln_tol && lm_end > lm_half {
        VerdictKind::Diverges
    } else if (lm_end.exp() - lm_half.exp()).abs() < opts.tol {
        if drift.abs() > 4.0 * PI {
            VerdictKind::QuasiConvergesToZero
        } else if (value_end - value_half).norm() < opts.tol {
            converges(value_end)
        } else {
            VerdictKind::Inconclusive
        }
    } else {
        VerdictKind::Inconclusive
    };
    verdict(kind, walk.finish("numeric: partial products over budget", drift))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn kind(seq: &ComplexSequenceSpec) -> VerdictKind {
        classify_product(seq, ClassifyOptions::default()).unwrap().kind
    }

    #[test]
    fn constant_one_is_prefix_product() {
        let s = ComplexSequenceSpec::constant(vec![c(2.0), c(3.0)], c(1.0)).unwrap();
        assert_eq!(kind(&s), converges(c(6.0)));
        assert_eq!(quasi_convergence_value(&s, ClassifyOptions::default()).unwrap(), c(6.0));
        let empty = ComplexSequenceSpec::constant(vec![], c(1.0)).unwrap();
        assert_eq!(kind(&empty), converges(c(1.0)));
    }

    #[test]
    fn constant_tail_cases() {
        let half = ComplexSequenceSpec::constant(vec![], c(0.5)).unwrap();
        assert_eq!(kind(&half), converges(c(0.0)));
        let big = ComplexSequenceSpec::constant(vec![], c(1.01)).unwrap();
        assert_eq!(kind(&big), VerdictKind::Diverges);
        let phase = ComplexSequenceSpec::constant(vec![], C64::from_polar(1.0, 0.3)).unwrap();
        assert_eq!(kind(&phase), VerdictKind::QuasiConvergesToZero);
        let zero_in_prefix = ComplexSequenceSpec::constant(vec![c(5.0), c(0.0)], c(1.01)).unwrap();
        assert_eq!(kind(&zero_in_prefix), converges(c(0.0)));
    }

    #[test]
    fn half_tail_partial_products_are_powers_of_two() {
        let half = ComplexSequenceSpec::constant(vec![], c(0.5)).unwrap();
        let v = classify_product(&half, ClassifyOptions::new(64, 1e-10)).unwrap();
        for s in &v.diagnostics.partial_products {
            assert!((s.value.re - 0.5f64.powi(s.n as i32)).abs() < 1e-15);
        }
    }

    #[test]
    fn exp_i_over_n_quasi_converges() {
        let s =
            ComplexSequenceSpec::closed_form(vec![], "exp(i/n)", Some(TailClass::BoundedNonsummableArgument), |n| {
                C64::from_polar(1.0, 1.0 / n as f64)
            })
            .unwrap();
        let v = classify_product(&s, ClassifyOptions::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::QuasiConvergesToZero);
        assert!(v.diagnostics.argument_drift > 0.69);
        assert_eq!(quasi_convergence_value(&s, ClassifyOptions::default()).unwrap(), c(0.0));
        // the same tail declared as a p-series with p = 1
        let s2 =
            ComplexSequenceSpec::closed_form(vec![], "exp(i/n)", Some(TailClass::PSeriesLogModulus { p: 1.0 }), |n| {
                C64::from_polar(1.0, 1.0 / n as f64)
            })
            .unwrap();
        assert_eq!(kind(&s2), VerdictKind::QuasiConvergesToZero);
    }

    #[test]
    fn one_plus_inverse_square_matches_sinh() {
        let s =
            ComplexSequenceSpec::closed_form(vec![], "1+1/n^2", Some(TailClass::PSeriesLogModulus { p: 2.0 }), |n| {
                c(1.0 + 1.0 / (n as f64 * n as f64))
            })
            .unwrap();
        let expected = PI.sinh() / PI;
        match kind(&s) {
            VerdictKind::ConvergesTo { value } => {
                assert!((value.re - expected).abs() < 1e-6, "{value}");
                assert!(value.im.abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn divergent_p_series_by_sign() {
        let up =
            ComplexSequenceSpec::closed_form(vec![], "1+1/n", Some(TailClass::PSeriesLogModulus { p: 1.0 }), |n| {
                c(1.0 + 1.0 / n as f64)
            })
            .unwrap();
        assert_eq!(kind(&up), VerdictKind::Diverges);
        let down = ComplexSequenceSpec::closed_form(
            vec![c(0.5)],
            "1-1/n",
            Some(TailClass::PSeriesLogModulus { p: 1.0 }),
            |n| c(1.0 - 1.0 / n as f64),
        )
        .unwrap();
        assert_eq!(kind(&down), converges(c(0.0)));
    }

    #[test]
    fn geometric_modulus_value() {
        // ∏_{n>=1} (1 + 2^-n) = 2.384231029031371...
        let s = ComplexSequenceSpec::closed_form(
            vec![],
            "1+2^-n",
            Some(TailClass::GeometricModulus { ratio: 0.5 }),
            |n| c(1.0 + 0.5f64.powi(n as i32)),
        )
        .unwrap();
        let mut brute = 1.0;
        for n in 1..200 {
            brute *= 1.0 + 0.5f64.powi(n);
        }
        match kind(&s) {
            VerdictKind::ConvergesTo { value } => assert!((value.re - brute).abs() < 1e-9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn eventually_one() {
        let s = ComplexSequenceSpec::closed_form(
            vec![c(2.0)],
            "n until 4",
            Some(TailClass::EventuallyOne { from: 5 }),
            |n| if n < 5 { c(n as f64) } else { c(1.0) },
        )
        .unwrap();
        assert_eq!(kind(&s), converges(c(48.0)));
    }

    #[test]
    fn numeric_heuristics() {
        let exact_one = ComplexSequenceSpec::closed_form(vec![], "one", None, |_| c(1.0)).unwrap();
        assert_eq!(kind(&exact_one), converges(c(1.0)));
        let decay = ComplexSequenceSpec::closed_form(vec![], "0.9", None, |_| c(0.9)).unwrap();
        assert_eq!(kind(&decay), converges(c(0.0)));
        let grow = ComplexSequenceSpec::closed_form(vec![], "1.1", None, |_| c(1.1)).unwrap();
        assert_eq!(kind(&grow), VerdictKind::Diverges);
        let spin = ComplexSequenceSpec::closed_form(vec![], "i", None, |_| C64::new(0.0, 1.0)).unwrap();
        assert_eq!(kind(&spin), VerdictKind::QuasiConvergesToZero);
        // slowly converging: the partial products have not settled to 1e-10
        let slow = ComplexSequenceSpec::closed_form(vec![], "1+1/n^2", None, |n| c(1.0 + 1.0 / (n as f64 * n as f64)))
            .unwrap();
        assert_eq!(kind(&slow), VerdictKind::Inconclusive);
    }

    #[test]
    fn exact_mode_rejects_undeclared() {
        let s = ComplexSequenceSpec::closed_form(vec![], "anon", None, |_| c(1.0)).unwrap();
        let opts = ClassifyOptions {
            require_exact: true,
            ..Default::default()
        };
        assert!(matches!(classify_product(&s, opts), Err(Error::UndeclaredTailClass(_))));
    }

    #[test]
    fn invalid_options() {
        let s = ComplexSequenceSpec::constant(vec![c(1.0); 5], c(1.0)).unwrap();
        assert!(classify_product(&s, ClassifyOptions::new(3, 1e-10)).is_err());
        assert!(classify_product(&s, ClassifyOptions::new(10, 0.0)).is_err());
        let bad = ComplexSequenceSpec::constant(vec![c(f64::NAN)], c(1.0));
        assert!(bad.is_err());
    }

    #[test]
    fn not_quasi_convergent_value_errors() {
        let s = ComplexSequenceSpec::constant(vec![], c(2.0)).unwrap();
        assert!(matches!(
            quasi_convergence_value(&s, ClassifyOptions::default()),
            Err(Error::NotQuasiConvergent(_))
        ));
    }

    #[test]
    fn verdict_json_round_trip() {
        let s = ComplexSequenceSpec::constant(vec![c(2.0)], c(0.5)).unwrap();
        let v = classify_product(&s, ClassifyOptions::new(100, 1e-10)).unwrap();
        let text = serde_json::to_string(&v).unwrap();
        let back: ConvergenceVerdict = serde_json::from_str(&text).unwrap();
        assert_eq!(back.kind, v.kind);
        assert_eq!(back.diagnostics.partial_products, v.diagnostics.partial_products);
    }
}

//! System-plus-device measurement model.
//!
//! After the premeasurement interaction the joint state is
//! `|out⟩ = Σ_i s_i |i⟩ ⊗ |d_i⟩`, where the device states `|d_i⟩` are
//! infinite product states in pairwise different sectors. Tracing nothing,
//! the system block of `|out⟩⟨out|` at truncation `N` is
//!
//! ```text
//! ρ_ij(N) = s_i s_j* ∏_{α ≤ N} ⟨d_α^j|d_α^i⟩
//! ```
//!
//! whose off-diagonal entries decay with `N` while the diagonal stays put.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::{LogComplex, ProductAccumulator, DIRECT_LIMIT};
use crate::model::{CompositeState, FactorVector, ProductState, TailRule, C64};
use crate::sectors::{classify_sequence, same_sector, SectorKind, ZERO_TERM_TOL};

/// Tolerance on `Σ|s_i|² = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Largest number of positions walked when a horizon has no closed form.
pub const HORIZON_BUDGET: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementModel {
    amplitudes: Vec<C64>,
    device_states: Vec<ProductState>,
    ready_state: Option<ProductState>,
}

impl MeasurementModel {
    pub fn new(
        amplitudes: Vec<C64>,
        device_states: Vec<ProductState>,
        ready_state: Option<ProductState>,
    ) -> Result<Self> {
        let m = amplitudes.len();
        if m == 0 || device_states.len() != m {
            return Err(Error::ShapeMismatch(format!(
                "{m} amplitudes but {} device states",
                device_states.len()
            )));
        }
        if amplitudes.iter().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(Error::InvalidAmplitude("system amplitudes must be finite".into()));
        }
        let total: f64 = amplitudes.iter().map(|s| s.norm_sqr()).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidAmplitude(format!("Σ|s_i|² = {total}, expected 1")));
        }
        for (i, d) in device_states.iter().enumerate() {
            device_states[0].check_same_shape(d)?;
            if !classify_sequence(d).is_non_trivial() || !d.is_unit_normed(ZERO_TERM_TOL) {
                return Err(Error::PreconditionViolated(format!(
                    "device state {i} must be a non-trivial convergent sequence of unit factors"
                )));
            }
        }
        if let Some(r) = &ready_state {
            device_states[0].check_same_shape(r)?;
        }
        for i in 0..m {
            for j in i + 1..m {
                let v = same_sector(&device_states[i], &device_states[j])?;
                if v.kind != SectorKind::DifferentSector {
                    return Err(Error::PreconditionViolated(format!(
                        "device states {i} and {j} are not in different sectors ({:?})",
                        v.kind
                    )));
                }
            }
        }
        Ok(MeasurementModel {
            amplitudes,
            device_states,
            ready_state,
        })
    }

    pub fn system_dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn device_states(&self) -> &[ProductState] {
        &self.device_states
    }

    pub fn ready_state(&self) -> Option<&ProductState> {
        self.ready_state.as_ref()
    }

    /// Born probabilities `|s_i|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|s| s.norm_sqr()).collect()
    }
}

/// `Σ_i s_i |i⟩ ⊗ |d_i⟩` with the system as an extra first factor of dim `M`.
pub fn premeasurement_state(m: &MeasurementModel) -> CompositeState {
    let dim = m.system_dim();
    let terms = m
        .amplitudes
        .iter()
        .zip(&m.device_states)
        .enumerate()
        .map(|(i, (s, d))| {
            let e = FactorVector::basis(dim, i).expect("i < dim");
            (*s, d.prepend(e))
        })
        .collect();
    CompositeState::new(terms).expect("device states share one shape")
}

/// System block `ρ(N)` of the premeasurement state, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedDensityMatrix {
    pub n: usize,
    pub dim: usize,
    #[serde(with = "crate::io::complex_vec")]
    pub entries: Vec<C64>,
    /// `ln|ρ_ij|`, `-inf` for exact zeros.
    #[serde(with = "crate::io::ext_f64::vec")]
    pub log_modulus: Vec<f64>,
}

impl TruncatedDensityMatrix {
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim + j]
    }

    pub fn log10_modulus(&self, i: usize, j: usize) -> f64 {
        self.log_modulus[i * self.dim + j] / std::f64::consts::LN_10
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = DMatrix::from_row_slice(self.dim, self.dim, &self.entries);
        let eig = nalgebra::linalg::SymmetricEigen::new(m);
        eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Hermitian within 1e-12, trace 1 within 1e-12, eigenvalues ≥ −1e-10.
    pub fn is_valid_state(&self) -> bool {
        self.hermitian_deviation() <= 1e-12 && (self.trace() - 1.0).norm() <= 1e-12 && self.min_eigenvalue() >= -1e-10
    }
}

fn device_overlap(m: &MeasurementModel, j: usize, i: usize, n: usize) -> (LogComplex, C64) {
    let (dj, di) = (&m.device_states[j], &m.device_states[i]);
    let mut acc = ProductAccumulator::new();
    for k in 1..=n {
        acc.push(dj.factor(k).inner(&di.factor(k)));
        if acc.is_zero() {
            break;
        }
    }
    (acc.log(), acc.value())
}

/// `ρ(N)`. Diagonal entries are `|s_i|²` exactly, for every `N`.
pub fn truncated_density(m: &MeasurementModel, n: usize) -> Result<TruncatedDensityMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("truncation N must be at least 1".into()));
    }
    let dim = m.system_dim();
    let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
    let mut log_modulus = vec![f64::NEG_INFINITY; dim * dim];
    for i in 0..dim {
        let p = m.amplitudes[i].norm_sqr();
        entries[i * dim + i] = C64::new(p, 0.0);
        log_modulus[i * dim + i] = p.ln();
        for j in i + 1..dim {
            let coeff = m.amplitudes[i] * m.amplitudes[j].conj();
            let (log, direct) = device_overlap(m, j, i, n);
            let log = LogComplex::from_complex(coeff) * log;
            let value = if n <= DIRECT_LIMIT {
                coeff * direct
            } else {
                log.to_complex()
            };
            entries[i * dim + j] = value;
            entries[j * dim + i] = value.conj();
            log_modulus[i * dim + j] = log.log_modulus;
            log_modulus[j * dim + i] = log.log_modulus;
        }
    }
    Ok(TruncatedDensityMatrix {
        n,
        dim,
        entries,
        log_modulus,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "n")]
pub enum Horizon {
    /// Smallest `N` with `|ρ_ij(N)| < eps`.
    Finite(usize),
    /// The per-factor overlaps stop decaying before `eps` is reached.
    Never,
    /// No closed form and not reached after this many positions.
    NotWithin(usize),
}

/// Smallest truncation at which each off-diagonal modulus drops below `eps`.
pub fn decoherence_horizon(m: &MeasurementModel, eps: f64) -> Result<BTreeMap<(usize, usize), Horizon>> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let target = eps.ln();
    let mut out = BTreeMap::new();
    for i in 0..m.system_dim() {
        for j in i + 1..m.system_dim() {
            let start = (m.amplitudes[i] * m.amplitudes[j]).norm().ln();
            out.insert(
                (i, j),
                pair_horizon(&m.device_states[i], &m.device_states[j], start, target),
            );
        }
    }
    Ok(out)
}

fn pair_horizon(a: &ProductState, b: &ProductState, start: f64, target: f64) -> Horizon {
    let term = |n: usize| a.factor(n).inner(&b.factor(n)).norm().ln();
    if start < target {
        return Horizon::Finite(1);
    }
    let explicit = a.prefix_len().max(b.prefix_len());
    let mut acc = start;
    for n in 1..=explicit {
        acc += term(n);
        if acc < target {
            return Horizon::Finite(n);
        }
    }
    let cyclic = |t: &TailRule| !matches!(t, TailRule::Parametric(_));
    if cyclic(a.tail()) && cyclic(b.tail()) {
        let period = crate::model::lcm(a.tail().period(), b.tail().period());
        let per_period: f64 = (explicit + 1..=explicit + period).map(term).sum();
        if per_period >= 0.0 || per_period.is_nan() {
            return Horizon::Never;
        }
        // Skip whole periods that certainly stay above the target, then scan.
        let whole = ((target - acc) / per_period).floor() - 1.0;
        let skip = if whole > 0.0 { whole as usize } else { 0 };
        acc += skip as f64 * per_period;
        let mut n = explicit + skip * period;
        loop {
            n += 1;
            acc += term(n);
            if acc < target {
                return Horizon::Finite(n);
            }
        }
    }
    for n in explicit + 1..=HORIZON_BUDGET {
        acc += term(n);
        if acc < target {
            return Horizon::Finite(n);
        }
    }
    Horizon::NotWithin(HORIZON_BUDGET)
}

/// One Born-rule draw with an explicit generator.
pub fn sample_with<R: Rng + ?Sized>(m: &MeasurementModel, rng: &mut R) -> usize {
    let dist = WeightedIndex::new(m.probabilities()).expect("probabilities sum to one");
    dist.sample(rng)
}

/// One Born-rule draw from a ChaCha20 stream seeded with `seed`.
pub fn sample_outcome(m: &MeasurementModel, seed: u64) -> usize {
    sample_with(m, &mut ChaCha20Rng::seed_from_u64(seed))
}

/// Outcome frequencies over `shots` draws from one seeded stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub seed: u64,
    pub shots: u64,
    pub counts: Vec<u64>,
    pub frequencies: Vec<f64>,
    pub probabilities: Vec<f64>,
}

pub fn sample_counts(m: &MeasurementModel, shots: u64, seed: u64) -> FrequencyTable {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let dist = WeightedIndex::new(m.probabilities()).expect("probabilities sum to one");
    let mut counts = vec![0u64; m.system_dim()];
    for _ in 0..shots {
        counts[dist.sample(&mut rng)] += 1;
    }
    let frequencies = counts
        .iter()
        .map(|&c| if shots == 0 { 0.0 } else { c as f64 / shots as f64 })
        .collect();
    FrequencyTable {
        seed,
        shots,
        counts,
        frequencies,
        probabilities: m.probabilities(),
    }
}

/// The model after outcome `i`: `s = e_i`, same device states.
pub fn collapse(m: &MeasurementModel, i: usize) -> Result<MeasurementModel> {
    let dim = m.system_dim();
    if i >= dim {
        return Err(Error::IndexOutOfRange { index: i, len: dim });
    }
    let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
    amplitudes[i] = C64::new(1.0, 0.0);
    Ok(MeasurementModel {
        amplitudes,
        ..m.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> C64 {
        C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
    }

    fn model_09() -> MeasurementModel {
        let d0 = ProductState::uniform(FactorVector::spin_up());
        let q = FactorVector::from_real(&[0.9, (1.0f64 - 0.81).sqrt()]).unwrap();
        MeasurementModel::new(vec![half(), half()], vec![d0, ProductState::uniform(q)], None).unwrap()
    }

    #[test]
    fn construction_checks() {
        let up = ProductState::uniform(FactorVector::spin_up());
        let same = MeasurementModel::new(vec![half(), half()], vec![up.clone(), up.clone()], None);
        assert!(matches!(same, Err(Error::PreconditionViolated(_))));
        let unnormalized = MeasurementModel::new(
            vec![C64::new(1.0, 0.0), C64::new(0.1, 0.0)],
            vec![up.clone(), ProductState::uniform(FactorVector::spin_down())],
            None,
        );
        assert!(matches!(unnormalized, Err(Error::InvalidAmplitude(_))));
        assert!(MeasurementModel::new(vec![C64::new(1.0, 0.0)], vec![up], None).is_ok());
    }

    #[test]
    fn density_examples() {
        let m = model_09();
        let rho = truncated_density(&m, 50).unwrap();
        assert!((rho.get(0, 1).norm() - 0.5 * 0.9f64.powi(50)).abs() < 1e-15);
        assert!(rho.is_valid_state());
        let deep = truncated_density(&m, 400).unwrap();
        let want = 0.5f64.ln() + 400.0 * 0.9f64.ln();
        assert!((deep.log_modulus[1] - want).abs() < 1e-12);
        assert_eq!(deep.get(0, 0), rho.get(0, 0));

        let orth = MeasurementModel::new(
            vec![half(), half()],
            vec![
                ProductState::uniform(FactorVector::spin_up()),
                ProductState::uniform(FactorVector::spin_down()),
            ],
            None,
        )
        .unwrap();
        for n in [1, 2, 100] {
            let r = truncated_density(&orth, n).unwrap();
            assert_eq!(r.get(0, 1), C64::new(0.0, 0.0));
            assert_eq!(r.log_modulus[1], f64::NEG_INFINITY);
        }
    }

    #[test]
    fn horizon_examples() {
        let h = decoherence_horizon(&model_09(), 1e-6).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h[&(0, 1)], Horizon::Finite(125));
        let h = decoherence_horizon(&model_09(), 0.6).unwrap();
        assert_eq!(h[&(0, 1)], Horizon::Finite(1));
    }

    #[test]
    fn horizon_matches_brute_force() {
        let m = model_09();
        for eps in [0.3, 1e-3, 1e-9, 1e-40] {
            let h = decoherence_horizon(&m, eps).unwrap()[&(0, 1)];
            let brute = (1..)
                .find(|&n| truncated_density(&m, n).unwrap().log_modulus[1] < eps.ln())
                .unwrap();
            assert_eq!(h, Horizon::Finite(brute), "eps {eps}");
        }
    }

    #[test]
    fn premeasurement_shape() {
        let out = premeasurement_state(&model_09());
        assert_eq!(out.len(), 2);
        assert_eq!(out.terms()[1].1.factor(1).as_ref(), &FactorVector::basis(2, 1).unwrap());
        let single = MeasurementModel::new(
            vec![C64::new(1.0, 0.0)],
            vec![ProductState::uniform(FactorVector::spin_up())],
            None,
        )
        .unwrap();
        let out = premeasurement_state(&single);
        assert_eq!(out.len(), 1);
        assert_eq!(out.terms()[0].0, C64::new(1.0, 0.0));
    }

    #[test]
    fn sampling_and_collapse() {
        let m = model_09();
        assert_eq!(sample_outcome(&m, 42), sample_outcome(&m, 42));
        let certain = collapse(&m, 1).unwrap();
        for seed in 0..200 {
            assert_eq!(sample_outcome(&certain, seed), 1);
        }
        assert_eq!(collapse(&certain, 1).unwrap(), certain);
        assert!(matches!(
            collapse(&m, 2),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
        let rho = truncated_density(&certain, 10).unwrap();
        assert_eq!(
            rho.entries,
            vec![
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0)
            ]
        );

        let t = sample_counts(&m, 100_000, 7);
        assert_eq!(t.counts.iter().sum::<u64>(), 100_000);
        assert!(t.frequencies.iter().all(|f| (0.494..=0.506).contains(f)));
        assert_eq!(t, sample_counts(&m, 100_000, 7));
    }
}

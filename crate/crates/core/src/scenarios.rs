//! Two worked examples: a spin chain seen along two axes, and a
//! non-demolition measurement amplified by a particle cascade.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::decoherence::MeasurementModel;
use crate::error::{Error, Result};
use crate::io::{complex_serde, ext_f64};
use crate::model::{gcd, FactorVector, ProductState, TailRule, C64};
use crate::overlaps::{overlap_sweep, OverlapSweep};
use crate::sectors::{same_sector, SectorKind};

/// How many sites of `|Φ⟩` differ from the all-`|↑⟩` chain `|Ψ⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinDifference {
    /// A fixed fraction `num/den` of all sites (in lowest terms).
    Fraction { num: u64, den: u64 },
    /// The first `k` sites only.
    Count(usize),
}

impl SpinDifference {
    pub fn fraction(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num > den {
            return Err(Error::InvalidArgument(format!(
                "fraction {num}/{den} must lie in [0, 1]"
            )));
        }
        let g = gcd(num as usize, den as usize).max(1) as u64;
        Ok(SpinDifference::Fraction {
            num: num / g,
            den: den / g,
        })
    }

    /// Number of differing sites among the first `n`.
    pub fn differing(&self, n: usize) -> Result<usize> {
        match *self {
            SpinDifference::Fraction { num, den } => {
                if !(n as u64).is_multiple_of(den) {
                    return Err(Error::NonIntegralFraction { num, den, n });
                }
                Ok((n as u64 / den * num) as usize)
            }
            SpinDifference::Count(k) => Ok(k.min(n)),
        }
    }
}

impl fmt::Display for SpinDifference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpinDifference::Fraction { num, den } => write!(f, "{num}/{den}"),
            SpinDifference::Count(k) => write!(f, "{k} sites"),
        }
    }
}

/// Parses `1`, `0.25` or `3/8` as an exact fraction.
impl FromStr for SpinDifference {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot read {s:?} as a fraction in [0, 1]"));
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let num = a.trim().parse().map_err(|_| bad())?;
            let den = b.trim().parse().map_err(|_| bad())?;
            return SpinDifference::fraction(num, den);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac_val: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let num = int
            .checked_mul(den)
            .and_then(|x| x.checked_add(frac_val))
            .ok_or_else(bad)?;
        SpinDifference::fraction(num, den)
    }
}

/// `|Ψ⟩ = ⊗|↑⟩` against `|Φ⟩`, which carries `|+⟩` on the differing sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinChainScenario {
    pub difference: SpinDifference,
}

impl SpinChainScenario {
    pub fn new(difference: SpinDifference) -> Self {
        SpinChainScenario { difference }
    }

    /// The pair as infinite states, independent of any truncation.
    pub fn states(&self) -> (ProductState, ProductState) {
        let up = FactorVector::spin_up;
        let psi = ProductState::uniform(up()).with_label("all up");
        let phi = match self.difference {
            SpinDifference::Fraction { num: 0, .. } => ProductState::uniform(up()),
            SpinDifference::Fraction { num, den } if num == den => ProductState::uniform(FactorVector::spin_plus()),
            SpinDifference::Fraction { num, den } => {
                let mut pattern = vec![FactorVector::spin_plus(); num as usize];
                pattern.extend(std::iter::repeat_n(up(), (den - num) as usize));
                ProductState::new(vec![], TailRule::periodic(pattern).expect("non-empty"))
                    .expect("valid periodic state")
            }
            SpinDifference::Count(k) => {
                ProductState::new(vec![FactorVector::spin_plus(); k], TailRule::Constant(up())).expect("valid state")
            }
        };
        (psi, phi.with_label(format!("{} along x", self.difference)))
    }
}

/// The pair with exactly `ξN` differing sites among the first `n`.
pub fn build_spin_pair(scenario: &SpinChainScenario, n: usize) -> Result<(ProductState, ProductState)> {
    scenario.difference.differing(n)?;
    Ok(scenario.states())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinSweepRow {
    pub n: usize,
    pub differing: usize,
    pub overlap: f64,
    #[serde(with = "ext_f64")]
    pub log10_overlap: f64,
    pub probability: f64,
    #[serde(with = "ext_f64")]
    pub log10_probability: f64,
}

/// Overlap and its square for every admissible `N ≤ n_max`.
pub fn spin_sweep(scenario: &SpinChainScenario, n_max: usize) -> Result<Vec<SpinSweepRow>> {
    let step = match scenario.difference {
        SpinDifference::Fraction { den, .. } => den as usize,
        SpinDifference::Count(_) => 1,
    };
    let truncations: Vec<usize> = (step..=n_max).step_by(step).collect();
    if truncations.is_empty() {
        return Ok(Vec::new());
    }
    let (psi, phi) = scenario.states();
    let sweep: OverlapSweep = overlap_sweep(&psi, &phi, &truncations)?;
    let mut rows = Vec::with_capacity(sweep.len());
    for (i, &n) in sweep.truncations.iter().enumerate() {
        let log10 = sweep.log10_modulus(i);
        rows.push(SpinSweepRow {
            n,
            differing: scenario.difference.differing(n)?,
            overlap: sweep.values[i].re,
            log10_overlap: log10,
            probability: sweep.values[i].norm_sqr(),
            log10_probability: 2.0 * log10,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------- cascade

/// Count of items produced at a stage, per parent item of the previous
/// stage (or in total for the first stage).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountSpec {
    Fixed(u64),
    Poisson(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSpec {
    pub name: String,
    pub count: CountSpec,
}

/// Branch amplitudes, amplification stages and per-degree-of-freedom
/// branch overlap `η = |⟨0|q⟩|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeSpec {
    #[serde(with = "complex_serde")]
    pub alpha: C64,
    #[serde(with = "complex_serde")]
    pub beta: C64,
    pub eta: f64,
    pub stages: Vec<StageSpec>,
    /// Probability that a first-stage item is lost before amplification.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<f64>,
    /// Mean number of spurious first-stage events per run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dark_count_rate: Option<f64>,
}

impl CascadeSpec {
    /// The fixed three-stage cascade `F` photons, `S` secondaries per photon,
    /// `K` photons per secondary.
    pub fn fixed(alpha: C64, beta: C64, eta: f64, f: u64, s: u64, k: u64) -> Self {
        let stage = |name: &str, n| StageSpec {
            name: name.into(),
            count: CountSpec::Fixed(n),
        };
        CascadeSpec {
            alpha,
            beta,
            eta,
            stages: vec![
                stage("fluorescence", f),
                stage("secondaries", s),
                stage("phosphorescence", k),
            ],
            loss: None,
            dark_count_rate: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let total = self.alpha.norm_sqr() + self.beta.norm_sqr();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidAmplitude(format!("|α|² + |β|² = {total}, expected 1")));
        }
        if !(0.0..1.0).contains(&self.eta) {
            return Err(Error::InvalidArgument(format!(
                "eta must lie in [0, 1), got {}",
                self.eta
            )));
        }
        for s in &self.stages {
            if let CountSpec::Poisson(mean) = s.count {
                if !(mean.is_finite() && mean >= 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "stage {:?}: Poisson mean must be finite and nonnegative",
                        s.name
                    )));
                }
            }
        }
        for (name, rate) in [("loss", self.loss), ("dark_count_rate", self.dark_count_rate)] {
            if let Some(r) = rate {
                if !(0.0..=1.0).contains(&r) {
                    return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {r}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageCount {
    pub name: String,
    /// Items that distinguish the two branches.
    pub count: u64,
    /// Items lost before amplification (first stage only).
    pub lost: u64,
    /// Spurious items common to both branches (first stage only).
    pub dark_counts: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeReport {
    pub seed: u64,
    pub stages: Vec<StageCount>,
    /// Distinguishing degrees of freedom `D`.
    pub total_dof: u64,
    pub eta: f64,
    /// `|αβ|`.
    pub amplitude_product: f64,
    /// `log10(|αβ| η^D)`.
    #[serde(with = "ext_f64")]
    pub off_diagonal_log10: f64,
    pub sector: SectorKind,
    /// No distinguishing degree of freedom: the branches never decohere.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeRun {
    pub report: CascadeReport,
    /// Device branches `⊗|0⟩` and `⊗|q⟩`, one factor per degree of freedom.
    pub model: MeasurementModel,
}

fn off_diagonal_log10(amplitude_product: f64, eta: f64, dof: u64) -> f64 {
    let base = amplitude_product.log10();
    if dof == 0 {
        base
    } else {
        base + dof as f64 * eta.log10()
    }
}

fn draw<R: rand::Rng>(count: CountSpec, parents: u64, rng: &mut R) -> u64 {
    match count {
        CountSpec::Fixed(n) => parents.saturating_mul(n),
        CountSpec::Poisson(mean) => {
            let lambda = mean * parents as f64;
            if lambda == 0.0 {
                0
            } else {
                Poisson::new(lambda).expect("positive finite mean").sample(rng) as u64
            }
        }
    }
}

/// One realization of the cascade. Deterministic in `(spec, seed)`.
pub fn run_cascade(spec: &CascadeSpec, seed: u64) -> Result<CascadeRun> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut stages = Vec::with_capacity(spec.stages.len());
    let mut parents = 1u64;
    for (i, st) in spec.stages.iter().enumerate() {
        let mut count = draw(st.count, parents, &mut rng);
        let (mut lost, mut dark_counts) = (0, 0);
        if i == 0 {
            if let Some(loss) = spec.loss.filter(|&l| l > 0.0) {
                let kept = Binomial::new(count, 1.0 - loss)
                    .expect("valid probability")
                    .sample(&mut rng);
                lost = count - kept;
                count = kept;
            }
            if let Some(rate) = spec.dark_count_rate.filter(|&r| r > 0.0) {
                dark_counts = Poisson::new(rate).expect("positive rate").sample(&mut rng) as u64;
            }
        }
        stages.push(StageCount {
            name: st.name.clone(),
            count,
            lost,
            dark_counts,
        });
        parents = count;
    }
    let total_dof: u64 = stages.iter().map(|s| s.count).sum();
    let amplitude_product = (spec.alpha * spec.beta).norm();

    let zero = FactorVector::spin_up();
    let q = FactorVector::from_real(&[spec.eta, (1.0 - spec.eta * spec.eta).sqrt()])?;
    let d0 = ProductState::uniform(zero).with_label("branch 0");
    let d1 = ProductState::uniform(q).with_label("branch 1");
    let sector = same_sector(&d0, &d1)?.kind;
    let model = MeasurementModel::new(vec![spec.alpha, spec.beta], vec![d0, d1], None)?;

    Ok(CascadeRun {
        report: CascadeReport {
            seed,
            stages,
            total_dof,
            eta: spec.eta,
            amplitude_product,
            off_diagonal_log10: off_diagonal_log10(amplitude_product, spec.eta, total_dof),
            sector,
            degenerate: total_dof == 0,
        },
        model,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRow {
    pub stage: usize,
    pub name: String,
    pub count: u64,
    pub cumulative_dof: u64,
    #[serde(with = "ext_f64")]
    pub off_diagonal_log10: f64,
}

/// Cumulative degrees of freedom and off-diagonal size after each stage.
pub fn cascade_stage_report(run: &CascadeRun) -> Vec<StageRow> {
    let r = &run.report;
    let mut cumulative = 0u64;
    r.stages
        .iter()
        .enumerate()
        .map(|(i, s)| {
            cumulative += s.count;
            StageRow {
                stage: i + 1,
                name: s.name.clone(),
                count: s.count,
                cumulative_dof: cumulative,
                off_diagonal_log10: off_diagonal_log10(r.amplitude_product, r.eta, cumulative),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::overlaps::truncated_overlap;

    fn half() -> C64 {
        C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
    }

    #[test]
    fn parse_fractions() {
        assert_eq!(
            "1".parse::<SpinDifference>().unwrap(),
            SpinDifference::Fraction { num: 1, den: 1 }
        );
        assert_eq!(
            "0.5".parse::<SpinDifference>().unwrap(),
            SpinDifference::Fraction { num: 1, den: 2 }
        );
        assert_eq!(
            "6/8".parse::<SpinDifference>().unwrap(),
            SpinDifference::Fraction { num: 3, den: 4 }
        );
        assert_eq!(
            "0".parse::<SpinDifference>().unwrap(),
            SpinDifference::Fraction { num: 0, den: 1 }
        );
        assert!("1.5".parse::<SpinDifference>().is_err());
        assert!("-0.5".parse::<SpinDifference>().is_err());
        assert!("abc".parse::<SpinDifference>().is_err());
    }

    #[test]
    fn spin_pair_examples() {
        let full = SpinChainScenario::new(SpinDifference::fraction(1, 1).unwrap());
        let (a, b) = build_spin_pair(&full, 10).unwrap();
        assert!((truncated_overlap(&a, &b, 10).unwrap().re - 2f64.powi(-5)).abs() < 1e-16);

        let none = SpinChainScenario::new(SpinDifference::fraction(0, 1).unwrap());
        let (a, b) = build_spin_pair(&none, 10).unwrap();
        assert_eq!(truncated_overlap(&a, &b, 10).unwrap(), C64::new(1.0, 0.0));

        let half_sites = SpinChainScenario::new(SpinDifference::fraction(1, 2).unwrap());
        let (a, b) = build_spin_pair(&half_sites, 20).unwrap();
        assert!((truncated_overlap(&a, &b, 20).unwrap().re - 2f64.powi(-5)).abs() < 1e-16);
        assert!(same_sector(&a, &b).unwrap().is_different());
        assert!(matches!(
            build_spin_pair(&half_sites, 21),
            Err(Error::NonIntegralFraction { num: 1, den: 2, n: 21 })
        ));

        let finite = SpinChainScenario::new(SpinDifference::Count(7));
        let (a, b) = build_spin_pair(&finite, 50).unwrap();
        assert!(same_sector(&a, &b).unwrap().is_same());
    }

    #[test]
    fn sweep_exact_in_log_space() {
        for xi in ["1", "1/3", "0.75"] {
            let sc = SpinChainScenario::new(xi.parse().unwrap());
            for row in spin_sweep(&sc, 400).unwrap() {
                let want = -(row.differing as f64) / 2.0 * 2f64.log10();
                assert!((row.log10_overlap - want).abs() < 1e-12, "{xi} at {}", row.n);
                assert!((row.log10_probability - 2.0 * want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fixed_cascade() {
        let spec = CascadeSpec::fixed(half(), half(), 0.99, 10, 100, 50);
        let run = run_cascade(&spec, 7).unwrap();
        assert_eq!(run.report.total_dof, 51010);
        assert!((run.report.off_diagonal_log10 - (-222.95)).abs() < 0.01);
        assert_eq!(run.report.sector, SectorKind::DifferentSector);
        let rows = cascade_stage_report(&run);
        let logs: Vec<f64> = rows.iter().map(|r| r.off_diagonal_log10).collect();
        assert!((logs[0] + 0.345).abs() < 1e-3);
        assert!((logs[1] + 4.709).abs() < 1e-3);
        assert!(logs.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn degenerate_and_orthogonal_cascades() {
        let spec = CascadeSpec::fixed(half(), half(), 0.99, 0, 100, 50);
        let run = run_cascade(&spec, 1).unwrap();
        assert!(run.report.degenerate);
        assert!((run.report.off_diagonal_log10 - 0.5f64.log10()).abs() < 1e-15);

        let spec = CascadeSpec::fixed(half(), half(), 0.0, 3, 2, 2);
        let run = run_cascade(&spec, 1).unwrap();
        let rows = cascade_stage_report(&run);
        assert!(rows.iter().all(|r| r.off_diagonal_log10 == f64::NEG_INFINITY));
    }

    #[test]
    fn poisson_cascade_is_reproducible() {
        let mut spec = CascadeSpec::fixed(half(), half(), 0.9, 0, 0, 0);
        spec.stages[0].count = CountSpec::Poisson(12.0);
        spec.stages[1].count = CountSpec::Poisson(30.0);
        spec.stages[2].count = CountSpec::Poisson(5.0);
        spec.loss = Some(0.2);
        spec.dark_count_rate = Some(0.5);
        let a = run_cascade(&spec, 99).unwrap();
        let b = run_cascade(&spec, 99).unwrap();
        assert_eq!(a, b);
        let s0 = &a.report.stages[0];
        assert!(s0.count + s0.lost > 0);
        let json = serde_json::to_string(&a.report).unwrap();
        assert_eq!(serde_json::from_str::<CascadeReport>(&json).unwrap(), a.report);
    }

    #[test]
    fn cascade_validation() {
        let bad = CascadeSpec::fixed(C64::new(1.0, 0.0), C64::new(1.0, 0.0), 0.5, 1, 1, 1);
        assert!(run_cascade(&bad, 0).is_err());
        let bad = CascadeSpec::fixed(half(), half(), 1.0, 1, 1, 1);
        assert!(run_cascade(&bad, 0).is_err());
        let text = r#"{"alpha": {"re": 0.6}, "beta": {"re": 0, "im": 0.8}, "eta": 0.5,
                      "stages": [{"name": "F", "count": {"fixed": 4}}, {"name": "S", "count": {"poisson": 2.5}}]}"#;
        let spec: CascadeSpec = serde_json::from_str(text).unwrap();
        assert!(run_cascade(&spec, 3).is_ok());
    }
}

use std::collections::BTreeMap;

use itp_core::operators::OperatorTail;
use itp_core::sectors::apply_finite_change;
use itp_core::{
    apply, composite_overlap, overlap_sweep, same_sector, sample_counts, truncated_overlap, CompositeState,
    FactorOperator, FactorVector, FactoredOperator, MeasurementModel, OperatorTerm, ProductState, SectorKind, TailRule,
    C64,
};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn qubit() -> impl Strategy<Value = FactorVector> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("non-zero", |a| a.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|a| {
            FactorVector::new(vec![C64::new(a[0], a[1]), C64::new(a[2], a[3])])
                .unwrap()
                .normalized()
                .unwrap()
        })
}

fn raw_qubit() -> impl Strategy<Value = FactorVector> {
    prop::array::uniform4(-2.0f64..2.0)
        .prop_map(|a| FactorVector::new(vec![C64::new(a[0], a[1]), C64::new(a[2], a[3])]).unwrap())
}

fn unit_state() -> impl Strategy<Value = ProductState> {
    (prop::collection::vec(qubit(), 0..5), qubit())
        .prop_map(|(prefix, tail)| ProductState::new(prefix, TailRule::Constant(tail)).unwrap())
}

fn any_state() -> impl Strategy<Value = ProductState> {
    (prop::collection::vec(raw_qubit(), 0..5), raw_qubit())
        .prop_map(|(prefix, tail)| ProductState::new(prefix, TailRule::Constant(tail)).unwrap())
}

/// States built from one of three tail vectors plus a few finite changes,
/// so that every sector verdict is decidable.
fn structured_state() -> impl Strategy<Value = ProductState> {
    let tails = [
        FactorVector::spin_up(),
        FactorVector::spin_plus(),
        FactorVector::from_real(&[0.6, 0.8]).unwrap(),
    ];
    (0..3usize, prop::collection::btree_map(1..20usize, qubit(), 0..4)).prop_map(move |(t, changes)| {
        let base = ProductState::uniform(tails[t].clone());
        apply_finite_change(&base, &changes).unwrap()
    })
}

fn rotations() -> impl Strategy<Value = FactoredOperator> {
    prop::collection::vec(-3.2f64..3.2, 1..6).prop_map(|angles| {
        let ops = angles[1..].iter().map(|&t| FactorOperator::rotation_y(t)).collect();
        let tail = OperatorTail::Constant(FactorOperator::rotation_y(angles[0]));
        FactoredOperator::single(OperatorTerm::new(C64::new(1.0, 0.0), ops, tail))
    })
}

fn general_operator() -> impl Strategy<Value = FactoredOperator> {
    let matrix = prop::collection::vec(-1.0f64..1.0, 8)
        .prop_map(|v| FactorOperator::new(2, v.chunks(2).map(|c| C64::new(c[0], c[1])).collect()).unwrap());
    (prop::collection::vec(matrix, 1..4), -2.0f64..2.0).prop_map(|(ops, c)| {
        FactoredOperator::single(OperatorTerm::new(C64::new(c, 0.5), ops, OperatorTail::Identity(2)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn overlap_is_hermitian(a in any_state(), b in any_state(), n in 1usize..80) {
        let ab = truncated_overlap(&a, &b, n).unwrap();
        let ba = truncated_overlap(&b, &a, n).unwrap();
        prop_assert!((ab - ba.conj()).norm() <= 1e-12 * (1.0 + ab.norm()));
    }

    #[test]
    fn cauchy_schwarz(a in any_state(), b in any_state(), n in 1usize..80) {
        let ab = truncated_overlap(&a, &b, n).unwrap().norm_sqr();
        let aa = truncated_overlap(&a, &a, n).unwrap().re;
        let bb = truncated_overlap(&b, &b, n).unwrap().re;
        prop_assert!(ab <= aa * bb * (1.0 + 1e-12));
    }

    #[test]
    fn unit_overlaps_decay_monotonically(a in unit_state(), b in unit_state()) {
        let ns: Vec<usize> = (1..=120).collect();
        let sweep = overlap_sweep(&a, &b, &ns).unwrap();
        for w in sweep.log_modulus.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn sector_relation_is_an_equivalence(a in structured_state(), b in structured_state(), c in structured_state()) {
        let ab = same_sector(&a, &b).unwrap().kind;
        let ba = same_sector(&b, &a).unwrap().kind;
        let bc = same_sector(&b, &c).unwrap().kind;
        let ac = same_sector(&a, &c).unwrap().kind;
        prop_assert_eq!(same_sector(&a, &a).unwrap().kind, SectorKind::SameSector);
        prop_assert_eq!(ab, ba);
        prop_assert_ne!(ab, SectorKind::Inconclusive);
        if ab == SectorKind::SameSector && bc == SectorKind::SameSector {
            prop_assert_eq!(ac, SectorKind::SameSector);
        }
    }

    #[test]
    fn finite_changes_stay_in_sector(
        s in unit_state(),
        changes in prop::collection::btree_map(1usize..30, qubit(), 1..6),
    ) {
        let changed = apply_finite_change(&s, &changes).unwrap();
        prop_assert_eq!(same_sector(&s, &changed).unwrap().kind, SectorKind::SameSector);
    }

    #[test]
    fn bounded_operators_transfer_bounds(
        op in general_operator(),
        a in any_state(),
        b in any_state(),
        n in 1usize..12,
    ) {
        let ub = apply(&op, &b).unwrap();
        let lhs = composite_overlap(&CompositeState::single(a.clone()), &ub, n).unwrap().norm();
        let na = truncated_overlap(&a, &a, n).unwrap().re.sqrt();
        let nb = truncated_overlap(&b, &b, n).unwrap().re.sqrt();
        prop_assert!(lhs <= op.norm_bound(n) * na * nb * (1.0 + 1e-10) + 1e-300);
    }

    #[test]
    fn unitaries_preserve_norm(op in rotations(), s in unit_state(), n in 1usize..200) {
        let out = apply(&op, &s).unwrap();
        let norm = composite_overlap(&out, &out, n).unwrap();
        prop_assert!((norm - C64::new(1.0, 0.0)).norm() <= 1e-10);
    }
}

#[test]
fn born_frequencies_pass_chi_square() {
    let device = |v: &[f64]| ProductState::uniform(FactorVector::from_real(v).unwrap());
    let cases = [vec![0.5f64, 0.5], vec![0.09, 0.91], vec![0.2, 0.3, 0.5]];
    for probs in cases {
        let k = probs.len();
        let amps = probs.iter().map(|p| C64::new(p.sqrt(), 0.0)).collect();
        let devices = (0..k)
            .map(|i| {
                let mut v = vec![0.0; k];
                v[i] = 1.0;
                device(&v)
            })
            .collect();
        let m = MeasurementModel::new(amps, devices, None).unwrap();
        let critical = ChiSquared::new((k - 1) as f64).unwrap().inverse_cdf(1.0 - 1e-3);
        for seed in 0..5 {
            let shots = 100_000u64;
            let t = sample_counts(&m, shots, seed);
            let stat: f64 = t
                .counts
                .iter()
                .zip(&probs)
                .map(|(&o, &p)| {
                    let e = p * shots as f64;
                    (o as f64 - e).powi(2) / e
                })
                .sum();
            assert!(stat < critical, "{probs:?} seed {seed}: chi-square {stat} ≥ {critical}");
            assert_eq!(t, sample_counts(&m, shots, seed));
        }
    }
}

#[test]
fn finite_changes_are_closed_under_composition() {
    let base = ProductState::uniform(FactorVector::spin_up());
    let mut first = BTreeMap::new();
    first.insert(3, FactorVector::spin_plus());
    let mut second = BTreeMap::new();
    second.insert(17, FactorVector::spin_minus());
    let once = apply_finite_change(&base, &first).unwrap();
    let twice = apply_finite_change(&once, &second).unwrap();
    assert!(same_sector(&base, &twice).unwrap().is_same());
    assert!(same_sector(&once, &twice).unwrap().is_same());
}

//! Benchmark fixtures shared by the criterion targets.

use std::f64::consts::FRAC_PI_2;

use itp_core::io::parse_sequence;
use itp_core::{
    ComplexSequenceSpec, Deviation, DeviationDirection, FactorOperator, FactorVector, FactoredOperator, ParametricTail,
    ProductState, TailRule, C64,
};

/// All-up chain and the chain with every site along x.
pub fn spin_pair() -> (ProductState, ProductState) {
    (
        ProductState::uniform(FactorVector::spin_up()),
        ProductState::uniform(FactorVector::spin_plus()),
    )
}

/// All-up chain and a chain that rotates toward down as `k^-p`.
pub fn parametric_pair(p: f64) -> (ProductState, ProductState) {
    let tail = ParametricTail::new(
        FactorVector::spin_up(),
        DeviationDirection::Rotation {
            toward: FactorVector::spin_down(),
        },
        Deviation::PSeries { amplitude: 1.0, p },
    )
    .expect("valid parametric tail");
    (
        ProductState::uniform(FactorVector::spin_up()),
        ProductState::new(vec![], TailRule::Parametric(tail)).expect("valid state"),
    )
}

pub fn global_rotation() -> FactoredOperator {
    FactoredOperator::global(FactorOperator::rotation_y(FRAC_PI_2))
}

/// Sequences covering each classifier path, by name.
pub fn sequences() -> Vec<(&'static str, ComplexSequenceSpec)> {
    let docs = [
        ("constant", r#"{"tail": {"kind": "constant", "value": {"re": 0.5}}}"#),
        (
            "geometric",
            r#"{"tail": {"kind": "one-plus-geometric", "coeff": {"re": 1}, "ratio": 0.5}}"#,
        ),
        (
            "p-series",
            r#"{"tail": {"kind": "one-plus-power", "coeff": {"re": 1}, "p": 2}}"#,
        ),
        (
            "phase",
            r#"{"tail": {"kind": "exp-power", "coeff": {"re": 0, "im": 1}, "p": 1}}"#,
        ),
    ];
    let mut out: Vec<_> = docs
        .iter()
        .map(|(name, doc)| (*name, parse_sequence(doc).expect("valid sequence")))
        .collect();
    out.push((
        "numeric",
        ComplexSequenceSpec::closed_form(vec![], "1 + 1/n^3", None, |n| C64::new(1.0 + (n as f64).powi(-3), 0.0))
            .expect("valid sequence"),
    ));
    out
}

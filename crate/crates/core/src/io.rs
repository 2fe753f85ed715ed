//! JSON interchange formats.
//!
//! Complex numbers are written as `{"re": .., "im": ..}`. Reals that may be
//! infinite or NaN (log-moduli of exact zeros, horizons) are written as
//! numbers when finite and as the strings `"inf"`, `"-inf"` or `"nan"`
//! otherwise.

use serde::{Deserialize, Serialize};

use crate::decoherence::MeasurementModel;
use crate::error::{Error, Result};
use crate::model::{Deviation, DeviationDirection, FactorVector, ParametricTail, ProductState, TailRule, C64};
use crate::operators::{FactorOperator, FactoredOperator, OperatorTail, OperatorTerm};
use crate::products::{ComplexSequenceSpec, TailClass};
use crate::scenarios::CascadeSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JsonComplex {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<C64> for JsonComplex {
    fn from(z: C64) -> Self {
        JsonComplex { re: z.re, im: z.im }
    }
}

impl From<JsonComplex> for C64 {
    fn from(z: JsonComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

/// `#[serde(with = "complex_serde")]` for a single [`C64`].
pub mod complex_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
        JsonComplex::from(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<C64, D::Error> {
        JsonComplex::deserialize(d).map(C64::from)
    }
}

/// `#[serde(with = "complex_vec")]` for `Vec<C64>`.
pub mod complex_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|z| JsonComplex::from(*z)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<C64>, D::Error> {
        Vec::<JsonComplex>::deserialize(d).map(|v| v.into_iter().map(C64::from).collect())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ExtF64 {
    Num(f64),
    Text(String),
}

impl ExtF64 {
    fn from_f64(x: f64) -> Self {
        if x.is_finite() {
            ExtF64::Num(x)
        } else if x.is_nan() {
            ExtF64::Text("nan".into())
        } else if x > 0.0 {
            ExtF64::Text("inf".into())
        } else {
            ExtF64::Text("-inf".into())
        }
    }

    fn into_f64<E: serde::de::Error>(self) -> std::result::Result<f64, E> {
        match self {
            ExtF64::Num(x) => Ok(x),
            ExtF64::Text(t) => match t.as_str() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!("expected a number or inf/-inf/nan, got {other:?}"))),
            },
        }
    }
}

/// Reals that may be non-finite.
pub mod ext_f64 {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExtF64::from_f64(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        ExtF64::deserialize(d)?.into_f64()
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
            x.map(ExtF64::from_f64).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
            Option::<ExtF64>::deserialize(d)?.map(ExtF64::into_f64).transpose()
        }
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|x| ExtF64::from_f64(*x)))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
            Vec::<ExtF64>::deserialize(d)?
                .into_iter()
                .map(ExtF64::into_f64)
                .collect()
        }
    }
}

pub(crate) fn vector_from_json(v: &[JsonComplex]) -> Result<FactorVector> {
    FactorVector::new(v.iter().map(|&z| C64::from(z)).collect())
}

pub(crate) fn vector_to_json(v: &FactorVector) -> Vec<JsonComplex> {
    v.amplitudes().iter().map(|&z| z.into()).collect()
}

// ---------------------------------------------------------------- states

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDoc {
    #[serde(default)]
    pub prefix: Vec<Vec<JsonComplex>>,
    pub tail: TailDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TailDoc {
    Constant {
        vector: Vec<JsonComplex>,
    },
    Periodic {
        pattern: Vec<Vec<JsonComplex>>,
        #[serde(default)]
        origin: usize,
    },
    Parametric(ParametricDoc),
}

fn default_base() -> Vec<JsonComplex> {
    vec![JsonComplex { re: 1.0, im: 0.0 }, JsonComplex { re: 0.0, im: 0.0 }]
}

fn default_amplitude() -> f64 {
    1.0
}

fn default_direction() -> String {
    "norm".into()
}

/// Parametric tail. `class` is `geometric` (needs `ratio`), `p-series`
/// (needs `p`) or `eventually-constant` (needs `last`). `deviation` is
/// `norm` or `rotation`; rotations need `toward`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametricDoc {
    pub class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last: Option<usize>,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_base")]
    pub base: Vec<JsonComplex>,
    #[serde(default = "default_direction")]
    pub deviation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toward: Option<Vec<JsonComplex>>,
    #[serde(default)]
    pub normalized: bool,
    #[serde(default)]
    pub origin: usize,
}

impl StateDoc {
    pub fn to_state(&self) -> Result<ProductState> {
        let prefix = self
            .prefix
            .iter()
            .map(|v| vector_from_json(v))
            .collect::<Result<Vec<_>>>()?;
        let tail = match &self.tail {
            TailDoc::Constant { vector } => TailRule::Constant(vector_from_json(vector)?),
            TailDoc::Periodic { pattern, origin } => {
                let pattern = pattern
                    .iter()
                    .map(|v| vector_from_json(v))
                    .collect::<Result<Vec<_>>>()?;
                match TailRule::periodic(pattern)? {
                    TailRule::Periodic { pattern, .. } => TailRule::Periodic {
                        pattern,
                        origin: *origin,
                    },
                    _ => unreachable!(),
                }
            }
            TailDoc::Parametric(p) => TailRule::Parametric(p.to_tail()?),
        };
        if let TailRule::Periodic { origin, .. } = &tail {
            if *origin > prefix.len() {
                return Err(Error::InvalidArgument(format!(
                    "periodic origin {origin} exceeds the prefix length {}",
                    prefix.len()
                )));
            }
        }
        let s = ProductState::new(prefix, tail)?;
        Ok(match &self.label {
            Some(l) => s.with_label(l.clone()),
            None => s,
        })
    }

    pub fn from_state(s: &ProductState) -> Result<StateDoc> {
        let tail = match s.tail() {
            TailRule::Constant(v) => TailDoc::Constant {
                vector: vector_to_json(v),
            },
            TailRule::Periodic { pattern, origin } => TailDoc::Periodic {
                pattern: pattern.iter().map(vector_to_json).collect(),
                origin: *origin,
            },
            TailRule::Parametric(p) => TailDoc::Parametric(ParametricDoc::from_tail(p)?),
        };
        Ok(StateDoc {
            prefix: s.prefix().iter().map(vector_to_json).collect(),
            tail,
            label: s.label().map(str::to_string),
        })
    }
}

impl ParametricDoc {
    pub fn to_tail(&self) -> Result<ParametricTail> {
        let need = |what: &str| Error::InvalidArgument(format!("parametric class {:?} needs {what}", self.class));
        let deviation = match self.class.as_str() {
            "geometric" => Deviation::Geometric {
                amplitude: self.amplitude,
                ratio: self.ratio.ok_or_else(|| need("ratio"))?,
            },
            "p-series" => Deviation::PSeries {
                amplitude: self.amplitude,
                p: self.p.ok_or_else(|| need("p"))?,
            },
            "eventually-constant" => Deviation::EventuallyConstant {
                amplitude: self.amplitude,
                last: self.last.ok_or_else(|| need("last"))?,
            },
            other => {
                return Err(Error::UndeclaredTailClass(format!(
                    "parametric class {other:?}; expected geometric, p-series or eventually-constant"
                )))
            }
        };
        let direction = match self.deviation.as_str() {
            "norm" => DeviationDirection::Norm,
            "rotation" => {
                let toward = self
                    .toward
                    .as_ref()
                    .ok_or_else(|| Error::InvalidArgument("rotation deviation needs \"toward\"".into()))?;
                DeviationDirection::Rotation {
                    toward: vector_from_json(toward)?,
                }
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "deviation must be \"norm\" or \"rotation\", got {other:?}"
                )))
            }
        };
        let mut t = ParametricTail::new(vector_from_json(&self.base)?, direction, deviation)?;
        if self.normalized {
            t = t.with_normalized();
        }
        Ok(t.with_origin(self.origin))
    }

    pub fn from_tail(t: &ParametricTail) -> Result<ParametricDoc> {
        let mut doc = ParametricDoc {
            class: t.deviation().class_name().to_string(),
            ratio: None,
            p: None,
            last: None,
            amplitude: 1.0,
            base: vector_to_json(t.base()),
            deviation: "norm".into(),
            toward: None,
            normalized: t.is_normalized(),
            origin: t.origin(),
        };
        match t.deviation() {
            Deviation::Geometric { amplitude, ratio } => {
                doc.amplitude = *amplitude;
                doc.ratio = Some(*ratio);
            }
            Deviation::PSeries { amplitude, p } => {
                doc.amplitude = *amplitude;
                doc.p = Some(*p);
            }
            Deviation::EventuallyConstant { amplitude, last } => {
                doc.amplitude = *amplitude;
                doc.last = Some(*last);
            }
            Deviation::Custom { name, .. } => {
                return Err(Error::UnsupportedTail(format!(
                    "custom family {name:?} has no JSON form"
                )))
            }
        }
        if let DeviationDirection::Rotation { toward } = t.direction() {
            doc.deviation = "rotation".into();
            doc.toward = Some(vector_to_json(toward));
        }
        Ok(doc)
    }
}

pub fn parse_state(text: &str) -> Result<ProductState> {
    let doc: StateDoc = serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("state JSON: {e}")))?;
    doc.to_state()
}

pub fn state_to_json(s: &ProductState) -> Result<String> {
    let doc = StateDoc::from_state(s)?;
    Ok(serde_json::to_string_pretty(&doc).expect("state documents always serialize"))
}

// ------------------------------------------------------ complex sequences

/// `{"prefix": [..], "tail": {..}, "class": {..}?}`.
///
/// The optional `class` overrides the class implied by the tail kind; a
/// `{"class": "custom"}` override forces the numeric heuristic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceDoc {
    #[serde(default)]
    pub prefix: Vec<JsonComplex>,
    pub tail: SequenceTailDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<TailClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SequenceTailDoc {
    /// `z_n = value`.
    Constant { value: JsonComplex },
    /// `z_n = 1 + coeff · n^-p`.
    OnePlusPower { coeff: JsonComplex, p: f64 },
    /// `z_n = exp(coeff · n^-p)`.
    ExpPower { coeff: JsonComplex, p: f64 },
    /// `z_n = 1 + coeff · ratio^n`.
    OnePlusGeometric { coeff: JsonComplex, ratio: f64 },
    /// `values` follow the prefix, then `z_n = 1`.
    EventuallyOne { values: Vec<JsonComplex> },
}

impl SequenceDoc {
    pub fn to_spec(&self) -> Result<ComplexSequenceSpec> {
        let prefix: Vec<C64> = self.prefix.iter().map(|&z| z.into()).collect();
        let pos_p = |p: f64| {
            if p.is_finite() && p > 0.0 {
                Ok(p)
            } else {
                Err(Error::InvalidArgument(format!("exponent p must be positive, got {p}")))
            }
        };
        let one = C64::new(1.0, 0.0);
        match &self.tail {
            SequenceTailDoc::Constant { value } => {
                if self.class.is_some() {
                    return Err(Error::InvalidArgument("a constant tail takes no class override".into()));
                }
                ComplexSequenceSpec::constant(prefix, (*value).into())
            }
            SequenceTailDoc::OnePlusPower { coeff, p } => {
                let (c, p) = (C64::from(*coeff), pos_p(*p)?);
                let class = self.class.unwrap_or(TailClass::PSeriesLogModulus { p });
                ComplexSequenceSpec::closed_form(prefix, &format!("1+({c})n^-{p}"), Some(class), move |n| {
                    one + c * (n as f64).powf(-p)
                })
            }
            SequenceTailDoc::ExpPower { coeff, p } => {
                let (c, p) = (C64::from(*coeff), pos_p(*p)?);
                let implied = if p <= 1.0 && c.re == 0.0 && c.im != 0.0 {
                    TailClass::BoundedNonsummableArgument
                } else {
                    TailClass::PSeriesLogModulus { p }
                };
                let class = self.class.unwrap_or(implied);
                ComplexSequenceSpec::closed_form(prefix, &format!("exp(({c})n^-{p})"), Some(class), move |n| {
                    (c * (n as f64).powf(-p)).exp()
                })
            }
            SequenceTailDoc::OnePlusGeometric { coeff, ratio } => {
                let (c, r) = (C64::from(*coeff), *ratio);
                if !(0.0..1.0).contains(&r) {
                    return Err(Error::InvalidArgument(format!("ratio must lie in [0, 1), got {r}")));
                }
                let class = self.class.unwrap_or(TailClass::GeometricModulus { ratio: r });
                ComplexSequenceSpec::closed_form(prefix, &format!("1+({c}){r}^n"), Some(class), move |n| {
                    one + c * r.powf(n as f64)
                })
            }
            SequenceTailDoc::EventuallyOne { values } => {
                let start = prefix.len() + 1;
                let from = start + values.len();
                let values: Vec<C64> = values.iter().map(|&z| z.into()).collect();
                if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                    return Err(Error::InvalidAmplitude("eventually-one values must be finite".into()));
                }
                let class = self.class.unwrap_or(TailClass::EventuallyOne { from });
                ComplexSequenceSpec::closed_form(prefix, "eventually one", Some(class), move |n| {
                    values.get(n - start).copied().unwrap_or(one)
                })
            }
        }
    }
}

pub fn parse_sequence(text: &str) -> Result<ComplexSequenceSpec> {
    let doc: SequenceDoc =
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("sequence JSON: {e}")))?;
    doc.to_spec()
}

// -------------------------------------------------------------- operators

/// `{"terms": [{"coeff": {..}, "prefix_ops": [[..]], "tail": {..}}]}`.
///
/// Matrices are flat row-major lists of complex entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorDoc {
    pub terms: Vec<OperatorTermDoc>,
}

fn default_coeff() -> JsonComplex {
    JsonComplex { re: 1.0, im: 0.0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorTermDoc {
    #[serde(default = "default_coeff")]
    pub coeff: JsonComplex,
    #[serde(default)]
    pub prefix_ops: Vec<Vec<JsonComplex>>,
    pub tail: OperatorTailDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OperatorTailDoc {
    Identity { dim: usize },
    Constant { matrix: Vec<JsonComplex> },
}

fn matrix_from_json(m: &[JsonComplex]) -> Result<FactorOperator> {
    let dim = (m.len() as f64).sqrt().round() as usize;
    if dim * dim != m.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} entries do not form a square matrix",
            m.len()
        )));
    }
    FactorOperator::new(dim, m.iter().map(|&z| z.into()).collect())
}

fn matrix_to_json(u: &FactorOperator) -> Vec<JsonComplex> {
    u.matrix().iter().map(|&z| z.into()).collect()
}

impl OperatorDoc {
    pub fn to_operator(&self) -> Result<FactoredOperator> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let ops = t
                    .prefix_ops
                    .iter()
                    .map(|m| matrix_from_json(m))
                    .collect::<Result<Vec<_>>>()?;
                let tail = match &t.tail {
                    OperatorTailDoc::Identity { dim } => OperatorTail::Identity(*dim),
                    OperatorTailDoc::Constant { matrix } => OperatorTail::Constant(matrix_from_json(matrix)?),
                };
                Ok(OperatorTerm::new(t.coeff.into(), ops, tail))
            })
            .collect::<Result<Vec<_>>>()?;
        FactoredOperator::new(terms)
    }

    pub fn from_operator(op: &FactoredOperator) -> Self {
        let terms = op
            .terms()
            .iter()
            .map(|t| OperatorTermDoc {
                coeff: t.coeff.into(),
                prefix_ops: t.prefix_ops.iter().map(matrix_to_json).collect(),
                tail: match &t.tail {
                    OperatorTail::Identity(d) => OperatorTailDoc::Identity { dim: *d },
                    OperatorTail::Constant(u) => OperatorTailDoc::Constant {
                        matrix: matrix_to_json(u),
                    },
                },
            })
            .collect();
        OperatorDoc { terms }
    }
}

pub fn parse_operator(text: &str) -> Result<FactoredOperator> {
    let doc: OperatorDoc =
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("operator JSON: {e}")))?;
    doc.to_operator()
}

pub fn operator_to_json(op: &FactoredOperator) -> String {
    serde_json::to_string_pretty(&OperatorDoc::from_operator(op)).expect("operator documents always serialize")
}

// ----------------------------------------------------- measurement models

/// `{"amplitudes": [..], "device_states": [state, ..], "ready_state": state?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub amplitudes: Vec<JsonComplex>,
    pub device_states: Vec<StateDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ready_state: Option<StateDoc>,
}

impl ModelDoc {
    pub fn to_model(&self) -> Result<MeasurementModel> {
        let devices = self
            .device_states
            .iter()
            .map(StateDoc::to_state)
            .collect::<Result<Vec<_>>>()?;
        let ready = self.ready_state.as_ref().map(StateDoc::to_state).transpose()?;
        MeasurementModel::new(self.amplitudes.iter().map(|&z| z.into()).collect(), devices, ready)
    }

    pub fn from_model(m: &MeasurementModel) -> Result<Self> {
        Ok(ModelDoc {
            amplitudes: m.amplitudes().iter().map(|&z| z.into()).collect(),
            device_states: m
                .device_states()
                .iter()
                .map(StateDoc::from_state)
                .collect::<Result<Vec<_>>>()?,
            ready_state: m.ready_state().map(StateDoc::from_state).transpose()?,
        })
    }
}

pub fn parse_model(text: &str) -> Result<MeasurementModel> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("model JSON: {e}")))?;
    doc.to_model()
}

pub fn parse_cascade(text: &str) -> Result<CascadeSpec> {
    let spec: CascadeSpec =
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("cascade JSON: {e}")))?;
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ext_f64_round_trip() {
        #[derive(Debug, PartialEq, Serialize, Deserialize)]
        struct W {
            #[serde(with = "ext_f64")]
            x: f64,
            #[serde(with = "ext_f64::option")]
            y: Option<f64>,
            #[serde(with = "ext_f64::vec")]
            z: Vec<f64>,
        }
        let w = W {
            x: f64::NEG_INFINITY,
            y: Some(f64::INFINITY),
            z: vec![1.5, f64::NEG_INFINITY],
        };
        let text = serde_json::to_string(&w).unwrap();
        assert_eq!(text, r#"{"x":"-inf","y":"inf","z":[1.5,"-inf"]}"#);
        assert_eq!(serde_json::from_str::<W>(&text).unwrap(), w);
        assert!(serde_json::from_str::<W>(r#"{"x":"huge","y":null,"z":[]}"#).is_err());
    }

    #[test]
    fn state_schema() {
        let text = r#"{
            "prefix": [[{"re": 1, "im": 0}, {"re": 0, "im": 0}]],
            "tail": {"kind": "constant", "vector": [{"re": 0.6}, {"re": 0, "im": 0.8}]},
            "label": "mixed"
        }"#;
        let s = parse_state(text).unwrap();
        assert_eq!(s.label(), Some("mixed"));
        assert_eq!(s.factor(1).as_ref(), &FactorVector::spin_up());
        assert_eq!(s.factor(7).amplitudes()[1], C64::new(0.0, 0.8));
        let back = parse_state(&state_to_json(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn parametric_schema() {
        let text = r#"{"prefix": [], "tail": {"kind": "parametric", "class": "geometric", "ratio": 0.5}}"#;
        let s = parse_state(text).unwrap();
        assert!((s.factor(1).norm() - 1.5).abs() < 1e-15);
        let rot = r#"{"tail": {"kind": "parametric", "class": "p-series", "p": 1, "amplitude": 0.5,
                      "deviation": "rotation", "toward": [{"re": 0}, {"re": 1}]}}"#;
        let s = parse_state(rot).unwrap().prepend(FactorVector::spin_down());
        let back = parse_state(&state_to_json(&s).unwrap()).unwrap();
        for n in 1..20 {
            assert_eq!(back.factor(n), s.factor(n));
        }
        let undeclared = r#"{"tail": {"kind": "parametric", "class": "mystery"}}"#;
        assert!(matches!(parse_state(undeclared), Err(Error::UndeclaredTailClass(_))));
        let missing = r#"{"tail": {"kind": "parametric", "class": "geometric"}}"#;
        assert!(parse_state(missing).is_err());
    }

    #[test]
    fn periodic_schema_round_trip() {
        let tail = TailRule::periodic(vec![FactorVector::spin_plus(), FactorVector::spin_up()]).unwrap();
        let s = ProductState::new(vec![], tail)
            .unwrap()
            .prepend(FactorVector::spin_down());
        let back = parse_state(&state_to_json(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn sequence_schema() {
        use crate::products::{classify_product, ClassifyOptions, VerdictKind};
        let text = r#"{"prefix": [], "tail": {"kind": "exp-power", "coeff": {"re": 0, "im": 1}, "p": 1}}"#;
        let spec = parse_sequence(text).unwrap();
        let v = classify_product(&spec, ClassifyOptions::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::QuasiConvergesToZero);
        let text = r#"{"prefix": [{"re": 2}], "tail": {"kind": "eventually-one", "values": [{"re": 3}, {"re": 4}]}}"#;
        let spec = parse_sequence(text).unwrap();
        let v = classify_product(&spec, ClassifyOptions::default()).unwrap();
        assert_eq!(v.value(), Some(C64::new(24.0, 0.0)));
        let forced =
            r#"{"tail": {"kind": "one-plus-power", "coeff": {"re": 1}, "p": 2}, "class": {"class": "custom"}}"#;
        let spec = parse_sequence(forced).unwrap();
        let v = classify_product(&spec, ClassifyOptions::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::Inconclusive);
    }
    #[test]
    fn operator_round_trip() {
        let text = r#"{"terms": [
            {"coeff": {"re": 0.5}, "prefix_ops": [[{"re": 0}, {"re": 1}, {"re": 1}, {"re": 0}]],
             "tail": {"kind": "identity", "dim": 2}},
            {"coeff": {"re": 0, "im": 1}, "tail": {"kind": "constant", "matrix": [{"re": 1}, {"re": 0}, {"re": 0}, {"re": -1}]}}
        ]}"#;
        let op = parse_operator(text).unwrap();
        assert_eq!(op.terms().len(), 2);
        assert!(op.terms()[0].op_at(2).is_none());
        let back = parse_operator(&operator_to_json(&op)).unwrap();
        assert_eq!(back, op);
        assert!(parse_operator(
            r#"{"terms": [{"tail": {"kind": "constant", "matrix": [{"re": 1}, {"re": 0}, {"re": 0}]}}]}"#
        )
        .is_err());
    }

    #[test]
    fn model_round_trip() {
        let text = r#"{"amplitudes": [{"re": 0.6}, {"re": 0.8}],
            "device_states": [
                {"tail": {"kind": "constant", "vector": [{"re": 1}, {"re": 0}]}},
                {"tail": {"kind": "constant", "vector": [{"re": 0.9}, {"re": 0.4358898943540674}]}}]}"#;
        let m = parse_model(text).unwrap();
        let json = serde_json::to_string(&ModelDoc::from_model(&m).unwrap()).unwrap();
        assert_eq!(parse_model(&json).unwrap(), m);
        let same = r#"{"amplitudes": [{"re": 0.6}, {"re": 0.8}],
            "device_states": [
                {"tail": {"kind": "constant", "vector": [{"re": 1}, {"re": 0}]}},
                {"tail": {"kind": "constant", "vector": [{"re": 1}, {"re": 0}]}}]}"#;
        assert!(matches!(parse_model(same), Err(Error::PreconditionViolated(_))));
    }
}

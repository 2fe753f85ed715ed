//! Operators of the form `Û = Σ_p u_p ⊗_α Û_α^p`.
//!
//! Each term acts factor by factor: explicit operators on the first
//! positions, then either the identity or one repeated operator on every
//! later position.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::{log_sum, LogComplex, ProductAccumulator, DIRECT_LIMIT};
use crate::model::{CompositeState, FactorVector, ProductState, TailRule, C64};
use crate::overlaps::{check_truncations, truncated_overlap, OverlapSweep};
use crate::sectors::{classify_sequence, GAP_TOL, ZERO_TERM_TOL};

/// Largest factor dimension for which matrix exponentials are formed.
pub const MAX_EXP_DIM: usize = 16;
/// Entrywise tolerance of the Hermiticity check.
pub const HERMITIAN_TOL: f64 = 1e-12;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// A `dim × dim` matrix acting on one factor space, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorOperator {
    dim: usize,
    matrix: Vec<C64>,
    norm: f64,
}

impl FactorOperator {
    pub fn new(dim: usize, matrix: Vec<C64>) -> Result<Self> {
        if dim == 0 || matrix.len() != dim * dim {
            return Err(Error::ShapeMismatch(format!(
                "operator of dim {dim} needs {} entries, got {}",
                dim * dim,
                matrix.len()
            )));
        }
        if let Some(k) = matrix.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidAmplitude(format!(
                "operator entry ({}, {}) is not finite",
                k / dim,
                k % dim
            )));
        }
        let norm = largest_singular_value(dim, &matrix);
        Ok(FactorOperator { dim, matrix, norm })
    }

    pub fn from_rows(rows: &[&[C64]]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::ShapeMismatch("operator rows must form a square matrix".into()));
        }
        Self::new(dim, rows.iter().flat_map(|r| r.iter().copied()).collect())
    }

    pub fn from_real(dim: usize, values: &[f64]) -> Result<Self> {
        Self::new(dim, values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = vec![ZERO; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = ONE;
        }
        FactorOperator {
            dim,
            matrix: m,
            norm: 1.0,
        }
    }

    pub fn sigma_x() -> Self {
        Self::from_real(2, &[0.0, 1.0, 1.0, 0.0]).expect("finite")
    }

    pub fn sigma_y() -> Self {
        Self::new(2, vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO]).expect("finite")
    }

    pub fn sigma_z() -> Self {
        Self::from_real(2, &[1.0, 0.0, 0.0, -1.0]).expect("finite")
    }

    /// `exp(-iθσ_y/2)`: takes `|↑⟩` to `cos(θ/2)|↑⟩ + sin(θ/2)|↓⟩`.
    pub fn rotation_y(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self::from_real(2, &[c, -s, s, c]).expect("finite")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[C64] {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.matrix[i * self.dim + j]
    }

    /// Cached operator norm (largest singular value).
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn apply(&self, v: &FactorVector) -> FactorVector {
        assert_eq!(self.dim, v.dim(), "operator/vector dimension mismatch");
        let x = v.amplitudes();
        let out = (0..self.dim)
            .map(|i| {
                self.matrix[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        FactorVector::from_parts_unchecked(out)
    }

    /// `⟨v|U|v⟩`.
    pub fn expectation(&self, v: &FactorVector) -> C64 {
        v.inner(&self.apply(v))
    }

    pub fn adjoint(&self) -> FactorOperator {
        let d = self.dim;
        let m = (0..d * d).map(|k| self.matrix[(k % d) * d + k / d].conj()).collect();
        FactorOperator {
            dim: d,
            matrix: m,
            norm: self.norm,
        }
    }

    pub fn mul(&self, other: &FactorOperator) -> Result<FactorOperator> {
        if self.dim != other.dim {
            return Err(Error::ShapeMismatch(format!(
                "dim {} times dim {}",
                self.dim, other.dim
            )));
        }
        let d = self.dim;
        let mut m = vec![ZERO; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.matrix[i * d + k];
                for j in 0..d {
                    m[i * d + j] += a * other.matrix[k * d + j];
                }
            }
        }
        FactorOperator::new(d, m)
    }

    /// Largest entrywise deviation `|A_ij − conj(A_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitary_deviation(&self) -> f64 {
        let p = self.adjoint().mul(self).expect("same dim");
        let d = self.dim;
        (0..d * d)
            .map(|k| {
                let target = if k / d == k % d { ONE } else { ZERO };
                (p.matrix[k] - target).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Largest singular value by power iteration on `A†A`.
    pub fn power_iteration_norm(&self, max_iter: usize, tol: f64) -> f64 {
        let d = self.dim;
        let ata = self.adjoint().mul(self).expect("same dim");
        // deterministic start with no special alignment
        let mut x: Vec<C64> = (0..d)
            .map(|k| C64::new(1.0 + 0.1 * k as f64, 0.05 * k as f64))
            .collect();
        let mut lambda = 0.0f64;
        for _ in 0..max_iter {
            let y: Vec<C64> = (0..d)
                .map(|i| (0..d).map(|j| ata.matrix[i * d + j] * x[j]).sum())
                .collect();
            let ny = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if ny == 0.0 {
                return 0.0;
            }
            let nx = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let next = ny / nx;
            x = y.into_iter().map(|c| c / ny).collect();
            if (next - lambda).abs() <= tol * next {
                lambda = next;
                break;
            }
            lambda = next;
        }
        lambda.sqrt()
    }

    pub(crate) fn to_dmatrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.matrix)
    }

    pub(crate) fn from_dmatrix(m: &DMatrix<C64>) -> Result<FactorOperator> {
        let d = m.nrows();
        let entries = (0..d * d).map(|k| m[(k / d, k % d)]).collect();
        FactorOperator::new(d, entries)
    }

    /// `exp(i t H)` for this operator taken as `H`.
    pub fn exp_i(&self, t: f64) -> Result<FactorOperator> {
        if self.dim > MAX_EXP_DIM {
            return Err(Error::InvalidArgument(format!(
                "matrix exponential limited to dim <= {MAX_EXP_DIM}, got {}",
                self.dim
            )));
        }
        let scaled = self.to_dmatrix() * C64::new(0.0, t);
        FactorOperator::from_dmatrix(&scaled.exp())
    }
}

fn largest_singular_value(dim: usize, matrix: &[C64]) -> f64 {
    let m = DMatrix::from_row_slice(dim, dim, matrix);
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Operator on every position past a term's explicit operators.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorTail {
    Identity(usize),
    Constant(FactorOperator),
}

impl OperatorTail {
    pub fn dim(&self) -> usize {
        match self {
            OperatorTail::Identity(d) => *d,
            OperatorTail::Constant(u) => u.dim(),
        }
    }
}

/// `u_p ⊗_α Û_α^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTerm {
    pub coeff: C64,
    pub prefix_ops: Vec<FactorOperator>,
    pub tail: OperatorTail,
}

impl OperatorTerm {
    pub fn new(coeff: C64, prefix_ops: Vec<FactorOperator>, tail: OperatorTail) -> Self {
        OperatorTerm {
            coeff,
            prefix_ops,
            tail,
        }
    }

    /// Operator at 1-based position `n`; `None` stands for the identity.
    pub fn op_at(&self, n: usize) -> Option<&FactorOperator> {
        match self.prefix_ops.get(n - 1) {
            Some(u) => Some(u),
            None => match &self.tail {
                OperatorTail::Identity(_) => None,
                OperatorTail::Constant(u) => Some(u),
            },
        }
    }

    fn dim_at(&self, n: usize) -> usize {
        match self.prefix_ops.get(n - 1) {
            Some(u) => u.dim(),
            None => self.tail.dim(),
        }
    }

    fn apply_at(&self, n: usize, v: &FactorVector) -> FactorVector {
        match self.op_at(n) {
            Some(u) => u.apply(v),
            None => v.clone(),
        }
    }
}

/// Finite sum of factored operator terms.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredOperator {
    terms: Vec<OperatorTerm>,
}

impl FactoredOperator {
    pub fn new(terms: Vec<OperatorTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::ShapeMismatch("operator needs at least one term".into()));
        }
        if let Some(k) = terms
            .iter()
            .position(|t| !(t.coeff.re.is_finite() && t.coeff.im.is_finite()))
        {
            return Err(Error::InvalidAmplitude(format!(
                "coefficient of term {k} is not finite"
            )));
        }
        let explicit = terms.iter().map(|t| t.prefix_ops.len()).max().unwrap_or(0);
        for n in 1..=explicit + 1 {
            let d0 = terms[0].dim_at(n);
            if let Some(t) = terms.iter().find(|t| t.dim_at(n) != d0) {
                return Err(Error::ShapeMismatch(format!(
                    "position {n}: operator terms act on dims {d0} and {}",
                    t.dim_at(n)
                )));
            }
        }
        Ok(FactoredOperator { terms })
    }

    pub fn single(term: OperatorTerm) -> Self {
        FactoredOperator::new(vec![term]).expect("single term is consistent")
    }

    /// The identity on factors of dimension `dim`.
    pub fn identity(dim: usize) -> Self {
        Self::single(OperatorTerm::new(ONE, vec![], OperatorTail::Identity(dim)))
    }

    /// `op` at position `site` (1-based), identity elsewhere.
    pub fn local(site: usize, op: FactorOperator) -> Result<Self> {
        if site == 0 {
            return Err(Error::IndexOutOfRange { index: 0, len: 0 });
        }
        let d = op.dim();
        let mut prefix = vec![FactorOperator::identity(d); site - 1];
        prefix.push(op);
        Ok(Self::single(OperatorTerm::new(ONE, prefix, OperatorTail::Identity(d))))
    }

    /// `op` on every position.
    pub fn global(op: FactorOperator) -> Self {
        Self::single(OperatorTerm::new(ONE, vec![], OperatorTail::Constant(op)))
    }

    pub fn terms(&self) -> &[OperatorTerm] {
        &self.terms
    }

    /// True when every term is the identity beyond finitely many positions.
    pub fn finite_support(&self) -> bool {
        self.terms.iter().all(|t| matches!(t.tail, OperatorTail::Identity(_)))
    }

    /// Number of explicit positions across all terms.
    pub fn explicit_len(&self) -> usize {
        self.terms.iter().map(|t| t.prefix_ops.len()).max().unwrap_or(0)
    }

    /// `Σ_p |u_p| ∏_{α ≤ N} ‖Û_α^p‖`, an upper bound on `‖Û_N‖`.
    pub fn norm_bound(&self, n: usize) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let log: f64 = (1..=n).map(|k| t.op_at(k).map_or(0.0, |u| u.norm().ln())).sum();
                t.coeff.norm() * log.exp()
            })
            .sum()
    }

    /// `Û†`.
    pub fn adjoint(&self) -> FactoredOperator {
        let terms = self
            .terms
            .iter()
            .map(|t| OperatorTerm {
                coeff: t.coeff.conj(),
                prefix_ops: t.prefix_ops.iter().map(FactorOperator::adjoint).collect(),
                tail: match &t.tail {
                    OperatorTail::Identity(d) => OperatorTail::Identity(*d),
                    OperatorTail::Constant(u) => OperatorTail::Constant(u.adjoint()),
                },
            })
            .collect();
        FactoredOperator { terms }
    }

    /// Checks factor dimensions against a state.
    pub fn check_shape(&self, s: &ProductState) -> Result<()> {
        let explicit = self.explicit_len().max(s.prefix_len());
        for n in 1..=explicit + s.tail().period() {
            let (d_op, d_s) = (self.terms[0].dim_at(n), s.dim_at(n));
            if d_op != d_s {
                return Err(Error::ShapeMismatch(format!(
                    "position {n}: operator acts on dim {d_op}, state has dim {d_s}"
                )));
            }
        }
        Ok(())
    }
}

/// `Û|Ψ⟩` as one composite term per operator term.
pub fn apply(op: &FactoredOperator, s: &ProductState) -> Result<CompositeState> {
    op.check_shape(s)?;
    let mut terms = Vec::with_capacity(op.terms.len());
    for t in &op.terms {
        let explicit = t.prefix_ops.len().max(s.prefix_len());
        let prefix: Vec<FactorVector> = (1..=explicit).map(|n| t.apply_at(n, &s.factor(n))).collect();
        let tail = match &t.tail {
            OperatorTail::Identity(_) => s.tail().clone(),
            OperatorTail::Constant(u) => apply_to_tail(u, s.tail())?,
        };
        let mut out = ProductState::new(prefix, tail)?;
        if let Some(l) = s.label() {
            out = out.with_label(l);
        }
        terms.push((t.coeff, out));
    }
    CompositeState::new(terms)
}

fn apply_to_tail(u: &FactorOperator, tail: &TailRule) -> Result<TailRule> {
    match tail {
        TailRule::Constant(v) => Ok(TailRule::Constant(u.apply(v))),
        TailRule::Periodic { pattern, origin } => Ok(TailRule::Periodic {
            pattern: pattern.iter().map(|v| u.apply(v)).collect(),
            origin: *origin,
        }),
        TailRule::Parametric(_) => Err(Error::UnsupportedTail(
            "a repeated operator on a parametric tail has no closed form".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectorActionKind {
    PreservesSector,
    LeavesSector,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum SectorActionWitness {
    /// Every term is the identity past `sites`.
    FiniteSupport {
        sites: usize,
    },
    /// Every repeated operator fixes the tail vectors it meets:
    /// `‖U v − v‖ ≤ max_residual` for each of them.
    FixedTail {
        max_residual: f64,
    },
    /// Term `term` moves the tail vector at pattern offset `offset`:
    /// `|⟨v|U v⟩ − 1| = deficit` and `‖U v − v‖ = residual`.
    TailDeficit {
        term: usize,
        offset: usize,
        deficit: f64,
        residual: f64,
    },
    Undecided {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorActionVerdict {
    pub kind: SectorActionKind,
    pub witness: SectorActionWitness,
}

impl SectorActionVerdict {
    /// Re-derives the witness from `op` and `s`.
    pub fn verify(&self, op: &FactoredOperator, s: &ProductState) -> bool {
        match (&self.kind, &self.witness) {
            (SectorActionKind::PreservesSector, SectorActionWitness::FiniteSupport { sites }) => op
                .terms
                .iter()
                .all(|t| t.prefix_ops.len() <= *sites && matches!(t.tail, OperatorTail::Identity(_))),
            (SectorActionKind::PreservesSector, SectorActionWitness::FixedTail { max_residual }) => {
                *max_residual <= ZERO_TERM_TOL
                    && tail_moves(op, s).is_some_and(|m| m.iter().all(|x| x.residual <= *max_residual))
            }
            (
                SectorActionKind::LeavesSector,
                SectorActionWitness::TailDeficit {
                    term,
                    offset,
                    deficit,
                    residual,
                },
            ) => tail_moves(op, s).is_some_and(|m| {
                m.iter().any(|x| {
                    x.term == *term
                        && x.offset == *offset
                        && (x.deficit - deficit).abs() <= 1e-15
                        && (x.residual - residual).abs() <= 1e-15
                        && (x.deficit > GAP_TOL || x.residual > GAP_TOL)
                })
            }),
            (SectorActionKind::Inconclusive, SectorActionWitness::Undecided { .. }) => true,
            _ => false,
        }
    }
}

struct TailMove {
    term: usize,
    offset: usize,
    deficit: f64,
    residual: f64,
}

/// How each repeated operator moves each tail limit vector, for terms with a
/// nonzero coefficient. `None` when the tail has no fixed limit pattern.
fn tail_moves(op: &FactoredOperator, s: &ProductState) -> Option<Vec<TailMove>> {
    let pattern: Vec<&FactorVector> = match s.tail() {
        TailRule::Constant(v) => vec![v],
        TailRule::Periodic { pattern, .. } => pattern.iter().collect(),
        TailRule::Parametric(_) => return None,
    };
    let mut out = Vec::new();
    for (k, t) in op.terms.iter().enumerate() {
        let OperatorTail::Constant(u) = &t.tail else { continue };
        if t.coeff == ZERO {
            continue;
        }
        for (j, v) in pattern.iter().enumerate() {
            let uv = u.apply(v);
            let residual = uv
                .amplitudes()
                .iter()
                .zip(v.amplitudes())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            out.push(TailMove {
                term: k,
                offset: j,
                deficit: (v.inner(&uv) - 1.0).norm(),
                residual,
            });
        }
    }
    Some(out)
}

/// Whether `Û|Ψ⟩` stays in the sector of `|Ψ⟩`.
pub fn sector_action(op: &FactoredOperator, s: &ProductState) -> Result<SectorActionVerdict> {
    op.check_shape(s)?;
    let class = classify_sequence(s);
    if !class.is_non_trivial() || !s.is_unit_normed(ZERO_TERM_TOL) {
        return Err(Error::PreconditionViolated(
            "sector action needs a non-trivial convergent sequence of unit-norm factors".into(),
        ));
    }
    if op.finite_support() {
        return Ok(SectorActionVerdict {
            kind: SectorActionKind::PreservesSector,
            witness: SectorActionWitness::FiniteSupport {
                sites: op.explicit_len(),
            },
        });
    }
    let Some(moves) = tail_moves(op, s) else {
        return Ok(SectorActionVerdict {
            kind: SectorActionKind::Inconclusive,
            witness: SectorActionWitness::Undecided {
                reason: "repeated operator on a parametric tail".into(),
            },
        });
    };
    if let Some(m) = moves.iter().find(|m| m.deficit > GAP_TOL || m.residual > GAP_TOL) {
        return Ok(SectorActionVerdict {
            kind: SectorActionKind::LeavesSector,
            witness: SectorActionWitness::TailDeficit {
                term: m.term,
                offset: m.offset,
                deficit: m.deficit,
                residual: m.residual,
            },
        });
    }
    let max_residual = moves.iter().map(|m| m.residual).fold(0.0, f64::max);
    if max_residual <= ZERO_TERM_TOL {
        return Ok(SectorActionVerdict {
            kind: SectorActionKind::PreservesSector,
            witness: SectorActionWitness::FixedTail { max_residual },
        });
    }
    Ok(SectorActionVerdict {
        kind: SectorActionKind::Inconclusive,
        witness: SectorActionWitness::Undecided {
            reason: format!("tail residual {max_residual:e} lies between {ZERO_TERM_TOL:e} and {GAP_TOL:e}"),
        },
    })
}

/// `⟨Ψ_N|Û_N|Ψ_N⟩ = Σ_p u_p ∏_{α ≤ N} ⟨ψ_α|Û_α^p|ψ_α⟩` at each truncation.
pub fn expectation_sweep(op: &FactoredOperator, s: &ProductState, truncations: &[usize]) -> Result<OverlapSweep> {
    check_truncations(truncations)?;
    op.check_shape(s)?;
    let mut accs = vec![ProductAccumulator::new(); op.terms.len()];
    let mut out = OverlapSweep::with_capacity(truncations.len());
    let mut k = 0;
    for &n in truncations {
        while k < n {
            k += 1;
            let v = s.factor(k);
            for (acc, t) in accs.iter_mut().zip(&op.terms) {
                let z = if acc.is_zero() {
                    ZERO
                } else {
                    match t.op_at(k) {
                        Some(u) => u.expectation(&v),
                        None => C64::new(v.norm_sqr(), 0.0),
                    }
                };
                acc.push(z);
            }
        }
        let logs: Vec<LogComplex> = accs
            .iter()
            .zip(&op.terms)
            .map(|(a, t)| LogComplex::from_complex(t.coeff) * a.log())
            .collect();
        let total = log_sum(&logs);
        let direct = if n <= DIRECT_LIMIT {
            Some(accs.iter().zip(&op.terms).map(|(a, t)| t.coeff * a.value()).sum())
        } else {
            None
        };
        out.push(n, total, direct);
    }
    Ok(out)
}

/// Sum of per-site Hermitian terms `Ĥ = Σ_α ĥ_α`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteGenerator {
    prefix: Vec<FactorOperator>,
    tail: GeneratorTail,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorTail {
    /// `ĥ_α = 0` past the prefix, on factors of this dimension.
    Zero(usize),
    Constant(FactorOperator),
}

impl SiteGenerator {
    pub fn new(prefix: Vec<FactorOperator>, tail: GeneratorTail) -> Result<Self> {
        let tail_op = match &tail {
            GeneratorTail::Zero(_) => None,
            GeneratorTail::Constant(h) => Some(h),
        };
        for (i, h) in prefix.iter().map(Some).chain(std::iter::once(tail_op)).enumerate() {
            let Some(h) = h else { continue };
            if h.dim() > MAX_EXP_DIM {
                return Err(Error::InvalidArgument(format!(
                    "generator factor {} has dim {}, limit is {MAX_EXP_DIM}",
                    i + 1,
                    h.dim()
                )));
            }
            let deviation = h.hermitian_deviation();
            if deviation > HERMITIAN_TOL {
                return Err(Error::NonHermitianGenerator {
                    index: i + 1,
                    deviation,
                });
            }
        }
        Ok(SiteGenerator { prefix, tail })
    }

    /// `h` at one site, zero elsewhere.
    pub fn local(site: usize, h: FactorOperator) -> Result<Self> {
        if site == 0 {
            return Err(Error::IndexOutOfRange { index: 0, len: 0 });
        }
        let d = h.dim();
        let zero = FactorOperator::new(d, vec![ZERO; d * d])?;
        let mut prefix = vec![zero; site - 1];
        prefix.push(h);
        Self::new(prefix, GeneratorTail::Zero(d))
    }

    /// `h` at every site.
    pub fn uniform(h: FactorOperator) -> Result<Self> {
        Self::new(vec![], GeneratorTail::Constant(h))
    }

    pub fn prefix(&self) -> &[FactorOperator] {
        &self.prefix
    }

    pub fn tail(&self) -> &GeneratorTail {
        &self.tail
    }

    /// `exp(i t Ĥ) = ⊗_α exp(i t ĥ_α)` as a single-term factored operator.
    pub fn propagator(&self, t: f64) -> Result<FactoredOperator> {
        let prefix = self.prefix.iter().map(|h| h.exp_i(t)).collect::<Result<Vec<_>>>()?;
        let tail = match &self.tail {
            GeneratorTail::Zero(d) => OperatorTail::Identity(*d),
            GeneratorTail::Constant(h) => OperatorTail::Constant(h.exp_i(t)?),
        };
        FactoredOperator::new(vec![OperatorTerm::new(ONE, prefix, tail)])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub state: CompositeState,
    /// `⟨Ψ_N|exp(i t Ĥ_N)|Ψ_N⟩`.
    pub survival: C64,
}

/// `exp(i t Ĥ)|Ψ⟩` with its survival amplitude at truncation `n`.
pub fn evolve(generator: &SiteGenerator, s: &ProductState, t: f64, n: usize) -> Result<Evolution> {
    let u = generator.propagator(t)?;
    let state = apply(&u, s)?;
    let survival = truncated_overlap(s, &state.terms()[0].1, n)?;
    Ok(Evolution { state, survival })
}

//! Dense reference implementation for small truncations.
//!
//! The first `N` factors are expanded into one explicit amplitude vector.
//! Flattening is mixed-radix with factor 1 as the most significant digit:
//! the index of `(k_1, ..., k_N)` is `((k_1·d_2 + k_2)·d_3 + k_3)...`.

use crate::decoherence::{premeasurement_state, MeasurementModel};
use crate::error::{Error, Result};
use crate::model::{CompositeState, ProductState, C64};
use crate::operators::{FactorOperator, FactoredOperator};

/// Largest number of amplitudes a dense state may hold.
pub const DENSE_BUDGET: usize = 1 << 20;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    pub dims: Vec<usize>,
    pub amplitudes: Vec<C64>,
}

impl DenseState {
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_dims(&self, other: &[usize]) -> Result<()> {
        if self.dims != other {
            return Err(Error::ShapeMismatch(format!(
                "dense dims {:?} against {:?}",
                self.dims, other
            )));
        }
        Ok(())
    }
}

/// Anything that can be expanded into a dense vector.
pub trait Densify {
    fn densify(&self, n: usize) -> Result<DenseState>;
}

fn budget(dims: &[usize]) -> Result<usize> {
    let needed: u128 = dims.iter().map(|&d| d as u128).product();
    if needed > DENSE_BUDGET as u128 {
        return Err(Error::DimensionBudgetExceeded {
            needed,
            budget: DENSE_BUDGET,
        });
    }
    Ok(needed as usize)
}

impl Densify for ProductState {
    fn densify(&self, n: usize) -> Result<DenseState> {
        let dims: Vec<usize> = (1..=n).map(|k| self.dim_at(k)).collect();
        let len = budget(&dims)?;
        let mut amps = Vec::with_capacity(len);
        amps.push(C64::new(1.0, 0.0));
        for f in self.factors(n) {
            amps = amps
                .iter()
                .flat_map(|a| f.amplitudes().iter().map(move |x| a * x))
                .collect();
        }
        Ok(DenseState { dims, amplitudes: amps })
    }
}

impl Densify for CompositeState {
    fn densify(&self, n: usize) -> Result<DenseState> {
        let mut out: Option<DenseState> = None;
        for (c, s) in self.terms() {
            let d = s.densify(n)?;
            match out.as_mut() {
                None => {
                    out = Some(DenseState {
                        dims: d.dims,
                        amplitudes: d.amplitudes.iter().map(|a| c * a).collect(),
                    })
                }
                Some(acc) => {
                    acc.check_dims(&d.dims)?;
                    for (x, a) in acc.amplitudes.iter_mut().zip(&d.amplitudes) {
                        *x += c * a;
                    }
                }
            }
        }
        out.ok_or_else(|| Error::InvalidArgument("empty composite state".into()))
    }
}

pub fn densify<S: Densify + ?Sized>(s: &S, n: usize) -> Result<DenseState> {
    s.densify(n)
}

/// `⟨a|b⟩ = Σ conj(a_k) b_k`.
pub fn dense_overlap(a: &DenseState, b: &DenseState) -> Result<C64> {
    a.check_dims(&b.dims)?;
    Ok(a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| x.conj() * y).sum())
}

/// Applies `op` to factor `site` (0-based) of a dense vector.
fn apply_site(amps: &[C64], dims: &[usize], site: usize, op: &FactorOperator) -> Vec<C64> {
    let d = dims[site];
    let inner: usize = dims[site + 1..].iter().product();
    let outer = amps.len() / (d * inner);
    let mut out = vec![ZERO; amps.len()];
    for o in 0..outer {
        for i in 0..d {
            for j in 0..d {
                let u = op.get(i, j);
                if u == ZERO {
                    continue;
                }
                let dst = (o * d + i) * inner;
                let src = (o * d + j) * inner;
                for r in 0..inner {
                    out[dst + r] += u * amps[src + r];
                }
            }
        }
    }
    out
}

/// `Û|ψ⟩` with every term restricted to the first `N = dims.len()` factors.
pub fn dense_apply(op: &FactoredOperator, s: &DenseState) -> Result<DenseState> {
    let mut total = vec![ZERO; s.len()];
    for term in op.terms() {
        let mut amps = s.amplitudes.clone();
        for site in 0..s.dims.len() {
            if let Some(u) = term.op_at(site + 1) {
                if u.dim() != s.dims[site] {
                    return Err(Error::ShapeMismatch(format!(
                        "operator of dim {} on factor {} of dim {}",
                        u.dim(),
                        site + 1,
                        s.dims[site]
                    )));
                }
                amps = apply_site(&amps, &s.dims, site, u);
            }
        }
        for (t, a) in total.iter_mut().zip(&amps) {
            *t += term.coeff * a;
        }
    }
    Ok(DenseState {
        dims: s.dims.clone(),
        amplitudes: total,
    })
}

/// `⟨ψ|Û|ψ⟩`.
pub fn dense_expectation(op: &FactoredOperator, s: &DenseState) -> Result<C64> {
    dense_overlap(s, &dense_apply(op, s)?)
}

/// System block of the premeasurement state after `n` device factors,
/// traced over the device indices. Row-major, `M × M`.
pub fn dense_density(m: &MeasurementModel, n: usize) -> Result<Vec<C64>> {
    let full = premeasurement_state(m).densify(n + 1)?;
    let dim = m.system_dim();
    let block = full.len() / dim;
    let mut rho = vec![ZERO; dim * dim];
    for i in 0..dim {
        let row = &full.amplitudes[i * block..(i + 1) * block];
        for j in 0..dim {
            let col = &full.amplitudes[j * block..(j + 1) * block];
            rho[i * dim + j] = row.iter().zip(col).map(|(x, y)| x * y.conj()).sum();
        }
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FactorVector, TailRule};

    #[test]
    fn basis_and_bell() {
        let up = ProductState::uniform(FactorVector::spin_up());
        let d = densify(&up, 3).unwrap();
        assert_eq!(d.len(), 8);
        assert_eq!(d.amplitudes[0], C64::new(1.0, 0.0));
        assert!(d.amplitudes[1..].iter().all(|a| *a == ZERO));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let down = ProductState::uniform(FactorVector::spin_down());
        let bell = CompositeState::new(vec![(C64::new(h, 0.0), up), (C64::new(h, 0.0), down)]).unwrap();
        let d = densify(&bell, 2).unwrap();
        let want = [h, 0.0, 0.0, h];
        for (a, w) in d.amplitudes.iter().zip(want) {
            assert!((a - C64::new(w, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn significance_order() {
        let s = ProductState::new(
            vec![FactorVector::spin_down()],
            TailRule::Constant(FactorVector::spin_up()),
        )
        .unwrap();
        let d = densify(&s, 3).unwrap();
        assert_eq!(d.amplitudes[4], C64::new(1.0, 0.0));
    }

    #[test]
    fn spin_pair_overlap() {
        let a = ProductState::uniform(FactorVector::spin_up());
        let b = ProductState::uniform(FactorVector::spin_plus());
        let v = dense_overlap(&densify(&a, 10).unwrap(), &densify(&b, 10).unwrap()).unwrap();
        assert!((v - C64::new(2f64.powi(-5), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn budget_and_shape_errors() {
        let a = ProductState::uniform(FactorVector::spin_up());
        assert!(matches!(densify(&a, 21), Err(Error::DimensionBudgetExceeded { .. })));
        let x = densify(&a, 2).unwrap();
        let y = densify(&a, 3).unwrap();
        assert!(matches!(dense_overlap(&x, &y), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn identity_and_local_expectations() {
        let s = ProductState::uniform(FactorVector::spin_plus());
        let d = densify(&s, 4).unwrap();
        let id = FactoredOperator::identity(2);
        assert!((dense_expectation(&id, &d).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-14);
        let x3 = FactoredOperator::local(3, FactorOperator::sigma_x()).unwrap();
        assert!((dense_expectation(&x3, &d).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-14);
        let z = FactoredOperator::global(FactorOperator::sigma_z());
        assert!(dense_expectation(&z, &d).unwrap().norm() < 1e-14);
    }
}

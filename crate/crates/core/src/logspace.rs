//! Underflow-safe products of complex numbers.
//!
//! Long products of per-factor overlaps such as `2^{-N/2}` leave the range of
//! `f64` for N in the low thousands. Values are therefore carried as a
//! log-modulus plus a phase, and only converted back to a plain complex number
//! on request.

use std::f64::consts::TAU;

use num_complex::Complex64;

/// Number of factors up to which products are formed by direct complex
/// multiplication. Beyond this the log-modulus form is used for values too.
pub const DIRECT_LIMIT: usize = 64;

/// A complex number stored as `exp(log_modulus) * exp(i * phase)`.
///
/// Zero is represented by `log_modulus == -inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    pub log_modulus: f64,
    pub phase: f64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        log_modulus: f64::NEG_INFINITY,
        phase: 0.0,
    };
    pub const ONE: LogComplex = LogComplex {
        log_modulus: 0.0,
        phase: 0.0,
    };

    pub fn from_complex(z: Complex64) -> Self {
        if z == Complex64::new(0.0, 0.0) {
            Self::ZERO
        } else {
            LogComplex {
                log_modulus: z.norm().ln(),
                phase: z.arg(),
            }
        }
    }

    pub fn to_complex(self) -> Complex64 {
        if self.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(self.log_modulus.exp(), self.phase)
        }
    }

    pub fn is_zero(self) -> bool {
        self.log_modulus == f64::NEG_INFINITY
    }

    pub fn log10_modulus(self) -> f64 {
        self.log_modulus / std::f64::consts::LN_10
    }

    pub fn conj(self) -> LogComplex {
        LogComplex {
            log_modulus: self.log_modulus,
            phase: -self.phase,
        }
    }
}

impl std::ops::Mul for LogComplex {
    type Output = LogComplex;

    fn mul(self, other: LogComplex) -> LogComplex {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        LogComplex {
            log_modulus: self.log_modulus + other.log_modulus,
            phase: wrap_phase(self.phase + other.phase),
        }
    }
}

/// Phase reduced to `(-pi, pi]`.
pub fn wrap_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    if r > std::f64::consts::PI {
        r - TAU
    } else {
        r
    }
}

/// Sum of log-form complex numbers without leaving log form.
///
/// The largest modulus is factored out before summing, so the result keeps
/// full relative precision even when every term is far below `f64::MIN_POSITIVE`.
pub fn log_sum(terms: &[LogComplex]) -> LogComplex {
    let max = terms.iter().map(|t| t.log_modulus).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return LogComplex::ZERO;
    }
    let scaled: Complex64 = terms
        .iter()
        .filter(|t| !t.is_zero())
        .map(|t| Complex64::from_polar((t.log_modulus - max).exp(), t.phase))
        .sum();
    let lc = LogComplex::from_complex(scaled);
    if lc.is_zero() {
        return LogComplex::ZERO;
    }
    LogComplex {
        log_modulus: lc.log_modulus + max,
        phase: lc.phase,
    }
}

/// Running product of complex factors with an exact-zero short circuit.
///
/// Up to [`DIRECT_LIMIT`] factors the value is the plain complex product;
/// past that it is rebuilt from the log form. The log form is always kept and
/// is what [`ProductAccumulator::log`] returns.
#[derive(Debug, Clone, Copy)]
pub struct ProductAccumulator {
    direct: Complex64,
    log: LogComplex,
    count: usize,
}

impl Default for ProductAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl ProductAccumulator {
    pub fn new() -> Self {
        ProductAccumulator {
            direct: Complex64::new(1.0, 0.0),
            log: LogComplex::ONE,
            count: 0,
        }
    }

    pub fn push(&mut self, z: Complex64) {
        self.count += 1;
        if self.log.is_zero() {
            return;
        }
        if z == Complex64::new(0.0, 0.0) {
            self.direct = z;
            self.log = LogComplex::ZERO;
            return;
        }
        if self.count <= DIRECT_LIMIT {
            self.direct *= z;
        }
        self.log = self.log * LogComplex::from_complex(z);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_zero(&self) -> bool {
        self.log.is_zero()
    }

    pub fn value(&self) -> Complex64 {
        if self.count <= DIRECT_LIMIT {
            self.direct
        } else {
            self.log.to_complex()
        }
    }

    pub fn log(&self) -> LogComplex {
        self.log
    }
}

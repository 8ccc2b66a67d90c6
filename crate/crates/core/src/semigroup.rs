//! The contraction semigroup `S(t)` generated by `-A`, via the exponential
//! formula `S(t) x = lim_n (I + t/n A)^{-n} x`.

use crate::accretive::{OperatorSpec, ResolventSolverConfig};
use crate::banach::{distance, NormKind, StateVector};
use crate::error::{Error, Result};

/// `J_{t/n}^n x`. Returns `x` unchanged for `t = 0`.
pub fn exponential_formula(
    spec: &OperatorSpec,
    t: f64,
    x: &StateVector,
    n: usize,
    cfg: &ResolventSolverConfig,
) -> Result<StateVector> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("time must be >= 0, got {t}")));
    }
    if n == 0 {
        return Err(Error::invalid("exponential formula needs n >= 1"));
    }
    if t == 0.0 {
        return Ok(x.clone());
    }
    let lambda = t / n as f64;
    let mut y = x.clone();
    for _ in 0..n {
        y = spec.resolvent(lambda, &y, cfg)?;
    }
    Ok(y)
}

/// The resolvent orbit `[x, J x, J^2 x, ..., J^steps x]` for a fixed step.
pub fn resolvent_orbit(
    spec: &OperatorSpec,
    lambda: f64,
    x: &StateVector,
    steps: usize,
    cfg: &ResolventSolverConfig,
) -> Result<Vec<StateVector>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(x.clone());
    for _ in 0..steps {
        let next = spec.resolvent(lambda, out.last().expect("non-empty"), cfg)?;
        out.push(next);
    }
    Ok(out)
}

/// Result of an adaptive semigroup evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupValue {
    pub value: StateVector,
    /// Number of resolvent steps used for `value`.
    pub n: usize,
    /// Last successive difference; an estimate, not a bound.
    pub error_estimate: f64,
    pub converged: bool,
}

/// Adaptive evaluator: doubles `n` until two successive exponential-formula
/// values agree to `tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupEvaluator {
    pub spec: OperatorSpec,
    pub resolvent: ResolventSolverConfig,
    pub initial_n: usize,
    pub max_doublings: usize,
    pub tolerance: f64,
    pub norm: NormKind,
}

impl SemigroupEvaluator {
    pub fn new(spec: OperatorSpec, tolerance: f64) -> Result<Self> {
        let ev = SemigroupEvaluator {
            norm: spec.natural_norm(),
            spec,
            resolvent: ResolventSolverConfig::default(),
            initial_n: 16,
            max_doublings: 14,
            tolerance,
        };
        ev.validate()?;
        Ok(ev)
    }

    pub fn with_initial_n(mut self, n: usize) -> Self {
        self.initial_n = n;
        self
    }

    pub fn with_max_doublings(mut self, k: usize) -> Self {
        self.max_doublings = k;
        self
    }

    pub fn with_norm(mut self, norm: NormKind) -> Self {
        self.norm = norm;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial_n == 0 {
            return Err(Error::invalid("initial n must be >= 1"));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::invalid("semigroup tolerance must be > 0"));
        }
        self.resolvent.validate()
    }

    pub fn evaluate(&self, t: f64, x: &StateVector) -> Result<SemigroupValue> {
        self.validate()?;
        if t == 0.0 {
            return Ok(SemigroupValue {
                value: x.clone(),
                n: self.initial_n,
                error_estimate: 0.0,
                converged: true,
            });
        }
        let mut n = self.initial_n;
        let mut prev = exponential_formula(&self.spec, t, x, n, &self.resolvent)?;
        let mut diff = f64::INFINITY;
        for _ in 0..self.max_doublings {
            n *= 2;
            let next = exponential_formula(&self.spec, t, x, n, &self.resolvent)?;
            diff = distance(&next, &prev, &self.norm)?;
            prev = next;
            if diff < self.tolerance {
                return Ok(SemigroupValue {
                    value: prev,
                    n,
                    error_estimate: diff,
                    converged: true,
                });
            }
        }
        Ok(SemigroupValue {
            value: prev,
            n,
            error_estimate: diff,
            converged: false,
        })
    }
}

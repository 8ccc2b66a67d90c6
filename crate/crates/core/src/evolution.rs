//! The forced problem `u' + A u = f`: implicit Euler, the discrete Duhamel
//! decomposition and the mild-solution (variation of constants) evaluator.

use std::fmt;
use std::sync::Arc;

use crate::accretive::{OperatorSpec, ResolventSolverConfig};
use crate::banach::{norm, NormKind, StateVector, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::parallel::try_map_indices;
use crate::semigroup::{resolvent_orbit, SemigroupEvaluator};

/// Time-dependent forcing `f(t)`.
#[derive(Clone)]
pub enum ForcingTerm {
    Constant(StateVector),
    /// Piecewise constant on `[t_k, t_{k+1})`, sampled at the nodes of `grid`.
    Table {
        grid: TimeGrid,
        samples: Vec<StateVector>,
    },
    Function(Arc<dyn Fn(f64) -> StateVector + Send + Sync>),
}

impl fmt::Debug for ForcingTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForcingTerm::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            ForcingTerm::Table { grid, samples } => f
                .debug_struct("Table")
                .field("grid", grid)
                .field("samples", &samples.len())
                .finish(),
            ForcingTerm::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl ForcingTerm {
    pub fn zero(dim: usize) -> Self {
        ForcingTerm::Constant(StateVector::zeros(dim))
    }

    pub fn table(grid: TimeGrid, samples: Vec<StateVector>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} forcing samples for {} nodes",
                samples.len(),
                grid.len()
            )));
        }
        let d = samples[0].dim();
        for s in &samples {
            s.check_dim(d)?;
        }
        Ok(ForcingTerm::Table { grid, samples })
    }

    pub fn from_fn(f: impl Fn(f64) -> StateVector + Send + Sync + 'static) -> Self {
        ForcingTerm::Function(Arc::new(f))
    }

    pub fn sample(&self, t: f64) -> StateVector {
        match self {
            ForcingTerm::Constant(c) => c.clone(),
            ForcingTerm::Table { grid, samples } => samples[grid.cell_of(t)].clone(),
            ForcingTerm::Function(f) => f(t),
        }
    }

    /// Samples at every node of `grid`, checked for a common dimension `dim`.
    pub fn samples_on(&self, grid: &TimeGrid, dim: usize) -> Result<Vec<StateVector>> {
        grid.nodes()
            .map(|t| {
                let s = self.sample(t);
                s.check_dim(dim)?;
                if s.as_slice().iter().any(|c| !c.is_finite()) {
                    return Err(Error::NonFinite("forcing sample"));
                }
                Ok(s)
            })
            .collect()
    }

    /// Left-endpoint surrogate of `int_0^T |f(s)| ds`.
    pub fn l1_surrogate(&self, grid: &TimeGrid, dim: usize, nk: &NormKind) -> Result<f64> {
        let lambda = grid.step();
        let samples = self.samples_on(grid, dim)?;
        samples[..grid.steps()]
            .iter()
            .map(|s| norm(s, nk).map(|n| lambda * n))
            .sum()
    }
}

/// Components of the discrete Duhamel decomposition of the Euler iterates.
///
/// `propagated_errors[k] = sum_{i<k} (J^{k-i-1} u_{i+1} - J^{k-i-1}(J u_i))` is the
/// nonlinear propagation of the local errors `e_i = u_{i+1} - J u_i`; it reduces
/// to `sum J^{k-i-1} e_i` when `A` is linear and telescopes to `u_k - J^k u_0` always.
#[derive(Debug, Clone)]
pub struct DuhamelDecomposition {
    pub euler: Trajectory,
    pub homogeneous: Vec<StateVector>,
    pub forced_sum: Vec<StateVector>,
    pub local_errors: Vec<StateVector>,
    pub propagated_errors: Vec<StateVector>,
    /// `r_k = u_k - J^k u_0 - sum_{i<k} J^{k-i-1}(lambda f(t_i))`
    pub residual: Vec<StateVector>,
    pub forcing_samples: Vec<StateVector>,
}

impl DuhamelDecomposition {
    /// `max_k |u_k - J^k u_0 - propagated_errors[k]|`.
    pub fn telescoping_defect(&self) -> f64 {
        let nk = self.euler.norm_kind();
        (0..self.euler.values().len())
            .map(|k| {
                let lhs = self.euler.at(k) - &self.homogeneous[k];
                norm(&(&lhs - &self.propagated_errors[k]), nk).expect("dims")
            })
            .fold(0.0, f64::max)
    }

    /// `max_i (|e_i| - lambda |f(t_i)|)`; nonpositive up to rounding.
    pub fn local_error_excess(&self) -> f64 {
        let nk = self.euler.norm_kind();
        let lambda = self.euler.grid().step();
        self.local_errors
            .iter()
            .zip(&self.forcing_samples)
            .map(|(e, f)| norm(e, nk).expect("dims") - lambda * norm(f, nk).expect("dims"))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn residual_norms(&self) -> Vec<f64> {
        let nk = self.euler.norm_kind();
        self.residual.iter().map(|r| norm(r, nk).expect("dims")).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residual_norms().into_iter().fold(0.0, f64::max)
    }
}

/// Mild solution value with its accumulated error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct MildValue {
    pub value: StateVector,
    /// Sum of the weighted semigroup error estimates.
    pub error_estimate: f64,
    /// False if any semigroup evaluation hit its doubling limit.
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct EulerDuhamelReport {
    pub euler: Trajectory,
    pub mild: Vec<MildValue>,
    pub discrepancies: Vec<f64>,
    pub sup_discrepancy: f64,
    /// `log2` of the discrepancy ratio between the half-resolution run and this one.
    pub measured_order: Option<f64>,
}

/// Solver context for `u' + A u = f`.
#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub spec: OperatorSpec,
    pub resolvent: ResolventSolverConfig,
    pub norm: NormKind,
}

impl Evolution {
    pub fn new(spec: OperatorSpec) -> Self {
        Evolution {
            norm: spec.natural_norm(),
            spec,
            resolvent: ResolventSolverConfig::default(),
        }
    }

    pub fn with_norm(mut self, norm: NormKind) -> Self {
        self.norm = norm;
        self
    }

    pub fn with_resolvent(mut self, cfg: ResolventSolverConfig) -> Self {
        self.resolvent = cfg;
        self
    }

    fn check_u0(&self, u0: &StateVector) -> Result<()> {
        if let Some(d) = self.spec.dim() {
            u0.check_dim(d)?;
        }
        Ok(())
    }

    /// `u_{k+1} = J_lambda(u_k + lambda f(t_k))`, `lambda = T/n`.
    pub fn implicit_euler(&self, u0: &StateVector, f: &ForcingTerm, grid: &TimeGrid) -> Result<Trajectory> {
        self.check_u0(u0)?;
        let samples = f.samples_on(grid, u0.dim())?;
        self.euler_from_samples(u0, &samples, grid)
    }

    fn euler_from_samples(
        &self,
        u0: &StateVector,
        samples: &[StateVector],
        grid: &TimeGrid,
    ) -> Result<Trajectory> {
        let lambda = grid.step();
        let mut values = Vec::with_capacity(grid.len());
        values.push(u0.clone());
        for (k, fk) in samples[..grid.steps()].iter().enumerate() {
            let arg = values[k].axpy(lambda, fk);
            let next = self
                .spec
                .resolvent(lambda, &arg, &self.resolvent)
                .map_err(|e| Error::StepFailed {
                    step: k,
                    source: Box::new(e),
                })?;
            values.push(next);
        }
        Trajectory::new(*grid, values, self.norm.clone())
    }

    pub fn discrete_duhamel_decompose(
        &self,
        u0: &StateVector,
        f: &ForcingTerm,
        grid: &TimeGrid,
    ) -> Result<DuhamelDecomposition> {
        self.check_u0(u0)?;
        let samples = f.samples_on(grid, u0.dim())?;
        let euler = self.euler_from_samples(u0, &samples, grid)?;
        let n = grid.steps();
        let lambda = grid.step();
        let cfg = &self.resolvent;

        // orbits[i][m] = J^m u_i, m = 0..=n-i
        let orbits = try_map_indices(n + 1, |i| {
            resolvent_orbit(&self.spec, lambda, euler.at(i), n - i, cfg)
        })?;
        // forcing_orbits[i][m] = J^m (lambda f(t_i)), m = 0..n-i-1
        let forcing_orbits = try_map_indices(n, |i| {
            resolvent_orbit(&self.spec, lambda, &samples[i].scale(lambda), n - i - 1, cfg)
        })?;

        let dim = u0.dim();
        let homogeneous: Vec<StateVector> = orbits[0].clone();
        let local_errors: Vec<StateVector> = (0..n).map(|i| euler.at(i + 1) - &orbits[i][1]).collect();
        let mut propagated_errors = Vec::with_capacity(n + 1);
        let mut forced_sum = Vec::with_capacity(n + 1);
        let mut residual = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut prop = StateVector::zeros(dim);
            let mut forced = StateVector::zeros(dim);
            for i in 0..k {
                let term = &orbits[i + 1][k - i - 1] - &orbits[i][k - i];
                prop = &prop + &term;
                forced = &forced + &forcing_orbits[i][k - i - 1];
            }
            let r = &(euler.at(k) - &homogeneous[k]) - &forced;
            propagated_errors.push(prop);
            forced_sum.push(forced);
            residual.push(r);
        }
        Ok(DuhamelDecomposition {
            euler,
            homogeneous,
            forced_sum,
            local_errors,
            propagated_errors,
            residual,
            forcing_samples: samples,
        })
    }

    /// `S(t) u0 + sum_{i<m} (t/m) S(t - s_i) f(s_i)` with `s_i = i t / m`,
    /// every `S` evaluated adaptively by `semigroup`.
    pub fn mild_duhamel(
        &self,
        semigroup: &SemigroupEvaluator,
        u0: &StateVector,
        f: &ForcingTerm,
        t: f64,
        substeps: usize,
    ) -> Result<MildValue> {
        self.check_u0(u0)?;
        if substeps == 0 {
            return Err(Error::invalid("mild_duhamel needs at least one substep"));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid(format!("time must be >= 0, got {t}")));
        }
        let h = t / substeps as f64;
        let head = semigroup.evaluate(t, u0)?;
        let terms = try_map_indices(substeps, |i| {
            let s = i as f64 * h;
            let fs = f.sample(s);
            fs.check_dim(u0.dim())?;
            semigroup.evaluate(t - s, &fs)
        })?;
        let mut value = head.value;
        let mut error_estimate = head.error_estimate;
        let mut converged = head.converged;
        if t > 0.0 {
            for term in terms {
                value = value.axpy(h, &term.value);
                error_estimate += h * term.error_estimate;
                converged &= term.converged;
            }
        }
        Ok(MildValue {
            value,
            error_estimate,
            converged,
        })
    }

    /// Implicit Euler on `grid` against `mild_duhamel` with `substeps` at every node.
    pub fn compare_euler_duhamel(
        &self,
        semigroup: &SemigroupEvaluator,
        u0: &StateVector,
        f: &ForcingTerm,
        grid: &TimeGrid,
        substeps: usize,
    ) -> Result<EulerDuhamelReport> {
        let (euler, mild, discrepancies) = self.euler_vs_mild(semigroup, u0, f, grid, substeps)?;
        let sup_discrepancy = discrepancies.iter().copied().fold(0.0, f64::max);
        let measured_order = if grid.steps().is_multiple_of(2) && substeps.is_multiple_of(2) && substeps >= 2
        {
            let coarse = TimeGrid::new(grid.horizon(), grid.steps() / 2)?;
            let (_, _, d) = self.euler_vs_mild(semigroup, u0, f, &coarse, substeps / 2)?;
            let coarse_sup = d.into_iter().fold(0.0, f64::max);
            (sup_discrepancy > 0.0 && coarse_sup > 0.0).then(|| (coarse_sup / sup_discrepancy).log2())
        } else {
            None
        };
        Ok(EulerDuhamelReport {
            euler,
            mild,
            discrepancies,
            sup_discrepancy,
            measured_order,
        })
    }

    fn euler_vs_mild(
        &self,
        semigroup: &SemigroupEvaluator,
        u0: &StateVector,
        f: &ForcingTerm,
        grid: &TimeGrid,
        substeps: usize,
    ) -> Result<(Trajectory, Vec<MildValue>, Vec<f64>)> {
        let euler = self.implicit_euler(u0, f, grid)?;
        let mild: Vec<MildValue> = grid
            .nodes()
            .map(|t| self.mild_duhamel(semigroup, u0, f, t, substeps))
            .collect::<Result<_>>()?;
        let discrepancies = mild
            .iter()
            .zip(euler.values())
            .map(|(m, e)| norm(&(&m.value - e), &self.norm))
            .collect::<Result<_>>()?;
        Ok((euler, mild, discrepancies))
    }
}

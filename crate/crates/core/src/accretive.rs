//! m-accretive operators with computable resolvents `J_lambda = (I + lambda A)^{-1}`.
//!
//! Multivalued operators are only ever touched through their resolvent. The
//! weighted p-Laplacian is the Euclidean subdifferential of a convex energy, so
//! its resolvent is a proximal map computed by damped Newton.

use nalgebra::{DMatrix, DVector};

use crate::banach::{NormKind, StateVector};
use crate::error::{Error, Result};

/// Step-length control in the p-Laplace Newton solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Damping {
    /// Backtracking on the prox energy, with gradient-descent fallback.
    #[default]
    Armijo,
    /// Plain Newton steps; gradient descent only when Newton stalls.
    Undamped,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventSolverConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping: Damping,
}

impl Default for ResolventSolverConfig {
    fn default() -> Self {
        ResolventSolverConfig {
            tolerance: 1e-10,
            max_iterations: 200,
            damping: Damping::Armijo,
        }
    }
}

impl ResolventSolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::invalid("resolvent tolerance must be > 0"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("resolvent max_iterations must be >= 1"));
        }
        Ok(())
    }
}

/// Linear operator `u -> M u` with `M + M^T` positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMatrix {
    matrix: DMatrix<f64>,
}

impl LinearMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("matrix must be square and non-empty"));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("operator matrix"));
        }
        let matrix = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        let sym = &matrix + matrix.transpose();
        let min_eig = sym.symmetric_eigenvalues().min();
        if min_eig < -1e-10 {
            return Err(Error::invalid(format!(
                "M + M^T has eigenvalue {min_eig:e} < 0; operator is not accretive"
            )));
        }
        Ok(LinearMatrix { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Degenerate weighted p-Laplacian `-((1 - x^2) |u'|^{p-2} u')'` on uniform
/// nodes of `[-1, 1]`, discretized as the gradient of
/// `Phi_p(v) = (1/p) sum_e w_e |(v_{i+1} - v_i)/h|^p h` with edge weights
/// `w_e = 1 - x_e^2` at cell midpoints. No boundary condition: the weight
/// vanishes at the poles, so end cells only couple inward.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPLaplace {
    p: f64,
    h: f64,
    nodes: Vec<f64>,
    edge_weights: Vec<f64>,
}

impl WeightedPLaplace {
    pub fn new(p: f64, dim: usize) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::invalid(format!("p must be > 1, got {p}")));
        }
        if dim < 2 {
            return Err(Error::invalid("p-Laplacian needs at least 2 nodes"));
        }
        let h = 2.0 / (dim - 1) as f64;
        let nodes: Vec<f64> = (0..dim)
            .map(|i| if i == dim - 1 { 1.0 } else { -1.0 + i as f64 * h })
            .collect();
        let edge_weights = nodes
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                1.0 - mid * mid
            })
            .collect();
        Ok(WeightedPLaplace {
            p,
            h,
            nodes,
            edge_weights,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn edge_weights(&self) -> &[f64] {
        &self.edge_weights
    }

    /// The weight function `1 - x^2`; zero at the poles.
    pub fn weight(x: f64) -> f64 {
        1.0 - x * x
    }

    fn flux(&self, s: f64) -> f64 {
        if self.p == 2.0 {
            s
        } else if self.p == 3.0 {
            s.abs() * s
        } else {
            s.abs().powf(self.p - 2.0) * s
        }
    }

    /// Derivative of the flux; regularized at the origin when p < 2.
    fn flux_slope(&self, s: f64) -> f64 {
        if self.p == 2.0 {
            1.0
        } else if self.p == 3.0 {
            2.0 * s.abs()
        } else if self.p < 2.0 {
            const EPS: f64 = 1e-12;
            (self.p - 1.0) * (s * s + EPS * EPS).powf(0.5 * (self.p - 2.0))
        } else {
            (self.p - 1.0) * s.abs().powf(self.p - 2.0)
        }
    }

    fn slopes<'a>(&'a self, v: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        let h = self.h;
        v.windows(2).map(move |w| (w[1] - w[0]) / h)
    }

    pub fn energy(&self, v: &[f64]) -> f64 {
        let p = self.p;
        self.slopes(v)
            .zip(&self.edge_weights)
            .map(|(s, w)| w * s.abs().powf(p) * self.h)
            .sum::<f64>()
            / p
    }

    /// Euclidean gradient of the energy, i.e. the operator value `A v`.
    pub fn gradient(&self, v: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; v.len()];
        for (e, (s, w)) in self.slopes(v).zip(&self.edge_weights).enumerate() {
            let q = w * self.flux(s);
            g[e] -= q;
            g[e + 1] += q;
        }
        g
    }

    /// Minimizes `1/2 |v - x|^2 + lambda Phi_p(v)` starting from `v = x`.
    fn prox(&self, lambda: f64, x: &[f64], cfg: &ResolventSolverConfig) -> Result<Vec<f64>> {
        let d = x.len();
        let prox_energy = |v: &[f64]| {
            0.5 * v.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() + lambda * self.energy(v)
        };
        let prox_gradient = |v: &[f64]| -> Vec<f64> {
            let mut g = self.gradient(v);
            for i in 0..d {
                g[i] = v[i] - x[i] + lambda * g[i];
            }
            g
        };
        let sup = |g: &[f64]| g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));

        let mut v = x.to_vec();
        let mut grad = prox_gradient(&v);
        let mut res = sup(&grad);
        let mut energy = prox_energy(&v);
        let mut diag = vec![0.0; d];
        let mut off = vec![0.0; d - 1];
        for _ in 0..cfg.max_iterations {
            if res <= cfg.tolerance {
                return Ok(v);
            }
            diag.iter_mut().for_each(|a| *a = 1.0);
            for (e, (s, w)) in self.slopes(&v).zip(&self.edge_weights).enumerate() {
                let c = lambda * w * self.flux_slope(s) / self.h;
                diag[e] += c;
                diag[e + 1] += c;
                off[e] = -c;
            }
            let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
            let step = solve_tridiagonal(&off, &diag, &off, &rhs);
            let slope: f64 = step.iter().zip(&grad).map(|(a, b)| a * b).sum();

            let mut accepted = None;
            if step.iter().all(|s| s.is_finite()) && slope < 0.0 {
                let mut alpha = 1.0;
                for _ in 0..40 {
                    let trial: Vec<f64> = v.iter().zip(&step).map(|(a, s)| a + alpha * s).collect();
                    let trial_grad = prox_gradient(&trial);
                    let trial_res = sup(&trial_grad);
                    let trial_energy = prox_energy(&trial);
                    let armijo = trial_energy <= energy + 1e-4 * alpha * slope;
                    let ok = match cfg.damping {
                        Damping::Undamped => true,
                        Damping::Armijo => armijo || (alpha == 1.0 && trial_res < res),
                    };
                    if ok && trial_res.is_finite() {
                        accepted = Some((trial, trial_grad, trial_res, trial_energy));
                        break;
                    }
                    alpha *= 0.5;
                }
            }
            let (nv, ng, nr, ne) = match accepted {
                Some(a) => a,
                None => self.gradient_fallback(&v, &grad, energy, &prox_energy, &prox_gradient),
            };
            v = nv;
            grad = ng;
            res = nr;
            energy = ne;
        }
        if res <= cfg.tolerance {
            Ok(v)
        } else {
            Err(Error::ResolventNotConverged {
                iterations: cfg.max_iterations,
                residual: res,
            })
        }
    }

    fn gradient_fallback(
        &self,
        v: &[f64],
        grad: &[f64],
        energy: f64,
        prox_energy: &dyn Fn(&[f64]) -> f64,
        prox_gradient: &dyn Fn(&[f64]) -> Vec<f64>,
    ) -> (Vec<f64>, Vec<f64>, f64, f64) {
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        let mut alpha = 1.0;
        for _ in 0..60 {
            let trial: Vec<f64> = v.iter().zip(grad).map(|(a, g)| a - alpha * g).collect();
            let e = prox_energy(&trial);
            if e <= energy - 1e-4 * alpha * g2 {
                let tg = prox_gradient(&trial);
                let tr = tg.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
                return (trial, tg, tr, e);
            }
            alpha *= 0.5;
        }
        let r = grad.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        (v.to_vec(), grad.to_vec(), r, energy)
    }
}

/// Thomas algorithm for `lower[i-1] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = if n > 1 { upper[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = upper[i] / m;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / m;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

/// A canonical m-accretive operator.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    /// `u -> a u` componentwise, `a >= 0`.
    LinearScalar {
        a: f64,
    },
    LinearMatrix(LinearMatrix),
    /// Subdifferential of `sum |u_i|`; multivalued at zero components.
    AbsSubdifferential,
    WeightedPLaplace1D(WeightedPLaplace),
    Zero,
}

impl OperatorSpec {
    pub fn linear_scalar(a: f64) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::invalid(format!(
                "scalar coefficient must be >= 0, got {a}"
            )));
        }
        Ok(OperatorSpec::LinearScalar { a })
    }

    pub fn linear_matrix(rows: Vec<Vec<f64>>) -> Result<Self> {
        LinearMatrix::new(rows).map(OperatorSpec::LinearMatrix)
    }

    pub fn weighted_p_laplace(p: f64, dim: usize) -> Result<Self> {
        WeightedPLaplace::new(p, dim).map(OperatorSpec::WeightedPLaplace1D)
    }

    pub fn name(&self) -> &'static str {
        match self {
            OperatorSpec::LinearScalar { .. } => "linear_scalar",
            OperatorSpec::LinearMatrix(_) => "linear_matrix",
            OperatorSpec::AbsSubdifferential => "abs_subdifferential",
            OperatorSpec::WeightedPLaplace1D(_) => "weighted_p_laplace",
            OperatorSpec::Zero => "zero",
        }
    }

    /// Fixed dimension of the operator, if it has one.
    pub fn dim(&self) -> Option<usize> {
        match self {
            OperatorSpec::LinearMatrix(m) => Some(m.dim()),
            OperatorSpec::WeightedPLaplace1D(l) => Some(l.dim()),
            _ => None,
        }
    }

    /// Norm in which the resolvent is guaranteed nonexpansive.
    pub fn natural_norm(&self) -> NormKind {
        NormKind::L2
    }

    /// True when `A` is single-valued everywhere.
    pub fn is_single_valued(&self) -> bool {
        !matches!(self, OperatorSpec::AbsSubdifferential)
    }

    fn check_input(&self, x: &StateVector) -> Result<()> {
        match self.dim() {
            Some(d) => x.check_dim(d),
            None => Ok(()),
        }
    }

    /// `J_lambda x`. For single-valued variants the returned `y` satisfies
    /// `|y + lambda A y - x|_inf <= tol (1 + |x|_inf)`.
    pub fn resolvent(
        &self,
        lambda: f64,
        x: &StateVector,
        cfg: &ResolventSolverConfig,
    ) -> Result<StateVector> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid(format!("lambda must be > 0, got {lambda}")));
        }
        self.check_input(x)?;
        match self {
            OperatorSpec::Zero => Ok(x.clone()),
            OperatorSpec::LinearScalar { a } => Ok(x.scale(1.0 / (1.0 + lambda * a))),
            OperatorSpec::AbsSubdifferential => Ok(soft_threshold(x, lambda)),
            OperatorSpec::LinearMatrix(m) => {
                let d = m.dim();
                let sys = DMatrix::identity(d, d) + lambda * &m.matrix;
                let rhs = DVector::from_column_slice(x.as_slice());
                let y = sys
                    .clone()
                    .lu()
                    .solve(&rhs)
                    .ok_or_else(|| Error::invalid("I + lambda M is singular"))?;
                let residual = (&sys * &y - &rhs).amax();
                let scale = 1.0 + x.as_slice().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                if residual > cfg.tolerance * scale {
                    return Err(Error::ResolventNotConverged {
                        iterations: 1,
                        residual,
                    });
                }
                StateVector::new(y.iter().copied().collect())
            }
            OperatorSpec::WeightedPLaplace1D(l) => {
                let v = l.prox(lambda, x.as_slice(), cfg)?;
                StateVector::new(v)
            }
        }
    }

    /// `A y` for the single-valued variants.
    pub fn apply_single_valued(&self, y: &StateVector) -> Result<StateVector> {
        self.check_input(y)?;
        match self {
            OperatorSpec::Zero => Ok(StateVector::zeros(y.dim())),
            OperatorSpec::LinearScalar { a } => Ok(y.scale(*a)),
            OperatorSpec::LinearMatrix(m) => {
                let v = &m.matrix * DVector::from_column_slice(y.as_slice());
                StateVector::new(v.iter().copied().collect())
            }
            OperatorSpec::WeightedPLaplace1D(l) => StateVector::new(l.gradient(y.as_slice())),
            OperatorSpec::AbsSubdifferential => {
                if y.as_slice().contains(&0.0) {
                    Err(Error::Multivalued)
                } else {
                    Ok(y.map(f64::signum))
                }
            }
        }
    }
}

/// `sign(x) max(|x| - tau, 0)` componentwise.
pub fn soft_threshold(x: &StateVector, tau: f64) -> StateVector {
    x.map(|c| c.signum() * (c.abs() - tau).max(0.0))
}

/// Energy `Phi_p(v)` of the weighted p-Laplacian.
pub fn plaplace_energy(op: &WeightedPLaplace, v: &StateVector) -> Result<f64> {
    v.check_dim(op.dim())?;
    Ok(op.energy(v.as_slice()))
}

//! Scalar majorant machinery: the integral equation `U = U0 + int phi theta(U)`,
//! the transform `Psi`, blow-up horizons, closed forms and uniqueness criteria.

mod coalbedo;
mod criteria;
mod quad;

pub use coalbedo::{log_osgood_closed_form, CoAlbedo, ModulusCheck};
pub use criteria::{
    combined_criterion_check, dini_check, nagumo_check, osgood_classify, subadditivity_check,
    CombinedCriterionSpec, CombinedReport, DiniReport, Gauge, NagumoReport, OsgoodReport, OsgoodVerdict,
    SubadditivityReport,
};

use std::f64::consts::E;

use crate::banach::TimeGrid;
use crate::error::{Error, Result};

/// A modulus kernel `theta: [0, inf) -> [0, inf)` with `theta(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum ThetaFunction {
    Identity,
    Power(f64),
    /// `U ln(1/U)` on `(0, 1/e]`, constant `1/e` above (the slope vanishes there).
    LogOsgood,
    /// Samples `(u_j, theta_j)` with `u` strictly increasing and positive. Evaluated
    /// linearly from the origin below the first sample, log-log in between and
    /// constant above the last sample.
    CustomTable {
        u: Vec<f64>,
        theta: Vec<f64>,
    },
}

impl ThetaFunction {
    pub fn power(m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::invalid(format!("power exponent must be > 0, got {m}")));
        }
        Ok(ThetaFunction::Power(m))
    }

    pub fn custom_table(u: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        if u.is_empty() || u.len() != theta.len() {
            return Err(Error::invalid("theta table needs matching, non-empty columns"));
        }
        if u.iter().chain(&theta).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("theta table"));
        }
        if u[0] <= 0.0 || u.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "theta table abscissae must be positive and increasing",
            ));
        }
        if theta.iter().any(|&t| t <= 0.0) || theta.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid(
                "theta table values must be positive and nondecreasing",
            ));
        }
        Ok(ThetaFunction::CustomTable { u, theta })
    }

    /// Tabulates `f` at `count` log-spaced points of `[lo, hi]`.
    pub fn tabulate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && count >= 2) {
            return Err(Error::invalid("tabulation needs 0 < lo < hi and >= 2 points"));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let u: Vec<f64> = (0..count)
            .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
            .collect();
        let theta = u.iter().map(|&x| f(x)).collect();
        Self::custom_table(u, theta)
    }

    pub fn name(&self) -> String {
        match self {
            ThetaFunction::Identity => "identity".into(),
            ThetaFunction::Power(m) => format!("power({m})"),
            ThetaFunction::LogOsgood => "log_osgood".into(),
            ThetaFunction::CustomTable { .. } => "custom_table".into(),
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        match self {
            ThetaFunction::Identity => u,
            ThetaFunction::Power(m) => u.powf(*m),
            ThetaFunction::LogOsgood => {
                if u <= 1.0 / E {
                    -u * u.ln()
                } else {
                    1.0 / E
                }
            }
            ThetaFunction::CustomTable { u: us, theta } => {
                let n = us.len();
                if u <= us[0] {
                    return theta[0] * u / us[0];
                }
                if u >= us[n - 1] {
                    return theta[n - 1];
                }
                let j = us.partition_point(|&x| x <= u) - 1;
                let s = (u.ln() - us[j].ln()) / (us[j + 1].ln() - us[j].ln());
                (theta[j].ln() + s * (theta[j + 1].ln() - theta[j].ln())).exp()
            }
        }
    }

    /// `int_{u0}^inf ds / theta(s)` when it is finite.
    pub fn tail_integral(&self, u0: f64) -> Option<f64> {
        match self {
            ThetaFunction::Power(m) if *m > 1.0 => Some(u0.powf(1.0 - m) / (m - 1.0)),
            _ => None,
        }
    }

    /// Sampled monotonicity on a log grid of `(1e-12, 1e3)`.
    pub fn is_nondecreasing_sampled(&self) -> bool {
        let vals: Vec<f64> = (0..=300)
            .map(|i| self.eval(10f64.powf(-12.0 + 15.0 * i as f64 / 300.0)))
            .collect();
        self.eval(0.0) == 0.0 && vals.windows(2).all(|w| w[1] >= w[0])
    }
}

/// Nonnegative time factor `phi`, piecewise constant on its grid cells and
/// continued by its last sample beyond the grid.
#[derive(Debug, Clone, PartialEq)]
pub enum PhiFunction {
    Constant(f64),
    Table { grid: TimeGrid, samples: Vec<f64> },
}

impl PhiFunction {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::invalid(format!("phi must be finite and >= 0, got {c}")));
        }
        Ok(PhiFunction::Constant(c))
    }

    pub fn table(grid: TimeGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} phi samples for {} nodes",
                samples.len(),
                grid.len()
            )));
        }
        if samples.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::invalid("phi samples must be finite and >= 0"));
        }
        Ok(PhiFunction::Table { grid, samples })
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            PhiFunction::Constant(c) => Some(*c),
            PhiFunction::Table { .. } => None,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            PhiFunction::Constant(c) => *c,
            PhiFunction::Table { grid, samples } => samples[grid.cell_of(t)],
        }
    }

    /// Left-endpoint integral `int_0^t phi`, exact for the piecewise-constant reading.
    pub fn integral(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            PhiFunction::Constant(c) => c * t,
            PhiFunction::Table { grid, samples } => {
                let h = grid.step();
                let full = ((t / h).floor() as usize).min(grid.steps());
                let acc: f64 = samples[..full].iter().map(|s| s * h).sum();
                acc + samples[full.min(grid.steps())] * (t - full as f64 * h).max(0.0)
            }
        }
    }

    /// Constant pieces `(start, end, value)` covering `[a, b]`.
    pub fn pieces(&self, a: f64, b: f64) -> Vec<(f64, f64, f64)> {
        match self {
            PhiFunction::Constant(c) => vec![(a, b, *c)],
            PhiFunction::Table { grid, samples } => {
                let mut out = Vec::new();
                let mut t = a;
                while t < b {
                    let mut k = grid.cell_of(t);
                    while k < grid.steps() && grid.node(k + 1) <= t {
                        k += 1;
                    }
                    let end = if k >= grid.steps() {
                        b
                    } else {
                        grid.node(k + 1).min(b)
                    };
                    out.push((t, end, samples[k]));
                    t = end;
                }
                out
            }
        }
    }

    /// `||phi||_{L^p(0, T)}` for `p` in `[1, inf]` (`f64::INFINITY` for the sup).
    pub fn lp_norm(&self, p: f64, horizon: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::invalid(format!("p must be >= 1, got {p}")));
        }
        let pieces = self.pieces(0.0, horizon);
        if p.is_infinite() {
            return Ok(pieces.iter().map(|&(_, _, c)| c).fold(0.0, f64::max));
        }
        let s: f64 = pieces.iter().map(|&(a, b, c)| (b - a) * c.powf(p)).sum();
        Ok(s.powf(1.0 / p))
    }

    /// Smallest `T` with `int_0^T phi = target`, if reached.
    pub fn inverse_integral(&self, target: f64) -> Option<f64> {
        if target <= 0.0 {
            return Some(0.0);
        }
        match self {
            PhiFunction::Constant(c) => (*c > 0.0).then(|| target / c),
            PhiFunction::Table { grid, samples } => {
                let h = grid.step();
                let mut acc = 0.0;
                for (k, &v) in samples[..grid.steps()].iter().enumerate() {
                    let next = acc + v * h;
                    if next >= target {
                        return Some(grid.node(k) + (target - acc) / v);
                    }
                    acc = next;
                }
                let tail = samples[grid.steps()];
                (tail > 0.0).then(|| grid.horizon() + (target - acc) / tail)
            }
        }
    }
}

/// A nonnegative scalar curve on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarCurve {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl ScalarCurve {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} curve values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("curve values must be finite and >= 0"));
        }
        Ok(ScalarCurve { grid, values })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        ScalarCurve {
            values: vec![0.0; grid.len()],
            grid,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("non-empty")
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        ScalarCurve::new(self.grid, self.values.iter().map(|v| v * factor).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Finite(f64),
    Infinite,
}

/// Solution of `U' = phi theta(U)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSolution {
    pub curve: ScalarCurve,
    /// Accumulated step-doubling estimate of the global error.
    pub error_estimate: f64,
    /// Max over nodes of `|U_k - U0 - int_0^{t_k} phi theta(U)|` (trapezoid on accepted substeps).
    pub integral_residual: f64,
    pub substeps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IeOutcome {
    Solved(ScalarSolution),
    /// Blow-up before the end of the grid; `times`/`values` hold the accepted nodes.
    BlowUp {
        horizon: f64,
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

/// Adaptive explicit-midpoint integrator with step-doubling error control.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSolver {
    pub rtol: f64,
    /// Values above this count as blow-up.
    pub max_value: f64,
    /// Smallest admissible substep relative to `max(1, T)`.
    pub min_step: f64,
}

impl Default for ScalarSolver {
    fn default() -> Self {
        ScalarSolver {
            rtol: 1e-12,
            max_value: 1e12,
            min_step: 1e-14,
        }
    }
}

impl ScalarSolver {
    pub fn solve(
        &self,
        phi: &PhiFunction,
        theta: &ThetaFunction,
        u0: f64,
        grid: &TimeGrid,
    ) -> Result<ScalarSolution> {
        match self.solve_outcome(phi, theta, u0, grid)? {
            IeOutcome::Solved(s) => Ok(s),
            IeOutcome::BlowUp { horizon, .. } => Err(Error::BlowUp { horizon }),
        }
    }

    pub fn solve_outcome(
        &self,
        phi: &PhiFunction,
        theta: &ThetaFunction,
        u0: f64,
        grid: &TimeGrid,
    ) -> Result<IeOutcome> {
        if !(u0.is_finite() && u0 >= 0.0) {
            return Err(Error::invalid(format!("U0 must be finite and >= 0, got {u0}")));
        }
        if u0 == 0.0 {
            return match osgood_classify(theta).verdict {
                OsgoodVerdict::Diverges => Ok(IeOutcome::Solved(ScalarSolution {
                    curve: ScalarCurve::zeros(*grid),
                    error_estimate: 0.0,
                    integral_residual: 0.0,
                    substeps: 0,
                })),
                v => Err(Error::Ambiguous(format!(
                    "U0 = 0 with Osgood verdict {v:?}: nonzero solutions may exist; use the psi/horizon route"
                ))),
            };
        }
        let min_h = self.min_step * grid.horizon().max(1.0);
        let mut values = vec![u0];
        let mut u = u0;
        let mut integral = 0.0;
        let mut residual: f64 = 0.0;
        let mut err_total = 0.0;
        let mut steps = 0usize;
        let mut h = grid.step() / 8.0;
        for k in 0..grid.steps() {
            let (a, b) = (grid.node(k), grid.node(k + 1));
            for (pa, pb, c) in phi.pieces(a, b) {
                let f = |x: f64| c * theta.eval(x);
                let mut t = pa;
                while t < pb {
                    let hs = h.min(pb - t);
                    let mid = |x: f64, s: f64| x + s * f(x + 0.5 * s * f(x));
                    let coarse = mid(u, hs);
                    let fine = mid(mid(u, 0.5 * hs), 0.5 * hs);
                    if !fine.is_finite() || fine > self.max_value {
                        if hs <= min_h {
                            return Ok(blow_up(grid, t, values));
                        }
                        h = 0.25 * hs;
                        continue;
                    }
                    let err = (fine - coarse).abs();
                    let tol = self.rtol * fine.abs().max(u.abs());
                    if err <= tol {
                        integral += 0.5 * hs * (f(u) + f(fine));
                        u = fine;
                        t += hs;
                        err_total += err / 3.0;
                        steps += 1;
                        let grow = if err == 0.0 { 4.0 } else { 0.9 * (tol / err).cbrt() };
                        if hs == h {
                            h = hs * grow.clamp(0.2, 4.0);
                        }
                    } else {
                        h = hs * (0.9 * (tol / err).cbrt()).clamp(0.1, 0.9);
                        if h < min_h {
                            return Ok(blow_up(grid, t, values));
                        }
                    }
                }
            }
            residual = residual.max((u - u0 - integral).abs());
            values.push(u);
        }
        Ok(IeOutcome::Solved(ScalarSolution {
            curve: ScalarCurve::new(*grid, values)?,
            error_estimate: err_total,
            integral_residual: residual,
            substeps: steps,
        }))
    }
}

fn blow_up(grid: &TimeGrid, t: f64, values: Vec<f64>) -> IeOutcome {
    let times = (0..values.len()).map(|k| grid.node(k)).collect();
    IeOutcome::BlowUp {
        horizon: t,
        times,
        values,
    }
}

/// Numeric solution of `U' = phi theta(U)`, `U(0) = U0` with default tolerances.
pub fn solve_scalar_ie(
    phi: &PhiFunction,
    theta: &ThetaFunction,
    u0: f64,
    grid: &TimeGrid,
) -> Result<ScalarSolution> {
    ScalarSolver::default().solve(phi, theta, u0, grid)
}

/// `Psi_{U0}(U) = int_{U0}^U ds / theta(s)` with a cached log-spaced table.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiTransform {
    theta: ThetaFunction,
    u0: f64,
    table_u: Vec<f64>,
    table_psi: Vec<f64>,
    tail: Option<f64>,
}

const PSI_POINTS_PER_DECADE: usize = 8;
const PSI_DECADES: usize = 40;

impl PsiTransform {
    pub fn new(theta: ThetaFunction, u0: f64) -> Result<Self> {
        if !(u0.is_finite() && u0 > 0.0) {
            return Err(Error::invalid(format!("Psi needs U0 > 0, got {u0}")));
        }
        let mut tf = PsiTransform {
            tail: theta.tail_integral(u0),
            theta,
            u0,
            table_u: vec![u0],
            table_psi: vec![0.0],
        };
        let ratio = 10f64.powf(1.0 / PSI_POINTS_PER_DECADE as f64);
        for _ in 0..PSI_POINTS_PER_DECADE * PSI_DECADES {
            let a = *tf.table_u.last().expect("non-empty");
            let b = a * ratio;
            if !b.is_finite() || b > 1e300 {
                break;
            }
            let next = tf.table_psi.last().expect("non-empty") + tf.segment(a, b);
            tf.table_u.push(b);
            tf.table_psi.push(next);
        }
        Ok(tf)
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    pub fn theta(&self) -> &ThetaFunction {
        &self.theta
    }

    /// `int_{U0}^inf ds/theta`, when finite.
    pub fn tail(&self) -> Option<f64> {
        self.tail
    }

    fn segment(&self, a: f64, b: f64) -> f64 {
        let g = |x: f64| {
            let s = x.exp();
            s / self.theta.eval(s)
        };
        let (la, lb) = (a.ln(), b.ln());
        let rough = (lb - la) * 0.5 * (g(la) + g(lb));
        quad::integrate(&g, la, lb, 1e-15 * rough.abs().max(1e-300), 4)
    }

    pub fn psi(&self, u: f64) -> Result<f64> {
        if !(u.is_finite() && u >= self.u0) {
            return Err(Error::invalid(format!(
                "Psi needs U >= U0 = {}, got {u}",
                self.u0
            )));
        }
        let j = self.table_u.partition_point(|&x| x <= u) - 1;
        Ok(self.table_psi[j] + self.segment(self.table_u[j], u))
    }

    pub fn psi_inverse(&self, y: f64) -> Result<f64> {
        if !(y.is_finite() && y >= 0.0) {
            return Err(Error::invalid(format!("Psi inverse needs y >= 0, got {y}")));
        }
        if let Some(limit) = self.tail {
            if y >= limit {
                return Err(Error::HorizonExceeded { value: y, limit });
            }
        }
        let top = *self.table_psi.last().expect("non-empty");
        let (mut lo, mut hi, psi_lo) = if y <= top {
            let j = self.table_psi.partition_point(|&p| p <= y).max(1) - 1;
            let j = j.min(self.table_u.len() - 2);
            (self.table_u[j], self.table_u[j + 1], self.table_psi[j])
        } else {
            let mut a = *self.table_u.last().expect("non-empty");
            let mut pa = top;
            loop {
                let b = a * 10.0;
                if !b.is_finite() || b > 1e300 {
                    return Err(Error::HorizonExceeded { value: y, limit: pa });
                }
                let pb = pa + self.segment(a, b);
                if pb >= y {
                    break (a, b, pa);
                }
                a = b;
                pa = pb;
            }
        };
        if y == psi_lo {
            return Ok(lo);
        }
        let base = lo;
        let mut u = (lo * hi).sqrt();
        for _ in 0..200 {
            let g = psi_lo + self.segment(base, u) - y;
            if g > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let newton = u - g * self.theta.eval(u);
            let next = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - u).abs() <= 1e-15 * u || hi - lo <= 1e-15 * hi {
                return Ok(next);
            }
            u = next;
        }
        Ok(u)
    }
}

/// `Psi^{-1}(int_0^t phi)`.
pub fn solve_via_psi(transform: &PsiTransform, phi: &PhiFunction, t: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("time must be >= 0, got {t}")));
    }
    transform.psi_inverse(phi.integral(t))
}

/// Maximal existence time of `U' = phi theta(U)`, `U(0) = U0`.
pub fn horizon(theta: &ThetaFunction, phi: &PhiFunction, u0: f64) -> Result<Horizon> {
    if !(u0.is_finite() && u0 > 0.0) {
        return Err(Error::invalid(format!("horizon needs U0 > 0, got {u0}")));
    }
    Ok(match theta.tail_integral(u0) {
        None => Horizon::Infinite,
        Some(budget) => match phi.inverse_integral(budget) {
            Some(t) => Horizon::Finite(t),
            None => Horizon::Infinite,
        },
    })
}

/// `U0 exp(int_0^t phi)`.
pub fn gronwall_bound(phi: &PhiFunction, u0: f64, t: f64) -> Result<f64> {
    if !(u0.is_finite() && u0 >= 0.0) {
        return Err(Error::invalid(format!("U0 must be >= 0, got {u0}")));
    }
    Ok(u0 * phi.integral(t).exp())
}

/// `(U0^{1-m} - (m-1) int_0^t phi)^{1/(1-m)}` for `m > 1`.
pub fn power_solution(m: f64, phi: &PhiFunction, u0: f64, t: f64) -> Result<f64> {
    if !(m.is_finite() && m > 1.0) {
        return Err(Error::invalid(format!("power solution needs m > 1, got {m}")));
    }
    if !(u0.is_finite() && u0 > 0.0) {
        return Err(Error::invalid(format!("power solution needs U0 > 0, got {u0}")));
    }
    let base = u0.powf(1.0 - m) - (m - 1.0) * phi.integral(t);
    if base <= 0.0 {
        let limit = match horizon(&ThetaFunction::Power(m), phi, u0)? {
            Horizon::Finite(h) => h,
            Horizon::Infinite => f64::INFINITY,
        };
        return Err(Error::HorizonExceeded { value: t, limit });
    }
    Ok(base.powf(1.0 / (1.0 - m)))
}

/// Majorant of `||u - u_hat||` for data at distance `eps`.
pub fn uniqueness_majorant(
    theta: &ThetaFunction,
    phi: &PhiFunction,
    eps: f64,
    grid: &TimeGrid,
) -> Result<ScalarCurve> {
    Ok(solve_scalar_ie(phi, theta, eps, grid)?.curve)
}

/// Envelope iteration `V_{j+1}(t_k) = U0 + sum_{i<k} lambda phi(t_i) theta(max_{l<=i} V_j(t_l))`
/// started from `seed`, run for `sweeps` sweeps.
pub fn a3_envelope(
    phi: &PhiFunction,
    theta: &ThetaFunction,
    u0: f64,
    seed: &ScalarCurve,
    sweeps: usize,
) -> Result<ScalarCurve> {
    let grid = *seed.grid();
    let lambda = grid.step();
    let mut v = seed.values().to_vec();
    for _ in 0..sweeps {
        let mut next = Vec::with_capacity(v.len());
        let mut acc = u0;
        let mut run = 0.0_f64;
        next.push(acc);
        for (i, &vi) in v[..grid.steps()].iter().enumerate() {
            run = run.max(vi);
            acc += lambda * phi.value(grid.node(i)) * theta.eval(run);
            next.push(acc);
        }
        v = next;
    }
    ScalarCurve::new(grid, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one() -> PhiFunction {
        PhiFunction::constant(1.0).unwrap()
    }

    #[test]
    fn log_osgood_kernel_shape() {
        let t = ThetaFunction::LogOsgood;
        assert_eq!(t.eval(0.0), 0.0);
        assert_relative_eq!(t.eval(0.1), 0.1 * 10f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(t.eval(1.0 / E), 1.0 / E, max_relative = 1e-15);
        assert_eq!(t.eval(5.0), 1.0 / E);
        assert!(t.is_nondecreasing_sampled());
    }

    #[test]
    fn custom_table_reproduces_power_laws_exactly() {
        let t = ThetaFunction::tabulate(|s| s * s, 1e-6, 10.0, 50).unwrap();
        for s in [1e-5, 0.3, 2.0, 7.7] {
            assert_relative_eq!(t.eval(s), s * s, max_relative = 1e-12);
        }
        assert_relative_eq!(t.eval(1e-7), 1e-12 * 0.1, max_relative = 1e-12);
        assert_eq!(t.eval(100.0), t.eval(1e3));
        assert!(ThetaFunction::custom_table(vec![1.0, 0.5], vec![1.0, 2.0]).is_err());
        assert!(ThetaFunction::custom_table(vec![0.5, 1.0], vec![2.0, 1.0]).is_err());
        assert!(ThetaFunction::power(0.0).is_err());
    }

    #[test]
    fn phi_table_integrals() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        let phi = PhiFunction::table(g, vec![1.0, 2.0, 0.0, 4.0, 8.0]).unwrap();
        assert_relative_eq!(phi.integral(1.0), 1.75, max_relative = 1e-15);
        assert_relative_eq!(phi.integral(0.375), 0.25 + 0.25, max_relative = 1e-15);
        assert_relative_eq!(phi.integral(1.5), 1.75 + 4.0, max_relative = 1e-15);
        assert_relative_eq!(phi.inverse_integral(0.5).unwrap(), 0.375, max_relative = 1e-15);
        assert_relative_eq!(phi.inverse_integral(5.75).unwrap(), 1.5, max_relative = 1e-12);
        assert_relative_eq!(phi.lp_norm(1.0, 1.0).unwrap(), 1.75, max_relative = 1e-15);
        assert_eq!(phi.lp_norm(f64::INFINITY, 1.0).unwrap(), 4.0);
        assert!(PhiFunction::constant(-1.0).is_err());
    }

    #[test]
    fn scalar_ie_examples() {
        let g = TimeGrid::new(1.0, 100).unwrap();
        let s = solve_scalar_ie(&one(), &ThetaFunction::Identity, 1.0, &g).unwrap();
        assert!((s.curve.last() - E).abs() <= 1e-6);
        assert!(s.integral_residual <= 1e-6);

        let g2 = TimeGrid::new(2.0, 200).unwrap();
        let p2 = ThetaFunction::power(2.0).unwrap();
        match ScalarSolver::default()
            .solve_outcome(&one(), &p2, 1.0, &g2)
            .unwrap()
        {
            IeOutcome::BlowUp {
                horizon,
                times,
                values,
            } => {
                assert!((horizon - 1.0).abs() <= 0.01, "horizon {horizon}");
                assert_eq!(times.len(), values.len());
                assert!(*times.last().unwrap() <= horizon);
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
        assert!(matches!(
            solve_scalar_ie(&one(), &p2, 1.0, &g2),
            Err(Error::BlowUp { .. })
        ));

        for theta in [ThetaFunction::Identity, ThetaFunction::LogOsgood, p2] {
            let s = solve_scalar_ie(&one(), &theta, 0.0, &g).unwrap();
            assert!(s.curve.values().iter().all(|&v| v == 0.0));
        }
        let half = ThetaFunction::power(0.5).unwrap();
        assert!(matches!(
            solve_scalar_ie(&one(), &half, 0.0, &g),
            Err(Error::Ambiguous(_))
        ));
    }

    #[test]
    fn scalar_ie_with_phi_table_matches_piecewise_closed_form() {
        let g = TimeGrid::new(1.0, 10).unwrap();
        let samples: Vec<f64> = (0..=10).map(|k| (k % 3) as f64).collect();
        let phi = PhiFunction::table(g, samples).unwrap();
        let s = solve_scalar_ie(&phi, &ThetaFunction::Identity, 0.5, &g).unwrap();
        for k in 0..=10 {
            let exact = 0.5 * phi.integral(g.node(k)).exp();
            assert_relative_eq!(s.curve.at(k), exact, max_relative = 1e-8);
        }
    }

    #[test]
    fn psi_examples() {
        let p = PsiTransform::new(ThetaFunction::Identity, 1.0).unwrap();
        assert_relative_eq!(p.psi(E).unwrap(), 1.0, max_relative = 1e-12);
        let p2 = PsiTransform::new(ThetaFunction::power(2.0).unwrap(), 1.0).unwrap();
        assert_relative_eq!(p2.psi(2.0).unwrap(), 0.5, max_relative = 1e-12);
        assert!(p.psi(0.5).is_err());
        assert!(matches!(p2.psi_inverse(1.0), Err(Error::HorizonExceeded { .. })));
    }

    #[test]
    fn psi_matches_shifted_log_closed_form() {
        // theta(s) = s ln s on s > 1 has Psi(U) = ln(ln U / ln U0)
        let theta = ThetaFunction::tabulate(|s| s * s.ln(), 1.5, 1e6, 14_000).unwrap();
        for u0 in [2.0, E, 10.0] {
            let tf = PsiTransform::new(theta.clone(), u0).unwrap();
            for u in [u0 * 1.5, 50.0, 1e3, 5e5] {
                let exact = (u.ln() / u0.ln()).ln();
                assert!((tf.psi(u).unwrap() - exact).abs() <= 1e-6, "U0={u0} U={u}");
            }
        }
    }

    #[test]
    fn psi_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let kernels = [
            (ThetaFunction::Identity, 0.5),
            (ThetaFunction::LogOsgood, 1e-4),
            (ThetaFunction::power(2.0).unwrap(), 1.0),
            (ThetaFunction::power(0.5).unwrap(), 0.1),
        ];
        for (theta, u0) in kernels {
            let tf = PsiTransform::new(theta, u0).unwrap();
            for _ in 0..100 {
                let u = u0 * 10f64.powf(rng.random_range(0.0..6.0));
                let back = tf.psi_inverse(tf.psi(u).unwrap()).unwrap();
                assert_relative_eq!(back, u, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn solve_via_psi_examples() {
        let tf = PsiTransform::new(ThetaFunction::Identity, 1.0).unwrap();
        assert_relative_eq!(solve_via_psi(&tf, &one(), 1.0).unwrap(), E, max_relative = 1e-10);
        let tf2 = PsiTransform::new(ThetaFunction::power(2.0).unwrap(), 1.0).unwrap();
        assert_relative_eq!(
            solve_via_psi(&tf2, &one(), 0.5).unwrap(),
            2.0,
            max_relative = 1e-10
        );

        let s0 = PhiFunction::constant(1.3).unwrap();
        let tf = PsiTransform::new(ThetaFunction::LogOsgood, 1e-3).unwrap();
        let g = TimeGrid::new(2.0, 400).unwrap();
        let s = solve_scalar_ie(&s0, &ThetaFunction::LogOsgood, 1e-3, &g).unwrap();
        for k in (0..=400).step_by(40) {
            let via = solve_via_psi(&tf, &s0, g.node(k)).unwrap();
            assert_relative_eq!(via, s.curve.at(k), max_relative = 1e-5);
        }
    }

    #[test]
    fn horizon_examples() {
        let p2 = ThetaFunction::power(2.0).unwrap();
        assert_eq!(horizon(&p2, &one(), 1.0).unwrap(), Horizon::Finite(1.0));
        assert_eq!(horizon(&p2, &one(), 2.0).unwrap(), Horizon::Finite(0.5));
        assert_eq!(
            horizon(&ThetaFunction::Identity, &one(), 3.0).unwrap(),
            Horizon::Infinite
        );
        let c = PhiFunction::constant(2.0).unwrap();
        let p3 = ThetaFunction::power(3.0).unwrap();
        // U0^{1-m} / ((m-1) c) = 0.25 / 4
        assert_eq!(horizon(&p3, &c, 2.0).unwrap(), Horizon::Finite(0.0625));
        assert_eq!(
            horizon(&p2, &PhiFunction::constant(0.0).unwrap(), 1.0).unwrap(),
            Horizon::Infinite
        );
    }

    #[test]
    fn horizon_consistency_with_solver() {
        for (m, u0, c) in [(2.0, 1.0, 1.0), (3.0, 0.5, 2.0), (1.5, 2.0, 0.7)] {
            let phi = PhiFunction::constant(c).unwrap();
            let theta = ThetaFunction::power(m).unwrap();
            let Horizon::Finite(h) = horizon(&theta, &phi, u0).unwrap() else {
                panic!("finite horizon expected");
            };
            let g = TimeGrid::new(2.0 * h, 100).unwrap();
            match ScalarSolver::default()
                .solve_outcome(&phi, &theta, u0, &g)
                .unwrap()
            {
                IeOutcome::BlowUp {
                    horizon: detected, ..
                } => {
                    assert!((detected - h).abs() <= 0.01 * h, "m={m}: {detected} vs {h}")
                }
                IeOutcome::Solved(_) => panic!("no blow-up detected for m={m}"),
            }
        }
    }

    #[test]
    fn gronwall_and_power_examples() {
        assert_relative_eq!(gronwall_bound(&one(), 1.0, 1.0).unwrap(), E, max_relative = 1e-15);
        assert_eq!(gronwall_bound(&one(), 0.0, 3.0).unwrap(), 0.0);
        let half = PhiFunction::constant(0.5).unwrap();
        assert_relative_eq!(
            gronwall_bound(&half, 2.0, 2.0).unwrap(),
            2.0 * E,
            max_relative = 1e-15
        );

        assert_relative_eq!(
            power_solution(2.0, &one(), 1.0, 0.5).unwrap(),
            2.0,
            max_relative = 1e-15
        );
        assert_eq!(power_solution(2.0, &one(), 1.7, 0.0).unwrap(), 1.7);
        assert_relative_eq!(
            power_solution(3.0, &one(), 1.0, 0.375).unwrap(),
            2.0,
            max_relative = 1e-14
        );
        assert!(matches!(
            power_solution(2.0, &one(), 1.0, 1.0),
            Err(Error::HorizonExceeded { .. })
        ));
    }

    #[test]
    fn gronwall_domination_is_tight() {
        let g = TimeGrid::new(2.0, 50).unwrap();
        let phi = PhiFunction::constant(0.8).unwrap();
        let s = solve_scalar_ie(&phi, &ThetaFunction::Identity, 0.3, &g).unwrap();
        for (k, t) in g.nodes().enumerate() {
            let b = gronwall_bound(&phi, 0.3, t).unwrap();
            assert!(s.curve.at(k) <= b + 1e-8);
            assert!((s.curve.at(k) - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn monotone_comparison() {
        let g = TimeGrid::new(1.0, 50).unwrap();
        let phi = PhiFunction::constant(1.5).unwrap();
        // s ln(1/s) <= s^{1/2} on (0, 1/e]
        let a = solve_scalar_ie(&phi, &ThetaFunction::LogOsgood, 1e-3, &g).unwrap();
        let b = solve_scalar_ie(&phi, &ThetaFunction::power(0.5).unwrap(), 1e-3, &g).unwrap();
        for k in 0..=50 {
            assert!(a.curve.at(k) <= b.curve.at(k) + 1e-8);
        }
    }

    #[test]
    fn majorant_examples() {
        let g = TimeGrid::new(1.0, 20).unwrap();
        let z = uniqueness_majorant(&ThetaFunction::Identity, &one(), 0.0, &g).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        let m = uniqueness_majorant(&ThetaFunction::Identity, &one(), 1e-3, &g).unwrap();
        for (k, t) in g.nodes().enumerate() {
            assert_relative_eq!(m.at(k), 1e-3 * t.exp(), max_relative = 1e-8);
        }
        let c = 2.0;
        let phi = PhiFunction::constant(c).unwrap();
        let m = uniqueness_majorant(&ThetaFunction::LogOsgood, &phi, 1e-3, &g).unwrap();
        for (k, t) in g.nodes().enumerate() {
            assert_relative_eq!(m.at(k), log_osgood_closed_form(1e-3, c, t), max_relative = 1e-7);
        }
    }

    #[test]
    fn envelope_collapses_under_osgood() {
        let g = TimeGrid::new(1.0, 100).unwrap();
        let seed = ScalarCurve::new(g, vec![1.0; 101]).unwrap();
        for theta in [ThetaFunction::Identity, ThetaFunction::LogOsgood] {
            let v = a3_envelope(&one(), &theta, 0.0, &seed, 120).unwrap();
            assert!(v.values().iter().all(|&x| x <= 1e-10), "{}", theta.name());
        }
        let half = ThetaFunction::power(0.5).unwrap();
        let v = a3_envelope(&one(), &half, 0.0, &seed, 10).unwrap();
        // the non-Osgood kernel keeps the nonzero solution t^2/4 alive
        assert!(v.last() > 0.2);
    }
}

//! Successive approximations `u_{n+1} = G u_n` for the semilinear problem
//! `u' + A u = F(t, u)`, with
//! `(G u)(t_k) = S(t_k) u0 + sum_{i<k} lambda S(t_k - t_i) F(t_i, u(t_i))`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::accretive::{OperatorSpec, ResolventSolverConfig};
use crate::banach::{distance, norm, NormKind, StateVector, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::majorant::{CoAlbedo, PhiFunction, ScalarCurve, ThetaFunction};
use crate::parallel::try_map_indices;
use crate::semigroup::resolvent_orbit;

/// A labelled scalar map applied componentwise.
#[derive(Clone)]
pub struct ScalarMap {
    label: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl ScalarMap {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarMap {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn identity() -> Self {
        ScalarMap::new("identity", |u| u)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, u: f64) -> f64 {
        (self.f)(u)
    }
}

impl fmt::Debug for ScalarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarMap({})", self.label)
    }
}

/// The modulus `K(t, U)` of the structural condition
/// `||F(t,u) - F(t,v)|| <= K(t, ||u - v||)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Modulus {
    /// `K(t, U) = phi(t) theta(U)`
    Separable { phi: PhiFunction, theta: ThetaFunction },
    /// `K` sampled on `grid x u`; rows per grid node, piecewise constant in `t`,
    /// linear in `U` and extrapolated with the last slope.
    GeneralTable {
        grid: TimeGrid,
        u: Vec<f64>,
        k: Vec<Vec<f64>>,
    },
}

impl Modulus {
    pub fn separable(phi: PhiFunction, theta: ThetaFunction) -> Self {
        Modulus::Separable { phi, theta }
    }

    pub fn general_table(grid: TimeGrid, u: Vec<f64>, k: Vec<Vec<f64>>) -> Result<Self> {
        if u.len() < 2 || u[0] != 0.0 || u.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "modulus table U axis must start at 0 and increase",
            ));
        }
        if k.len() != grid.len() || k.iter().any(|row| row.len() != u.len()) {
            return Err(Error::GridMismatch("modulus table shape".into()));
        }
        for row in &k {
            if row[0] != 0.0 {
                return Err(Error::invalid("modulus must vanish at U = 0"));
            }
            if row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || row.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::invalid(
                    "modulus rows must be finite, >= 0 and nondecreasing",
                ));
            }
        }
        Ok(Modulus::GeneralTable { grid, u, k })
    }

    pub fn eval(&self, t: f64, big_u: f64) -> f64 {
        match self {
            Modulus::Separable { phi, theta } => phi.value(t) * theta.eval(big_u),
            Modulus::GeneralTable { grid, u, k } => {
                if big_u <= 0.0 {
                    return 0.0;
                }
                let row = &k[grid.cell_of(t)];
                let n = u.len();
                let j = (u.partition_point(|&x| x <= big_u) - 1).min(n - 2);
                let slope = (row[j + 1] - row[j]) / (u[j + 1] - u[j]);
                row[j] + slope * (big_u - u[j])
            }
        }
    }

    /// Sampled check of `K(t, 0) = 0` and monotonicity in `U` at every node of `grid`.
    pub fn check_on(&self, grid: &TimeGrid) -> bool {
        grid.nodes().all(|t| {
            let vals: Vec<f64> = (0..=60)
                .map(|i| {
                    if i == 0 {
                        0.0
                    } else {
                        self.eval(t, 10f64.powf(-12.0 + 0.25 * i as f64))
                    }
                })
                .collect();
            self.eval(t, 0.0) == 0.0 && vals.windows(2).all(|w| w[1] >= w[0])
        })
    }
}

#[derive(Debug, Clone)]
pub enum PerturbationKind {
    PointwiseScalar(ScalarMap),
    TimeModulated { phi: PhiFunction, g: ScalarMap },
    Affine(StateVector),
}

/// `F(t, u)` together with the modulus certifying it.
#[derive(Debug, Clone)]
pub struct Perturbation {
    kind: PerturbationKind,
    modulus: Modulus,
}

/// Options for the randomized validation at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validation<'a> {
    pub grid: &'a TimeGrid,
    pub dim: usize,
    pub norm: &'a NormKind,
    pub pairs_per_node: usize,
    pub seed: u64,
}

impl Perturbation {
    /// Builds `F` and falsification-tests the declared modulus on random pairs.
    pub fn new(kind: PerturbationKind, modulus: Modulus, check: Validation<'_>) -> Result<Self> {
        if let PerturbationKind::Affine(b) = &kind {
            b.check_dim(check.dim)?;
        }
        let p = Perturbation { kind, modulus };
        if !p.modulus.check_on(check.grid) {
            return Err(Error::invalid(
                "modulus must vanish at 0 and be nondecreasing in U",
            ));
        }
        p.validate(check)?;
        Ok(p)
    }

    pub fn zero(dim: usize) -> Self {
        Perturbation {
            kind: PerturbationKind::Affine(StateVector::zeros(dim)),
            modulus: Modulus::separable(PhiFunction::Constant(0.0), ThetaFunction::Identity),
        }
    }

    /// `F(t, u) = S0 beta(u)` componentwise with `K = S0 C_beta theta_log`.
    pub fn coalbedo(beta: CoAlbedo, check: Validation<'_>) -> Result<Self> {
        Perturbation::new(
            PerturbationKind::PointwiseScalar(ScalarMap::new("coalbedo", move |u| beta.forcing(u))),
            Modulus::separable(beta.modulus_phi(), ThetaFunction::LogOsgood),
            check,
        )
    }

    pub fn kind(&self) -> &PerturbationKind {
        &self.kind
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn apply(&self, t: f64, u: &StateVector) -> StateVector {
        match &self.kind {
            PerturbationKind::PointwiseScalar(g) => u.map(|x| g.eval(x)),
            PerturbationKind::TimeModulated { phi, g } => {
                let c = phi.value(t);
                u.map(|x| c * g.eval(x))
            }
            PerturbationKind::Affine(b) => b.clone(),
        }
    }

    fn validate(&self, check: Validation<'_>) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(check.seed);
        let stride = (check.grid.steps() / 50).max(1);
        for k in (0..=check.grid.steps()).step_by(stride) {
            let t = check.grid.node(k);
            for _ in 0..check.pairs_per_node {
                let scale = 10f64.powf(rng.random_range(-6.0..0.5));
                let u: Vec<f64> = (0..check.dim).map(|_| rng.random_range(-2.0..2.0)).collect();
                let v: Vec<f64> = u
                    .iter()
                    .map(|x| x + scale * rng.random_range(-1.0..1.0))
                    .collect();
                let (u, v) = (StateVector::new(u)?, StateVector::new(v)?);
                let lhs = distance(&self.apply(t, &u), &self.apply(t, &v), check.norm)?;
                let rhs = self.modulus.eval(t, distance(&u, &v, check.norm)?);
                if lhs > rhs + 1e-9 {
                    return Err(Error::invalid(format!(
                        "declared modulus violated at t = {t}: {lhs} > K = {rhs}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Resolvent substeps per grid cell for the semigroup (`S(lambda) = J_{lambda/s}^s`).
    pub substeps: usize,
    pub resolvent: ResolventSolverConfig,
    /// Keep every iterate (needed for majorant domination).
    pub keep_iterates: bool,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            tolerance: 1e-8,
            max_iterations: 100,
            substeps: 1,
            resolvent: ResolventSolverConfig::default(),
            keep_iterates: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardDiagnostics {
    /// Number of `G` sweeps until the stopping rule fired (or the limit).
    pub sweeps: usize,
    pub converged: bool,
    /// `R_n(T) = sup_k ||u_{n+1}(t_k) - u_n(t_k)||`, starting with `n = 0`.
    pub r_trace: Vec<f64>,
    /// `sup_k ||u(t_k) - (G u)(t_k)||` for the returned `u`.
    pub fixed_point_defect: f64,
    /// `u_0, u_1, ...` when requested.
    pub iterates: Vec<Trajectory>,
}

impl PicardDiagnostics {
    /// Whether `R_n` is nonincreasing from `n = 1` on, within `slack`.
    pub fn r_nonincreasing(&self, slack: f64) -> bool {
        self.r_trace.len() < 3 || self.r_trace[1..].windows(2).all(|w| w[1] <= w[0] + slack)
    }

    /// Ratios of weighted norms `||u_{n+1} - u_n||_gamma / ||u_n - u_{n-1}||_gamma`.
    pub fn bielecki_ratios(&self, gamma: f64) -> Result<Vec<f64>> {
        let diffs: Vec<f64> = self
            .iterates
            .windows(2)
            .map(|w| w[1].difference(&w[0])?.bielecki_norm(gamma))
            .collect::<Result<_>>()?;
        Ok(diffs
            .windows(2)
            .filter(|w| w[0] > 1e-300)
            .map(|w| w[1] / w[0])
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardOutcome {
    pub trajectory: Trajectory,
    pub diagnostics: PicardDiagnostics,
}

impl PicardOutcome {
    pub fn into_converged(self) -> Result<Self> {
        if self.diagnostics.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                iterations: self.diagnostics.sweeps,
                last_difference: self.diagnostics.r_trace.last().copied().unwrap_or(f64::NAN),
            })
        }
    }
}

/// Picard solver for `u' + A u = F(t, u)` on a fixed grid.
#[derive(Debug, Clone)]
pub struct Picard {
    pub spec: OperatorSpec,
    pub perturbation: Perturbation,
    pub norm: NormKind,
    pub config: PicardConfig,
}

impl Picard {
    pub fn new(spec: OperatorSpec, perturbation: Perturbation, norm: NormKind) -> Self {
        Picard {
            spec,
            perturbation,
            norm,
            config: PicardConfig::default(),
        }
    }

    pub fn with_config(mut self, config: PicardConfig) -> Self {
        self.config = config;
        self
    }

    fn validate(&self, u0: &StateVector) -> Result<()> {
        if !(self.config.tolerance.is_finite() && self.config.tolerance > 0.0) {
            return Err(Error::invalid("Picard tolerance must be > 0"));
        }
        if self.config.substeps == 0 {
            return Err(Error::invalid("Picard needs at least one semigroup substep"));
        }
        if let Some(d) = self.spec.dim() {
            u0.check_dim(d)?;
        }
        Ok(())
    }

    /// `[S(t_0) u0, ..., S(t_n) u0]`.
    pub fn homogeneous(&self, u0: &StateVector, grid: &TimeGrid) -> Result<Vec<StateVector>> {
        let s = self.config.substeps;
        let sub = grid.step() / s as f64;
        let orbit = resolvent_orbit(&self.spec, sub, u0, grid.steps() * s, &self.config.resolvent)?;
        Ok(orbit.into_iter().step_by(s).collect())
    }

    /// One application of `G` with a precomputed homogeneous orbit.
    fn sweep(&self, homogeneous: &[StateVector], u: &Trajectory) -> Result<Trajectory> {
        let grid = *u.grid();
        let n = grid.steps();
        let lambda = grid.step();
        let s = self.config.substeps;
        let sub = lambda / s as f64;
        let cfg = &self.config.resolvent;
        // contributions[i][j] = S(j lambda) F(t_i, u_i), j = 1..=n-i
        let contributions = try_map_indices(n, |i| {
            let fi = self.perturbation.apply(grid.node(i), u.at(i));
            let orbit = resolvent_orbit(&self.spec, sub, &fi, (n - i) * s, cfg)?;
            Ok::<_, Error>(orbit.into_iter().step_by(s).skip(1).collect::<Vec<_>>())
        })?;
        let mut values = homogeneous.to_vec();
        for (i, contrib) in contributions.iter().enumerate() {
            for (j, c) in contrib.iter().enumerate() {
                let k = i + 1 + j;
                values[k] = values[k].axpy(lambda, c);
            }
        }
        Trajectory::new(grid, values, self.norm.clone())
    }

    pub fn apply_g(&self, u0: &StateVector, u: &Trajectory) -> Result<Trajectory> {
        self.validate(u0)?;
        u0.check_dim(u.dim())?;
        let h = self.homogeneous(u0, u.grid())?;
        self.sweep(&h, u)
    }

    /// Picard iteration from the constant trajectory `u0`.
    pub fn iterate(&self, u0: &StateVector, grid: &TimeGrid) -> Result<PicardOutcome> {
        let start = Trajectory::constant(*grid, u0.clone(), self.norm.clone());
        self.iterate_from(u0, start)
    }

    pub fn iterate_from(&self, u0: &StateVector, start: Trajectory) -> Result<PicardOutcome> {
        self.validate(u0)?;
        u0.check_dim(start.dim())?;
        let grid = *start.grid();
        let homogeneous = self.homogeneous(u0, &grid)?;
        let mut u = start;
        let mut iterates = Vec::new();
        if self.config.keep_iterates {
            iterates.push(u.clone());
        }
        let mut r_trace = Vec::new();
        let mut converged = false;
        let mut sweeps = 0;
        while sweeps < self.config.max_iterations {
            let next = self.sweep(&homogeneous, &u)?;
            sweeps += 1;
            let r = next.sup_distance(&u)?;
            r_trace.push(r);
            u = next;
            if self.config.keep_iterates {
                iterates.push(u.clone());
            }
            if r < self.config.tolerance {
                converged = true;
                break;
            }
        }
        let check = self.sweep(&homogeneous, &u)?;
        let fixed_point_defect = check.sup_distance(&u)?;
        Ok(PicardOutcome {
            trajectory: u,
            diagnostics: PicardDiagnostics {
                sweeps,
                converged,
                r_trace,
                fixed_point_defect,
                iterates,
            },
        })
    }

    /// Running sup of `||u - u_hat||` between the fixed points for two data.
    pub fn two_solution_gap(
        &self,
        u0: &StateVector,
        u0_hat: &StateVector,
        grid: &TimeGrid,
    ) -> Result<ScalarCurve> {
        let a = self.iterate(u0, grid)?.into_converged()?;
        if u0 == u0_hat {
            return Ok(ScalarCurve::zeros(*grid));
        }
        let b = self.iterate(u0_hat, grid)?.into_converged()?;
        let diff = a.trajectory.difference(&b.trajectory)?;
        ScalarCurve::new(*grid, diff.running_sup())
    }
}

/// Weighted-norm contraction factor for a modulus `phi(t) U` with `phi` in `L^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BieleckiFactor {
    pub factor: f64,
    /// Lower bound on `gamma` for which the factor is a contraction.
    pub threshold: f64,
    pub above_threshold: bool,
}

/// `||phi||_p / (p' gamma)^{1/p'}` (or `||phi||_inf / gamma`), with the
/// admissibility threshold `((p-1)/p) ||phi||_p^{p/(p-1)}` (or `||phi||_inf`).
pub fn bielecki_factor(phi: &PhiFunction, p: f64, gamma: f64, horizon: f64) -> Result<BieleckiFactor> {
    if p.is_nan() || p <= 1.0 {
        return Err(Error::invalid(format!("Bielecki factor needs p > 1, got {p}")));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::invalid(format!("gamma must be > 0, got {gamma}")));
    }
    let phi_norm = phi.lp_norm(p, horizon)?;
    let (factor, threshold) = if p.is_infinite() {
        (phi_norm / gamma, phi_norm)
    } else {
        let q = p / (p - 1.0);
        (
            phi_norm / (q * gamma).powf(1.0 / q),
            ((p - 1.0) / p) * phi_norm.powf(p / (p - 1.0)),
        )
    };
    Ok(BieleckiFactor {
        factor,
        threshold,
        above_threshold: gamma > threshold,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominationReport {
    pub holds: bool,
    /// Largest `sup_{j<=k} ||u_n(t_j)|| - U(t_k)` over iterates and nodes.
    pub worst_excess: f64,
    pub slack: f64,
}

/// Checks `sup_{j<=k} ||u_n(t_j)|| <= U(t_k) + slack` for every iterate and node.
pub fn majorant_domination(
    iterates: &[Trajectory],
    majorant: &ScalarCurve,
    slack: f64,
) -> Result<DominationReport> {
    let mut worst = f64::NEG_INFINITY;
    for u in iterates {
        if u.grid() != majorant.grid() {
            return Err(Error::GridMismatch("iterate and majorant grids differ".into()));
        }
        for (k, r) in u.running_sup().into_iter().enumerate() {
            worst = worst.max(r - majorant.at(k));
        }
    }
    Ok(DominationReport {
        holds: worst <= slack,
        worst_excess: worst,
        slack,
    })
}

/// `sup_k ||F(t_k, 0)||`, the size of the forcing at the origin.
pub fn forcing_at_zero(f: &Perturbation, grid: &TimeGrid, dim: usize, nk: &NormKind) -> Result<f64> {
    let z = StateVector::zeros(dim);
    grid.nodes()
        .map(|t| norm(&f.apply(t, &z), nk))
        .try_fold(0.0_f64, |m, v| v.map(|v| m.max(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::majorant::{gronwall_bound, solve_scalar_ie};
    use approx::assert_relative_eq;

    fn linear_f(grid: &TimeGrid, dim: usize, nk: &NormKind) -> Perturbation {
        Perturbation::new(
            PerturbationKind::PointwiseScalar(ScalarMap::identity()),
            Modulus::separable(PhiFunction::Constant(1.0), ThetaFunction::Identity),
            Validation {
                grid,
                dim,
                norm: nk,
                pairs_per_node: 10,
                seed: 1,
            },
        )
        .unwrap()
    }

    fn zero_picard(grid: &TimeGrid) -> Picard {
        Picard::new(OperatorSpec::Zero, linear_f(grid, 1, &NormKind::L2), NormKind::L2)
    }

    #[test]
    fn apply_g_examples() {
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let u0 = StateVector::new(vec![1.0, -0.5]).unwrap();
        let abs = Picard::new(
            OperatorSpec::AbsSubdifferential,
            Perturbation::zero(2),
            NormKind::L2,
        );
        let u = Trajectory::constant(grid, u0.clone(), NormKind::L2);
        let g = abs.apply_g(&u0, &u).unwrap();
        for (k, t) in grid.nodes().enumerate() {
            assert_relative_eq!(g.at(k)[0], (1.0 - t).max(0.0), epsilon = 1e-12);
        }

        let b = StateVector::new(vec![2.0, -1.0]).unwrap();
        let aff = Perturbation::new(
            PerturbationKind::Affine(b.clone()),
            Modulus::separable(PhiFunction::Constant(0.0), ThetaFunction::Identity),
            Validation {
                grid: &grid,
                dim: 2,
                norm: &NormKind::Sup,
                pairs_per_node: 4,
                seed: 0,
            },
        )
        .unwrap();
        let z = Picard::new(OperatorSpec::Zero, aff, NormKind::Sup);
        let g = z.apply_g(&u0, &u).unwrap();
        for (k, t) in grid.nodes().enumerate() {
            for c in 0..2 {
                assert_relative_eq!(g.at(k)[c], u0[c] + t * b[c], epsilon = 1e-14);
            }
        }

        let p = zero_picard(&grid);
        let one = StateVector::scalar(1.0);
        let g = p
            .apply_g(&one, &Trajectory::constant(grid, one.clone(), NormKind::L2))
            .unwrap();
        for (k, t) in grid.nodes().enumerate() {
            assert_relative_eq!(g.at(k)[0], 1.0 + t, epsilon = 1e-14);
        }
    }

    #[test]
    fn homogeneous_problem_converges_immediately() {
        let grid = TimeGrid::new(1.0, 20).unwrap();
        let spec = OperatorSpec::weighted_p_laplace(3.0, 8).unwrap();
        let u0 = StateVector::new((0..8).map(|i| (i as f64).sin()).collect()).unwrap();
        let p = Picard::new(spec, Perturbation::zero(8), NormKind::L2);
        let out = p.iterate(&u0, &grid).unwrap();
        assert!(out.diagnostics.converged);
        assert_eq!(out.diagnostics.sweeps, 2);
        assert_eq!(out.diagnostics.r_trace[1], 0.0);
        assert_eq!(out.diagnostics.fixed_point_defect, 0.0);
        let h = p.homogeneous(&u0, &grid).unwrap();
        assert_eq!(out.trajectory.values(), &h[..]);
    }

    #[test]
    fn linear_growth_matches_discrete_and_continuous_exponentials() {
        let one = StateVector::scalar(1.0);
        for n in [200, 2000] {
            let grid = TimeGrid::new(1.0, n).unwrap();
            let mut p = zero_picard(&grid);
            p.config.max_iterations = 200;
            let out = p.iterate(&one, &grid).unwrap().into_converged().unwrap();
            let lam = grid.step();
            for k in (0..=n).step_by(n / 10) {
                // the left-endpoint fixed point is (1 + lambda)^k
                assert_relative_eq!(
                    out.trajectory.at(k)[0],
                    (1.0 + lam).powi(k as i32),
                    max_relative = 1e-7
                );
            }
            assert!(out.diagnostics.fixed_point_defect <= 2.0 * p.config.tolerance);
            let err = (out.trajectory.at(n)[0] - 1f64.exp()).abs();
            if n == 2000 {
                assert!(err <= 1e-3, "{err}");
            } else {
                assert!(err > 1e-3 && err < 1e-2, "{err}");
            }
        }
    }

    #[test]
    fn r_trace_nonincreasing_and_restart_is_idempotent() {
        let grid = TimeGrid::new(1.0, 40).unwrap();
        let d = 8;
        let spec = OperatorSpec::weighted_p_laplace(3.0, d).unwrap();
        let beta = CoAlbedo::new(0.3, 0.8, 0.1, 1.0).unwrap();
        let f = Perturbation::coalbedo(
            beta,
            Validation {
                grid: &grid,
                dim: d,
                norm: &NormKind::Sup,
                pairs_per_node: 10,
                seed: 2,
            },
        )
        .unwrap();
        let p = Picard::new(spec, f, NormKind::Sup);
        let u0 = StateVector::new((0..d).map(|i| -0.5 + 0.1 * i as f64).collect()).unwrap();
        let out = p.iterate(&u0, &grid).unwrap().into_converged().unwrap();
        assert!(out.diagnostics.r_nonincreasing(1e-10));
        assert!(out.diagnostics.fixed_point_defect <= 2.0 * p.config.tolerance);
        let again = p.iterate_from(&u0, out.trajectory.clone()).unwrap();
        assert!(again.diagnostics.converged);
        assert_eq!(again.diagnostics.sweeps, 1);
        assert!(again.diagnostics.fixed_point_defect <= p.config.tolerance);
    }

    #[test]
    fn g_estimate_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let grid = TimeGrid::new(1.0, 16).unwrap();
        let d = 6;
        let spec = OperatorSpec::weighted_p_laplace(3.0, d).unwrap();
        let beta = CoAlbedo::new(0.3, 0.8, 0.1, 1.5).unwrap();
        let nk = NormKind::Sup;
        let f = Perturbation::coalbedo(
            beta,
            Validation {
                grid: &grid,
                dim: d,
                norm: &nk,
                pairs_per_node: 5,
                seed: 3,
            },
        )
        .unwrap();
        let p = Picard::new(spec, f.clone(), nk.clone());
        let random_traj = |rng: &mut ChaCha8Rng| {
            let vals = (0..=16)
                .map(|_| StateVector::new((0..d).map(|_| rng.random_range(-0.3..0.3)).collect()).unwrap())
                .collect();
            Trajectory::new(grid, vals, nk.clone()).unwrap()
        };
        for _ in 0..10 {
            let (u, v) = (random_traj(&mut rng), random_traj(&mut rng));
            let u0 = StateVector::new((0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
            let v0 = StateVector::new((0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
            let gu = p.apply_g(&u0, &u).unwrap();
            let gv = p.apply_g(&v0, &v).unwrap();
            let run = u.difference(&v).unwrap().running_sup();
            let mut bound = distance(&u0, &v0, &nk).unwrap();
            for (k, &r) in run.iter().enumerate() {
                let lhs = distance(gu.at(k), gv.at(k), &nk).unwrap();
                assert!(lhs <= bound + 1e-8, "node {k}: {lhs} > {bound}");
                bound += grid.step() * f.modulus().eval(grid.node(k), r);
            }
        }
    }

    #[test]
    fn bielecki_examples_and_measured_contraction() {
        let one = PhiFunction::Constant(1.0);
        let b = bielecki_factor(&one, 2.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(b.factor, 0.5, max_relative = 1e-15);
        assert!(b.above_threshold);
        assert_eq!(
            bielecki_factor(&PhiFunction::Constant(0.0), 2.0, 2.0, 1.0)
                .unwrap()
                .factor,
            0.0
        );
        assert_relative_eq!(
            bielecki_factor(&one, f64::INFINITY, 2.0, 1.0).unwrap().factor,
            0.5,
            max_relative = 1e-15
        );
        assert!(bielecki_factor(&one, 1.0, 2.0, 1.0).is_err());
        assert!(!bielecki_factor(&one, 2.0, 0.25, 1.0).unwrap().above_threshold);

        let grid = TimeGrid::new(1.0, 200).unwrap();
        let mut p = zero_picard(&grid);
        p.config.keep_iterates = true;
        let out = p.iterate(&StateVector::scalar(1.0), &grid).unwrap();
        let ratios = out.diagnostics.bielecki_ratios(2.0).unwrap();
        assert!(!ratios.is_empty());
        assert!(ratios.iter().all(|&r| r <= 0.55), "{ratios:?}");
    }

    #[test]
    fn domination_examples() {
        let grid = TimeGrid::new(1.0, 50).unwrap();
        let u0 = StateVector::new(vec![0.4, -0.9, 0.2]).unwrap();
        let spec = OperatorSpec::AbsSubdifferential;
        let mut p = Picard::new(spec, Perturbation::zero(3), NormKind::L2);
        p.config.keep_iterates = true;
        let out = p.iterate(&u0, &grid).unwrap();
        let n0 = norm(&u0, &NormKind::L2).unwrap();
        let flat = ScalarCurve::new(grid, vec![n0; 51]).unwrap();
        assert!(
            majorant_domination(&out.diagnostics.iterates, &flat, 1e-8)
                .unwrap()
                .holds
        );

        let mut lin = zero_picard(&grid);
        lin.config.keep_iterates = true;
        let one = StateVector::scalar(1.0);
        let out = lin.iterate(&one, &grid).unwrap();
        let phi = PhiFunction::Constant(1.0);
        let g = ScalarCurve::new(
            grid,
            grid.nodes()
                .map(|t| gronwall_bound(&phi, 1.0, t).unwrap())
                .collect(),
        )
        .unwrap();
        assert!(
            majorant_domination(&out.diagnostics.iterates, &g, 1e-8)
                .unwrap()
                .holds
        );
        let shrunk = g.scaled(0.5).unwrap();
        assert!(
            !majorant_domination(&out.diagnostics.iterates, &shrunk, 1e-8)
                .unwrap()
                .holds
        );
        let s = solve_scalar_ie(&phi, &ThetaFunction::Identity, 1.0, &grid).unwrap();
        assert!(
            majorant_domination(&out.diagnostics.iterates, &s.curve, 1e-8)
                .unwrap()
                .holds
        );

        let other = TimeGrid::new(2.0, 50).unwrap();
        assert!(majorant_domination(&out.diagnostics.iterates, &ScalarCurve::zeros(other), 0.0).is_err());
    }

    #[test]
    fn two_solution_gap_examples() {
        let grid = TimeGrid::new(1.0, 2000).unwrap();
        let mut p = zero_picard(&grid);
        p.config.max_iterations = 200;
        let a = StateVector::scalar(1.0);
        let z = p.two_solution_gap(&a, &a, &grid).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        let eps = 1e-3;
        let gap = p
            .two_solution_gap(&a, &StateVector::scalar(1.0 + eps), &grid)
            .unwrap();
        for (k, t) in grid.nodes().enumerate().step_by(100) {
            assert_relative_eq!(gap.at(k), eps * t.exp(), max_relative = 1e-3);
        }
    }

    #[test]
    fn modulus_validation_rejects_false_claims() {
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let res = Perturbation::new(
            PerturbationKind::PointwiseScalar(ScalarMap::new("double", |u| 2.0 * u)),
            Modulus::separable(PhiFunction::Constant(1.0), ThetaFunction::Identity),
            Validation {
                grid: &grid,
                dim: 3,
                norm: &NormKind::Sup,
                pairs_per_node: 10,
                seed: 0,
            },
        );
        assert!(res.is_err());
        let table = Modulus::general_table(grid, vec![0.0, 1.0], vec![vec![0.0, 2.0]; 11]).unwrap();
        assert_eq!(table.eval(0.3, 0.5), 1.0);
        assert_eq!(table.eval(0.3, 3.0), 6.0);
        assert!(Modulus::general_table(grid, vec![0.0, 1.0], vec![vec![0.1, 2.0]; 11]).is_err());
        let ok = Perturbation::new(
            PerturbationKind::TimeModulated {
                phi: PhiFunction::Constant(2.0),
                g: ScalarMap::new("sin", f64::sin),
            },
            table,
            Validation {
                grid: &grid,
                dim: 3,
                norm: &NormKind::Sup,
                pairs_per_node: 10,
                seed: 0,
            },
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn forcing_at_origin() {
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let beta = CoAlbedo::new(0.3, 0.8, 0.1, 2.0).unwrap();
        let f = Perturbation::coalbedo(
            beta,
            Validation {
                grid: &grid,
                dim: 4,
                norm: &NormKind::Sup,
                pairs_per_node: 4,
                seed: 0,
            },
        )
        .unwrap();
        assert_relative_eq!(
            forcing_at_zero(&f, &grid, 4, &NormKind::Sup).unwrap(),
            0.6,
            max_relative = 1e-15
        );
    }
}

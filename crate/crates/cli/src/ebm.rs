//! Energy balance model: weighted p-Laplace diffusion on `[-1, 1]` forced by
//! `S0 beta(u)` with the piecewise logarithmic co-albedo.

use accretive::accretive::OperatorSpec;
use accretive::banach::{norm, NormKind, StateVector, TimeGrid, Trajectory};
use accretive::evolution::{Evolution, ForcingTerm};
use accretive::majorant::{
    log_osgood_closed_form, solve_scalar_ie, uniqueness_majorant, CoAlbedo, PhiFunction, ScalarCurve,
    ThetaFunction,
};
use accretive::picard::{
    forcing_at_zero, majorant_domination, DominationReport, Perturbation, Picard, PicardConfig,
    PicardDiagnostics, Validation,
};
use accretive::{Error, Result};

use crate::report::ReportRow;

/// Initial temperature profile on the nodes `x_j` of `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `a + b (1 - x^2)`
    Bump { a: f64, b: f64 },
    /// `a + b x`
    Affine { a: f64, b: f64 },
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Bump { a, b } => a + b * (1.0 - x * x),
            Profile::Affine { a, b } => a + b * x,
        }
    }
}

/// Diffusion operator of the scenario; `Zero` is the ODE sanity variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diffusion {
    PLaplace,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EbmScenario {
    pub d: usize,
    pub p: f64,
    /// `S0 >= 0`; zero switches the forcing off.
    pub insolation: f64,
    pub beta_ice: f64,
    pub beta_water: f64,
    pub delta: f64,
    pub profile: Profile,
    pub horizon: f64,
    pub steps: usize,
    pub picard_tol: f64,
    pub max_sweeps: usize,
    /// Coordinate perturbed in the uniqueness experiment.
    pub direction: usize,
    pub diffusion: Diffusion,
    pub seed: u64,
}

impl Default for EbmScenario {
    fn default() -> Self {
        EbmScenario {
            d: 64,
            p: 3.0,
            insolation: 1.0,
            beta_ice: 0.3,
            beta_water: 0.8,
            delta: 0.1,
            profile: Profile::Bump { a: -1.0, b: 1.05 },
            horizon: 1.0,
            steps: 200,
            picard_tol: 1e-9,
            max_sweeps: 60,
            direction: 0,
            diffusion: Diffusion::PLaplace,
            seed: 0,
        }
    }
}

impl EbmScenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.insolation.is_finite() && self.insolation >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "insolation must be >= 0, got {}",
                self.insolation
            )));
        }
        // the co-albedo constraints do not depend on S0
        CoAlbedo::new(self.beta_ice, self.beta_water, self.delta, 1.0)?;
        if self.direction >= self.d {
            return Err(Error::IndexOutOfRange {
                index: self.direction,
                len: self.d,
            });
        }
        if self.picard_tol.is_nan() || self.picard_tol <= 0.0 || self.max_sweeps == 0 {
            return Err(Error::InvalidParameter(
                "Picard tolerance and sweep budget must be positive".into(),
            ));
        }
        self.operator()?;
        TimeGrid::new(self.horizon, self.steps)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.horizon, self.steps)
    }

    pub fn operator(&self) -> Result<OperatorSpec> {
        match self.diffusion {
            Diffusion::PLaplace => OperatorSpec::weighted_p_laplace(self.p, self.d),
            Diffusion::Zero => Ok(OperatorSpec::Zero),
        }
    }

    /// Spatial nodes, uniform on `[-1, 1]` with exact end points.
    pub fn nodes(&self) -> Vec<f64> {
        let h = 2.0 / (self.d - 1) as f64;
        (0..self.d)
            .map(|j| if j + 1 == self.d { 1.0 } else { -1.0 + j as f64 * h })
            .collect()
    }

    pub fn initial_state(&self) -> Result<StateVector> {
        StateVector::new(self.nodes().into_iter().map(|x| self.profile.eval(x)).collect())
    }

    pub fn coalbedo(&self) -> Option<CoAlbedo> {
        (self.insolation > 0.0).then(|| {
            CoAlbedo::new(self.beta_ice, self.beta_water, self.delta, self.insolation)
                .expect("validated co-albedo")
        })
    }

    /// `S0 C_beta`, the time factor of the modulus.
    pub fn modulus_rate(&self) -> f64 {
        self.coalbedo().map_or(0.0, |b| b.insolation * b.constant())
    }

    pub fn perturbation(&self) -> Result<Perturbation> {
        match self.coalbedo() {
            None => Ok(Perturbation::zero(self.d)),
            Some(beta) => Perturbation::coalbedo(
                beta,
                Validation {
                    grid: &self.grid()?,
                    dim: self.d,
                    norm: &NormKind::Sup,
                    pairs_per_node: 8,
                    seed: self.seed,
                },
            ),
        }
    }

    pub fn picard(&self, keep_iterates: bool) -> Result<Picard> {
        Ok(
            Picard::new(self.operator()?, self.perturbation()?, NormKind::Sup).with_config(PicardConfig {
                tolerance: self.picard_tol,
                max_iterations: self.max_sweeps,
                keep_iterates,
                ..PicardConfig::default()
            }),
        )
    }
}

#[derive(Debug, Clone)]
pub struct EbmRun {
    pub trajectory: Trajectory,
    pub diagnostics: PicardDiagnostics,
    pub majorant: ScalarCurve,
    pub domination: DominationReport,
    /// Sup-node distance to implicit Euler driven by the frozen forcing `F(t, u(t))`.
    pub euler_gap: f64,
    /// `sup_k ||F(t_k, 0)||`
    pub forcing_at_zero: f64,
    pub rows: Vec<ReportRow>,
}

/// Tolerances checked by the EBM rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EbmTolerances {
    pub defect: f64,
    pub euler_agreement: f64,
}

impl Default for EbmTolerances {
    fn default() -> Self {
        EbmTolerances {
            defect: 1e-6,
            euler_agreement: 1e-4,
        }
    }
}

pub const EBM_TAG: &str = "picard_ebm";
pub const UNIQUENESS_TAG: &str = "uniqueness_gap";

pub fn run_ebm(scenario: &EbmScenario, tol: EbmTolerances) -> Result<EbmRun> {
    scenario.validate()?;
    let grid = scenario.grid()?;
    let u0 = scenario.initial_state()?;
    let picard = scenario.picard(true)?;
    let outcome = picard.iterate(&u0, &grid)?;
    let diag = outcome.diagnostics;
    let u = outcome.trajectory;

    let u0_norm = norm(&u0, &NormKind::Sup)?;
    let phi = PhiFunction::Constant(scenario.modulus_rate());
    let maj = solve_scalar_ie(&phi, &ThetaFunction::LogOsgood, u0_norm, &grid)?;
    let slack = 1e-8 + maj.error_estimate;
    let domination = majorant_domination(&diag.iterates, &maj.curve, slack)?;

    let frozen: Vec<StateVector> = grid
        .nodes()
        .enumerate()
        .map(|(k, t)| picard.perturbation.apply(t, u.at(k)))
        .collect();
    let euler = Evolution::new(picard.spec.clone())
        .with_norm(NormKind::Sup)
        .implicit_euler(&u0, &ForcingTerm::table(grid, frozen)?, &grid)?;
    let euler_gap = euler.sup_distance(&u)?;
    let f0 = forcing_at_zero(&picard.perturbation, &grid, scenario.d, &NormKind::Sup)?;

    let t = EBM_TAG;
    let last_r = diag.r_trace.last().copied().unwrap_or(0.0);
    let rows = vec![
        ReportRow::at_most(t, "fixed_point_defect", diag.fixed_point_defect, tol.defect),
        ReportRow::at_most(t, "sweeps", diag.sweeps as f64, scenario.max_sweeps as f64),
        ReportRow::flag(t, "converged", diag.converged, true),
        ReportRow::info(t, "final_sweep_difference", last_r),
        ReportRow::flag(t, "r_nonincreasing", diag.r_nonincreasing(1e-10), true),
        ReportRow::flag(t, "majorant_domination", domination.holds, true),
        ReportRow::at_most(
            t,
            "majorant_worst_excess",
            domination.worst_excess,
            domination.slack,
        ),
        ReportRow::info(t, "majorant_at_horizon", maj.curve.last()),
        ReportRow::info(
            t,
            "solution_norm_at_horizon",
            norm(u.at(grid.steps()), &NormKind::Sup)?,
        ),
        ReportRow::at_most(t, "euler_frozen_forcing_gap", euler_gap, tol.euler_agreement),
        ReportRow::info(t, "forcing_norm_at_zero", f0),
    ];
    Ok(EbmRun {
        trajectory: u,
        diagnostics: diag,
        majorant: maj.curve,
        domination,
        euler_gap,
        forcing_at_zero: f0,
        rows,
    })
}

/// Gap curves and oracle majorants for each perturbation size.
#[derive(Debug, Clone)]
pub struct UniquenessResult {
    pub eps: Vec<f64>,
    pub gaps: Vec<ScalarCurve>,
    pub oracles: Vec<ScalarCurve>,
    pub rows: Vec<ReportRow>,
}

/// Perturbs `u0` by `eps` along the configured coordinate and compares the
/// running sup of the solution gap with `factor` times the numeric majorant.
pub fn uniqueness_experiment(
    scenario: &EbmScenario,
    eps_list: &[f64],
    factor: f64,
) -> Result<UniquenessResult> {
    scenario.validate()?;
    if eps_list.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(Error::InvalidParameter("perturbation sizes must be >= 0".into()));
    }
    let grid = scenario.grid()?;
    let u0 = scenario.initial_state()?;
    let picard = scenario.picard(false)?;
    let base = picard.iterate(&u0, &grid)?.into_converged()?.trajectory;
    let phi = PhiFunction::Constant(scenario.modulus_rate());
    let t = UNIQUENESS_TAG;
    let mut rows = Vec::new();
    let mut gaps = Vec::new();
    let mut oracles = Vec::new();
    for &eps in eps_list {
        let gap = if eps == 0.0 {
            ScalarCurve::zeros(grid)
        } else {
            let mut v = u0.clone().into_vec();
            v[scenario.direction] += eps;
            let other = picard
                .iterate(&StateVector::new(v)?, &grid)?
                .into_converged()?
                .trajectory;
            ScalarCurve::new(grid, base.difference(&other)?.running_sup())?
        };
        let oracle = uniqueness_majorant(&ThetaFunction::LogOsgood, &phi, eps, &grid)?;
        let worst = (0..grid.len())
            .map(|k| gap.at(k) - factor * oracle.at(k))
            .fold(f64::NEG_INFINITY, f64::max);
        let param = format!("eps={eps:e}");
        rows.push(ReportRow::at_most(
            t,
            format!("{param} worst_excess_over_oracle"),
            worst,
            1e-12,
        ));
        rows.push(ReportRow::info(t, format!("{param} gap_at_horizon"), gap.last()));
        rows.push(ReportRow::info(
            t,
            format!("{param} oracle_at_horizon"),
            oracle.last(),
        ));
        let closed = log_osgood_closed_form(eps, scenario.modulus_rate(), grid.horizon());
        rows.push(ReportRow::relative(
            t,
            format!("{param} oracle_vs_closed_form"),
            oracle.last(),
            closed,
            1e-3,
        ));
        // the exponent e^{+S0 t} candidate, diagnostic only
        rows.push(ReportRow::info(
            t,
            format!("{param} alternative_closed_form"),
            eps.powf((scenario.insolation * grid.horizon()).exp()),
        ));
        gaps.push(gap);
        oracles.push(oracle);
    }
    let mut order: Vec<usize> = (0..eps_list.len()).collect();
    order.sort_by(|&a, &b| eps_list[b].total_cmp(&eps_list[a]));
    for w in order.windows(2) {
        let (big, small) = (w[0], w[1]);
        if eps_list[big] == eps_list[small] {
            continue;
        }
        let monotone = (0..grid.len()).all(|k| gaps[small].at(k) < gaps[big].at(k) || gaps[big].at(k) == 0.0);
        rows.push(ReportRow::flag(
            t,
            format!("gap(eps={:e}) < gap(eps={:e})", eps_list[small], eps_list[big]),
            monotone,
            true,
        ));
    }
    Ok(UniquenessResult {
        eps: eps_list.to_vec(),
        gaps,
        oracles,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> EbmScenario {
        EbmScenario {
            d: 12,
            steps: 40,
            ..EbmScenario::default()
        }
    }

    #[test]
    fn profile_examples() {
        let s = EbmScenario::default();
        let u0 = s.initial_state().unwrap();
        assert_eq!(u0.dim(), 64);
        assert_eq!(u0[0], -1.0);
        assert_eq!(u0[63], -1.0);
        assert_eq!(norm(&u0, &NormKind::Sup).unwrap(), 1.0);
        assert_eq!(Profile::Affine { a: 1.0, b: 2.0 }.eval(-0.5), 0.0);
    }

    #[test]
    fn invalid_scenarios() {
        let bad = |f: fn(&mut EbmScenario)| {
            let mut s = EbmScenario::default();
            f(&mut s);
            s.validate().is_err()
        };
        assert!(bad(|s| s.delta = 0.5));
        assert!(bad(|s| s.insolation = -1.0));
        assert!(bad(|s| s.direction = 64));
        assert!(bad(|s| s.d = 1));
        assert!(bad(|s| s.beta_water = 0.1));
    }

    #[test]
    fn zero_insolation_gives_homogeneous_orbit() {
        let s = EbmScenario {
            insolation: 0.0,
            ..small()
        };
        let run = run_ebm(&s, EbmTolerances::default()).unwrap();
        let picard = s.picard(false).unwrap();
        let h = picard
            .homogeneous(&s.initial_state().unwrap(), &s.grid().unwrap())
            .unwrap();
        assert_eq!(run.trajectory.values(), &h[..]);
        assert_eq!(run.forcing_at_zero, 0.0);
        assert_eq!(run.euler_gap, 0.0);
    }

    #[test]
    fn warm_constant_state_drifts_at_water_rate() {
        let s = EbmScenario {
            d: 4,
            insolation: 2.0,
            profile: Profile::Affine { a: 0.5, b: 0.0 },
            diffusion: Diffusion::Zero,
            ..small()
        };
        let grid = s.grid().unwrap();
        let u0 = s.initial_state().unwrap();
        let picard = s.picard(false).unwrap();
        let first = picard
            .apply_g(&u0, &Trajectory::constant(grid, u0.clone(), NormKind::Sup))
            .unwrap();
        for (k, t) in grid.nodes().enumerate() {
            for c in 0..4 {
                assert!((first.at(k)[c] - (0.5 + t * 2.0 * 0.8)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn small_scenario_converges_and_is_dominated() {
        let run = run_ebm(&small(), EbmTolerances::default()).unwrap();
        assert!(run.diagnostics.converged);
        assert!(run.diagnostics.fixed_point_defect < 1e-6);
        assert!(run.diagnostics.r_nonincreasing(1e-10));
        assert!(run.domination.holds);
        assert!((run.forcing_at_zero - 0.3).abs() < 1e-15);
    }

    #[test]
    fn uniqueness_gap_is_zero_for_equal_data_and_dominated() {
        let res = uniqueness_experiment(&small(), &[0.0, 1e-2, 1e-3], 1.05).unwrap();
        assert!(res.gaps[0].values().iter().all(|&g| g == 0.0));
        assert!((res.gaps[1].at(0) - 1e-2).abs() < 1e-15);
        for r in &res.rows {
            if r.param.contains("worst_excess") || r.param.starts_with("gap(") {
                assert!(r.passed(), "{r:?}");
            }
        }
    }
}

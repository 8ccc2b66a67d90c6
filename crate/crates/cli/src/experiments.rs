//! One runner per scenario tag. Schema problems abort before any work;
//! solver failures become `error` rows and the run continues.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use accretive::accretive::{OperatorSpec, ResolventSolverConfig};
use accretive::banach::{NormKind, StateVector, TimeGrid};
use accretive::evolution::{Evolution, ForcingTerm};
use accretive::majorant::{
    combined_criterion_check, dini_check, gronwall_bound, horizon, nagumo_check, osgood_classify,
    power_solution, solve_scalar_ie, solve_via_psi, subadditivity_check, CombinedCriterionSpec, Gauge,
    Horizon, IeOutcome, OsgoodVerdict, PhiFunction, PsiTransform, ScalarSolver, ThetaFunction,
};
use accretive::picard::{
    bielecki_factor, Modulus, Perturbation, PerturbationKind, Picard, PicardConfig, ScalarMap, Validation,
};
use accretive::semigroup::{exponential_formula, SemigroupEvaluator};

use crate::config::{check_required, scenario_of, Config, Reader, RunSettings, ScenarioTag};
use crate::ebm::{run_ebm, uniqueness_experiment, Diffusion, EbmScenario, EbmTolerances, Profile};
use crate::error::CliError;
use crate::report::ReportRow;

/// Parses, validates and runs one config.
pub fn run_experiment(cfg: &Config, settings: &RunSettings) -> Result<Vec<ReportRow>, CliError> {
    let tag = scenario_of(cfg)?;
    check_required(cfg, tag)?;
    let mut r = cfg.reader();
    let plan = Plan::read(tag, &mut r, settings);
    r.finish()?;
    Ok(plan.execute())
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
enum Plan {
    Semigroup(SemigroupPlan),
    EulerDuhamel(EulerDuhamelPlan),
    Residual(ResidualPlan),
    Lipschitz(LipschitzPlan),
    Ebm(EbmScenario, EbmTolerances),
    Uniqueness(EbmScenario, Vec<f64>, f64),
    Majorant(MajorantPlan),
    Criteria(CriteriaPlan),
}

impl Plan {
    fn read(tag: ScenarioTag, r: &mut Reader<'_>, s: &RunSettings) -> Plan {
        let k = s.tol_scale;
        match tag {
            ScenarioTag::SemigroupConvergence => Plan::Semigroup(SemigroupPlan {
                a: r.f64("operator.a"),
                t: r.f64("point.t"),
                x: r.f64("point.x"),
                n_list: r.usize_list("grid.n_list"),
                final_tol: k * r.positive("tolerances.final_error"),
                abs_samples: r.usize("abs.samples"),
                abs_max_n: r.usize("abs.max_n"),
                abs_tol: k * r.positive("tolerances.abs"),
                seed: s.seed,
            }),
            ScenarioTag::EulerVsDuhamel => Plan::EulerDuhamel(EulerDuhamelPlan {
                a: r.f64("operator.a"),
                forcing: r.f64("forcing.value"),
                u0: r.f64("initial.value"),
                horizon: r.positive("grid.horizon"),
                n: r.usize("grid.n"),
                substeps: r.usize("grid.substeps"),
                n_fine: r.usize("grid.n_fine"),
                substeps_fine: r.usize("grid.substeps_fine"),
                semigroup_tol: r.positive("semigroup.tol"),
                discrepancy_tol: k * r.positive("tolerances.discrepancy"),
                closed_form_tol: k * r.positive("tolerances.closed_form"),
            }),
            ScenarioTag::DuhamelResidual => Plan::Residual(ResidualPlan {
                a: r.f64("operator.a"),
                forcing: r.f64("forcing.value"),
                u0: r.f64("initial.value"),
                horizon: r.positive("grid.horizon"),
                n_list: r.usize_list("grid.n_list"),
                variant_steps: r.usize("variants.steps"),
                telescoping_tol: k * r.positive("tolerances.telescoping"),
                ratio_lo: r.positive("tolerances.ratio_lo"),
                ratio_hi: r.positive("tolerances.ratio_hi"),
                seed: s.seed,
            }),
            ScenarioTag::PicardLipschitz => Plan::Lipschitz(LipschitzPlan {
                u0: r.f64("initial.value"),
                horizon: r.positive("grid.horizon"),
                n: r.usize("grid.n"),
                tol: r.positive("picard.tol"),
                max_sweeps: r.usize("picard.max_sweeps"),
                p: r.positive("bielecki.p"),
                gamma: r.positive("bielecki.gamma"),
                slack: k * r.positive("tolerances.contraction_slack"),
                closed_form_tol: k * r.positive("tolerances.closed_form"),
                seed: s.seed,
            }),
            ScenarioTag::PicardEbm => {
                let sc = read_ebm(r, s);
                let tol = EbmTolerances {
                    defect: k * r.positive("tolerances.defect"),
                    euler_agreement: k * r.positive("tolerances.euler_agreement"),
                };
                Plan::Ebm(sc, tol)
            }
            ScenarioTag::UniquenessGap => {
                let sc = read_ebm(r, s);
                r.positive("tolerances.defect");
                let eps = r.f64_list("uniqueness.eps_list");
                if eps.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
                    r.reject("uniqueness.eps_list entries must be >= 0");
                }
                let factor = 1.0 + k * (r.positive("tolerances.majorant_factor") - 1.0);
                Plan::Uniqueness(sc, eps, factor)
            }
            ScenarioTag::MajorantTable => Plan::Majorant(MajorantPlan {
                u0: r.positive("scalar.u0"),
                t: r.positive("scalar.t"),
                power_t: r.positive("scalar.power_t"),
                n: r.usize("grid.n"),
                gronwall_tol: k * r.positive("tolerances.gronwall"),
                power_tol: k * r.positive("tolerances.power"),
                horizon_rel: k * r.positive("tolerances.horizon_rel"),
                roundtrip_tol: k * r.positive("tolerances.psi_roundtrip"),
                psi_vs_ie_tol: k * r.positive("tolerances.psi_vs_ie"),
            }),
            ScenarioTag::CriterionMatrix => Plan::Criteria(CriteriaPlan {
                samples: r.usize("criteria.subadditivity_samples"),
                r_star: r.positive("criteria.nagumo_r_star"),
                seed: s.seed,
            }),
        }
    }

    fn execute(&self) -> Vec<ReportRow> {
        match self {
            Plan::Semigroup(p) => p.run(),
            Plan::EulerDuhamel(p) => p.run(),
            Plan::Residual(p) => p.run(),
            Plan::Lipschitz(p) => p.run(),
            Plan::Ebm(sc, tol) => match run_ebm(sc, *tol) {
                Ok(run) => run.rows,
                Err(e) => vec![ReportRow::errored(ScenarioTag::PicardEbm.as_str(), "run", e)],
            },
            Plan::Uniqueness(sc, eps, factor) => match uniqueness_experiment(sc, eps, *factor) {
                Ok(res) => res.rows,
                Err(e) => vec![ReportRow::errored(ScenarioTag::UniquenessGap.as_str(), "run", e)],
            },
            Plan::Majorant(p) => p.run(),
            Plan::Criteria(p) => p.run(),
        }
    }
}

fn read_ebm(r: &mut Reader<'_>, s: &RunSettings) -> EbmScenario {
    let profile_tag = r.string("ebm.profile");
    let (a, b) = (r.f64("ebm.profile_a"), r.f64("ebm.profile_b"));
    let profile = match profile_tag.as_str() {
        "bump" => Profile::Bump { a, b },
        "affine" => Profile::Affine { a, b },
        other => {
            if !other.is_empty() {
                r.reject(format!(
                    "ebm.profile must be \"bump\" or \"affine\", got {other:?}"
                ));
            }
            Profile::Bump { a, b }
        }
    };
    let diffusion = match r.opt_string("ebm.operator").as_deref() {
        None | Some("p_laplace") => Diffusion::PLaplace,
        Some("zero") => Diffusion::Zero,
        Some(other) => {
            r.reject(format!(
                "ebm.operator must be \"p_laplace\" or \"zero\", got {other:?}"
            ));
            Diffusion::PLaplace
        }
    };
    let sc = EbmScenario {
        d: r.usize("ebm.d"),
        p: r.positive("ebm.p"),
        insolation: r.f64("ebm.insolation"),
        beta_ice: r.positive("ebm.beta_ice"),
        beta_water: r.positive("ebm.beta_water"),
        delta: r.positive("ebm.delta"),
        profile,
        horizon: r.positive("grid.horizon"),
        steps: r.usize("grid.n"),
        picard_tol: r.positive("picard.tol"),
        max_sweeps: r.usize("picard.max_sweeps"),
        direction: r.opt_usize("uniqueness.direction").unwrap_or(0),
        diffusion,
        seed: s.seed,
    };
    if sc.d > 0 && sc.steps > 0 && sc.p.is_finite() && sc.picard_tol.is_finite() {
        if let Err(e) = sc.validate() {
            r.reject(format!("EBM scenario: {e}"));
        }
    }
    sc
}

fn unwrap_rows(tag: ScenarioTag, param: &str, res: accretive::Result<Vec<ReportRow>>) -> Vec<ReportRow> {
    res.unwrap_or_else(|e| vec![ReportRow::errored(tag.as_str(), param, e)])
}

#[derive(Debug, Clone)]
struct SemigroupPlan {
    a: f64,
    t: f64,
    x: f64,
    n_list: Vec<usize>,
    final_tol: f64,
    abs_samples: usize,
    abs_max_n: usize,
    abs_tol: f64,
    seed: u64,
}

impl SemigroupPlan {
    fn run(&self) -> Vec<ReportRow> {
        let tag = ScenarioTag::SemigroupConvergence;
        let mut rows = unwrap_rows(tag, "linear", self.linear());
        rows.extend(unwrap_rows(tag, "shrinkage", self.shrinkage()));
        rows
    }

    fn linear(&self) -> accretive::Result<Vec<ReportRow>> {
        let tag = ScenarioTag::SemigroupConvergence.as_str();
        let spec = OperatorSpec::linear_scalar(self.a)?;
        let exact = self.x * (-self.a * self.t).exp();
        let cfg = ResolventSolverConfig::default();
        let mut rows = Vec::new();
        let mut errors = Vec::new();
        for &n in &self.n_list {
            let v = exponential_formula(&spec, self.t, &StateVector::scalar(self.x), n, &cfg)?[0];
            errors.push((v - exact).abs());
            rows.push(ReportRow::info(tag, format!("n={n} value"), v));
            rows.push(ReportRow::info(
                tag,
                format!("n={n} abs_error"),
                (v - exact).abs(),
            ));
        }
        let monotone = errors.windows(2).all(|w| w[1] < w[0]);
        rows.push(ReportRow::flag(tag, "error_strictly_decreasing", monotone, true));
        if let Some(&last) = errors.last() {
            rows.push(ReportRow::at_most(tag, "final_abs_error", last, self.final_tol));
        }
        Ok(rows)
    }

    fn shrinkage(&self) -> accretive::Result<Vec<ReportRow>> {
        let tag = ScenarioTag::SemigroupConvergence.as_str();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let cfg = ResolventSolverConfig::default();
        let mut worst: f64 = 0.0;
        for _ in 0..self.abs_samples {
            let t = rng.random_range(0.0..2.0);
            let x = rng.random_range(-3.0..3.0);
            let n = rng.random_range(1..=self.abs_max_n.max(1));
            let v = exponential_formula(
                &OperatorSpec::AbsSubdifferential,
                t,
                &StateVector::scalar(x),
                n,
                &cfg,
            )?[0];
            let exact = x.signum() * (x.abs() - t).max(0.0);
            worst = worst.max((v - exact).abs());
        }
        Ok(vec![ReportRow::at_most(
            tag,
            "shrinkage_max_abs_error",
            worst,
            self.abs_tol,
        )])
    }
}

#[derive(Debug, Clone)]
struct EulerDuhamelPlan {
    a: f64,
    forcing: f64,
    u0: f64,
    horizon: f64,
    n: usize,
    substeps: usize,
    n_fine: usize,
    substeps_fine: usize,
    semigroup_tol: f64,
    discrepancy_tol: f64,
    closed_form_tol: f64,
}

impl EulerDuhamelPlan {
    fn exact(&self, t: f64) -> f64 {
        let eq = self.forcing / self.a;
        eq + (self.u0 - eq) * (-self.a * t).exp()
    }

    fn run(&self) -> Vec<ReportRow> {
        unwrap_rows(ScenarioTag::EulerVsDuhamel, "run", self.rows())
    }

    fn rows(&self) -> accretive::Result<Vec<ReportRow>> {
        let tag = ScenarioTag::EulerVsDuhamel.as_str();
        let spec = OperatorSpec::linear_scalar(self.a)?;
        let evo = Evolution::new(spec.clone());
        let sg = SemigroupEvaluator::new(spec, self.semigroup_tol)?;
        let f = ForcingTerm::Constant(StateVector::scalar(self.forcing));
        let u0 = StateVector::scalar(self.u0);
        let grid = TimeGrid::new(self.horizon, self.n)?;
        let rep = evo.compare_euler_duhamel(&sg, &u0, &f, &grid, self.substeps)?;
        let mut rows = vec![ReportRow::at_most(
            tag,
            format!("n={} m={} sup_discrepancy", self.n, self.substeps),
            rep.sup_discrepancy,
            self.discrepancy_tol,
        )];
        if let Some(order) = rep.measured_order {
            rows.push(ReportRow::info(tag, "measured_order", order));
        }
        let fine = TimeGrid::new(self.horizon, self.n_fine)?;
        let euler = evo.implicit_euler(&u0, &f, &fine)?;
        let euler_err = fine
            .nodes()
            .enumerate()
            .map(|(k, t)| (euler.at(k)[0] - self.exact(t)).abs())
            .fold(0.0, f64::max);
        rows.push(ReportRow::at_most(
            tag,
            format!("n={} euler_vs_closed_form", self.n_fine),
            euler_err,
            self.closed_form_tol,
        ));
        let mut mild_err: f64 = 0.0;
        for j in 1..=10 {
            let t = self.horizon * j as f64 / 10.0;
            let v = evo.mild_duhamel(&sg, &u0, &f, t, self.substeps_fine)?;
            mild_err = mild_err.max((v.value[0] - self.exact(t)).abs());
        }
        rows.push(ReportRow::at_most(
            tag,
            format!("m={} mild_vs_closed_form", self.substeps_fine),
            mild_err,
            self.closed_form_tol,
        ));
        Ok(rows)
    }
}

#[derive(Debug, Clone)]
struct ResidualPlan {
    a: f64,
    forcing: f64,
    u0: f64,
    horizon: f64,
    n_list: Vec<usize>,
    variant_steps: usize,
    telescoping_tol: f64,
    ratio_lo: f64,
    ratio_hi: f64,
    seed: u64,
}

/// The operator variants exercised by the telescoping check.
pub fn bundled_variants() -> accretive::Result<Vec<OperatorSpec>> {
    Ok(vec![
        OperatorSpec::linear_scalar(1.0)?,
        OperatorSpec::linear_matrix(vec![vec![1.0, 0.5], vec![-0.5, 2.0]])?,
        OperatorSpec::AbsSubdifferential,
        OperatorSpec::weighted_p_laplace(3.0, 8)?,
        OperatorSpec::Zero,
    ])
}

impl ResidualPlan {
    fn run(&self) -> Vec<ReportRow> {
        let tag = ScenarioTag::DuhamelResidual;
        let mut rows = unwrap_rows(tag, "residual_order", self.order());
        rows.extend(unwrap_rows(tag, "variants", self.variants()));
        rows
    }

    fn order(&self) -> accretive::Result<Vec<ReportRow>> {
        let tag = ScenarioTag::DuhamelResidual.as_str();
        let evo = Evolution::new(OperatorSpec::linear_scalar(self.a)?);
        let f = ForcingTerm::Constant(StateVector::scalar(self.forcing));
        let u0 = StateVector::scalar(self.u0);
        let mut rows = Vec::new();
        let mut maxima = Vec::new();
        for &n in &self.n_list {
            let dec = evo.discrete_duhamel_decompose(&u0, &f, &TimeGrid::new(self.horizon, n)?)?;
            maxima.push(dec.max_residual());
            rows.push(ReportRow::info(
                tag,
                format!("n={n} max_residual"),
                dec.max_residual(),
            ));
            rows.push(ReportRow::at_most(
                tag,
                format!("n={n} telescoping_defect"),
                dec.telescoping_defect(),
                self.telescoping_tol,
            ));
        }
        for (w, n) in maxima.windows(2).zip(self.n_list.windows(2)) {
            rows.push(ReportRow::within(
                tag,
                format!("residual_ratio n={}->{}", n[0], n[1]),
                w[1] / w[0],
                self.ratio_lo,
                self.ratio_hi,
            ));
        }
        Ok(rows)
    }

    fn variants(&self) -> accretive::Result<Vec<ReportRow>> {
        let tag = ScenarioTag::DuhamelResidual.as_str();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let grid = TimeGrid::new(self.horizon, self.variant_steps)?;
        let mut rows = Vec::new();
        for spec in bundled_variants()? {
            let d = spec.dim().unwrap_or(3);
            let mut random =
                |scale: f64| StateVector::new((0..d).map(|_| scale * rng.random_range(-1.0..1.0)).collect());
            let u0 = random(1.0)?;
            let f = ForcingTerm::Constant(random(0.5)?);
            let evo = Evolution::new(spec.clone());
            let dec = evo.discrete_duhamel_decompose(&u0, &f, &grid)?;
            let name = spec.name();
            rows.push(ReportRow::at_most(
                tag,
                format!("{name} telescoping_defect"),
                dec.telescoping_defect(),
                self.telescoping_tol,
            ));
            rows.push(ReportRow::at_most(
                tag,
                format!("{name} local_error_excess"),
                dec.local_error_excess(),
                self.telescoping_tol,
            ));
        }
        Ok(rows)
    }
}

#[derive(Debug, Clone)]
struct LipschitzPlan {
    u0: f64,
    horizon: f64,
    n: usize,
    tol: f64,
    max_sweeps: usize,
    p: f64,
    gamma: f64,
    slack: f64,
    closed_form_tol: f64,
    seed: u64,
}

impl LipschitzPlan {
    fn run(&self) -> Vec<ReportRow> {
        unwrap_rows(ScenarioTag::PicardLipschitz, "run", self.rows())
    }

    fn rows(&self) -> accretive::Result<Vec<ReportRow>> {
        let tag = ScenarioTag::PicardLipschitz.as_str();
        let grid = TimeGrid::new(self.horizon, self.n)?;
        let phi = PhiFunction::constant(1.0)?;
        let f = Perturbation::new(
            PerturbationKind::PointwiseScalar(ScalarMap::identity()),
            Modulus::separable(phi.clone(), ThetaFunction::Identity),
            Validation {
                grid: &grid,
                dim: 1,
                norm: &NormKind::L2,
                pairs_per_node: 4,
                seed: self.seed,
            },
        )?;
        let picard = Picard::new(OperatorSpec::Zero, f, NormKind::L2).with_config(PicardConfig {
            tolerance: self.tol,
            max_iterations: self.max_sweeps,
            keep_iterates: true,
            ..PicardConfig::default()
        });
        let out = picard.iterate(&StateVector::scalar(self.u0), &grid)?;
        let b = bielecki_factor(&phi, self.p, self.gamma, self.horizon)?;
        let ratios = out.diagnostics.bielecki_ratios(self.gamma)?;
        let worst = ratios.iter().copied().fold(0.0, f64::max);
        let exact = self.u0 * self.horizon.exp();
        let last = out.trajectory.at(grid.steps())[0];
        Ok(vec![
            ReportRow::info(tag, "bielecki_factor", b.factor),
            ReportRow::flag(tag, "gamma_above_threshold", b.above_threshold, true),
            ReportRow::at_most(tag, "max_bielecki_ratio", worst, b.factor + self.slack),
            ReportRow::flag(tag, "converged", out.diagnostics.converged, true),
            ReportRow::info(tag, "sweeps", out.diagnostics.sweeps as f64),
            ReportRow::at_most(
                tag,
                "fixed_point_defect",
                out.diagnostics.fixed_point_defect,
                2.0 * self.tol,
            ),
            ReportRow::absolute(
                tag,
                format!("u(T) n={}", self.n),
                last,
                exact,
                self.closed_form_tol,
            ),
            ReportRow::flag(
                tag,
                "r_nonincreasing",
                out.diagnostics.r_nonincreasing(1e-10),
                true,
            ),
        ])
    }
}

#[derive(Debug, Clone)]
struct MajorantPlan {
    u0: f64,
    t: f64,
    power_t: f64,
    n: usize,
    gronwall_tol: f64,
    power_tol: f64,
    horizon_rel: f64,
    roundtrip_tol: f64,
    psi_vs_ie_tol: f64,
}

impl MajorantPlan {
    fn run(&self) -> Vec<ReportRow> {
        unwrap_rows(ScenarioTag::MajorantTable, "run", self.rows())
    }

    fn rows(&self) -> accretive::Result<Vec<ReportRow>> {
        let tag = ScenarioTag::MajorantTable.as_str();
        let one = PhiFunction::constant(1.0)?;
        let (u0, t) = (self.u0, self.t);
        let mut rows = Vec::new();

        let g_exact = u0 * t.exp();
        rows.push(ReportRow::absolute(
            tag,
            "gronwall_bound",
            gronwall_bound(&one, u0, t)?,
            g_exact,
            self.gronwall_tol,
        ));
        let ie = solve_scalar_ie(&one, &ThetaFunction::Identity, u0, &TimeGrid::new(t, self.n)?)?;
        rows.push(ReportRow::absolute(
            tag,
            "gronwall_numeric",
            ie.curve.last(),
            g_exact,
            self.gronwall_tol,
        ));

        let pt = self.power_t;
        let p_exact = 1.0 / (1.0 / u0 - pt);
        rows.push(ReportRow::absolute(
            tag,
            "power2_closed_form",
            power_solution(2.0, &one, u0, pt)?,
            p_exact,
            self.power_tol,
        ));
        let ie = solve_scalar_ie(&one, &ThetaFunction::Power(2.0), u0, &TimeGrid::new(pt, self.n)?)?;
        rows.push(ReportRow::absolute(
            tag,
            "power2_numeric",
            ie.curve.last(),
            p_exact,
            self.power_tol,
        ));

        let h_exact = 1.0 / u0;
        match horizon(&ThetaFunction::Power(2.0), &one, u0)? {
            Horizon::Finite(h) => rows.push(ReportRow::relative(
                tag,
                "horizon_formula",
                h,
                h_exact,
                self.horizon_rel,
            )),
            Horizon::Infinite => rows.push(ReportRow::flag(tag, "horizon_formula_finite", false, true)),
        }
        let long = TimeGrid::new(2.0 * h_exact, self.n)?;
        match ScalarSolver::default().solve_outcome(&one, &ThetaFunction::Power(2.0), u0, &long)? {
            IeOutcome::BlowUp { horizon: h, .. } => rows.push(ReportRow::relative(
                tag,
                "horizon_numeric",
                h,
                h_exact,
                self.horizon_rel,
            )),
            IeOutcome::Solved(_) => rows.push(ReportRow::flag(tag, "horizon_numeric_detected", false, true)),
        }

        let rate = 2.0;
        let phi = PhiFunction::constant(rate)?;
        let eps = 1e-3;
        let tf = PsiTransform::new(ThetaFunction::LogOsgood, eps)?;
        let mut worst: f64 = 0.0;
        for i in 0..=40 {
            let u = eps * 10f64.powf(0.1 * i as f64);
            let back = tf.psi_inverse(tf.psi(u)?)?;
            worst = worst.max((back - u).abs() / u);
        }
        rows.push(ReportRow::at_most(
            tag,
            "psi_round_trip_rel",
            worst,
            self.roundtrip_tol,
        ));
        let grid = TimeGrid::new(t, self.n)?;
        let ie = solve_scalar_ie(&phi, &ThetaFunction::LogOsgood, eps, &grid)?;
        let mut gap: f64 = 0.0;
        for (k, tk) in grid.nodes().enumerate() {
            gap = gap.max((solve_via_psi(&tf, &phi, tk)? - ie.curve.at(k)).abs());
        }
        rows.push(ReportRow::at_most(tag, "psi_vs_numeric", gap, self.psi_vs_ie_tol));
        Ok(rows)
    }
}

#[derive(Debug, Clone)]
struct CriteriaPlan {
    samples: usize,
    r_star: f64,
    seed: u64,
}

/// Anchored expectations: (kernel, Osgood diverges, Nagumo, Dini, subadditive).
pub fn classification_expectations() -> Vec<(ThetaFunction, bool, bool, bool, bool)> {
    vec![
        (ThetaFunction::Identity, true, true, true, true),
        (ThetaFunction::Power(0.5), false, false, true, true),
        (ThetaFunction::Power(2.0), true, true, true, false),
        (ThetaFunction::LogOsgood, true, false, true, true),
    ]
}

/// The three bundled combined-criterion examples with their expected verdicts.
pub fn combined_examples() -> Vec<(&'static str, CombinedCriterionSpec, bool)> {
    let base = CombinedCriterionSpec {
        weight_osgood: 1.0,
        weight_nagumo: 0.0,
        theta_osgood: ThetaFunction::Identity,
        theta_nagumo: ThetaFunction::Identity,
        time_factor: PhiFunction::Constant(1.0),
        gauge: Gauge::Linear(1.0),
        horizon: 1.0,
        r_star: 1.0,
    };
    vec![
        ("pure_osgood_edge", base.clone(), true),
        (
            "pure_nagumo_rejected",
            CombinedCriterionSpec {
                weight_osgood: 0.0,
                weight_nagumo: 1.0,
                ..base.clone()
            },
            false,
        ),
        (
            "mixed_log_osgood",
            CombinedCriterionSpec {
                weight_nagumo: 0.5,
                theta_osgood: ThetaFunction::LogOsgood,
                ..base
            },
            true,
        ),
    ]
}

impl CriteriaPlan {
    fn run(&self) -> Vec<ReportRow> {
        let tag = ScenarioTag::CriterionMatrix.as_str();
        let mut rows = Vec::new();
        for (theta, osgood, nagumo, dini, sub) in classification_expectations() {
            let name = theta.name();
            let verdict = osgood_classify(&theta).verdict;
            rows.push(ReportRow::flag(
                tag,
                format!("{name} osgood"),
                verdict == OsgoodVerdict::Diverges,
                osgood,
            ));
            if verdict == OsgoodVerdict::Inconclusive {
                rows.push(ReportRow::flag(
                    tag,
                    format!("{name} osgood_conclusive"),
                    false,
                    true,
                ));
            }
            rows.push(ReportRow::flag(
                tag,
                format!("{name} nagumo"),
                nagumo_check(&theta, self.r_star).holds,
                nagumo,
            ));
            rows.push(ReportRow::flag(
                tag,
                format!("{name} dini"),
                dini_check(&theta).holds,
                dini,
            ));
            rows.push(ReportRow::flag(
                tag,
                format!("{name} subadditive"),
                subadditivity_check(&theta, self.samples, self.seed).holds,
                sub,
            ));
        }
        for (name, spec, expected) in combined_examples() {
            let rep = combined_criterion_check(&spec);
            rows.push(ReportRow::flag(
                tag,
                format!("combined {name}"),
                rep.holds(),
                expected,
            ));
        }
        rows
    }
}

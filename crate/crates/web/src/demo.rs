//! Plain Rust entry points behind the browser bindings.

use accretive::accretive::{OperatorSpec, ResolventSolverConfig, WeightedPLaplace};
use accretive::banach::{StateVector, TimeGrid};
use accretive::majorant::{horizon, CoAlbedo, Horizon, IeOutcome, PhiFunction, ScalarSolver, ThetaFunction};
use accretive::semigroup::exponential_formula;
use accretive::{Error, Result};

/// Upper bound on grid sizes accepted from the page.
pub const MAX_SAMPLES: usize = 20_000;

fn check_count(what: &str, n: usize, min: usize) -> Result<()> {
    if n < min || n > MAX_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "{what} must lie in [{min}, {MAX_SAMPLES}], got {n}"
        )));
    }
    Ok(())
}

/// `samples` uniformly spaced points of `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>> {
    check_count("samples", samples, 2)?;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::InvalidParameter(format!("need lo < hi, got [{lo}, {hi}]")));
    }
    let h = (hi - lo) / (samples - 1) as f64;
    Ok((0..samples).map(|i| lo + i as f64 * h).collect())
}

/// Co-albedo values on `linspace(lo, hi, samples)`.
pub fn coalbedo_profile(
    beta_ice: f64,
    beta_water: f64,
    delta: f64,
    lo: f64,
    hi: f64,
    samples: usize,
) -> Result<Vec<f64>> {
    let b = CoAlbedo::new(beta_ice, beta_water, delta, 1.0)?;
    Ok(linspace(lo, hi, samples)?
        .into_iter()
        .map(|u| b.eval(u))
        .collect())
}

/// The log-Osgood modulus constant of the profile.
pub fn coalbedo_constant(beta_ice: f64, beta_water: f64, delta: f64) -> Result<f64> {
    Ok(CoAlbedo::new(beta_ice, beta_water, delta, 1.0)?.constant())
}

/// `identity`, `log` (`U ln(1/U)`) or `power` with the given exponent.
pub fn theta_from_name(name: &str, exponent: f64) -> Result<ThetaFunction> {
    match name {
        "identity" => Ok(ThetaFunction::Identity),
        "log" => Ok(ThetaFunction::LogOsgood),
        "power" => ThetaFunction::power(exponent),
        other => Err(Error::InvalidParameter(format!("unknown theta {other:?}"))),
    }
}

/// Solution of `U' = rate theta(U)`, `U(0) = u0`, at the `steps + 1` nodes
/// of `[0, t_end]`. Stops early at blow-up; the last entry is then the last
/// accepted node.
pub fn majorant_curve(
    theta: &ThetaFunction,
    rate: f64,
    u0: f64,
    t_end: f64,
    steps: usize,
) -> Result<Vec<f64>> {
    check_count("steps", steps, 1)?;
    let grid = TimeGrid::new(t_end, steps)?;
    let phi = PhiFunction::constant(rate)?;
    let solver = ScalarSolver {
        max_value: 1e8,
        ..ScalarSolver::default()
    };
    Ok(match solver.solve_outcome(&phi, theta, u0, &grid)? {
        IeOutcome::Solved(s) => s.curve.values().to_vec(),
        IeOutcome::BlowUp { values, .. } => values,
    })
}

/// Blow-up time of the majorant, `inf` when it exists for all time.
pub fn blowup_time(theta: &ThetaFunction, rate: f64, u0: f64) -> Result<f64> {
    Ok(match horizon(theta, &PhiFunction::constant(rate)?, u0)? {
        Horizon::Finite(t) => t,
        Horizon::Infinite => f64::INFINITY,
    })
}

/// `-1 + amplitude (1 - x^2)` on the p-Laplacian nodes.
pub fn bump(dim: usize, amplitude: f64) -> Result<StateVector> {
    check_count("dim", dim, 2)?;
    let op = WeightedPLaplace::new(2.0, dim)?;
    StateVector::new(
        op.nodes()
            .iter()
            .map(|x| -1.0 + amplitude * (1.0 - x * x))
            .collect(),
    )
}

/// `S(t)` applied to the bump via `n` resolvent steps of the weighted p-Laplacian.
pub fn p_laplace_flow(p: f64, dim: usize, amplitude: f64, t: f64, n: usize) -> Result<Vec<f64>> {
    check_count("n", n, 1)?;
    let spec = OperatorSpec::weighted_p_laplace(p, dim)?;
    let x = bump(dim, amplitude)?;
    Ok(exponential_formula(&spec, t, &x, n, &ResolventSolverConfig::default())?.into_vec())
}

//! Piecewise co-albedo profile with a logarithmic transition.

use std::f64::consts::E;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PhiFunction, ThetaFunction};
use crate::error::{Error, Result};

/// `beta(U) = beta_i` for `U < 0`, `beta_w` for `U > delta`, and
/// `beta_i + (beta_w - beta_i) theta(U) / (delta |ln delta|)` in between,
/// with `theta(U) = U ln(1/U)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoAlbedo {
    pub beta_ice: f64,
    pub beta_water: f64,
    pub delta: f64,
    pub insolation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulusCheck {
    pub holds: bool,
    /// Pairs per regime: both < 0, across 0, both in `[0, delta]`, across delta, both > delta.
    pub pairs_per_regime: [usize; 5],
    /// Largest `|beta(U) - beta(V)| - C theta(|U - V|)` seen.
    pub worst_excess: f64,
}

impl CoAlbedo {
    pub fn new(beta_ice: f64, beta_water: f64, delta: f64, insolation: f64) -> Result<Self> {
        if !(beta_ice > 0.0 && beta_water > beta_ice && beta_water.is_finite()) {
            return Err(Error::invalid(format!(
                "need beta_water > beta_ice > 0, got {beta_water} and {beta_ice}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0 / E) {
            return Err(Error::invalid(format!("delta must lie in (0, 1/e), got {delta}")));
        }
        if !(insolation.is_finite() && insolation > 0.0) {
            return Err(Error::invalid(format!(
                "insolation must be > 0, got {insolation}"
            )));
        }
        Ok(CoAlbedo {
            beta_ice,
            beta_water,
            delta,
            insolation,
        })
    }

    /// `C = (beta_w - beta_i) / |delta ln delta|`.
    pub fn constant(&self) -> f64 {
        (self.beta_water - self.beta_ice) / (self.delta * self.delta.ln()).abs()
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u < 0.0 {
            self.beta_ice
        } else if u > self.delta {
            self.beta_water
        } else {
            self.beta_ice + self.constant() * ThetaFunction::LogOsgood.eval(u)
        }
    }

    /// The forcing `F(u) = S0 beta(u)`.
    pub fn forcing(&self, u: f64) -> f64 {
        self.insolation * self.eval(u)
    }

    /// Time factor of the modulus `K(U) = S0 C theta(U)`.
    pub fn modulus_phi(&self) -> PhiFunction {
        PhiFunction::Constant(self.insolation * self.constant())
    }

    /// Samples `samples` pairs in each of the five regimes and tests
    /// `|beta(U) - beta(V)| <= C theta(|U - V|) + 1e-12`.
    pub fn modulus_check(&self, samples: usize, seed: u64) -> ModulusCheck {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = self.delta;
        let c = self.constant();
        let theta = ThetaFunction::LogOsgood;
        let mut worst = f64::NEG_INFINITY;
        let mut counts = [0usize; 5];
        for (regime, count) in counts.iter_mut().enumerate() {
            for _ in 0..samples {
                let (u, v) = match regime {
                    0 => (rng.random_range(-2.0..0.0), rng.random_range(-2.0..0.0)),
                    1 => (rng.random_range(-1.0..0.0), rng.random_range(0.0..=d)),
                    2 => (rng.random_range(0.0..=d), rng.random_range(0.0..=d)),
                    3 => (rng.random_range(0.0..=d), rng.random_range(d..d + 1.0)),
                    _ => (rng.random_range(d..2.0), rng.random_range(d..2.0)),
                };
                let lhs = (self.eval(u) - self.eval(v)).abs();
                worst = worst.max(lhs - c * theta.eval((u - v).abs()));
                *count += 1;
            }
        }
        ModulusCheck {
            holds: worst <= 1e-12,
            pairs_per_regime: counts,
            worst_excess: worst,
        }
    }
}

/// Exact solution of `U' = c theta(U)`, `U(0) = eps` for the log kernel:
/// `eps^{exp(-c t)}` until `U` reaches `1/e`, then linear with slope `c/e`.
pub fn log_osgood_closed_form(eps: f64, c: f64, t: f64) -> f64 {
    if eps <= 0.0 {
        return 0.0;
    }
    if eps >= 1.0 / E {
        return eps + c * t / E;
    }
    let t_switch = if c > 0.0 {
        (-eps.ln()).ln() / c
    } else {
        f64::INFINITY
    };
    if t <= t_switch {
        eps.powf((-c * t).exp())
    } else {
        1.0 / E + c * (t - t_switch) / E
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference() -> CoAlbedo {
        CoAlbedo::new(0.3, 0.8, 0.1, 1.0).unwrap()
    }

    #[test]
    fn profile_examples() {
        let b = reference();
        assert_eq!(b.eval(-5.0), 0.3);
        assert_relative_eq!(b.eval(0.1), 0.8, max_relative = 1e-12);
        // 0.3 + 0.5 * (0.05 ln 0.05) / (0.1 ln 0.1)
        let hand = 0.3 + 0.5 * (0.05 * 0.05f64.ln()) / (0.1 * 0.1f64.ln());
        assert_relative_eq!(b.eval(0.05), hand, max_relative = 1e-14);
        assert!((b.eval(0.05) - 0.62526).abs() < 1e-5);
        assert_relative_eq!(b.constant(), 0.5 / (0.1 * 10f64.ln()), max_relative = 1e-14);
    }

    #[test]
    fn profile_is_continuous_and_monotone() {
        let b = reference();
        assert!((b.eval(1e-300) - b.eval(-1e-300)).abs() <= 1e-12);
        assert!((b.eval(0.1 + 1e-15) - b.eval(0.1)).abs() <= 1e-12);
        let vals: Vec<f64> = (0..=1000).map(|i| b.eval(i as f64 * 1e-4)).collect();
        assert!(vals.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn invalid_parameters() {
        assert!(CoAlbedo::new(0.3, 0.8, 0.5, 1.0).is_err());
        assert!(CoAlbedo::new(0.8, 0.3, 0.1, 1.0).is_err());
        assert!(CoAlbedo::new(0.3, 0.8, 0.1, 0.0).is_err());
    }

    #[test]
    fn modulus_holds_in_every_regime() {
        let rep = reference().modulus_check(400, 2);
        assert!(rep.holds, "excess {}", rep.worst_excess);
        assert_eq!(rep.pairs_per_regime, [400; 5]);
        let steep = CoAlbedo::new(0.1, 0.9, 0.01, 3.0).unwrap();
        assert!(steep.modulus_check(400, 3).holds);
    }

    #[test]
    fn closed_form_branches() {
        let c = 2.0;
        let eps: f64 = 1e-4;
        let t_switch = (-eps.ln()).ln() / c;
        let left = log_osgood_closed_form(eps, c, t_switch);
        assert_relative_eq!(left, 1.0 / E, max_relative = 1e-12);
        assert_relative_eq!(
            log_osgood_closed_form(eps, c, t_switch + 1.0),
            1.0 / E + c / E,
            max_relative = 1e-12
        );
        assert_eq!(log_osgood_closed_form(0.0, c, 1.0), 0.0);
    }
}

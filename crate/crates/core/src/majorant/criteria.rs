//! Numeric uniqueness-criterion classifiers for a kernel `theta`.

use std::f64::consts::E;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::quad::integrate;
use super::{PhiFunction, ThetaFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OsgoodVerdict {
    Diverges,
    Converges,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OsgoodReport {
    pub verdict: OsgoodVerdict,
    /// `(eps, I(eps))` for `eps = 10^-k`, `k = 2..=12`.
    pub witness: Vec<(f64, f64)>,
    /// `k * (I(10^-k) - I(10^-(k-1)))` for `k = 12..=60`.
    pub harmonic_tail: Vec<f64>,
}

fn osgood_cap(theta: &ThetaFunction) -> f64 {
    let cap = match theta {
        ThetaFunction::CustomTable { u, .. } => *u.last().expect("non-empty"),
        _ => f64::INFINITY,
    };
    (1.0 / E).min(cap)
}

/// `int_a^b ds/theta(s)` computed in `x = -ln s`.
fn inverse_integral(theta: &ThetaFunction, a: f64, b: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let g = |x: f64| {
        let s = (-x).exp();
        s / theta.eval(s)
    };
    let (xa, xb) = (-b.ln(), -a.ln());
    let rough = (xb - xa) * 0.5 * (g(xa) + g(xb));
    integrate(&g, xa, xb, 1e-13 * rough.abs().max(1e-300), 4)
}

/// Decides `int_{0+} ds/theta(s) = inf` from decade increments of
/// `I(eps) = int_eps^c ds/theta`, `c = min(1/e, table cap)`.
///
/// Diverges if the last five decade increments up to `1e-12` are all >= 0.5,
/// or if the increments decay no faster than the harmonic series
/// (`k * d_k` over `k = 12..=60` never drops below 0.9 of its value at 12).
/// Converges if `I(1e-12) - I(1e-7) <= 1e-3`.
pub fn osgood_classify(theta: &ThetaFunction) -> OsgoodReport {
    let c = osgood_cap(theta);
    let mut witness = Vec::with_capacity(11);
    let mut acc = inverse_integral(theta, 1e-2, c);
    witness.push((1e-2, acc));
    for k in 3..=12 {
        let eps = 10f64.powi(-k);
        acc += inverse_integral(theta, eps, eps * 10.0);
        witness.push((eps, acc));
    }
    let increments: Vec<f64> = witness.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let strong = increments[increments.len() - 5..].iter().all(|&d| d >= 0.5);
    let converges = witness[10].1 - witness[5].1 <= 1e-3;

    let harmonic_tail: Vec<f64> = (12..=60)
        .map(|k| {
            let eps = 10f64.powi(-k);
            k as f64 * inverse_integral(theta, eps, eps * 10.0)
        })
        .collect();
    let first = harmonic_tail[0];
    let harmonic =
        first.is_finite() && first > 0.0 && harmonic_tail.iter().all(|&v| v.is_finite() && v >= 0.9 * first);

    let verdict = if strong {
        OsgoodVerdict::Diverges
    } else if converges {
        OsgoodVerdict::Converges
    } else if harmonic {
        OsgoodVerdict::Diverges
    } else {
        OsgoodVerdict::Inconclusive
    };
    OsgoodReport {
        verdict,
        witness,
        harmonic_tail,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NagumoReport {
    pub holds: bool,
    /// `(r, r - int_0^r theta(s)/s ds)`; negative entries violate the condition.
    pub margins: Vec<(f64, f64)>,
}

/// Checks `int_0^r theta(s)/s ds <= r` for 60 log-spaced `r` in `[1e-12 r*, r*]`.
pub fn nagumo_check(theta: &ThetaFunction, r_star: f64) -> NagumoReport {
    if !(r_star.is_finite() && r_star > 0.0) {
        return NagumoReport {
            holds: false,
            margins: Vec::new(),
        };
    }
    let margins: Vec<(f64, f64)> = (0..60)
        .map(|i| {
            let r = r_star * 10f64.powf(-12.0 * (59 - i) as f64 / 59.0);
            // s = r e^{-x}
            let g = |x: f64| theta.eval(r * (-x).exp());
            let rough = 0.5 * (g(0.0) + g(40.0)) * 40.0 + r * 1e-300;
            let head = integrate(&g, 0.0, 40.0, 1e-14 * rough.max(r), 16);
            let tail = integrate(&g, 40.0, 800.0, 1e-14 * rough.max(r), 16);
            (r, r - (head + tail))
        })
        .collect();
    let holds = margins.iter().all(|&(r, m)| m >= -1e-8 * r);
    NagumoReport { holds, margins }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiniReport {
    pub holds: bool,
    /// `theta(U) |ln U|` at `U = 10^-k`, `k = 3..=12`.
    pub values: Vec<f64>,
}

pub fn dini_check(theta: &ThetaFunction) -> DiniReport {
    let values: Vec<f64> = (3..=12)
        .map(|k| {
            let u = 10f64.powi(-k);
            theta.eval(u) * u.ln().abs()
        })
        .collect();
    let holds = values.windows(2).all(|w| w[1] < w[0]) && *values.last().expect("non-empty") <= 1e-3;
    DiniReport { holds, values }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubadditivityReport {
    pub holds: bool,
    pub counterexample: Option<(f64, f64)>,
    pub pairs_checked: usize,
}

/// Tests `theta(U) + theta(W) >= theta(U + W) - 1e-10` on `(1, 1)` and on
/// `samples` seeded random pairs from `(0, 2]`, half of them log-uniform.
pub fn subadditivity_check(theta: &ThetaFunction, samples: usize, seed: u64) -> SubadditivityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = vec![(1.0, 1.0)];
    for i in 0..samples {
        let draw = |rng: &mut ChaCha8Rng| {
            if i % 2 == 0 {
                rng.random_range(1e-9..2.0)
            } else {
                10f64.powf(rng.random_range(-9.0..0.3))
            }
        };
        let u = draw(&mut rng);
        let w = draw(&mut rng);
        pairs.push((u, w));
    }
    let counterexample = pairs
        .iter()
        .copied()
        .find(|&(u, w)| theta.eval(u) + theta.eval(w) < theta.eval(u + w) - 1e-10);
    SubadditivityReport {
        holds: counterexample.is_none(),
        counterexample,
        pairs_checked: pairs.len(),
    }
}

/// Positive increasing gauge `psi` with `psi(0+) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum Gauge {
    /// `psi(t) = slope * t`
    Linear(f64),
    /// Samples of `psi` and `psi'` at increasing times `t > 0`; linear in between.
    Sampled {
        t: Vec<f64>,
        psi: Vec<f64>,
        dpsi: Vec<f64>,
    },
}

impl Default for Gauge {
    fn default() -> Self {
        Gauge::Linear(1.0)
    }
}

impl Gauge {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Gauge::Linear(a) => a * t,
            Gauge::Sampled { t: ts, psi, .. } => interp(ts, psi, t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Gauge::Linear(a) => *a,
            Gauge::Sampled { t: ts, dpsi, .. } => interp(ts, dpsi, t),
        }
    }

    fn is_valid(&self) -> bool {
        match self {
            Gauge::Linear(a) => a.is_finite() && *a > 0.0,
            Gauge::Sampled { t, psi, dpsi } => {
                !t.is_empty()
                    && t.len() == psi.len()
                    && t.len() == dpsi.len()
                    && t[0] > 0.0
                    && t.windows(2).all(|w| w[1] > w[0])
                    && psi.iter().all(|&p| p > 0.0)
                    && psi.windows(2).all(|w| w[1] > w[0])
                    && dpsi.iter().all(|&d| d > 0.0)
                    // psi(0+) = 0: the first sample is no larger than its secant from 0
                    && psi[0] <= dpsi[0] * t[0] * 2.0
            }
        }
    }
}

fn interp(ts: &[f64], vs: &[f64], t: f64) -> f64 {
    if t <= ts[0] {
        return vs[0] * t / ts[0];
    }
    if t >= ts[ts.len() - 1] {
        return vs[vs.len() - 1];
    }
    let j = ts.partition_point(|&x| x <= t) - 1;
    let s = (t - ts[j]) / (ts[j + 1] - ts[j]);
    vs[j] + s * (vs[j + 1] - vs[j])
}

/// Hypotheses of a mixed bound
/// `K(t, U) <= mu theta_t(t) theta_O(U) + lambda_N psi'(t)/psi(t) theta_N(U)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedCriterionSpec {
    pub weight_osgood: f64,
    pub weight_nagumo: f64,
    pub theta_osgood: ThetaFunction,
    pub theta_nagumo: ThetaFunction,
    pub time_factor: PhiFunction,
    pub gauge: Gauge,
    pub horizon: f64,
    pub r_star: f64,
}

/// `None` means the hypothesis does not apply to this weight combination.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedReport {
    pub weights_ok: bool,
    pub osgood: Option<bool>,
    pub nagumo: Option<bool>,
    pub gauge: Option<bool>,
    pub integrable: Option<bool>,
    /// Midpoint sums of `theta_t / psi` under resolution doubling.
    pub integrability_trace: Vec<f64>,
}

impl CombinedReport {
    pub fn holds(&self) -> bool {
        self.weights_ok
            && [self.osgood, self.nagumo, self.gauge, self.integrable]
                .iter()
                .all(|h| h.unwrap_or(true))
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.weights_ok {
            out.push("weights");
        }
        for (name, h) in [
            ("osgood", self.osgood),
            ("nagumo", self.nagumo),
            ("gauge", self.gauge),
            ("integrable", self.integrable),
        ] {
            if h == Some(false) {
                out.push(name);
            }
        }
        out
    }
}

/// Verifies each hypothesis numerically. The pure Osgood edge (`lambda_N = 0`)
/// needs only the Osgood test; the mixed case needs all of them, including
/// integrability of `theta_t / psi` (midpoint sums Cauchy within 1e-4).
pub fn combined_criterion_check(spec: &CombinedCriterionSpec) -> CombinedReport {
    let mu = spec.weight_osgood;
    let ln = spec.weight_nagumo;
    let weights_ok = mu.is_finite() && mu >= 0.0 && (0.0..1.0).contains(&ln) && mu + ln > 0.0;
    if !weights_ok {
        return CombinedReport {
            weights_ok,
            osgood: None,
            nagumo: None,
            gauge: None,
            integrable: None,
            integrability_trace: Vec::new(),
        };
    }
    let osgood = (mu > 0.0).then(|| osgood_classify(&spec.theta_osgood).verdict == OsgoodVerdict::Diverges);
    let nagumo = (ln > 0.0).then(|| nagumo_check(&spec.theta_nagumo, spec.r_star).holds);
    let mixed = mu > 0.0 && ln > 0.0;
    let gauge = (ln > 0.0).then(|| spec.gauge.is_valid());
    let (integrable, trace) = if mixed {
        let (ok, trace) = ratio_integrable(spec);
        (Some(ok), trace)
    } else {
        (None, Vec::new())
    };
    CombinedReport {
        weights_ok,
        osgood,
        nagumo,
        gauge,
        integrable,
        integrability_trace: trace,
    }
}

fn ratio_integrable(spec: &CombinedCriterionSpec) -> (bool, Vec<f64>) {
    let t_end = spec.horizon;
    let mut trace = Vec::new();
    for j in 6..=20 {
        let n = 1usize << j;
        let h = t_end / n as f64;
        let s: f64 = (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                h * spec.time_factor.value(t) / spec.gauge.value(t)
            })
            .sum();
        trace.push(s);
    }
    let k = trace.len();
    let ok = trace.iter().all(|v| v.is_finite()) && (trace[k - 1] - trace[k - 2]).abs() <= 1e-4;
    (ok, trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(theta: &ThetaFunction, r_star: f64) -> (OsgoodVerdict, bool, bool, bool) {
        (
            osgood_classify(theta).verdict,
            nagumo_check(theta, r_star).holds,
            dini_check(theta).holds,
            subadditivity_check(theta, 200, 1).holds,
        )
    }

    #[test]
    fn classification_table() {
        use OsgoodVerdict::*;
        assert_eq!(row(&ThetaFunction::Identity, 1.0), (Diverges, true, true, true));
        assert_eq!(
            row(&ThetaFunction::Power(0.5), 1.0),
            (Converges, false, true, true)
        );
        assert_eq!(
            row(&ThetaFunction::Power(2.0), 1.0),
            (Diverges, true, true, false)
        );
        assert_eq!(row(&ThetaFunction::LogOsgood, 1.0), (Diverges, false, true, true));
    }

    #[test]
    fn osgood_tail_rule_separates_borderline_kernels() {
        // s ln(1/s)^2 has a convergent Osgood integral, s ln(1/s) ln ln(1/s) a divergent one
        let sq = ThetaFunction::tabulate(|s| s * s.ln().powi(2), 1e-70, 1e-2, 4000).unwrap();
        assert_ne!(osgood_classify(&sq).verdict, OsgoodVerdict::Diverges);
        let r = osgood_classify(&ThetaFunction::LogOsgood);
        assert_eq!(r.witness.len(), 11);
        assert!(r.witness.windows(2).all(|w| w[1].1 > w[0].1));
    }

    #[test]
    fn nagumo_examples() {
        let two_s = ThetaFunction::tabulate(|s| 2.0 * s, 1e-16, 10.0, 100).unwrap();
        let rep = nagumo_check(&two_s, 1.0);
        assert!(!rep.holds);
        assert!(rep.margins.iter().all(|&(_, m)| m < 0.0));
        let rep = nagumo_check(&ThetaFunction::Power(2.0), 1.0);
        for &(r, m) in &rep.margins {
            assert!((m - (r - r * r / 2.0)).abs() <= 1e-10 * r.max(1e-300));
        }
    }

    #[test]
    fn dini_examples() {
        assert!(dini_check(&ThetaFunction::Identity).holds);
        assert!(dini_check(&ThetaFunction::LogOsgood).holds);
        let inv_log = ThetaFunction::tabulate(|s| 1.0 / s.ln().abs(), 1e-14, 1e-2, 1300).unwrap();
        let rep = dini_check(&inv_log);
        assert!(!rep.holds);
        assert!(rep.values.iter().all(|v| (v - 1.0).abs() < 1e-3));
    }

    #[test]
    fn subadditivity_witness() {
        let rep = subadditivity_check(&ThetaFunction::Power(2.0), 100, 3);
        assert_eq!(rep.counterexample, Some((1.0, 1.0)));
        assert_eq!(rep.pairs_checked, 101);
    }

    fn spec(mu: f64, ln: f64, theta_o: ThetaFunction) -> CombinedCriterionSpec {
        CombinedCriterionSpec {
            weight_osgood: mu,
            weight_nagumo: ln,
            theta_osgood: theta_o,
            theta_nagumo: ThetaFunction::Identity,
            time_factor: PhiFunction::constant(1.0).unwrap(),
            gauge: Gauge::default(),
            horizon: 1.0,
            r_star: 1.0,
        }
    }

    #[test]
    fn combined_edges() {
        assert!(combined_criterion_check(&spec(1.0, 0.0, ThetaFunction::Identity)).holds());
        let rep = combined_criterion_check(&spec(0.0, 1.0, ThetaFunction::Identity));
        assert!(!rep.holds());
        assert_eq!(rep.failures(), vec!["weights"]);
    }

    #[test]
    fn combined_mixed_case_checks_ratio_integrability() {
        // theta_t = sqrt(t) makes theta_t / psi = t^{-1/2}... still slowly convergent; use t
        let mut s = spec(1.0, 0.5, ThetaFunction::LogOsgood);
        let g = crate::banach::TimeGrid::new(1.0, 1 << 12).unwrap();
        let samples = g.nodes().collect();
        s.time_factor = PhiFunction::table(g, samples).unwrap();
        let rep = combined_criterion_check(&s);
        assert_eq!(rep.osgood, Some(true));
        assert_eq!(rep.nagumo, Some(true));
        assert_eq!(rep.gauge, Some(true));
        assert_eq!(rep.integrable, Some(true));
        assert!(rep.holds());

        // constant time factor over psi(t) = t is not integrable at 0
        let rep = combined_criterion_check(&spec(1.0, 0.5, ThetaFunction::LogOsgood));
        assert_eq!(rep.integrable, Some(false));
        assert_eq!(rep.failures(), vec!["integrable"]);
    }
}

//! TOML experiment configs, flattened to dotted keys.
//!
//! Every config has a `scenario` key; the remaining required keys depend on
//! the scenario (see `configs/` for one example per tag). Optional `run.*`
//! keys override command-line flags: `run.seed`, `run.out`, `run.tol_scale`,
//! `run.threads`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use toml::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ScenarioTag {
    SemigroupConvergence,
    EulerVsDuhamel,
    DuhamelResidual,
    PicardLipschitz,
    PicardEbm,
    UniquenessGap,
    MajorantTable,
    CriterionMatrix,
}

impl ScenarioTag {
    pub const ALL: [ScenarioTag; 8] = [
        ScenarioTag::SemigroupConvergence,
        ScenarioTag::EulerVsDuhamel,
        ScenarioTag::DuhamelResidual,
        ScenarioTag::PicardLipschitz,
        ScenarioTag::PicardEbm,
        ScenarioTag::UniquenessGap,
        ScenarioTag::MajorantTable,
        ScenarioTag::CriterionMatrix,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioTag::SemigroupConvergence => "semigroup_convergence",
            ScenarioTag::EulerVsDuhamel => "euler_vs_duhamel",
            ScenarioTag::DuhamelResidual => "duhamel_residual",
            ScenarioTag::PicardLipschitz => "picard_lipschitz",
            ScenarioTag::PicardEbm => "picard_ebm",
            ScenarioTag::UniquenessGap => "uniqueness_gap",
            ScenarioTag::MajorantTable => "majorant_table",
            ScenarioTag::CriterionMatrix => "criterion_matrix",
        }
    }

    /// Keys every config of this scenario must define.
    pub fn required_keys(&self) -> Vec<&'static str> {
        const EBM: [&str; 14] = [
            "ebm.d",
            "ebm.p",
            "ebm.insolation",
            "ebm.beta_ice",
            "ebm.beta_water",
            "ebm.delta",
            "ebm.profile",
            "ebm.profile_a",
            "ebm.profile_b",
            "grid.horizon",
            "grid.n",
            "picard.tol",
            "picard.max_sweeps",
            "tolerances.defect",
        ];
        match self {
            ScenarioTag::SemigroupConvergence => vec![
                "operator.a",
                "point.t",
                "point.x",
                "grid.n_list",
                "tolerances.final_error",
                "abs.samples",
                "abs.max_n",
                "tolerances.abs",
            ],
            ScenarioTag::EulerVsDuhamel => vec![
                "operator.a",
                "forcing.value",
                "initial.value",
                "grid.horizon",
                "grid.n",
                "grid.substeps",
                "grid.n_fine",
                "grid.substeps_fine",
                "semigroup.tol",
                "tolerances.discrepancy",
                "tolerances.closed_form",
            ],
            ScenarioTag::DuhamelResidual => vec![
                "operator.a",
                "forcing.value",
                "initial.value",
                "grid.horizon",
                "grid.n_list",
                "variants.steps",
                "tolerances.telescoping",
                "tolerances.ratio_lo",
                "tolerances.ratio_hi",
            ],
            ScenarioTag::PicardLipschitz => vec![
                "initial.value",
                "grid.horizon",
                "grid.n",
                "picard.tol",
                "picard.max_sweeps",
                "bielecki.p",
                "bielecki.gamma",
                "tolerances.contraction_slack",
                "tolerances.closed_form",
            ],
            ScenarioTag::PicardEbm => [&EBM[..], &["tolerances.euler_agreement"]].concat(),
            ScenarioTag::UniquenessGap => {
                [&EBM[..], &["uniqueness.eps_list", "tolerances.majorant_factor"]].concat()
            }
            ScenarioTag::MajorantTable => vec![
                "scalar.u0",
                "scalar.t",
                "scalar.power_t",
                "grid.n",
                "tolerances.gronwall",
                "tolerances.power",
                "tolerances.horizon_rel",
                "tolerances.psi_roundtrip",
                "tolerances.psi_vs_ie",
            ],
            ScenarioTag::CriterionMatrix => vec!["criteria.subadditivity_samples", "criteria.nagumo_r_star"],
        }
    }
}

impl fmt::Display for ScenarioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ScenarioTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown scenario {s:?}"))
    }
}

/// A parsed config: dotted keys to TOML values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, Value>,
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

impl FromStr for Config {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text.parse()?;
        let mut values = BTreeMap::new();
        flatten("", &table, &mut values);
        Ok(Config { values })
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        std::fs::read_to_string(path)?.parse()
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    /// Sets a key; used to apply a scenario implied by the subcommand.
    pub fn set(&mut self, key: &str, value: Value) {
        self.values.insert(key.to_owned(), value);
    }

    /// Typed access that collects every missing or malformed key.
    pub fn reader(&self) -> Reader<'_> {
        Reader {
            cfg: self,
            missing: Vec::new(),
            invalid: Vec::new(),
        }
    }
}

pub struct Reader<'a> {
    cfg: &'a Config,
    missing: Vec<String>,
    invalid: Vec<String>,
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

impl Reader<'_> {
    fn fetch<T>(&mut self, key: &str, what: &str, conv: impl Fn(&Value) -> Option<T>) -> Option<T> {
        match self.cfg.get(key) {
            None => {
                self.missing.push(key.to_owned());
                None
            }
            Some(v) => {
                let out = conv(v);
                if out.is_none() {
                    self.invalid.push(format!("{key} must be {what}"));
                }
                out
            }
        }
    }

    fn optional<T>(&mut self, key: &str, what: &str, conv: impl Fn(&Value) -> Option<T>) -> Option<T> {
        if self.cfg.get(key).is_some() {
            self.fetch(key, what, conv)
        } else {
            None
        }
    }

    pub fn f64(&mut self, key: &str) -> f64 {
        self.fetch(key, "a finite number", |v| as_f64(v).filter(|x| x.is_finite()))
            .unwrap_or(f64::NAN)
    }

    /// A strictly positive finite number (used for tolerances).
    pub fn positive(&mut self, key: &str) -> f64 {
        self.fetch(key, "a positive number", |v| {
            as_f64(v).filter(|x| x.is_finite() && *x > 0.0)
        })
        .unwrap_or(f64::NAN)
    }

    pub fn usize(&mut self, key: &str) -> usize {
        self.fetch(key, "a nonnegative integer", |v| {
            v.as_integer().and_then(|i| usize::try_from(i).ok())
        })
        .unwrap_or(0)
    }

    pub fn string(&mut self, key: &str) -> String {
        self.fetch(key, "a string", |v| v.as_str().map(str::to_owned))
            .unwrap_or_default()
    }

    pub fn f64_list(&mut self, key: &str) -> Vec<f64> {
        self.fetch(key, "a list of numbers", |v| {
            v.as_array()?.iter().map(as_f64).collect::<Option<Vec<_>>>()
        })
        .unwrap_or_default()
    }

    pub fn usize_list(&mut self, key: &str) -> Vec<usize> {
        self.fetch(key, "a list of nonnegative integers", |v| {
            v.as_array()?
                .iter()
                .map(|x| x.as_integer().and_then(|i| usize::try_from(i).ok()))
                .collect::<Option<Vec<_>>>()
        })
        .unwrap_or_default()
    }

    pub fn opt_u64(&mut self, key: &str) -> Option<u64> {
        self.optional(key, "a nonnegative integer", |v| {
            v.as_integer().and_then(|i| u64::try_from(i).ok())
        })
    }

    pub fn opt_usize(&mut self, key: &str) -> Option<usize> {
        self.optional(key, "a nonnegative integer", |v| {
            v.as_integer().and_then(|i| usize::try_from(i).ok())
        })
    }

    pub fn opt_positive(&mut self, key: &str) -> Option<f64> {
        self.optional(key, "a positive number", |v| {
            as_f64(v).filter(|x| x.is_finite() && *x > 0.0)
        })
    }

    pub fn opt_string(&mut self, key: &str) -> Option<String> {
        self.optional(key, "a string", |v| v.as_str().map(str::to_owned))
    }

    /// Records a semantic error found after reading.
    pub fn reject(&mut self, message: impl Into<String>) {
        self.invalid.push(message.into());
    }

    pub fn finish(self) -> Result<(), CliError> {
        if self.missing.is_empty() && self.invalid.is_empty() {
            Ok(())
        } else {
            Err(CliError::Schema {
                missing: self.missing,
                invalid: self.invalid,
            })
        }
    }
}

/// Settings shared by every scenario, resolved from config, flags and environment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub seed: u64,
    pub out: PathBuf,
    pub tol_scale: f64,
    pub threads: Option<usize>,
}

/// Values supplied on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlagOverrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tol_scale: Option<f64>,
    pub threads: Option<usize>,
}

pub const OUT_ENV: &str = "ACCRETIVE_OUT";
pub const DEFAULT_OUT: &str = "results";

/// Config keys win over flags, flags over the environment.
pub fn resolve_settings(
    cfg: &Config,
    flags: &FlagOverrides,
    env_out: Option<PathBuf>,
) -> Result<RunSettings, CliError> {
    let mut r = cfg.reader();
    let seed = r.opt_u64("run.seed");
    let out = r.opt_string("run.out");
    let tol_scale = r.opt_positive("run.tol_scale");
    let threads = r.opt_usize("run.threads");
    if threads == Some(0) {
        r.reject("run.threads must be >= 1");
    }
    if flags.tol_scale.is_some_and(|s| !(s.is_finite() && s > 0.0)) {
        r.reject("--tol-scale must be > 0");
    }
    r.finish()?;
    Ok(RunSettings {
        seed: seed.or(flags.seed).unwrap_or(0),
        out: out
            .map(PathBuf::from)
            .or_else(|| flags.out.clone())
            .or(env_out)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        tol_scale: tol_scale.or(flags.tol_scale).unwrap_or(1.0),
        threads: threads.or(flags.threads),
    })
}

/// Reads the `scenario` key; lists the scenario's keys as missing when absent
/// so an empty file yields a complete schema error.
pub fn scenario_of(cfg: &Config) -> Result<ScenarioTag, CliError> {
    match cfg.get("scenario") {
        None => Err(CliError::Schema {
            missing: vec!["scenario".into()],
            invalid: Vec::new(),
        }),
        Some(v) => {
            let s = v.as_str().ok_or_else(|| CliError::Schema {
                missing: Vec::new(),
                invalid: vec!["scenario must be a string".into()],
            })?;
            s.parse().map_err(|e: String| CliError::Schema {
                missing: Vec::new(),
                invalid: vec![e],
            })
        }
    }
}

/// Lists required keys absent from `cfg` for `tag`.
pub fn check_required(cfg: &Config, tag: ScenarioTag) -> Result<(), CliError> {
    let missing: Vec<String> = tag
        .required_keys()
        .iter()
        .filter(|k| cfg.get(k).is_none())
        .map(|k| (*k).to_owned())
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(CliError::Schema {
            missing,
            invalid: Vec::new(),
        })
    }
}

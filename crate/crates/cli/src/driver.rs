//! Subcommand implementations shared by the binary and the tests.

use std::path::{Path, PathBuf};

use serde_json::json;
use toml::Value;

use crate::config::{resolve_settings, scenario_of, Config, FlagOverrides, RunSettings, ScenarioTag};
use crate::error::CliError;
use crate::experiments::run_experiment;
use crate::report::{aggregate, exit_code, write_report, ReportRow, WrittenReport};

/// Outcome of one subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub scenario: String,
    pub rows: Vec<ReportRow>,
    pub written: WrittenReport,
    pub exit_code: i32,
}

fn configure_threads(settings: &RunSettings) {
    if let Some(n) = settings.threads {
        // only the first call configures the global pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn run_config(cfg: &Config, flags: &FlagOverrides, env_out: Option<PathBuf>) -> Result<RunOutcome, CliError> {
    let settings = resolve_settings(cfg, flags, env_out)?;
    configure_threads(&settings);
    let tag = scenario_of(cfg)?;
    let rows = run_experiment(cfg, &settings)?;
    let meta = json!({
        "seed": settings.seed,
        "tol_scale": settings.tol_scale,
        "threads": settings.threads,
    });
    let written = write_report(&settings.out, tag.as_str(), settings.seed, &rows, meta)?;
    Ok(RunOutcome {
        scenario: tag.as_str().to_owned(),
        exit_code: exit_code(&rows),
        rows,
        written,
    })
}

/// `run <config>`
pub fn run_file(
    path: &Path,
    flags: &FlagOverrides,
    env_out: Option<PathBuf>,
) -> Result<RunOutcome, CliError> {
    run_config(&Config::load(path)?, flags, env_out)
}

/// `ebm <config>`: the scenario defaults to `picard_ebm`.
pub fn ebm_file(
    path: &Path,
    flags: &FlagOverrides,
    env_out: Option<PathBuf>,
) -> Result<RunOutcome, CliError> {
    let mut cfg = Config::load(path)?;
    if cfg.get("scenario").is_none() {
        cfg.set("scenario", Value::String(ScenarioTag::PicardEbm.as_str().into()));
    }
    match scenario_of(&cfg)? {
        ScenarioTag::PicardEbm | ScenarioTag::UniquenessGap => run_config(&cfg, flags, env_out),
        other => Err(CliError::Schema {
            missing: Vec::new(),
            invalid: vec![format!("ebm accepts picard_ebm or uniqueness_gap, got {other}")],
        }),
    }
}

/// `matrix`: the criterion table with built-in settings.
pub fn matrix(flags: &FlagOverrides, env_out: Option<PathBuf>) -> Result<RunOutcome, CliError> {
    let cfg: Config = "scenario = \"criterion_matrix\"\n\
                       [criteria]\nsubadditivity_samples = 200\nnagumo_r_star = 1.0\n"
        .parse()?;
    run_config(&cfg, flags, env_out)
}

/// `report <dir>`: concatenates every scenario CSV into `aggregate.csv`.
pub fn report(dir: &Path) -> Result<RunOutcome, CliError> {
    let rows = aggregate(dir)?;
    let written = write_report(
        dir,
        "aggregate",
        0,
        &rows,
        json!({ "source": dir.display().to_string() }),
    )?;
    Ok(RunOutcome {
        scenario: "aggregate".into(),
        exit_code: exit_code(&rows),
        rows,
        written,
    })
}

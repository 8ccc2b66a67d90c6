use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config schema error: {}", describe_schema(.missing, .invalid))]
    Schema {
        missing: Vec<String>,
        invalid: Vec<String>,
    },
    #[error(transparent)]
    Core(#[from] accretive::Error),
    #[error("report error: {0}")]
    Report(String),
}

fn describe_schema(missing: &[String], invalid: &[String]) -> String {
    let mut parts = Vec::new();
    if !missing.is_empty() {
        parts.push(format!("missing keys: {}", missing.join(", ")));
    }
    if !invalid.is_empty() {
        parts.push(format!("invalid values: {}", invalid.join("; ")));
    }
    parts.join("; ")
}

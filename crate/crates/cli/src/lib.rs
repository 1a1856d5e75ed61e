//! Batch verification harness: configuration, suites, JSON reports and CSV
//! plot data for the `superkvn` command.

pub mod config;
pub mod emit;
pub mod report;
pub mod suites;

use std::time::Instant;

pub use config::{Suite, SuiteConfig};
pub use emit::{emit_plot_data, EmitKind};
pub use report::{CheckRecord, Report, Status};

use report::Status as S;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("missing prior output: {0}")]
    MissingOutput(String),
    #[error("emit failed: {0}")]
    Emit(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Usage, configuration and environment problems all exit with 2;
    /// check failures are reported through the report, not as errors.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Runs the configured suite, writes `<out>/<suite>.report.json` plus the
/// CSV artifacts the suite produces, and returns the report.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut checks = suites::run_checks(cfg, cfg.suite);
    std::fs::create_dir_all(&cfg.out)?;
    let suites = cfg.suite.expand();
    let mut artifacts = Vec::new();
    for kind in EmitKind::ALL.into_iter().filter(|k| suites.contains(&k.suite())) {
        match emit::generate(kind, cfg) {
            Ok(data) => {
                std::fs::write(cfg.out.join(kind.file_name()), data)?;
                artifacts.push(kind.file_name());
            }
            Err(e) => checks.push(CheckRecord {
                suite: kind.suite().to_string(),
                name: format!("artifact_{}", kind.name()),
                status: S::Fail,
                residual: None,
                tolerance: None,
                reference: "plot data generated".into(),
                detail: Some(e),
            }),
        }
    }
    let mut report = Report::new(cfg.suite.name(), cfg.seed, cfg.echo(), checks);
    report.body.artifacts = artifacts;
    report.wall_time_s = start.elapsed().as_secs_f64();
    std::fs::write(emit::report_path(&cfg.out, cfg.suite), report.to_json())?;
    Ok(report)
}

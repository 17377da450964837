//! Config-driven experiments on top of `lma-core`: JSON configs in, CSV
//! artifacts and a JSON report out.

pub mod config;
pub mod error;
pub mod expr;
pub mod output;
pub mod pipelines;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{ExperimentConfig, Pipeline};
pub use error::LabError;
pub use report::Report;

/// Overrides from the command line.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Parses, validates and runs a configuration. `pipeline` comes from the
/// subcommand; `None` uses the `pipeline` key of the config.
pub fn run_experiment(
    config_text: &str,
    pipeline: Option<Pipeline>,
    opts: &RunOptions,
) -> Result<(Report, PathBuf), LabError> {
    let start = Instant::now();
    let cfg = ExperimentConfig::from_json(config_text)?;
    let pipeline = pipeline.or(cfg.pipeline).ok_or_else(|| LabError::Schema {
        path: "pipeline".into(),
        message: "no pipeline given by the config or the command line".into(),
    })?;
    cfg.validate(pipeline)?;
    let out = opts
        .out
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .ok_or_else(|| LabError::Schema {
            path: "output_dir".into(),
            message: "no output directory given by the config or --out".into(),
        })?;
    std::fs::create_dir_all(&out).map_err(|e| LabError::io(&out, e))?;
    let seed = opts.seed.unwrap_or(cfg.seed);
    log::info!(
        "running {} into {} (seed {seed})",
        pipeline.as_str(),
        out.display()
    );
    let done = pipelines::execute(&cfg, pipeline, &out, seed)?;
    let report = Report {
        pipeline: pipeline.as_str(),
        versions: Default::default(),
        config_sha256: report::sha256_hex(config_text.as_bytes()),
        seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        tolerances: done.tolerances,
        warnings: done.warnings,
        files: done.files,
        results: done.results,
    };
    report.write(&out)?;
    Ok((report, out))
}

/// Reads a config file and runs it.
pub fn run_file(
    path: &Path,
    pipeline: Option<Pipeline>,
    opts: &RunOptions,
) -> Result<(Report, PathBuf), LabError> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    run_experiment(&text, pipeline, opts)
}

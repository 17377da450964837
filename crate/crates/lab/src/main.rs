use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lma_lab::{run_file, Pipeline, RunOptions};

/// Experiments for the obstacle problem of the linearized Monge-Ampère
/// operator.
#[derive(Parser)]
#[command(name = "lma", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Debug logging.
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve det D²w = f with zero boundary data.
    SolveMa,
    /// Solve the obstacle problem for L_w.
    SolveObstacle,
    /// Section radii against height.
    ProbeSections,
    /// Harnack quotients for random boundary data.
    ProbeHarnack,
    /// Iterated normalization of nested sections.
    ProbeNormalization,
    /// Hölder exponent of the gradient at the free boundary.
    ProbeHolder,
    /// Every step the config supports.
    FullPipeline,
    /// The pipeline named by the config's `pipeline` key.
    Run,
    /// Print the JSON schema of the config file.
    Schema,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.global.verbose { "debug" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let pipeline = match cli.command {
        Command::Schema => {
            print!("{}", lma_lab::config::json_schema());
            return ExitCode::SUCCESS;
        }
        Command::Run => None,
        Command::SolveMa => Some(Pipeline::SolveMa),
        Command::SolveObstacle => Some(Pipeline::SolveObstacle),
        Command::ProbeSections => Some(Pipeline::ProbeSections),
        Command::ProbeHarnack => Some(Pipeline::ProbeHarnack),
        Command::ProbeNormalization => Some(Pipeline::ProbeNormalization),
        Command::ProbeHolder => Some(Pipeline::ProbeHolder),
        Command::FullPipeline => Some(Pipeline::FullPipeline),
    };
    let Some(config) = cli.global.config else {
        eprintln!("error: --config is required");
        return ExitCode::from(2);
    };
    let opts = RunOptions {
        out: cli.global.out,
        seed: cli.global.seed,
    };
    match run_file(&config, pipeline, &opts) {
        Ok((report, out)) => {
            log::info!(
                "{} finished in {:.2} s; artifacts in {}",
                report.pipeline,
                report.wall_time_s,
                out.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use multispec_cli::config::{Experiment, ExperimentConfig};
use multispec_cli::experiments::{self, Settings};
use multispec_cli::output::{self, Manifest, Versions};
use multispec_cli::CliError;

#[derive(Parser)]
#[command(name = "multispec", version, about = "Run a multispec experiment from a TOML config")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Product norms along explicit harmonic families.
    Optimality(RunArgs),
    /// Products of approximate spectral projections.
    Projector(RunArgs),
    /// Bilinear Strichartz sweep on S3.
    Strichartz(RunArgs),
    /// Lattice-point counters.
    Lattice(RunArgs),
    /// Split-step NLS run with conservation series.
    Nls(RunArgs),
    /// Bourgain norms of windowed free solutions.
    Xsb(RunArgs),
    /// Bump-profile norm inflation.
    Inflation(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Parent of the per-run output directory.
    #[arg(long, env = "MULTISPEC_OUT")]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "MULTISPEC_WORKERS")]
    workers: Option<usize>,
    /// Evaluate one refinement level finer.
    #[arg(long)]
    fine: bool,
}

impl Command {
    fn split(self) -> (Experiment, RunArgs) {
        match self {
            Command::Optimality(a) => (Experiment::Optimality, a),
            Command::Projector(a) => (Experiment::Projector, a),
            Command::Strichartz(a) => (Experiment::Strichartz, a),
            Command::Lattice(a) => (Experiment::Lattice, a),
            Command::Nls(a) => (Experiment::Nls, a),
            Command::Xsb(a) => (Experiment::Xsb, a),
            Command::Inflation(a) => (Experiment::Inflation, a),
        }
    }
}

fn main() -> ExitCode {
    let (experiment, args) = Cli::parse().command.split();
    match run(experiment, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("multispec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(experiment: Experiment, args: RunArgs) -> Result<(), CliError> {
    let config = ExperimentConfig::load(&args.config)?;
    if config.experiment != experiment {
        return Err(CliError::Config(format!(
            "config is for `{}`, not `{experiment}`",
            config.experiment
        )));
    }
    let workers = match args.workers {
        Some(0) => return Err(CliError::Config("--workers must be positive".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let out = args.out.or_else(|| config.out.clone()).unwrap_or_else(|| PathBuf::from("runs"));
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| CliError::Io(std::io::Error::other(e)))?;

    let dir = output::run_dir(&out, experiment, seed, args.fine);
    let parameters = serde_json::to_value(&config)?;
    let start = Instant::now();
    let result = experiments::run(&config, Settings { seed, fine: args.fine });
    let manifest = |status: &'static str, error: Option<String>, files: Vec<&'static str>| Manifest {
        schema: output::MANIFEST_SCHEMA,
        versions: Versions::current(),
        experiment,
        parameters: parameters.clone(),
        seed,
        workers,
        fine: args.fine,
        wall_time_s: start.elapsed().as_secs_f64(),
        status,
        error,
        files,
    };
    match result {
        Ok(outcome) => {
            let mut files = vec!["results.csv", "report.json", "manifest.json"];
            if outcome.failure.is_some() {
                files.push(output::FAILURE_MARKER);
            }
            let m = manifest(output::status(&outcome), outcome.failure.as_ref().map(|e| e.to_string()), files);
            output::write_outcome(&dir, experiment, &outcome, &m)?;
            println!(
                "{}: model {} measured {} ({})",
                dir.display(),
                outcome.model_exponent,
                outcome.measured_exponent.map_or("n/a".to_string(), |x| format!("{x:.4}")),
                m.status
            );
            match outcome.failure {
                Some(e) => Err(e),
                None => Ok(()),
            }
        }
        Err(e) => {
            let m = manifest("failed", Some(e.to_string()), vec!["manifest.json", output::FAILURE_MARKER]);
            output::write_failure(&dir, &m, &e)?;
            Err(e)
        }
    }
}

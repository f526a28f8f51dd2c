use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fractal_she_cli::{emit_report, run_experiment, CliError, ExperimentConfig, ExperimentKind, ReportFormat};

#[derive(Parser)]
#[command(name = "fractal-she", version, about = "Stochastic heat equation experiments on p.c.f. fractals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the harmonic structure and the level partition
    Verify(Common),
    /// Solve the generalized eigenproblem and check it
    Spectrum(Common),
    /// Effective resistances on the level-m network
    Resistance(Common),
    /// Simulate the field and compare moments with the analytic variance
    Simulate(Common),
    /// Estimate spatial and temporal Hölder exponents
    Holder(Common),
    /// Check invariant measures (Dirichlet) or the Wiener split (Neumann)
    Invariant(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment config
    #[arg(long)]
    config: PathBuf,
    /// overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// output directory [env: FRACTAL_SHE_OUT]
    #[arg(long)]
    out: Option<PathBuf>,
    /// worker threads [env: FRACTAL_SHE_THREADS]
    #[arg(long)]
    threads: Option<usize>,
}

impl Command {
    fn split(self) -> (ExperimentKind, Common) {
        match self {
            Command::Verify(c) => (ExperimentKind::Verify, c),
            Command::Spectrum(c) => (ExperimentKind::Spectrum, c),
            Command::Resistance(c) => (ExperimentKind::Resistance, c),
            Command::Simulate(c) => (ExperimentKind::Simulate, c),
            Command::Holder(c) => (ExperimentKind::Holder, c),
            Command::Invariant(c) => (ExperimentKind::Invariant, c),
        }
    }
}

fn env_var(name: &str) -> Option<String> {
    std::env::var(name).ok().filter(|s| !s.is_empty())
}

fn prepare(kind: ExperimentKind, args: Common) -> Result<ExperimentConfig, CliError> {
    let mut config = ExperimentConfig::load_for(&args.config, kind)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = args.out.or_else(|| env_var("FRACTAL_SHE_OUT").map(PathBuf::from)) {
        config.output = Some(out);
    }
    let threads = match args.threads {
        Some(n) => Some(n),
        None => env_var("FRACTAL_SHE_THREADS")
            .map(|s| s.parse::<usize>().map_err(|_| CliError::Config(format!("FRACTAL_SHE_THREADS={s:?} is not a count"))))
            .transpose()?,
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("thread count must be positive".into()));
        }
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    config.validate()?;
    Ok(config)
}

fn run(config: &ExperimentConfig) -> Result<bool, CliError> {
    let report = run_experiment(config)?;
    let dir = config.output.clone().unwrap_or_else(|| PathBuf::from(fractal_she_cli::experiment::DEFAULT_OUTPUT));
    emit_report(&report, ReportFormat::Json, &dir)?;
    emit_report(&report, ReportFormat::Csv, &dir)?;
    for c in &report.criteria {
        println!(
            "{} {}: measured {} threshold {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.threshold
        );
    }
    Ok(report.all_passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    let config = match prepare(kind, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_usage() { 2 } else { 1 });
        }
    };
    match run(&config) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pacgreedy::verify::Suite;
use pacgreedy_bench::{compare_rows, run_cells, run_rows, write_csv, BenchError, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(name = "pacbench", version, about = "Seeded submodular-maximization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Base seed; overrides PACBENCH_SEED and the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// CSV destination; overrides PACBENCH_OUT and the config file. Stdout if unset.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment config and write CSV.
    Run { config: PathBuf },
    /// Run paired comparisons against the first listed maximizer.
    Compare { config: PathBuf },
    /// Run a property suite (or `all`) and report pass/fail.
    Verify { suite: String },
}

fn env_override<T: std::str::FromStr>(name: &str) -> Result<Option<T>, BenchError> {
    match std::env::var(name) {
        Ok(v) => v
            .parse()
            .map(Some)
            .map_err(|_| BenchError::Config(format!("{name}: cannot parse `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn load(cli: &Cli, path: &Path) -> Result<ExperimentConfig, BenchError> {
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed.or(env_override("PACBENCH_SEED")?) {
        config.seed = seed;
    }
    if let Some(out) = cli.out.clone().or(env_override("PACBENCH_OUT")?) {
        config.output = Some(out);
    }
    Ok(config)
}

fn emit(config: &ExperimentConfig, rows: &[pacgreedy_bench::Row]) -> Result<(), BenchError> {
    match &config.output {
        Some(path) => write_csv(rows, std::fs::File::create(path)?),
        None => write_csv(rows, std::io::stdout().lock()),
    }
}

fn execute(cli: &Cli) -> Result<bool, BenchError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(BenchError::Config("--jobs: must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| BenchError::Runtime(e.to_string()))?;
    }
    match &cli.command {
        Command::Run { config } | Command::Compare { config } => {
            let config = load(cli, config)?;
            let resolved = config.resolve()?;
            let compare = matches!(cli.command, Command::Compare { .. });
            if compare && resolved.maximizers.len() < 2 {
                return Err(BenchError::Config("maximizer: compare needs at least two".into()));
            }
            let cells = run_cells(&resolved)?;
            let rows = if compare {
                compare_rows(&resolved, &cells)?
            } else {
                run_rows(&resolved, &cells)
            };
            emit(&config, &rows)?;
            Ok(true)
        }
        Command::Verify { suite } => {
            let suites = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![suite.parse::<Suite>().map_err(|e| BenchError::Config(e.to_string()))?]
            };
            let seed = match cli.seed {
                Some(s) => s,
                None => env_override("PACBENCH_SEED")?.unwrap_or(0),
            };
            let mut all = true;
            for s in suites {
                let report = s.run(seed)?;
                println!("{report}");
                all &= report.passed();
            }
            Ok(all)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("pacbench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qwb_cli::{parse_config, resolve_output, run_sweep, RunError, Target, OUTPUT_DIR_ENV};

/// Quantum Wheatstone bridge sweeps.
///
/// Relative output paths are placed under $QWB_OUTPUT_DIR when it is set.
#[derive(Parser)]
#[command(name = "qwb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run any target.
    Sweep(RunArgs),
    /// Rate tables and derived scales (target rates_report).
    Rates(RunArgs),
    /// Circuit flux sweep (target circuit).
    Circuit(RunArgs),
    /// Disorder study (target robustness).
    Robustness(RunArgs),
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write `<out>.plot.dat`.
    #[arg(long)]
    plot: bool,
}

fn load(path: &Path) -> Result<qwb_cli::SweepConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Io { path: path.into(), source })?;
    Ok(parse_config(&text)?)
}

fn run(args: RunArgs, required: Option<Target>) -> Result<(), RunError> {
    let mut cfg = load(&args.config)?;
    if let Some(t) = required.filter(|t| *t != cfg.target) {
        return Err(qwb_cli::ConfigError {
            line: 0,
            message: format!("this subcommand needs target = {t}, found {}", cfg.target),
        }
        .into());
    }
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(qwb_cli::ConfigError { line: 0, message: "--threads must be at least 1".into() }.into());
        }
        cfg.threads = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = args.out {
        cfg.output = Some(o);
    }
    let env_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    let out = resolve_output(&cfg.output_path(), env_dir.as_deref());
    let report = run_sweep(&cfg, &out, args.plot)?;
    eprintln!("wrote {} ({} rows)", report.csv.display(), report.rows);
    for p in report.summary.iter().chain(&report.plot) {
        eprintln!("wrote {}", p.display());
    }
    if report.failed_rows > 0 {
        eprintln!("{} rows failed; see the error column", report.failed_rows);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(a) => run(a, None),
        Command::Rates(a) => run(a, Some(Target::RatesReport)),
        Command::Circuit(a) => run(a, Some(Target::Circuit)),
        Command::Robustness(a) => run(a, Some(Target::Robustness)),
        Command::Validate { config } => load(&config).map(|cfg| {
            println!("ok: target = {}", cfg.target);
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

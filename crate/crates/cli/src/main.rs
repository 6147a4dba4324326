use bo_scatter_cli::{load_config, run, summary, write_outputs, CliError, DEFAULT_OUTDIR, EXIT_USAGE};
use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

/// Runs one analysis described by a JSON configuration.
#[derive(Parser, Debug)]
#[command(name = "bo-scatter", version)]
struct Args {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the configuration.
    #[arg(long)]
    outdir: Option<PathBuf>,
    /// Seed for randomized corpora; overrides `seed` in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for dense linear algebra. One thread keeps reports bit-reproducible.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Suppress the per-check summary on stdout.
    #[arg(long)]
    quiet: bool,
}

fn execute(args: &Args) -> Result<i32, CliError> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    faer::set_global_parallelism(if args.threads == 1 { faer::Par::Seq } else { faer::Par::rayon(args.threads) });
    let outdir = args.outdir.clone().or_else(|| config.output_dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUTDIR));
    let result = run(&config)?;
    write_outputs(&result, &outdir)?;
    if !args.quiet {
        print!("{}", summary(&result.report));
    }
    Ok(result.exit_code())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match execute(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("bo-scatter: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

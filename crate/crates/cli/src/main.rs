use std::path::PathBuf;
use std::process::ExitCode;

use capelli_cli::{run, RSource, ReportFormat, RunConfig, Suite, CACHE_ENV};
use clap::Parser;

/// Exact verifier for classical and quantum Capelli identities.
#[derive(Parser, Debug)]
#[command(name = "capelli", version)]
struct Args {
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    /// Matrix dimension.
    #[arg(long = "N", default_value_t = 2)]
    dim: usize,
    /// Number of tensor factors.
    #[arg(long = "n", default_value_t = 2)]
    n: usize,
    /// "symbolic" or a rational q0; defaults to symbolic for n <= 2, else 2.
    #[arg(long)]
    q: Option<String>,
    /// "dj" or the path of an R-matrix file.
    #[arg(long, default_value = "dj")]
    rmatrix: String,
    /// Degree bound for completion, overriding the per-identity default.
    #[arg(long)]
    bound: Option<usize>,
    /// Directory for completed rewrite systems.
    #[arg(long, env = CACHE_ENV)]
    cache_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    report: ReportFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Lift the soft size guards.
    #[arg(long)]
    force: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = RunConfig {
        suite: args.suite,
        dim: args.dim,
        n: args.n,
        q: args.q,
        rmatrix: RSource::parse(&args.rmatrix),
        bound: args.bound,
        cache_dir: args.cache_dir,
        jobs: args.jobs,
        force: args.force,
    };
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("capelli: configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    for w in &report.runtime.warnings {
        eprintln!("capelli: warning: {w}");
    }
    let text = match args.report {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Text => report.to_text(),
    };
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("capelli: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(report.exit_code() as u8)
}

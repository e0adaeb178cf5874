//! `plate-harnack`: run one experiment described by a JSON config.
//!
//! Exit status: 0 on success (violations are reported, not fatal), 1 on a
//! runtime failure, 2 on a bad config, 3 when `--strict` sees violations.

mod config;
mod manifest;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::parse_config;

#[derive(Parser, Debug)]
#[command(name = "plate-harnack", version, about = "Plate-operator inequality and positivity experiments")]
struct Args {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 3 when any check is violated.
    #[arg(long)]
    strict: bool,
    /// Worker threads.
    #[arg(long, env = "PLATE_HARNACK_THREADS")]
    threads: Option<usize>,
    /// Seed for the randomized suites; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(n) = args.threads.filter(|&n| n > 0) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("thread pool: {e}");
        }
    }
    let out = args
        .out
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    let outcome = match run::run(&cfg, &out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{}: {e}", cfg.command.name());
            return ExitCode::from(1);
        }
    };
    if let Err(e) = manifest::write_manifest(&out) {
        eprintln!("manifest: {e}");
        return ExitCode::from(1);
    }
    println!(
        "{}: {} violation(s); results in {}",
        cfg.command.name(),
        outcome.violations,
        out.display()
    );
    if args.strict && outcome.violations > 0 {
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use gtrs::{run_path, Command, Kind, Output, RunError, Settings};
use rayon::prelude::*;

/// Generalized trust region subproblems: solve, classify, canonicalize,
/// check S-lemma queries, cross-check by brute force, or export the cone
/// program. One JSON report is written per input file.
#[derive(Debug, Parser)]
#[command(name = "gtrs", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Problem files (JSON).
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Target gap for ε-optimal points.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    tol_eig: Option<f64>,
    #[arg(long)]
    tol_cluster: Option<f64>,
    #[arg(long)]
    tol_dual: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the constraint kind of every file.
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Constant added to the objective for `slemma`.
    #[arg(long, allow_hyphen_values = true)]
    v: Option<f64>,
    /// Output file. For `export` with several inputs, a directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Process files on this many threads.
    #[arg(long)]
    parallel: Option<usize>,
    /// Add wall-clock timings to reports.
    #[arg(long)]
    timings: bool,
}

fn write_out(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GTRS_LOG", "warn")).init();
    let cli = Cli::parse();
    let settings = Settings {
        eps: cli.eps,
        tol_eig: cli.tol_eig,
        tol_cluster: cli.tol_cluster,
        tol_dual: cli.tol_dual,
        seed: cli.seed,
        kind: cli.kind,
        v: cli.v,
        timings: cli.timings,
    };

    let job = |f: &PathBuf| run_path(cli.command, f, &settings);
    let results: Vec<Result<Output, RunError>> = match cli.parallel {
        Some(n) if n > 1 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| cli.files.par_iter().map(job).collect()),
            Err(e) => {
                eprintln!("error: cannot start {n} threads: {e}");
                return ExitCode::from(1);
            }
        },
        _ => cli.files.iter().map(job).collect(),
    };

    let mut code = 0;
    let mut text = String::new();
    let several = cli.files.len() > 1;
    for (file, res) in cli.files.iter().zip(results) {
        match res {
            Ok(Output::Report(r)) => {
                text.push_str(&r.to_json());
                text.push('\n');
            }
            Ok(Output::Conic(c)) => match (&cli.out, several) {
                (Some(dir), true) => {
                    let stem = file.file_stem().unwrap_or_default().to_string_lossy();
                    let dest = dir.join(format!("{stem}.conic"));
                    if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&dest, &c)) {
                        eprintln!("error: {}: {e}", dest.display());
                        code = code.max(2);
                    }
                }
                (_, true) => {
                    text.push_str(&format!("# file: {}\n", file.display()));
                    text.push_str(&c);
                }
                (_, false) => text.push_str(&c),
            },
            Err(e) => {
                eprintln!("error: {e}");
                code = code.max(e.exit_code());
            }
        }
    }
    let dest = if cli.command == Command::Export && several { None } else { cli.out.as_deref() };
    if !text.is_empty() || dest.is_some() {
        if let Err(e) = write_out(dest, &text) {
            eprintln!("error: writing output: {e}");
            code = code.max(2);
        }
    }
    ExitCode::from(code as u8)
}

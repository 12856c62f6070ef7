use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jigsaw_rl::compatibility::Measure;
use jigsaw_rl::PuzzleType;
use jigsaw_rl_cli::bench::{DEFAULT_REPEATS, WORKERS_ENV};
use jigsaw_rl_cli::commands::{evaluate_files, print_scores};
use jigsaw_rl_cli::format::write_atomic;
use jigsaw_rl_cli::{CliError, GenerateOptions, RunConfig};

#[derive(Parser)]
#[command(
    name = "jigsaw-rl",
    version,
    about = "Square jigsaw puzzles by relaxation labeling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cut an image into a shuffled puzzle bundle.
    Generate {
        image: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 28)]
        piece_size: usize,
        #[arg(long = "type", default_value = "type1", value_parser = parse_type)]
        puzzle_type: PuzzleType,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scale the image to the grid instead of cropping it.
        #[arg(long)]
        resize: bool,
    },
    /// Solve a bundle and write the solution file.
    Solve {
        bundle: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Write per-iteration records as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Score a solution against the bundle ground truth.
    Evaluate {
        solution: PathBuf,
        bundle: PathBuf,
        /// Also write the scores as JSON.
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Paste the pieces of a solution (or the ground truth) into an image.
    Render {
        bundle: PathBuf,
        #[arg(long)]
        solution: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Solve and score every bundle in a directory; prints CSV.
    Bench {
        corpus: PathBuf,
        /// Runs for bundles with more than two constant pieces.
        #[arg(long, default_value_t = DEFAULT_REPEATS)]
        repeats: usize,
        #[arg(long, env = WORKERS_ENV, default_value_t = 1)]
        workers: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.7)]
    alpha: f64,
    #[arg(long, default_value_t = 1000)]
    max_iterations: usize,
    /// Percentile parameter; defaults to 3 (type 1) or 1.5 (type 2).
    #[arg(long)]
    k: Option<f64>,
    #[arg(long, default_value = "percentile")]
    measure: Measure,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    branch_parallel: bool,
    #[arg(long, default_value_t = jigsaw_rl::PHOTO_CONSTANT_TOLERANCE)]
    constant_tolerance: f64,
}

impl RunArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            epsilon: self.epsilon,
            alpha: self.alpha,
            max_iterations: self.max_iterations,
            k: self.k,
            measure: self.measure,
            seed: self.seed,
            branch_parallel: self.branch_parallel,
            trace: false,
            constant_tolerance: self.constant_tolerance,
        }
    }
}

fn parse_type(s: &str) -> Result<PuzzleType, String> {
    match s {
        "type1" | "1" => Ok(PuzzleType::Type1),
        "type2" | "2" => Ok(PuzzleType::Type2),
        _ => Err(format!(
            "unknown puzzle type {s:?}; expected type1 or type2"
        )),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate {
            image,
            out,
            rows,
            cols,
            piece_size,
            puzzle_type,
            seed,
            resize,
        } => {
            let manifest = jigsaw_rl_cli::generate(&GenerateOptions {
                image,
                out: out.clone(),
                rows,
                cols,
                piece_size,
                puzzle_type,
                seed,
                resize,
            })?;
            println!(
                "wrote {} pieces to {}",
                manifest.pieces.len(),
                out.display()
            );
        }
        Command::Solve {
            bundle,
            out,
            trace,
            run,
        } => {
            let file = jigsaw_rl_cli::solve(&bundle, &out, &run.config(), trace.as_deref())?;
            println!(
                "ALC={:.6} phases={} iterations={}",
                file.alc, file.diagnostics.phases, file.diagnostics.total_iterations
            );
        }
        Command::Evaluate {
            solution,
            bundle,
            record,
        } => {
            let rec = evaluate_files(&solution, &bundle)?;
            print_scores(std::io::stdout().lock(), &rec)
                .map_err(|e| CliError::Other(e.to_string()))?;
            if let Some(path) = record {
                let json =
                    serde_json::to_vec_pretty(&rec).map_err(|e| CliError::Other(e.to_string()))?;
                write_atomic(&path, &json)?;
            }
        }
        Command::Render {
            bundle,
            solution,
            out,
        } => jigsaw_rl_cli::render(&bundle, solution.as_deref(), &out)?,
        Command::Bench {
            corpus,
            repeats,
            workers,
            out,
            run,
        } => {
            let report = jigsaw_rl_cli::bench(&corpus, &run.config(), repeats, workers)?;
            let csv = report.to_csv()?;
            match out {
                Some(path) => write_atomic(&path, &csv)?,
                None => std::io::stdout()
                    .lock()
                    .write_all(&csv)
                    .map_err(|e| CliError::Other(e.to_string()))?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::commands::{evaluate_solution, solve_bundle, RunConfig};
use crate::error::CliError;
use crate::format::{Bundle, SolutionFile, MANIFEST_FILE};

/// Runs per bundle with more than two constant pieces.
pub const DEFAULT_REPEATS: usize = 10;

/// Env var that caps the number of bench workers.
pub const WORKERS_ENV: &str = "JIGSAW_RL_WORKERS";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub bundle: String,
    pub puzzle_type: String,
    pub rows: usize,
    pub cols: usize,
    pub constant_pieces: usize,
    pub runs: usize,
    pub dc: f64,
    pub nc: f64,
    /// Fraction of runs that were perfect reconstructions.
    pub pr: f64,
    pub alc: f64,
    pub phases: f64,
    pub wall_ms: f64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub rows: Vec<BenchRow>,
}

impl RunReport {
    /// Means over successful bundles; `pr` sums to the expected PR count.
    pub fn aggregate(&self) -> Option<BenchRow> {
        let ok: Vec<&BenchRow> = self.rows.iter().filter(|r| r.error.is_empty()).collect();
        if self.rows.is_empty() {
            return None;
        }
        let count = ok.len().max(1) as f64;
        let mean = |f: fn(&BenchRow) -> f64| ok.iter().map(|r| f(r)).sum::<f64>() / count;
        Some(BenchRow {
            bundle: "mean".into(),
            puzzle_type: String::new(),
            rows: 0,
            cols: 0,
            constant_pieces: ok.iter().map(|r| r.constant_pieces).sum(),
            runs: ok.iter().map(|r| r.runs).sum(),
            dc: mean(|r| r.dc),
            nc: mean(|r| r.nc),
            pr: ok.iter().map(|r| r.pr).sum(),
            alc: mean(|r| r.alc),
            phases: mean(|r| r.phases),
            wall_ms: ok.iter().map(|r| r.wall_ms).sum(),
            error: format!("{} failed", self.rows.len() - ok.len()),
        })
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            w.write_record(HEADER).map_err(csv_err)?;
        }
        for row in self.rows.iter().chain(self.aggregate().as_ref()) {
            w.serialize(row).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| CliError::Other(e.to_string()))
    }
}

const HEADER: [&str; 13] = [
    "bundle",
    "puzzle_type",
    "rows",
    "cols",
    "constant_pieces",
    "runs",
    "dc",
    "nc",
    "pr",
    "alc",
    "phases",
    "wall_ms",
    "error",
];

fn csv_err(e: csv::Error) -> CliError {
    CliError::Other(e.to_string())
}

/// Bundle directories directly under `corpus`, sorted by name.
pub fn list_bundles(corpus: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut dirs = Vec::new();
    for entry in fs::read_dir(corpus).map_err(|e| CliError::io(corpus, e))? {
        let path = entry.map_err(|e| CliError::io(corpus, e))?.path();
        if path.join(MANIFEST_FILE).is_file() {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}

/// Seed of run `run` on bundle `index`.
pub fn run_seed(base: u64, index: usize, run: usize) -> u64 {
    (base ^ index as u64).wrapping_add((run as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn bench_one(
    dir: &Path,
    index: usize,
    config: &RunConfig,
    base_seed: u64,
    repeats: usize,
) -> BenchRow {
    let mut row = BenchRow {
        bundle: dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        ..BenchRow::default()
    };
    if let Err(e) = bench_runs(dir, index, config, base_seed, repeats, &mut row) {
        row.error = e
            .to_string()
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
    }
    row
}

fn bench_runs(
    dir: &Path,
    index: usize,
    config: &RunConfig,
    base_seed: u64,
    repeats: usize,
    row: &mut BenchRow,
) -> Result<(), CliError> {
    let bundle = Bundle::open(dir)?;
    row.puzzle_type = format!("{:?}", bundle.manifest.puzzle_type).to_lowercase();
    row.rows = bundle.manifest.rows;
    row.cols = bundle.manifest.cols;
    let mut first = true;
    let mut runs = 1;
    let mut run = 0;
    while run < runs {
        let start = Instant::now();
        let solution = solve_bundle(&bundle, config, run_seed(base_seed, index, run))?;
        let wall = start.elapsed().as_secs_f64() * 1e3;
        if first {
            row.constant_pieces = solution.diagnostics.constant_pieces;
            if row.constant_pieces > 2 {
                runs = repeats.max(1);
            }
            first = false;
        }
        let scores = evaluate_solution(&SolutionFile::from_solution(&solution), &bundle)?;
        row.dc += scores.dc;
        row.nc += scores.nc;
        row.pr += f64::from(u8::from(scores.pr));
        row.alc += solution.alc;
        row.phases += solution.diagnostics.phases as f64;
        row.wall_ms += wall;
        run += 1;
    }
    let r = runs as f64;
    row.runs = runs;
    row.dc /= r;
    row.nc /= r;
    row.pr /= r;
    row.alc /= r;
    row.phases /= r;
    row.wall_ms /= r;
    Ok(())
}

/// Solves and scores every bundle of a corpus. Failures become rows with an
/// error message. `workers` bounds the number of bundles solved at once.
pub fn bench(
    corpus: &Path,
    config: &RunConfig,
    repeats: usize,
    workers: usize,
) -> Result<RunReport, CliError> {
    use rayon::prelude::*;
    let dirs = list_bundles(corpus)?;
    let base_seed = config.seed.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Other(e.to_string()))?;
    let rows = pool.install(|| {
        dirs.par_iter()
            .enumerate()
            .map(|(i, dir)| bench_one(dir, i, config, base_seed, repeats))
            .collect()
    });
    Ok(RunReport { rows })
}

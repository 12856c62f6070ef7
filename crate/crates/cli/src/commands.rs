use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use image::RgbImage;
use jigsaw_rl::compatibility::Measure;
use jigsaw_rl::engine::PhaseConfig;
use jigsaw_rl::{
    evaluate, Arrangement, GridDims, Orientation, PieceSet, PuzzleType, Scores, Solution,
    SolverConfig, PHOTO_CONSTANT_TOLERANCE,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::format::{
    write_atomic, write_toml, Bundle, GroundTruthFile, Manifest, SolutionFile, TruePiece,
    FORMAT_VERSION, GROUND_TRUTH_FILE, MANIFEST_FILE,
};

/// Solver settings shared by `solve` and `bench`.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub epsilon: f64,
    pub alpha: f64,
    pub max_iterations: usize,
    /// `None` picks the per-type default.
    pub k: Option<f64>,
    pub measure: Measure,
    /// `None` falls back to the seed recorded in the manifest.
    pub seed: Option<u64>,
    pub branch_parallel: bool,
    pub trace: bool,
    pub constant_tolerance: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let phase = PhaseConfig::default();
        RunConfig {
            epsilon: phase.epsilon,
            alpha: phase.alpha,
            max_iterations: phase.max_iterations,
            k: None,
            measure: Measure::Percentile,
            seed: None,
            branch_parallel: false,
            trace: false,
            constant_tolerance: PHOTO_CONSTANT_TOLERANCE,
        }
    }
}

impl RunConfig {
    pub fn solver_config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            phase: PhaseConfig {
                epsilon: self.epsilon,
                alpha: self.alpha,
                max_iterations: self.max_iterations,
            },
            measure: self.measure,
            k: self.k,
            seed,
            branch_parallel: self.branch_parallel,
            trace: self.trace,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GenerateOptions {
    pub image: PathBuf,
    pub out: PathBuf,
    pub rows: usize,
    pub cols: usize,
    pub piece_size: usize,
    pub puzzle_type: PuzzleType,
    pub seed: u64,
    /// Scale the image to exactly fit the grid instead of cropping.
    pub resize: bool,
}

pub fn piece_file_name(index: usize) -> String {
    format!("piece_{index:04}.png")
}

/// Cuts an image into a shuffled (and, for type 2, rotated) bundle.
pub fn generate(opts: &GenerateOptions) -> Result<Manifest, CliError> {
    let image = image::open(&opts.image)
        .map_err(|e| CliError::input(format!("{}: {e}", opts.image.display())))?
        .to_rgb8();
    generate_from_image(&image, opts)
}

pub fn generate_from_image(image: &RgbImage, opts: &GenerateOptions) -> Result<Manifest, CliError> {
    let dims = GridDims::new(opts.rows, opts.cols).map_err(|e| CliError::Usage(e.to_string()))?;
    if opts.piece_size == 0 {
        return Err(CliError::Usage("piece size must be positive".into()));
    }
    let resized;
    let image = if opts.resize {
        let (w, h) = (
            (opts.cols * opts.piece_size) as u32,
            (opts.rows * opts.piece_size) as u32,
        );
        resized = image::imageops::resize(image, w, h, image::imageops::FilterType::Lanczos3);
        &resized
    } else {
        image
    };
    let cut = jigsaw_rl::pictorial::cut_rgb(image, dims, opts.piece_size)?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut order: Vec<usize> = (0..dims.len()).collect();
    order.shuffle(&mut rng);
    let rotations: Vec<Orientation> = order
        .iter()
        .map(|_| match opts.puzzle_type {
            PuzzleType::Type1 => Orientation::Deg0,
            PuzzleType::Type2 => Orientation::from_quarters(rng.random_range(0..4)),
        })
        .collect();

    fs::create_dir_all(&opts.out).map_err(|e| CliError::io(&opts.out, e))?;
    let mut names = Vec::with_capacity(order.len());
    let mut truth = Vec::with_capacity(order.len());
    for (k, (&src, &rot)) in order.iter().zip(&rotations).enumerate() {
        let name = piece_file_name(k);
        let piece = rotate_image(&cut[src], rot);
        write_png(&opts.out.join(&name), &piece)?;
        names.push(name);
        let pos = dims.position(src);
        truth.push(TruePiece {
            row: pos.row - 1,
            col: pos.col - 1,
            orientation: rot.inverse(),
            applied_rotation: rot,
        });
    }
    let manifest = Manifest {
        version: FORMAT_VERSION,
        rows: opts.rows,
        cols: opts.cols,
        piece_size: opts.piece_size,
        puzzle_type: opts.puzzle_type,
        seed: opts.seed,
        pieces: names,
    };
    write_toml(&opts.out.join(MANIFEST_FILE), &manifest)?;
    write_toml(
        &opts.out.join(GROUND_TRUTH_FILE),
        &GroundTruthFile {
            version: FORMAT_VERSION,
            pieces: truth,
        },
    )?;
    Ok(manifest)
}

pub fn rotate_image(img: &RgbImage, rot: Orientation) -> RgbImage {
    match rot {
        Orientation::Deg0 => img.clone(),
        Orientation::Deg90 => image::imageops::rotate90(img),
        Orientation::Deg180 => image::imageops::rotate180(img),
        Orientation::Deg270 => image::imageops::rotate270(img),
    }
}

pub fn write_png(path: &Path, img: &RgbImage) -> Result<(), CliError> {
    let mut bytes = Vec::new();
    img.write_to(
        &mut std::io::Cursor::new(&mut bytes),
        image::ImageFormat::Png,
    )
    .map_err(|e| CliError::Other(format!("encoding {}: {e}", path.display())))?;
    write_atomic(path, &bytes)
}

/// Loads the bundle pieces and runs the solver matching its type.
pub fn solve_bundle(
    bundle: &Bundle,
    config: &RunConfig,
    seed: u64,
) -> Result<Solution<f64>, CliError> {
    let rgb = bundle.load_pieces()?;
    let pieces = PieceSet::from_rgb(&rgb, config.constant_tolerance)?;
    let dims = bundle.manifest.dims()?;
    let solver = config.solver_config(seed);
    let solution = match bundle.manifest.puzzle_type {
        PuzzleType::Type1 => jigsaw_rl::solve_type1(&pieces, dims, &solver)?,
        PuzzleType::Type2 => jigsaw_rl::solve_type2(&pieces, dims, &solver)?,
    };
    Ok(solution)
}

/// Solves a bundle and writes the solution file, plus JSON-lines trace
/// records when a trace path is given.
pub fn solve(
    bundle_dir: &Path,
    out: &Path,
    config: &RunConfig,
    trace_out: Option<&Path>,
) -> Result<SolutionFile, CliError> {
    let bundle = Bundle::open(bundle_dir)?;
    let mut config = config.clone();
    config.trace |= trace_out.is_some();
    let seed = config.seed.unwrap_or(bundle.manifest.seed);
    let solution = solve_bundle(&bundle, &config, seed)?;
    let file = SolutionFile::from_solution(&solution);
    write_toml(out, &file)?;
    if let Some(path) = trace_out {
        let mut lines = Vec::new();
        for record in &solution.diagnostics.trace {
            serde_json::to_writer(&mut lines, record)
                .map_err(|e| CliError::Other(e.to_string()))?;
            lines.push(b'\n');
        }
        write_atomic(path, &lines)?;
    }
    Ok(file)
}

pub fn read_solution(path: &Path) -> Result<SolutionFile, CliError> {
    crate::format::read_toml(path)
}

/// Machine-readable evaluation result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub bundle: String,
    pub puzzle_type: PuzzleType,
    pub rows: usize,
    pub cols: usize,
    #[serde(flatten)]
    pub scores: Scores,
}

pub fn evaluate_solution(solution: &SolutionFile, bundle: &Bundle) -> Result<Scores, CliError> {
    let gt = bundle.ground_truth()?;
    if solution.placements.len() != bundle.manifest.pieces.len() {
        return Err(CliError::input(
            "solution and bundle disagree on the piece count",
        ));
    }
    let sol = solution.arrangement()?;
    Ok(evaluate(&sol, &gt, bundle.manifest.puzzle_type)?)
}

pub fn evaluate_files(solution: &Path, bundle_dir: &Path) -> Result<EvaluationRecord, CliError> {
    let bundle = Bundle::open(bundle_dir)?;
    let file = read_solution(solution)?;
    let scores = evaluate_solution(&file, &bundle)?;
    Ok(EvaluationRecord {
        bundle: bundle_dir.display().to_string(),
        puzzle_type: bundle.manifest.puzzle_type,
        rows: bundle.manifest.rows,
        cols: bundle.manifest.cols,
        scores,
    })
}

/// Pastes every piece, turned by its orientation, at its placed cell.
pub fn render_arrangement(
    pieces: &[RgbImage],
    arrangement: &Arrangement,
    piece_size: usize,
) -> RgbImage {
    let dims = arrangement.dims();
    let p = piece_size as u32;
    let mut canvas = RgbImage::new(dims.cols() as u32 * p, dims.rows() as u32 * p);
    for (img, place) in pieces.iter().zip(arrangement.placement()) {
        let rotated = rotate_image(img, place.orientation);
        let x = (place.position.col - 1) as i64 * p as i64;
        let y = (place.position.row - 1) as i64 * p as i64;
        image::imageops::replace(&mut canvas, &rotated, x, y);
    }
    canvas
}

/// Renders a solution file, or the ground truth when no solution is given.
pub fn render(bundle_dir: &Path, solution: Option<&Path>, out: &Path) -> Result<(), CliError> {
    let bundle = Bundle::open(bundle_dir)?;
    let arrangement = match solution {
        Some(path) => {
            let file = read_solution(path)?;
            if file.placements.len() != bundle.manifest.pieces.len() {
                return Err(CliError::input(
                    "solution and bundle disagree on the piece count",
                ));
            }
            file.arrangement()?
        }
        None => bundle.ground_truth()?,
    };
    let pieces = bundle.load_pieces()?;
    let canvas = render_arrangement(&pieces, &arrangement, bundle.manifest.piece_size);
    write_png(out, &canvas)
}

pub fn print_scores(mut w: impl Write, record: &EvaluationRecord) -> std::io::Result<()> {
    writeln!(
        w,
        "DC={:.4} NC={:.4} PR={}",
        record.scores.dc, record.scores.nc, record.scores.pr
    )
}

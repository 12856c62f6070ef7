//! On-disk schemas. Every file carries a `version` field; grid indices are
//! 0-based and orientations are clockwise degrees.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use jigsaw_rl::{
    Arrangement, Diagnostics, GridDims, Orientation, Placement, Position, PuzzleType, Solution,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.toml";

/// `manifest.toml`: what a blind solver gets to see.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub rows: usize,
    pub cols: usize,
    pub piece_size: usize,
    pub puzzle_type: PuzzleType,
    pub seed: u64,
    /// Piece images in presentation order, relative to the bundle directory.
    pub pieces: Vec<String>,
}

impl Manifest {
    pub fn dims(&self) -> Result<GridDims, CliError> {
        GridDims::new(self.rows, self.cols).map_err(|e| CliError::input(format!("manifest: {e}")))
    }

    fn validate(&self) -> Result<(), CliError> {
        check_version(self.version, MANIFEST_FILE)?;
        let dims = self.dims()?;
        if self.pieces.len() != dims.len() {
            return Err(CliError::input(format!(
                "manifest lists {} pieces for a {}x{} grid",
                self.pieces.len(),
                self.rows,
                self.cols
            )));
        }
        if self.piece_size == 0 {
            return Err(CliError::input("manifest: piece_size must be positive"));
        }
        Ok(())
    }
}

/// One entry of `ground_truth.toml`, in presentation order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruePiece {
    pub row: usize,
    pub col: usize,
    /// Clockwise rotation that restores the presented piece.
    pub orientation: Orientation,
    /// Clockwise rotation applied when the bundle was generated.
    pub applied_rotation: Orientation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthFile {
    pub version: u32,
    pub pieces: Vec<TruePiece>,
}

impl GroundTruthFile {
    pub fn arrangement(&self, dims: GridDims) -> Result<Arrangement, CliError> {
        check_version(self.version, GROUND_TRUTH_FILE)?;
        for p in &self.pieces {
            if p.orientation.compose(p.applied_rotation) != Orientation::Deg0 {
                return Err(CliError::input(format!(
                    "ground truth piece at ({}, {}): orientation does not undo the applied rotation",
                    p.row, p.col
                )));
            }
        }
        let placement = self
            .pieces
            .iter()
            .map(|p| to_placement(p.row, p.col, p.orientation))
            .collect();
        Arrangement::new(dims, placement).map_err(|e| CliError::input(format!("ground truth: {e}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacedPiece {
    pub row: usize,
    pub col: usize,
    pub orientation: Orientation,
}

/// `solution.toml`: piece `i` of the manifest goes to `placements[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub version: u32,
    pub puzzle_type: PuzzleType,
    pub rows: usize,
    pub cols: usize,
    pub alc: f64,
    pub placements: Vec<PlacedPiece>,
    pub diagnostics: Diagnostics,
}

impl SolutionFile {
    pub fn from_solution<T>(solution: &Solution<T>) -> SolutionFile {
        let mut diagnostics = solution.diagnostics.clone();
        diagnostics.anchors.clear();
        diagnostics.trace.clear();
        SolutionFile {
            version: FORMAT_VERSION,
            puzzle_type: solution.puzzle_type,
            rows: solution.dims.rows(),
            cols: solution.dims.cols(),
            alc: solution.alc,
            placements: solution
                .placement
                .iter()
                .map(|p| PlacedPiece {
                    row: p.position.row - 1,
                    col: p.position.col - 1,
                    orientation: p.orientation,
                })
                .collect(),
            diagnostics,
        }
    }

    pub fn arrangement(&self) -> Result<Arrangement, CliError> {
        check_version(self.version, "solution")?;
        let dims = GridDims::new(self.rows, self.cols)
            .map_err(|e| CliError::input(format!("solution: {e}")))?;
        let placement = self
            .placements
            .iter()
            .map(|p| to_placement(p.row, p.col, p.orientation))
            .collect();
        Arrangement::new(dims, placement).map_err(|e| CliError::input(format!("solution: {e}")))
    }
}

fn to_placement(row: usize, col: usize, orientation: Orientation) -> Placement {
    Placement {
        position: Position::new(row + 1, col + 1),
        orientation,
    }
}

fn check_version(version: u32, what: &str) -> Result<(), CliError> {
    if version != FORMAT_VERSION {
        return Err(CliError::input(format!(
            "{what}: unsupported version {version}"
        )));
    }
    Ok(())
}

/// Replaces `path` in one step by writing a sibling temp file and renaming it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_toml<S: Serialize>(path: &Path, value: &S) -> Result<(), CliError> {
    let text = toml::to_string(value)
        .map_err(|e| CliError::Other(format!("serializing {}: {e}", path.display())))?;
    write_atomic(path, text.as_bytes())
}

pub fn read_toml<D: DeserializeOwned>(path: &Path) -> Result<D, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// A puzzle directory: manifest, piece images and an optional ground truth.
#[derive(Clone, Debug)]
pub struct Bundle {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

impl Bundle {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Bundle, CliError> {
        let dir = dir.into();
        let manifest: Manifest = read_toml(&dir.join(MANIFEST_FILE))?;
        manifest.validate()?;
        for name in &manifest.pieces {
            if !dir.join(name).is_file() {
                return Err(CliError::input(format!(
                    "missing piece file {}",
                    dir.join(name).display()
                )));
            }
        }
        Ok(Bundle { dir, manifest })
    }

    pub fn piece_paths(&self) -> impl Iterator<Item = PathBuf> + '_ {
        self.manifest.pieces.iter().map(|name| self.dir.join(name))
    }

    pub fn load_pieces(&self) -> Result<Vec<image::RgbImage>, CliError> {
        let size = self.manifest.piece_size as u32;
        self.piece_paths()
            .map(|path| {
                let img = image::open(&path)
                    .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?
                    .to_rgb8();
                if img.dimensions() != (size, size) {
                    return Err(CliError::input(format!(
                        "{} is {}x{}, expected {size}x{size}",
                        path.display(),
                        img.width(),
                        img.height()
                    )));
                }
                Ok(img)
            })
            .collect()
    }

    pub fn has_ground_truth(&self) -> bool {
        self.dir.join(GROUND_TRUTH_FILE).is_file()
    }

    pub fn ground_truth(&self) -> Result<Arrangement, CliError> {
        let path = self.dir.join(GROUND_TRUTH_FILE);
        if !path.is_file() {
            return Err(CliError::input(format!(
                "{} has no ground truth",
                self.dir.display()
            )));
        }
        let gt: GroundTruthFile = read_toml(&path)?;
        if gt.pieces.len() != self.manifest.pieces.len() {
            return Err(CliError::input(
                "ground truth and manifest disagree on the piece count",
            ));
        }
        gt.arrangement(self.manifest.dims()?)
    }
}

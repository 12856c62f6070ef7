//! Square jigsaw puzzle solving by multi-phase relaxation labeling.
//!
//! Pieces are objects, grid positions (with an orientation for puzzles of
//! unknown orientation) are labels. Each phase runs the relaxation dynamics
//! until some assignment is confident, then anchors that piece, so every
//! returned solution is a valid placement.
//!
//! ```
//! use jigsaw_rl::{GridDims, PieceRaster, PieceSet, SolverConfig};
//!
//! let dims = GridDims::new(1, 2).unwrap();
//! let pieces = vec![
//!     PieceRaster::from_fn(4, |_, c| [c as f64 * 10.0, 0.0, 0.0]),
//!     PieceRaster::from_fn(4, |_, c| [40.0 + c as f64 * 10.0, 0.0, 0.0]),
//! ];
//! let pieces = PieceSet::new(pieces, jigsaw_rl::SYNTHETIC_CONSTANT_TOLERANCE).unwrap();
//! let solution = jigsaw_rl::solve_type1::<f64>(&pieces, dims, &SolverConfig::default()).unwrap();
//! assert!(solution.is_feasible());
//! ```

pub mod compatibility;
pub mod engine;
pub mod error;
pub mod evaluation;
pub mod labeling;
pub mod pictorial;
pub mod problem;
pub mod scalar;
pub mod solver;

pub use compatibility::{build_compatibility, CompatibilityParams, CompatibilityTable, Measure};
pub use engine::{alc, alc_of, support, update, CoefficientView, PhaseConfig};
pub use error::{Error, Result};
pub use evaluation::{best_rotation_scores, evaluate, Arrangement, GroundTruth, Scores};
pub use labeling::Labeling;
pub use pictorial::{
    cut_image, load_rgb, CutImage, PieceRaster, PieceSet, PHOTO_CONSTANT_TOLERANCE,
    SYNTHETIC_CONSTANT_TOLERANCE,
};
pub use problem::{GridDims, Label, Orientation, Position, ProblemInstance, PuzzleType, Relation};
pub use scalar::Scalar;
pub use solver::{
    solve_balanced_baseline, solve_type1, solve_type1_with_table, solve_type2,
    solve_type2_with_table, Diagnostics, Placement, Solution, SolverConfig,
};

pub type Labeling64 = Labeling<f64>;
pub type Labeling32 = Labeling<f32>;
pub type CompatibilityTable64 = CompatibilityTable<f64>;
pub type CompatibilityTable32 = CompatibilityTable<f32>;
pub type Solution64 = Solution<f64>;
pub type Solution32 = Solution<f32>;

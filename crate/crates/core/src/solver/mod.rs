//! Multi-phase solvers.
//!
//! Every phase runs the relaxation dynamics until one entry is confident
//! enough, then anchors exactly one piece. After `n` phases the labeling is a
//! (type 2) permutation labeling, so every solution is feasible.

mod baseline;
mod multiphase;
mod type1;
mod type2;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use baseline::{solve_balanced_baseline, BaselineConfig};
pub use multiphase::{
    select_anchor_candidate, AnchorCandidate, Axis, AxisState, BranchChoice, SolverState,
};
pub use type1::{solve_type1, solve_type1_with_table};
pub use type2::{init_labeling_type2, select_anchor_piece, solve_type2, solve_type2_with_table};

use crate::compatibility::{CompatibilityParams, Measure};
use crate::engine::{PhaseConfig, TraceRecord};
use crate::labeling::{AnchorEvent, Labeling};
use crate::problem::{GridDims, Orientation, Position, PuzzleType};

/// Default percentile for known-orientation puzzles.
pub const DEFAULT_K_TYPE1: f64 = 3.0;
/// Default percentile for unknown-orientation puzzles.
pub const DEFAULT_K_TYPE2: f64 = 1.5;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub phase: PhaseConfig,
    pub measure: Measure,
    /// Percentile parameter; `None` selects the per-type default.
    pub k: Option<f64>,
    /// Seeds the constant-piece redraw and the Type 2 bias orientation.
    pub seed: u64,
    /// Solve translation branches on the rayon pool.
    pub branch_parallel: bool,
    /// Keep per-iteration trace records in the diagnostics.
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            phase: PhaseConfig::default(),
            measure: Measure::Percentile,
            k: None,
            seed: 0,
            branch_parallel: false,
            trace: false,
        }
    }
}

impl SolverConfig {
    pub fn k_for(&self, puzzle_type: PuzzleType) -> f64 {
        self.k.unwrap_or(match puzzle_type {
            PuzzleType::Type1 => DEFAULT_K_TYPE1,
            PuzzleType::Type2 => DEFAULT_K_TYPE2,
        })
    }

    pub fn compat_params(&self, puzzle_type: PuzzleType) -> CompatibilityParams {
        CompatibilityParams {
            measure: self.measure,
            k: self.k_for(puzzle_type),
            seed: self.seed,
        }
    }
}

/// Where a piece ends up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Placement {
    pub position: Position,
    pub orientation: Orientation,
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.position, self.orientation)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Phases run in the returned branch.
    pub phases: usize,
    pub total_iterations: usize,
    pub translations: usize,
    /// Anchors placed without any entry crossing the threshold.
    pub forced_anchors: usize,
    pub max_iteration_stops: usize,
    /// Branch decisions of the returned solution, e.g. `v:translate,h:keep`.
    pub branch: String,
    /// Final ALC of every completed branch, in exploration order.
    pub branch_alcs: Vec<f64>,
    pub constant_pieces: usize,
    pub redrawn_compatibilities: usize,
    /// Type 2: the orientation-biased piece and its orientation in degrees.
    pub anchor_piece: Option<usize>,
    pub bias_degrees: Option<u16>,
    /// Type 2: final ALC per run (two runs for rectangular grids).
    pub run_alcs: Vec<f64>,
    pub winning_run: Option<usize>,
    #[serde(skip)]
    pub anchors: Vec<AnchorEvent>,
    #[serde(skip)]
    pub trace: Vec<TraceRecord>,
}

#[derive(Clone, Debug)]
pub struct Solution<T> {
    pub puzzle_type: PuzzleType,
    pub dims: GridDims,
    /// Placement of piece `i` at index `i`.
    pub placement: Vec<Placement>,
    pub alc: f64,
    pub labeling: Labeling<T>,
    pub diagnostics: Diagnostics,
}

impl<T> Solution<T> {
    /// Each grid position holds exactly one piece.
    pub fn is_feasible(&self) -> bool {
        if self.placement.len() != self.dims.len() {
            return false;
        }
        let mut seen = vec![false; self.dims.len()];
        for p in &self.placement {
            if !self.dims.contains(p.position) {
                return false;
            }
            let idx = self.dims.index(p.position);
            if std::mem::replace(&mut seen[idx], true) {
                return false;
            }
            if self.puzzle_type == PuzzleType::Type1 && p.orientation != Orientation::Deg0 {
                return false;
            }
        }
        true
    }
}

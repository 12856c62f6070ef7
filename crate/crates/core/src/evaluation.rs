//! Reconstruction metrics: direct comparison, neighbor comparison and
//! perfect reconstruction, with global-rotation selection for unknown
//! orientations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{GridDims, Orientation, Position, PuzzleType, Relation};
use crate::solver::{Placement, Solution};

/// Pieces placed on a grid; piece `i` sits at `placement[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrangement {
    dims: GridDims,
    placement: Vec<Placement>,
}

/// The true arrangement of a puzzle.
pub type GroundTruth = Arrangement;

impl Arrangement {
    /// Fails unless the placements form a bijection with the grid positions.
    pub fn new(dims: GridDims, placement: Vec<Placement>) -> Result<Arrangement> {
        if placement.len() != dims.len() {
            return Err(Error::PieceCount {
                expected: dims.len(),
                found: placement.len(),
            });
        }
        let mut seen = vec![false; dims.len()];
        for p in &placement {
            dims.check(p.position)?;
            if std::mem::replace(&mut seen[dims.index(p.position)], true) {
                return Err(Error::DimensionMismatch(format!(
                    "position {} used twice",
                    p.position
                )));
            }
        }
        Ok(Arrangement { dims, placement })
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn placement(&self) -> &[Placement] {
        &self.placement
    }

    /// Piece index at each grid position, row-major.
    pub fn occupancy(&self) -> Vec<usize> {
        let mut at = vec![0; self.dims.len()];
        for (piece, p) in self.placement.iter().enumerate() {
            at[self.dims.index(p.position)] = piece;
        }
        at
    }

    /// The whole arrangement turned `quarters` times 90° clockwise.
    pub fn rotated(&self, quarters: usize) -> Arrangement {
        let turn = Orientation::from_quarters(quarters);
        let mut dims = self.dims;
        let mut placement = self.placement.clone();
        for _ in 0..quarters % 4 {
            let rows = dims.rows();
            for p in &mut placement {
                p.position = Position::new(p.position.col, rows + 1 - p.position.row);
            }
            dims = dims.transposed();
        }
        for p in &mut placement {
            p.orientation = p.orientation.compose(turn);
        }
        Arrangement { dims, placement }
    }
}

impl<T> Solution<T> {
    pub fn arrangement(&self) -> Result<Arrangement> {
        Arrangement::new(self.dims, self.placement.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub dc: f64,
    pub nc: f64,
    pub pr: bool,
}

fn check_dims(sol: &Arrangement, gt: &Arrangement) -> Result<()> {
    if sol.dims != gt.dims {
        return Err(Error::DimensionMismatch(format!(
            "solution is {}x{}, ground truth is {}x{}",
            sol.dims.rows(),
            sol.dims.cols(),
            gt.dims.rows(),
            gt.dims.cols()
        )));
    }
    Ok(())
}

/// Fraction of pieces in their true position and orientation.
pub fn direct_comparison(sol: &Arrangement, gt: &GroundTruth) -> Result<f64> {
    check_dims(sol, gt)?;
    let hits = sol
        .placement
        .iter()
        .zip(&gt.placement)
        .filter(|(s, g)| s == g)
        .count();
    Ok(hits as f64 / gt.dims.len() as f64)
}

/// Fraction of right and down adjacencies of the solution that also occur in
/// the ground truth with the same relation and relative orientation.
pub fn neighbor_comparison(sol: &Arrangement, gt: &GroundTruth) -> Result<f64> {
    check_dims(sol, gt)?;
    let dims = gt.dims;
    let total = dims.adjacency_count();
    if total == 0 {
        return Ok(1.0);
    }
    let at = sol.occupancy();
    let mut hits = 0;
    for pos in dims.positions() {
        let a = at[dims.index(pos)];
        for rel in [Relation::Right, Relation::Down] {
            let Some(npos) = dims.neighbor(pos, rel) else {
                continue;
            };
            let b = at[dims.index(npos)];
            let (sa, sb) = (sol.placement[a], sol.placement[b]);
            let (ga, gb) = (gt.placement[a], gt.placement[b]);
            let relative =
                |x: Placement, y: Placement| y.orientation.compose(x.orientation.inverse());
            if dims.neighbor(ga.position, rel) == Some(gb.position)
                && relative(sa, sb) == relative(ga, gb)
            {
                hits += 1;
            }
        }
    }
    Ok(hits as f64 / total as f64)
}

/// Whether every piece is in its true position and orientation.
pub fn perfect_reconstruction(sol: &Arrangement, gt: &GroundTruth) -> bool {
    sol == gt
}

fn scores_at(sol: &Arrangement, gt: &GroundTruth) -> Result<Scores> {
    Ok(Scores {
        dc: direct_comparison(sol, gt)?,
        nc: neighbor_comparison(sol, gt)?,
        pr: perfect_reconstruction(sol, gt),
    })
}

/// Scores under the global rotation with the highest DC: four rotations on a
/// square grid, 0° and 180° otherwise. Ties keep the smaller rotation.
pub fn best_rotation_scores(sol: &Arrangement, gt: &GroundTruth) -> Result<Scores> {
    check_dims(sol, gt)?;
    let turns: &[usize] = if gt.dims.is_square() {
        &[0, 1, 2, 3]
    } else {
        &[0, 2]
    };
    let mut best = scores_at(sol, gt)?;
    for &q in &turns[1..] {
        let s = scores_at(&sol.rotated(q), gt)?;
        if s.dc > best.dc {
            best = s;
        }
    }
    Ok(best)
}

/// Plain scores for known orientations, best-rotation scores otherwise.
pub fn evaluate(sol: &Arrangement, gt: &GroundTruth, puzzle_type: PuzzleType) -> Result<Scores> {
    match puzzle_type {
        PuzzleType::Type1 => scores_at(sol, gt),
        PuzzleType::Type2 => best_rotation_scores(sol, gt),
    }
}

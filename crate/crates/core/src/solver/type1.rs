use super::multiphase::solve_from;
use super::{Solution, SolverConfig};
use crate::compatibility::{build_compatibility, CompatibilityTable};
use crate::engine::CoefficientView;
use crate::error::{Error, Result};
use crate::labeling::Labeling;
use crate::pictorial::PieceSet;
use crate::problem::{GridDims, ProblemInstance, PuzzleType};
use crate::scalar::Scalar;

/// Solves a known-orientation puzzle from its pieces.
pub fn solve_type1<T: Scalar>(
    pieces: &PieceSet,
    dims: GridDims,
    config: &SolverConfig,
) -> Result<Solution<T>> {
    if pieces.len() != dims.len() {
        return Err(Error::PieceCount {
            expected: dims.len(),
            found: pieces.len(),
        });
    }
    let instance = ProblemInstance::new(dims, PuzzleType::Type1);
    if pieces.len() < 2 {
        return solve_type1_with_table(
            &instance,
            &CompatibilityTable::zeros(pieces.len(), 1),
            config,
        );
    }
    let compat = build_compatibility::<T>(
        pieces,
        PuzzleType::Type1,
        &config.compat_params(PuzzleType::Type1),
    )?;
    let mut solution = solve_type1_with_table(&instance, &compat.table, config)?;
    solution.diagnostics.constant_pieces = compat.constant_pieces;
    solution.diagnostics.redrawn_compatibilities = compat.redrawn;
    Ok(solution)
}

/// Solves a known-orientation instance with a precomputed symmetric
/// compatibility table.
pub fn solve_type1_with_table<T: Scalar>(
    instance: &ProblemInstance,
    table: &CompatibilityTable<T>,
    config: &SolverConfig,
) -> Result<Solution<T>> {
    if instance.puzzle_type() != PuzzleType::Type1 {
        return Err(Error::Parameter(
            "solve_type1 needs a type 1 instance".into(),
        ));
    }
    let view = CoefficientView::new(instance, table)?;
    solve_from(Labeling::uniform(instance), &view, config)
}

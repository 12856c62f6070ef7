use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::multiphase::solve_from;
use super::{Solution, SolverConfig};
use crate::compatibility::{build_compatibility, CompatibilityTable};
use crate::engine::CoefficientView;
use crate::error::{Error, Result};
use crate::labeling::Labeling;
use crate::pictorial::PieceSet;
use crate::problem::{GridDims, Orientation, ProblemInstance, PuzzleType, Relation};
use crate::scalar::Scalar;

/// The piece whose best achievable compatibility per side, summed over the
/// four sides, is largest. Ties go to the lowest index.
pub fn select_anchor_piece<T: Scalar>(table: &CompatibilityTable<T>) -> usize {
    let k = table.orientations();
    let states = table.states();
    let mut best = (0, T::neg_infinity());
    for i in 0..table.pieces() {
        let mut total = T::zero();
        for rel in Relation::ALL {
            let mut side = T::zero();
            for s_i in i * k..(i + 1) * k {
                for s_j in 0..states {
                    side = side.max(table.get(s_i, s_j, rel));
                }
            }
            total += side;
        }
        if total > best.1 {
            best = (i, total);
        }
    }
    best.0
}

/// Barycenter labeling with `piece` restricted to `orientation`.
pub fn init_labeling_type2<T: Scalar>(
    instance: &ProblemInstance,
    piece: usize,
    orientation: Orientation,
) -> Result<Labeling<T>> {
    if instance.puzzle_type() != PuzzleType::Type2 {
        return Err(Error::Parameter(
            "orientation bias needs a type 2 instance".into(),
        ));
    }
    Labeling::biased(instance, piece, orientation)
}

/// Solves an unknown-orientation puzzle from its pieces.
pub fn solve_type2<T: Scalar>(
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
    let instance = ProblemInstance::new(dims, PuzzleType::Type2);
    if pieces.len() < 2 {
        return solve_type2_with_table(
            &instance,
            &CompatibilityTable::zeros(pieces.len(), 4),
            config,
        );
    }
    let compat = build_compatibility::<T>(
        pieces,
        PuzzleType::Type2,
        &config.compat_params(PuzzleType::Type2),
    )?;
    let mut solution = solve_type2_with_table(&instance, &compat.table, config)?;
    solution.diagnostics.constant_pieces = compat.constant_pieces;
    solution.diagnostics.redrawn_compatibilities = compat.redrawn;
    Ok(solution)
}

/// The bias orientation drawn for a seed.
pub fn bias_orientation(seed: u64) -> Orientation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    Orientation::from_quarters(rng.random_range(0..4))
}

/// Solves an unknown-orientation instance with a precomputed symmetric
/// compatibility table. Square grids run once; rectangular grids run with the
/// bias orientation and with it turned a further 90°, keeping the run with
/// the larger final ALC.
pub fn solve_type2_with_table<T: Scalar>(
    instance: &ProblemInstance,
    table: &CompatibilityTable<T>,
    config: &SolverConfig,
) -> Result<Solution<T>> {
    if instance.puzzle_type() != PuzzleType::Type2 {
        return Err(Error::Parameter(
            "solve_type2 needs a type 2 instance".into(),
        ));
    }
    let view = CoefficientView::new(instance, table)?;
    let anchor_piece = select_anchor_piece(table);
    let theta = bias_orientation(config.seed);
    let thetas = if instance.dims().is_square() {
        vec![theta]
    } else {
        vec![theta, theta.compose(Orientation::Deg90)]
    };

    let mut runs = Vec::with_capacity(thetas.len());
    for &t in &thetas {
        let initial = init_labeling_type2(instance, anchor_piece, t)?;
        runs.push(solve_from(initial, &view, config)?);
    }
    let run_alcs: Vec<f64> = runs.iter().map(|s| s.alc).collect();
    let winner = run_alcs
        .iter()
        .enumerate()
        .fold(0, |best, (i, &a)| if a > run_alcs[best] { i } else { best });
    let mut solution = runs.swap_remove(winner);
    let d = &mut solution.diagnostics;
    d.anchor_piece = Some(anchor_piece);
    d.bias_degrees = Some(thetas[winner].degrees());
    d.run_alcs = run_alcs;
    d.winning_run = Some(winner);
    Ok(solution)
}

//! Single-run relaxation labeling with doubly-stochastic balancing after
//! every update, binarized greedily at the end. Kept as a comparison point;
//! unlike the multi-phase solver it has no feasibility guarantee of its own.

use super::{Diagnostics, Placement, Solution};
use crate::compatibility::CompatibilityTable;
use crate::engine::{alc, alc_of, sinkhorn_balance, support, update, CoefficientView};
use crate::error::{contract, Error, Result};
use crate::labeling::Labeling;
use crate::problem::{Label, ProblemInstance, PuzzleType};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaselineConfig {
    pub max_iterations: usize,
    /// Stop once the ALC gain of an iteration drops below this.
    pub epsilon: f64,
    pub sinkhorn_iterations: usize,
    pub sinkhorn_tolerance: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            max_iterations: 1000,
            epsilon: 1e-4,
            sinkhorn_iterations: 100,
            sinkhorn_tolerance: 1e-9,
        }
    }
}

pub fn solve_balanced_baseline<T: Scalar>(
    instance: &ProblemInstance,
    table: &CompatibilityTable<T>,
    config: &BaselineConfig,
) -> Result<Solution<T>> {
    if instance.puzzle_type() != PuzzleType::Type1 {
        return Err(Error::Parameter(
            "the balanced baseline handles type 1 instances only".into(),
        ));
    }
    let view = CoefficientView::new(instance, table)?;
    let mut lab = Labeling::uniform(instance);
    let mut prev = alc(&lab, &support(&lab, &view)).as_f64();
    let mut iterations = 0;
    for _ in 0..config.max_iterations {
        iterations += 1;
        let q = support(&lab, &view);
        lab = sinkhorn_balance(
            &update(&lab, &q),
            config.sinkhorn_iterations,
            config.sinkhorn_tolerance,
        );
        let a = alc_of(&lab, &view).as_f64();
        if (a - prev).abs() < config.epsilon {
            break;
        }
        prev = a;
    }

    // greedy rounding: repeatedly take the largest entry of a free row/column
    let (n, m) = (lab.n(), lab.m());
    let mut entries: Vec<(T, usize, usize)> = (0..n)
        .flat_map(|i| lab.row(i).iter().enumerate().map(move |(l, &p)| (p, i, l)))
        .collect();
    entries.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then((a.1, a.2).cmp(&(b.1, b.2)))
    });
    let mut row_of = vec![None; n];
    let mut col_used = vec![false; m];
    for (_, i, l) in entries {
        if row_of[i].is_none() && !col_used[l] {
            row_of[i] = Some(l);
            col_used[l] = true;
        }
    }
    let mut values = vec![T::zero(); n * m];
    let mut placement = Vec::with_capacity(n);
    for (i, l) in row_of.iter().enumerate() {
        let l = l.ok_or_else(|| contract(format!("greedy rounding left object {i} unassigned")))?;
        values[i * m + l] = T::one();
        let Label {
            position,
            orientation,
        } = instance.label(l);
        placement.push(Placement {
            position,
            orientation,
        });
    }
    let binary = Labeling::from_values(instance, values)?;
    let final_alc = alc_of(&binary, &view).as_f64();
    Ok(Solution {
        puzzle_type: PuzzleType::Type1,
        dims: instance.dims(),
        placement,
        alc: final_alc,
        labeling: binary,
        diagnostics: Diagnostics {
            total_iterations: iterations,
            branch: "balanced-baseline".into(),
            ..Diagnostics::default()
        },
    })
}

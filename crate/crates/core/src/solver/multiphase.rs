//! Phase loop shared by both puzzle types: anchoring, block translation and
//! terminal branching.

use rayon::prelude::*;

use super::{Diagnostics, Placement, Solution, SolverConfig};
use crate::engine::{
    alc_of, candidate_order, run_phase, CoefficientView, PhaseOutcome, StopReason,
};
use crate::error::{contract, Result};
use crate::labeling::{AnchorEvent, Labeling};
use crate::problem::{ProblemInstance, Relation};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Vertical,
    Horizontal,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::Vertical => 0,
            Axis::Horizontal => 1,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Axis::Vertical => "v",
            Axis::Horizontal => "h",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisState {
    /// Still translated inward whenever the block touches an edge.
    Open,
    /// Forked once the block came one short of the grid extent.
    Branched,
    /// Block spans the whole axis.
    Resolved,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BranchChoice {
    pub axis: Axis,
    pub translated: bool,
}

/// The entry chosen for anchoring.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnchorCandidate {
    pub object: usize,
    pub label: usize,
    pub p: f64,
}

/// Picks the candidate with the highest probability, then highest support,
/// then lowest object index, then lowest label index.
pub fn select_anchor_candidate<T>(outcome: &PhaseOutcome<T>) -> Option<AnchorCandidate> {
    outcome
        .candidates
        .iter()
        .min_by(|a, b| candidate_order(a, b))
        .map(|c| AnchorCandidate {
            object: c.object,
            label: c.label,
            p: c.p,
        })
}

/// One branch of a multi-phase solve.
#[derive(Clone, Debug)]
pub struct SolverState<T> {
    pub labeling: Labeling<T>,
    pub axes: [AxisState; 2],
    pub phase: usize,
    pub lineage: Vec<BranchChoice>,
    diagnostics: Diagnostics,
}

impl<T: Scalar> SolverState<T> {
    pub fn new(labeling: Labeling<T>) -> SolverState<T> {
        SolverState {
            labeling,
            axes: [AxisState::Open; 2],
            phase: 0,
            lineage: Vec::new(),
            diagnostics: Diagnostics::default(),
        }
    }

    /// Runs one phase and anchors its selected entry.
    pub fn step(
        &mut self,
        view: &CoefficientView<'_, T>,
        config: &SolverConfig,
    ) -> Result<AnchorEvent> {
        let instance = view.instance();
        let allowed = self.labeling.allowed_positions(instance);
        self.phase += 1;
        let outcome = run_phase(
            &self.labeling,
            view,
            &config.phase,
            &allowed,
            self.phase,
            config.trace,
        );

        for i in self.labeling.anchored_objects() {
            let l = self.labeling.anchored_label(i).expect("anchored");
            if outcome.labeling.get(i, l) != T::one() {
                return Err(contract(format!(
                    "phase {} modified anchored object {i}",
                    self.phase
                )));
            }
        }

        let chosen = select_anchor_candidate(&outcome)
            .ok_or_else(|| contract(format!("phase {} produced no candidate", self.phase)))?;
        let d = &mut self.diagnostics;
        d.phases += 1;
        d.total_iterations += outcome.iterations;
        if !outcome.supra_threshold {
            d.forced_anchors += 1;
        }
        if outcome.stop == StopReason::MaxIter {
            d.max_iteration_stops += 1;
        }
        d.trace.extend(outcome.trace.iter().copied());

        let label = instance.label(chosen.label);
        self.labeling = outcome.labeling;
        self.labeling
            .anchor_in_place(instance, chosen.object, label)?;
        let event = AnchorEvent {
            object: chosen.object,
            label,
            value: chosen.p,
            phase: self.phase,
        };
        self.diagnostics.anchors.push(event);
        Ok(event)
    }

    /// Translates the anchored block one step inward on every open axis where
    /// it touches a grid edge. Returns the axes on which the block is one
    /// short of the grid extent; those are left untouched for branching.
    pub fn maybe_translate(&mut self, instance: &ProblemInstance) -> Result<Vec<Axis>> {
        let Some(bounds) = self.labeling.block_bounds(instance) else {
            return Ok(Vec::new());
        };
        let dims = instance.dims();
        let mut flagged = Vec::new();
        let axes = [
            (
                Axis::Vertical,
                bounds.height(),
                dims.rows(),
                bounds.min_row == 1,
                bounds.max_row == dims.rows(),
            ),
            (
                Axis::Horizontal,
                bounds.width(),
                dims.cols(),
                bounds.min_col == 1,
                bounds.max_col == dims.cols(),
            ),
        ];
        for (axis, extent, full, at_start, at_end) in axes {
            let state = &mut self.axes[axis.index()];
            if extent == full {
                *state = AxisState::Resolved;
                continue;
            }
            if *state != AxisState::Open {
                continue;
            }
            if extent + 1 == full {
                flagged.push(axis);
            } else if at_start || at_end {
                let dir = inward(axis, at_start);
                self.labeling.translate_in_place(instance, dir)?;
                self.diagnostics.translations += 1;
            }
        }
        Ok(flagged)
    }

    /// Forks on every flagged axis into "translate inward" and "leave as is",
    /// then completes each fork. Returns every completed branch.
    pub fn branch_and_finish(
        self,
        flagged: &[Axis],
        view: &CoefficientView<'_, T>,
        config: &SolverConfig,
    ) -> Result<Vec<Solution<T>>> {
        let instance = view.instance();
        let mut forks = Vec::with_capacity(1 << flagged.len());
        for mask in 0..(1usize << flagged.len()) {
            let mut fork = self.clone();
            for (bit, &axis) in flagged.iter().enumerate() {
                let translated = mask & (1 << bit) == 0;
                fork.axes[axis.index()] = AxisState::Branched;
                if translated {
                    let bounds = fork
                        .labeling
                        .block_bounds(instance)
                        .expect("non-empty block");
                    let at_start = match axis {
                        Axis::Vertical => bounds.min_row == 1,
                        Axis::Horizontal => bounds.min_col == 1,
                    };
                    fork.labeling
                        .translate_in_place(instance, inward(axis, at_start))?;
                    fork.diagnostics.translations += 1;
                }
                fork.lineage.push(BranchChoice { axis, translated });
            }
            forks.push(fork);
        }
        let finish = |fork: SolverState<T>| fork.finish(view, config);
        let results: Vec<Result<Vec<Solution<T>>>> = if config.branch_parallel {
            forks.into_par_iter().map(finish).collect()
        } else {
            forks.into_iter().map(finish).collect()
        };
        let mut out = Vec::new();
        for r in results {
            out.extend(r?);
        }
        Ok(out)
    }

    /// Runs phases until every piece is anchored, branching as needed.
    pub fn finish(
        mut self,
        view: &CoefficientView<'_, T>,
        config: &SolverConfig,
    ) -> Result<Vec<Solution<T>>> {
        let instance = view.instance();
        while !self.labeling.is_complete() {
            self.step(view, config)?;
            let flagged = self.maybe_translate(instance)?;
            if !flagged.is_empty() {
                return self.branch_and_finish(&flagged, view, config);
            }
        }
        Ok(vec![self.into_solution(view)?])
    }

    fn into_solution(self, view: &CoefficientView<'_, T>) -> Result<Solution<T>> {
        let instance = view.instance();
        let lab = self.labeling;
        let placement = (0..lab.n())
            .map(|i| {
                let l = lab
                    .anchored_label(i)
                    .ok_or_else(|| contract(format!("object {i} left unanchored")))?;
                let label = instance.label(l);
                Ok(Placement {
                    position: label.position,
                    orientation: label.orientation,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let alc = alc_of(&lab, view).as_f64();
        let mut diagnostics = self.diagnostics;
        diagnostics.branch = if self.lineage.is_empty() {
            "root".to_string()
        } else {
            self.lineage
                .iter()
                .map(|c| {
                    format!(
                        "{}:{}",
                        c.axis.tag(),
                        if c.translated { "translate" } else { "keep" }
                    )
                })
                .collect::<Vec<_>>()
                .join(",")
        };
        Ok(Solution {
            puzzle_type: instance.puzzle_type(),
            dims: instance.dims(),
            placement,
            alc,
            labeling: lab,
            diagnostics,
        })
    }
}

fn inward(axis: Axis, at_start: bool) -> Relation {
    match (axis, at_start) {
        (Axis::Vertical, true) => Relation::Down,
        (Axis::Vertical, false) => Relation::Up,
        (Axis::Horizontal, true) => Relation::Right,
        (Axis::Horizontal, false) => Relation::Left,
    }
}

/// Completes every branch from `initial` and returns the one with the largest
/// final ALC (earliest branch on ties).
pub(crate) fn solve_from<T: Scalar>(
    initial: Labeling<T>,
    view: &CoefficientView<'_, T>,
    config: &SolverConfig,
) -> Result<Solution<T>> {
    config.phase.validate()?;
    let branches = SolverState::new(initial).finish(view, config)?;
    let alcs: Vec<f64> = branches.iter().map(|s| s.alc).collect();
    let mut best = branches
        .into_iter()
        .reduce(|best, s| if s.alc > best.alc { s } else { best })
        .ok_or_else(|| contract("no branch completed"))?;
    best.diagnostics.branch_alcs = alcs;
    Ok(best)
}

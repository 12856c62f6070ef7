//! Labeling matrices and the anchoring algebra.
//!
//! A [`Labeling`] is an `n × m` row-stochastic matrix `p_i(λ)` plus the
//! bookkeeping of which objects and positions have been fixed by anchoring.

use std::collections::BTreeSet;

use crate::error::{contract, Result};
use crate::problem::{Label, Orientation, Position, ProblemInstance, Relation};
use crate::scalar::Scalar;

/// A piece restricted to a single orientation while it remains unanchored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrientationBias {
    pub piece: usize,
    pub orientation: Orientation,
}

/// Record of one anchoring intervention.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnchorEvent {
    pub object: usize,
    pub label: Label,
    pub value: f64,
    pub phase: usize,
}

/// Inclusive 1-based bounding box of the anchored block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockBounds {
    pub min_row: usize,
    pub max_row: usize,
    pub min_col: usize,
    pub max_col: usize,
}

impl BlockBounds {
    pub fn height(&self) -> usize {
        self.max_row - self.min_row + 1
    }

    pub fn width(&self) -> usize {
        self.max_col - self.min_col + 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Labeling<T> {
    n: usize,
    m: usize,
    orientations: usize,
    values: Vec<T>,
    /// object -> anchored label index
    anchored: Vec<Option<usize>>,
    /// position index -> anchored object
    owners: Vec<Option<usize>>,
    bias: Option<OrientationBias>,
}

impl<T: Scalar> Labeling<T> {
    /// Barycenter of the labeling space: every entry `1/m`.
    pub fn uniform(instance: &ProblemInstance) -> Labeling<T> {
        let (n, m) = (instance.n(), instance.m());
        Labeling {
            n,
            m,
            orientations: instance.orientations(),
            values: vec![T::one() / T::from_count(m); n * m],
            anchored: vec![None; n],
            owners: vec![None; instance.dims().len()],
            bias: None,
        }
    }

    /// Barycenter with `piece` limited to `orientation`: its row carries `1/n`
    /// on every label of that orientation and 0 elsewhere.
    pub fn biased(
        instance: &ProblemInstance,
        piece: usize,
        orientation: Orientation,
    ) -> Result<Labeling<T>> {
        if piece >= instance.n() {
            return Err(contract(format!("piece {piece} out of range")));
        }
        if orientation.quarters() >= instance.orientations() {
            return Err(contract(format!(
                "orientation {orientation} unavailable for {} instances",
                instance.puzzle_type()
            )));
        }
        let mut lab = Self::uniform(instance);
        lab.bias = Some(OrientationBias { piece, orientation });
        let share = T::one() / T::from_count(instance.n());
        let k = lab.orientations;
        for (l, v) in lab.row_mut(piece).iter_mut().enumerate() {
            *v = if l % k == orientation.quarters() {
                share
            } else {
                T::zero()
            };
        }
        Ok(lab)
    }

    /// Builds a labeling from raw row-major values with no anchors.
    pub fn from_values(instance: &ProblemInstance, values: Vec<T>) -> Result<Labeling<T>> {
        let mut lab = Self::uniform(instance);
        if values.len() != lab.values.len() {
            return Err(contract(format!(
                "expected {} values, got {}",
                lab.values.len(),
                values.len()
            )));
        }
        lab.values = values;
        Ok(lab)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn orientations(&self) -> usize {
        self.orientations
    }

    #[inline]
    pub fn get(&self, object: usize, label: usize) -> T {
        self.values[object * self.m + label]
    }

    #[inline]
    pub fn row(&self, object: usize) -> &[T] {
        &self.values[object * self.m..(object + 1) * self.m]
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, object: usize) -> &mut [T] {
        &mut self.values[object * self.m..(object + 1) * self.m]
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn bias(&self) -> Option<OrientationBias> {
        self.bias
    }

    #[inline]
    pub fn is_anchored(&self, object: usize) -> bool {
        self.anchored[object].is_some()
    }

    /// Label index an object is anchored to.
    #[inline]
    pub fn anchored_label(&self, object: usize) -> Option<usize> {
        self.anchored[object]
    }

    /// Object anchored at a 0-based position index.
    #[inline]
    pub fn owner(&self, position_index: usize) -> Option<usize> {
        self.owners[position_index]
    }

    pub fn anchored_count(&self) -> usize {
        self.anchored.iter().flatten().count()
    }

    pub fn is_complete(&self) -> bool {
        self.anchored.iter().all(Option::is_some)
    }

    pub fn anchored_objects(&self) -> BTreeSet<usize> {
        (0..self.n).filter(|&i| self.is_anchored(i)).collect()
    }

    pub fn anchored_positions(&self, instance: &ProblemInstance) -> BTreeSet<Position> {
        let dims = instance.dims();
        self.owners
            .iter()
            .enumerate()
            .filter(|(_, o)| o.is_some())
            .map(|(p, _)| dims.position(p))
            .collect()
    }

    pub fn free_objects(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&i| !self.is_anchored(i))
    }

    pub fn free_position_count(&self) -> usize {
        self.owners.iter().filter(|o| o.is_none()).count()
    }

    /// Positions where the next anchor may land: every free position while
    /// nothing is anchored, afterwards only free positions 4-adjacent to the
    /// anchored block.
    pub fn allowed_positions(&self, instance: &ProblemInstance) -> Vec<usize> {
        let any_anchor = self.owners.iter().any(Option::is_some);
        (0..self.owners.len())
            .filter(|&p| self.owners[p].is_none())
            .filter(|&p| {
                !any_anchor
                    || instance
                        .neighbor_index(p)
                        .iter()
                        .flatten()
                        .any(|&q| self.owners[q].is_some())
            })
            .collect()
    }

    pub fn block_bounds(&self, instance: &ProblemInstance) -> Option<BlockBounds> {
        let dims = instance.dims();
        let mut bounds: Option<BlockBounds> = None;
        for (p, owner) in self.owners.iter().enumerate() {
            if owner.is_none() {
                continue;
            }
            let pos = dims.position(p);
            bounds = Some(match bounds {
                None => BlockBounds {
                    min_row: pos.row,
                    max_row: pos.row,
                    min_col: pos.col,
                    max_col: pos.col,
                },
                Some(b) => BlockBounds {
                    min_row: b.min_row.min(pos.row),
                    max_row: b.max_row.max(pos.row),
                    min_col: b.min_col.min(pos.col),
                    max_col: b.max_col.max(pos.col),
                },
            });
        }
        bounds
    }

    /// Binary with exactly one 1 per row and per column.
    pub fn is_permutation(&self) -> bool {
        self.n == self.m && self.is_grouped_permutation(1)
    }

    /// Binary with one 1 per row and one 1 across each position's group of
    /// four orientation columns.
    pub fn is_type2_permutation(&self) -> bool {
        self.m == 4 * self.n && self.is_grouped_permutation(4)
    }

    fn is_grouped_permutation(&self, group: usize) -> bool {
        if self.m != self.n * group {
            return false;
        }
        let mut group_hits = vec![0usize; self.n];
        for i in 0..self.n {
            let mut ones = 0;
            for (l, &v) in self.row(i).iter().enumerate() {
                if v == T::one() {
                    ones += 1;
                    group_hits[l / group] += 1;
                } else if v != T::zero() {
                    return false;
                }
            }
            if ones != 1 {
                return false;
            }
        }
        group_hits.iter().all(|&h| h == 1)
    }

    pub fn max_row_sum_error(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                (self.row(i).iter().copied().sum::<T>() - T::one())
                    .abs()
                    .as_f64()
            })
            .fold(0.0, f64::max)
    }

    /// Checks row-stochasticity and the anchoring bookkeeping invariants.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        if let Some(v) = self
            .values
            .iter()
            .find(|v| !(**v >= T::zero() && **v <= T::one()))
        {
            return Err(contract(format!("entry {v} outside [0,1]")));
        }
        let err = self.max_row_sum_error();
        if err > tol {
            return Err(contract(format!("row sum off by {err:e}")));
        }
        for (i, anchored) in self.anchored.iter().enumerate() {
            if let Some(l) = *anchored {
                let row = self.row(i);
                if row[l] != T::one() || row.iter().filter(|&&v| v != T::zero()).count() != 1 {
                    return Err(contract(format!("anchored row {i} is not binary")));
                }
            }
        }
        let k = self.orientations;
        for (p, owner) in self.owners.iter().enumerate() {
            if let Some(o) = *owner {
                for j in 0..self.n {
                    let mass: T = self.row(j)[p * k..(p + 1) * k].iter().copied().sum();
                    let expect = if j == o { T::one() } else { T::zero() };
                    if mass != expect {
                        return Err(contract(format!(
                            "position {p} column group inconsistent for object {j}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Fixes `object` to `label`, clears the label's position for every other
    /// object and resets all undecided entries to the barycenter of the
    /// remaining subspace.
    pub fn anchor(
        &self,
        instance: &ProblemInstance,
        object: usize,
        label: Label,
    ) -> Result<Labeling<T>> {
        let mut next = self.clone();
        next.anchor_in_place(instance, object, label)?;
        Ok(next)
    }

    pub fn anchor_in_place(
        &mut self,
        instance: &ProblemInstance,
        object: usize,
        label: Label,
    ) -> Result<()> {
        let l = instance.label_index(label)?;
        if object >= self.n {
            return Err(contract(format!("object {object} out of range")));
        }
        if self.is_anchored(object) {
            return Err(contract(format!("object {object} is already anchored")));
        }
        let p = instance.label_position(l);
        if let Some(owner) = self.owners[p] {
            return Err(contract(format!(
                "position {} already holds object {owner}",
                label.position
            )));
        }
        if self.owners.iter().any(Option::is_some)
            && !instance
                .neighbor_index(p)
                .iter()
                .flatten()
                .any(|&q| self.owners[q].is_some())
        {
            return Err(contract(format!(
                "position {} is not adjacent to the anchored block",
                label.position
            )));
        }
        self.anchored[object] = Some(l);
        self.owners[p] = Some(object);
        self.reset_free();
        Ok(())
    }

    /// Shifts every anchored object one step in `direction`, keeping
    /// orientations, and re-resets the undecided entries.
    pub fn translate_block(
        &self,
        instance: &ProblemInstance,
        direction: Relation,
    ) -> Result<Labeling<T>> {
        let mut next = self.clone();
        next.translate_in_place(instance, direction)?;
        Ok(next)
    }

    pub fn translate_in_place(
        &mut self,
        instance: &ProblemInstance,
        direction: Relation,
    ) -> Result<()> {
        let mut moved = Vec::with_capacity(self.n);
        for (i, anchored) in self.anchored.iter().enumerate() {
            if let Some(l) = *anchored {
                let p = instance.label_position(l);
                let Some(q) = instance.neighbor_index(p)[direction.index()] else {
                    return Err(contract(format!(
                        "translating {direction:?} pushes object {i} off the grid"
                    )));
                };
                moved.push((i, q * self.orientations + instance.label_orientation(l), q));
            }
        }
        self.owners.iter_mut().for_each(|o| *o = None);
        for (i, l, q) in moved {
            self.anchored[i] = Some(l);
            self.owners[q] = Some(i);
        }
        self.reset_free();
        Ok(())
    }

    /// Rewrites every row: anchored rows become binary, free rows take the
    /// barycenter over free positions (restricted to the bias orientation for
    /// the biased piece).
    fn reset_free(&mut self) {
        let free_positions = self.free_position_count();
        let k = self.orientations;
        let bias = self.bias;
        let owners = std::mem::take(&mut self.owners);
        let (uniform, biased) = if free_positions == 0 {
            (T::zero(), T::zero())
        } else {
            (
                T::one() / T::from_count(k * free_positions),
                T::one() / T::from_count(free_positions),
            )
        };
        for i in 0..self.n {
            let anchored = self.anchored[i];
            let row = self.row_mut(i);
            match anchored {
                Some(l) => {
                    row.iter_mut().for_each(|v| *v = T::zero());
                    row[l] = T::one();
                }
                None => {
                    let restrict = bias
                        .filter(|b| b.piece == i)
                        .map(|b| b.orientation.quarters());
                    for (l, v) in row.iter_mut().enumerate() {
                        *v = if owners[l / k].is_some() {
                            T::zero()
                        } else {
                            match restrict {
                                Some(theta) if l % k == theta => biased,
                                Some(_) => T::zero(),
                                None => uniform,
                            }
                        };
                    }
                }
            }
        }
        self.owners = owners;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::GridDims;

    fn perm(instance: &ProblemInstance, assignment: &[usize]) -> Labeling<f64> {
        let m = instance.m();
        let mut values = vec![0.0; instance.n() * m];
        for (i, &l) in assignment.iter().enumerate() {
            values[i * m + l] = 1.0;
        }
        Labeling::from_values(instance, values).unwrap()
    }

    #[test]
    fn uniform_is_barycenter() {
        let t1 = ProblemInstance::type1(2, 2).unwrap();
        let lab = Labeling::<f64>::uniform(&t1);
        assert_eq!((lab.n(), lab.m()), (4, 4));
        assert!(lab.values().iter().all(|&v| v == 0.25));

        let t2 = ProblemInstance::type2(2, 2).unwrap();
        let lab = Labeling::<f64>::uniform(&t2);
        assert_eq!((lab.n(), lab.m()), (4, 16));
        assert!(lab.values().iter().all(|&v| v == 1.0 / 16.0));

        let t = ProblemInstance::type1(3, 3).unwrap();
        let lab = Labeling::<f64>::uniform(&t);
        assert!(lab.values().iter().all(|&v| v == 1.0 / 9.0));
        assert!(lab.max_row_sum_error() < 1e-12);
        assert_eq!(lab.anchored_count(), 0);
    }

    #[test]
    fn permutation_predicates() {
        let t = ProblemInstance::type1(2, 2).unwrap();
        assert!(perm(&t, &[0, 1, 2, 3]).is_permutation());
        assert!(!Labeling::<f64>::uniform(&t).is_permutation());
        assert!(!perm(&t, &[0, 0, 2, 3]).is_permutation());

        let t2 = ProblemInstance::type2(2, 2).unwrap();
        // Fig. 5(c)-like: every piece on its own position, mixed orientations
        let ok = perm(&t2, &[0, 4 + 1, 8 + 3, 12 + 2]);
        assert!(ok.is_type2_permutation());
        let clash = perm(&t2, &[0, 1, 8, 12]);
        assert!(!clash.is_type2_permutation());
        let mut soft = Labeling::<f64>::uniform(&t2);
        assert!(!soft.is_type2_permutation());
        soft.values_mut()[0] = 0.5;
        assert!(!soft.is_type2_permutation());
    }

    #[test]
    fn anchor_center_of_three_by_three() {
        let t = ProblemInstance::type1(3, 3).unwrap();
        let lab = Labeling::<f64>::uniform(&t)
            .anchor(&t, 4, Label::at(2, 2))
            .unwrap();
        let center = t.label_index(Label::at(2, 2)).unwrap();
        for l in 0..9 {
            assert_eq!(lab.get(4, l), if l == center { 1.0 } else { 0.0 });
        }
        for j in (0..9).filter(|&j| j != 4) {
            assert_eq!(lab.get(j, center), 0.0);
            for l in (0..9).filter(|&l| l != center) {
                assert_eq!(lab.get(j, l), 1.0 / 8.0);
            }
        }
        lab.check_invariants(1e-9).unwrap();
    }

    #[test]
    fn anchor_type2_clears_whole_position_group() {
        let t = ProblemInstance::type2(2, 2).unwrap();
        let lab = Labeling::<f64>::biased(&t, 1, Orientation::Deg0).unwrap();
        let lab = lab
            .anchor(&t, 2, Label::new(Position::new(2, 1), Orientation::Deg0))
            .unwrap();
        let group = t.labels_at(t.dims().index(Position::new(2, 1)));
        for j in [0, 1, 3] {
            for l in group.clone() {
                assert_eq!(lab.get(j, l), 0.0);
            }
        }
        // biased piece keeps only 0° labels at the three free positions
        for l in 0..16 {
            let expect = if l % 4 == 0 && !group.contains(&l) {
                1.0 / 3.0
            } else {
                0.0
            };
            assert_eq!(lab.get(1, l), expect);
        }
        for l in 0..16 {
            let expect = if group.contains(&l) { 0.0 } else { 1.0 / 12.0 };
            assert_eq!(lab.get(0, l), expect);
        }
        lab.check_invariants(1e-12).unwrap();
    }

    #[test]
    fn anchor_contract_violations() {
        let t = ProblemInstance::type1(3, 3).unwrap();
        let lab = Labeling::<f64>::uniform(&t)
            .anchor(&t, 0, Label::at(1, 1))
            .unwrap();
        assert!(lab.anchor(&t, 0, Label::at(1, 2)).is_err());
        assert!(lab.anchor(&t, 1, Label::at(1, 1)).is_err());
        assert!(lab.anchor(&t, 1, Label::at(3, 3)).is_err());
        assert!(lab.anchor(&t, 1, Label::at(2, 1)).is_ok());
        assert!(lab.anchor(&t, 9, Label::at(2, 1)).is_err());
    }

    #[test]
    fn translate_single_anchor_down_and_back() {
        let t = ProblemInstance::type1(3, 3).unwrap();
        let lab = Labeling::<f64>::uniform(&t)
            .anchor(&t, 0, Label::at(1, 1))
            .unwrap();
        let down = lab.translate_block(&t, Relation::Down).unwrap();
        assert_eq!(
            down.anchored_positions(&t).into_iter().collect::<Vec<_>>(),
            vec![Position::new(2, 1)]
        );
        down.check_invariants(1e-12).unwrap();
        let back = down.translate_block(&t, Relation::Up).unwrap();
        assert_eq!(back, lab);
        assert!(lab.translate_block(&t, Relation::Up).is_err());
    }

    #[test]
    fn allowed_positions_follow_block() {
        let t = ProblemInstance::type1(3, 3).unwrap();
        let lab = Labeling::<f64>::uniform(&t);
        assert_eq!(lab.allowed_positions(&t).len(), 9);
        let lab = lab.anchor(&t, 3, Label::at(2, 2)).unwrap();
        let dims = GridDims::new(3, 3).unwrap();
        let allowed: Vec<Position> = lab
            .allowed_positions(&t)
            .into_iter()
            .map(|p| dims.position(p))
            .collect();
        assert_eq!(
            allowed,
            vec![
                Position::new(1, 2),
                Position::new(2, 1),
                Position::new(2, 3),
                Position::new(3, 2)
            ]
        );
    }
}

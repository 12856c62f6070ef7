//! Grid geometry, labels and problem instances.
//!
//! Positions are 1-based `(row, col)`; the linear position index used inside
//! labeling matrices is 0-based and row-major. Labels are enumerated
//! position-major, orientation-minor: label `pos_index * K + quarter_turns`,
//! with `K = 1` for known-orientation puzzles and `K = 4` otherwise.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spatial relation of a neighbor relative to a reference piece.
///
/// Variants are listed clockwise, so rotating a relation by one quarter turn
/// clockwise advances to the next variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Right,
    Down,
    Left,
    Up,
}

impl Relation {
    pub const ALL: [Relation; 4] = [
        Relation::Right,
        Relation::Down,
        Relation::Left,
        Relation::Up,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_index(index: usize) -> Relation {
        Self::ALL[index % 4]
    }

    #[inline]
    pub fn opposite(self) -> Relation {
        self.rotate_cw(2)
    }

    /// The relation obtained by rotating the pair configuration clockwise by
    /// `quarters` quarter turns.
    #[inline]
    pub fn rotate_cw(self, quarters: usize) -> Relation {
        Self::from_index(self.index() + quarters)
    }

    /// Quarter turns clockwise that map `Right` onto this relation.
    #[inline]
    pub fn quarters_from_right(self) -> usize {
        self.index()
    }

    /// `(d_row, d_col)` step towards the neighbor.
    #[inline]
    pub fn step(self) -> (isize, isize) {
        match self {
            Relation::Right => (0, 1),
            Relation::Down => (1, 0),
            Relation::Left => (0, -1),
            Relation::Up => (-1, 0),
        }
    }
}

/// Clockwise piece orientation in quarter turns.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(try_from = "u16", into = "u16")]
pub enum Orientation {
    #[default]
    Deg0,
    Deg90,
    Deg180,
    Deg270,
}

impl Orientation {
    pub const ALL: [Orientation; 4] = [
        Orientation::Deg0,
        Orientation::Deg90,
        Orientation::Deg180,
        Orientation::Deg270,
    ];

    #[inline]
    pub fn quarters(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_quarters(quarters: usize) -> Orientation {
        Self::ALL[quarters % 4]
    }

    pub fn degrees(self) -> u16 {
        self.quarters() as u16 * 90
    }

    pub fn from_degrees(degrees: u16) -> Option<Orientation> {
        (degrees.is_multiple_of(90) && degrees < 360)
            .then(|| Self::from_quarters(degrees as usize / 90))
    }

    /// Group composition (rotation by `self` followed by `other`).
    #[inline]
    pub fn compose(self, other: Orientation) -> Orientation {
        Self::from_quarters(self.quarters() + other.quarters())
    }

    #[inline]
    pub fn inverse(self) -> Orientation {
        Self::from_quarters(4 - self.quarters())
    }
}

impl TryFrom<u16> for Orientation {
    type Error = String;

    fn try_from(degrees: u16) -> std::result::Result<Self, Self::Error> {
        Orientation::from_degrees(degrees)
            .ok_or_else(|| format!("{degrees} is not a multiple of 90 below 360"))
    }
}

impl From<Orientation> for u16 {
    fn from(o: Orientation) -> u16 {
        o.degrees()
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.degrees())
    }
}

/// Grid position, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub row: usize,
    pub col: usize,
}

impl Position {
    pub const fn new(row: usize, col: usize) -> Position {
        Position { row, col }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridDims {
    rows: usize,
    cols: usize,
}

impl GridDims {
    pub fn new(rows: usize, cols: usize) -> Result<GridDims> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDims { rows, cols });
        }
        Ok(GridDims { rows, cols })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transposed(&self) -> GridDims {
        GridDims {
            rows: self.cols,
            cols: self.rows,
        }
    }

    #[inline]
    pub fn contains(&self, pos: Position) -> bool {
        (1..=self.rows).contains(&pos.row) && (1..=self.cols).contains(&pos.col)
    }

    pub fn check(&self, pos: Position) -> Result<()> {
        if self.contains(pos) {
            Ok(())
        } else {
            Err(Error::PositionOutOfGrid {
                row: pos.row,
                col: pos.col,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// 0-based row-major index of a position.
    #[inline]
    pub fn index(&self, pos: Position) -> usize {
        debug_assert!(self.contains(pos));
        (pos.row - 1) * self.cols + (pos.col - 1)
    }

    #[inline]
    pub fn position(&self, index: usize) -> Position {
        debug_assert!(index < self.len());
        Position::new(index / self.cols + 1, index % self.cols + 1)
    }

    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.len()).map(move |i| self.position(i))
    }

    /// Neighbor of `pos` in relation `rel`, if it lies on the grid.
    pub fn neighbor(&self, pos: Position, rel: Relation) -> Option<Position> {
        let (dr, dc) = rel.step();
        let row = pos.row.checked_add_signed(dr)?;
        let col = pos.col.checked_add_signed(dc)?;
        let candidate = Position::new(row, col);
        self.contains(candidate).then_some(candidate)
    }

    /// In-grid 4-neighbors of `pos` with their relation from `pos`.
    pub fn neighbors(&self, pos: Position) -> Vec<(Position, Relation)> {
        Relation::ALL
            .iter()
            .filter_map(|&rel| self.neighbor(pos, rel).map(|q| (q, rel)))
            .collect()
    }

    /// Number of horizontally or vertically adjacent position pairs.
    pub fn adjacency_count(&self) -> usize {
        self.rows * (self.cols - 1) + (self.rows - 1) * self.cols
    }
}

impl fmt::Display for GridDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PuzzleType {
    /// Unknown positions, known orientations.
    #[serde(rename = "type1")]
    Type1,
    /// Unknown positions and orientations.
    #[serde(rename = "type2")]
    Type2,
}

impl PuzzleType {
    /// Orientation labels per position.
    #[inline]
    pub fn orientations(self) -> usize {
        match self {
            PuzzleType::Type1 => 1,
            PuzzleType::Type2 => 4,
        }
    }
}

impl fmt::Display for PuzzleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PuzzleType::Type1 => "type1",
            PuzzleType::Type2 => "type2",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Label {
    pub position: Position,
    pub orientation: Orientation,
}

impl Label {
    pub const fn new(position: Position, orientation: Orientation) -> Label {
        Label {
            position,
            orientation,
        }
    }

    pub const fn at(row: usize, col: usize) -> Label {
        Label::new(Position::new(row, col), Orientation::Deg0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.position, self.orientation)
    }
}

/// Objects are the `n = N·M` pieces; labels are positions (Type 1) or
/// position × orientation pairs (Type 2).
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    dims: GridDims,
    puzzle_type: PuzzleType,
    neighbor_index: Vec<[Option<usize>; 4]>,
}

impl ProblemInstance {
    pub fn new(dims: GridDims, puzzle_type: PuzzleType) -> ProblemInstance {
        let neighbor_index = dims
            .positions()
            .map(|p| Relation::ALL.map(|rel| dims.neighbor(p, rel).map(|q| dims.index(q))))
            .collect();
        ProblemInstance {
            dims,
            puzzle_type,
            neighbor_index,
        }
    }

    pub fn type1(rows: usize, cols: usize) -> Result<ProblemInstance> {
        Ok(Self::new(GridDims::new(rows, cols)?, PuzzleType::Type1))
    }

    pub fn type2(rows: usize, cols: usize) -> Result<ProblemInstance> {
        Ok(Self::new(GridDims::new(rows, cols)?, PuzzleType::Type2))
    }

    #[inline]
    pub fn dims(&self) -> GridDims {
        self.dims
    }

    #[inline]
    pub fn puzzle_type(&self) -> PuzzleType {
        self.puzzle_type
    }

    /// Number of objects (pieces).
    #[inline]
    pub fn n(&self) -> usize {
        self.dims.len()
    }

    /// Number of labels.
    #[inline]
    pub fn m(&self) -> usize {
        self.dims.len() * self.orientations()
    }

    #[inline]
    pub fn orientations(&self) -> usize {
        self.puzzle_type.orientations()
    }

    pub fn label_index(&self, label: Label) -> Result<usize> {
        self.dims.check(label.position)?;
        let k = self.orientations();
        if label.orientation.quarters() >= k {
            return Err(Error::Contract(format!(
                "orientation {} is not a label of a {} instance",
                label.orientation, self.puzzle_type
            )));
        }
        Ok(self.dims.index(label.position) * k + label.orientation.quarters())
    }

    #[inline]
    pub fn label(&self, index: usize) -> Label {
        let k = self.orientations();
        Label::new(
            self.dims.position(index / k),
            Orientation::from_quarters(index % k),
        )
    }

    /// 0-based position index of a label index.
    #[inline]
    pub fn label_position(&self, label_index: usize) -> usize {
        label_index / self.orientations()
    }

    /// Orientation (in quarter turns) of a label index.
    #[inline]
    pub fn label_orientation(&self, label_index: usize) -> usize {
        label_index % self.orientations()
    }

    /// Label indices of all orientations at a 0-based position index.
    #[inline]
    pub fn labels_at(&self, position_index: usize) -> std::ops::Range<usize> {
        let k = self.orientations();
        position_index * k..(position_index + 1) * k
    }

    /// Neighbor position index of a 0-based position index in each relation.
    #[inline]
    pub fn neighbor_index(&self, position_index: usize) -> &[Option<usize>; 4] {
        &self.neighbor_index[position_index]
    }
}

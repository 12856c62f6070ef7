//! Piece compatibilities derived from boundary dissimilarities.
//!
//! Pipeline: directed dissimilarities → directed compatibility (percentile
//! or Andaló measure) → symmetrization → optional constant-piece redraw →
//! symmetrization.

use std::io::{self, Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pictorial::{dissimilarity_table, DissimilarityTable, PieceSet};
use crate::problem::{PuzzleType, Relation};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// `(1 - D / p_avg)^φ` below the `k`-percentile average, else 0.
    #[default]
    Percentile,
    /// `exp(-φ - D / quartile)`.
    Andalo,
}

impl std::str::FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "percentile" => Ok(Measure::Percentile),
            "andalo" => Ok(Measure::Andalo),
            other => Err(format!(
                "unknown measure `{other}` (expected percentile or andalo)"
            )),
        }
    }
}

impl std::fmt::Display for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Measure::Percentile => "percentile",
            Measure::Andalo => "andalo",
        })
    }
}

/// Ordered dissimilarities of all candidates in one `(piece state, relation)`
/// group.
#[derive(Clone, Debug)]
pub struct RankStats {
    /// `(dissimilarity, candidate)` ascending; ties by candidate id.
    sorted: Vec<(f64, usize)>,
    /// `(candidate, rank)` sorted by candidate.
    ranks: Vec<(usize, usize)>,
}

impl RankStats {
    pub fn new(entries: impl IntoIterator<Item = (usize, f64)>) -> RankStats {
        let mut sorted: Vec<(f64, usize)> = entries.into_iter().map(|(j, d)| (d, j)).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut ranks: Vec<(usize, usize)> = sorted
            .iter()
            .enumerate()
            .map(|(r, &(_, j))| (j, r))
            .collect();
        ranks.sort_unstable();
        RankStats { sorted, ranks }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[(f64, usize)] {
        &self.sorted
    }

    /// 0-based rank `φ(j)` of candidate `j`.
    pub fn rank_phi(&self, j: usize) -> Option<usize> {
        self.ranks
            .binary_search_by_key(&j, |&(c, _)| c)
            .ok()
            .map(|pos| self.ranks[pos].1)
    }

    /// Mean of the smallest `⌈k/100 · count⌉` dissimilarities (at least one).
    pub fn percentile_avg(&self, k: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        let take = nearest_rank(k, self.sorted.len());
        self.sorted[..take].iter().map(|&(d, _)| d).sum::<f64>() / take as f64
    }

    /// Nearest-rank 25th percentile.
    pub fn quartile(&self) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.sorted[nearest_rank(25.0, self.sorted.len()) - 1].0
    }
}

fn nearest_rank(k: f64, count: usize) -> usize {
    ((k * count as f64 / 100.0).ceil() as usize).clamp(1, count)
}

/// Percentile compatibility: 1 when `D = p_avg = 0`, `(1 - D/p_avg)^φ` when
/// `D ≤ p_avg` and `p_avg > 0`, otherwise 0. `0^0` is taken as 1.
pub fn compat_percentile<T: Scalar>(d: T, p_avg: T, phi: usize) -> T {
    if d == T::zero() && p_avg == T::zero() {
        T::one()
    } else if d <= p_avg && p_avg > T::zero() {
        (T::one() - d / p_avg).powi(phi as i32)
    } else {
        T::zero()
    }
}

/// Andaló compatibility `exp(-φ - D/quartile)`. A zero quartile yields
/// `exp(-φ)` for `D = 0` and 0 otherwise.
pub fn compat_andalo<T: Scalar>(d: T, quartile: T, phi: usize) -> T {
    let phi = T::from_count(phi);
    if quartile > T::zero() {
        (-phi - d / quartile).exp()
    } else if d == T::zero() {
        (-phi).exp()
    } else {
        T::zero()
    }
}

/// One redraw of a maximal compatibility touching a constant piece:
/// `max{0, X}` with `X ~ U(-4, 1)`.
pub fn redraw_maximal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(-4.0..1.0f64).max(0.0)
}

/// Compatibility over piece states, laid out `[(s_i * S + s_j) * 4 + R]`.
/// Entries between states of the same piece are 0.
#[derive(Clone, Debug, PartialEq)]
pub struct CompatibilityTable<T> {
    pieces: usize,
    orientations: usize,
    values: Vec<T>,
}

impl<T: Scalar> CompatibilityTable<T> {
    pub fn zeros(pieces: usize, orientations: usize) -> CompatibilityTable<T> {
        let states = pieces * orientations;
        CompatibilityTable {
            pieces,
            orientations,
            values: vec![T::zero(); states * states * 4],
        }
    }

    /// Builds a table from `f(s_i, s_j, rel)` for distinct pieces.
    pub fn from_fn(
        pieces: usize,
        orientations: usize,
        mut f: impl FnMut(usize, usize, Relation) -> T,
    ) -> Self {
        let mut table = Self::zeros(pieces, orientations);
        let states = table.states();
        for s_i in 0..states {
            for s_j in 0..states {
                if s_i / orientations == s_j / orientations {
                    continue;
                }
                for rel in Relation::ALL {
                    table.values[(s_i * states + s_j) * 4 + rel.index()] = f(s_i, s_j, rel);
                }
            }
        }
        table
    }

    #[inline]
    pub fn pieces(&self) -> usize {
        self.pieces
    }

    #[inline]
    pub fn orientations(&self) -> usize {
        self.orientations
    }

    #[inline]
    pub fn states(&self) -> usize {
        self.pieces * self.orientations
    }

    #[inline]
    fn slot(&self, s_i: usize, s_j: usize, rel: Relation) -> usize {
        (s_i * self.states() + s_j) * 4 + rel.index()
    }

    #[inline]
    pub fn get(&self, s_i: usize, s_j: usize, rel: Relation) -> T {
        self.values[self.slot(s_i, s_j, rel)]
    }

    pub fn set(&mut self, s_i: usize, s_j: usize, rel: Relation, value: T) {
        if s_i / self.orientations != s_j / self.orientations {
            let slot = self.slot(s_i, s_j, rel);
            self.values[slot] = value;
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `C(i, j, R) == C(j, i, opposite(R))` for every entry.
    pub fn is_symmetric(&self) -> bool {
        let states = self.states();
        (0..states).all(|a| {
            (0..states).all(|b| {
                Relation::ALL
                    .iter()
                    .all(|&r| self.get(a, b, r) == self.get(b, a, r.opposite()))
            })
        })
    }

    /// Averages each directed entry with its mirrored counterpart.
    pub fn symmetrize(&self) -> CompatibilityTable<T> {
        let states = self.states();
        let half = T::lit(0.5);
        let mut out = self.clone();
        for a in 0..states {
            for b in 0..states {
                for rel in Relation::ALL {
                    let x = self.get(a, b, rel);
                    let y = self.get(b, a, rel.opposite());
                    // x == y short-circuits so fixed points stay bit-identical
                    let v = if x == y { x } else { (x + y) * half };
                    out.values[(a * states + b) * 4 + rel.index()] = v;
                }
            }
        }
        out
    }

    /// Writes the table as a little-endian binary dump: magic `JRLC`, format
    /// version `u32`, piece count `u32`, orientations `u32`, then every entry
    /// as `f64` in `(s_i, s_j, R)` order.
    pub fn write_dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(b"JRLC")?;
        for header in [1u32, self.pieces as u32, self.orientations as u32] {
            out.write_all(&header.to_le_bytes())?;
        }
        for v in &self.values {
            out.write_all(&v.as_f64().to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump<R: Read>(mut input: R) -> io::Result<CompatibilityTable<T>> {
        let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != b"JRLC" {
            return Err(bad("not a compatibility dump"));
        }
        let mut word = [0u8; 4];
        let mut header = [0u32; 3];
        for h in &mut header {
            input.read_exact(&mut word)?;
            *h = u32::from_le_bytes(word);
        }
        if header[0] != 1 {
            return Err(bad("unsupported dump version"));
        }
        let mut table = Self::zeros(header[1] as usize, header[2] as usize);
        let mut buf = [0u8; 8];
        for v in &mut table.values {
            input.read_exact(&mut buf)?;
            *v = T::lit(f64::from_le_bytes(buf));
        }
        Ok(table)
    }
}

/// Directed compatibilities from directed dissimilarities. Candidates for a
/// `(state, relation)` group are all states of the other pieces.
pub fn raw_compatibility<T: Scalar>(
    dis: &DissimilarityTable,
    measure: Measure,
    k: f64,
) -> CompatibilityTable<T> {
    let states = dis.states();
    let orient = dis.orientations();
    let mut table = CompatibilityTable::zeros(dis.pieces(), orient);
    table
        .values
        .par_chunks_mut(states * 4)
        .enumerate()
        .for_each(|(s_i, out)| {
            for rel in Relation::ALL {
                let stats = RankStats::new(
                    (0..states)
                        .filter(|&s_j| s_j / orient != s_i / orient)
                        .map(|s_j| (s_j, dis.get(s_i, s_j, rel).unwrap_or(f64::INFINITY))),
                );
                let scale = match measure {
                    Measure::Percentile => stats.percentile_avg(k),
                    Measure::Andalo => stats.quartile(),
                };
                for (phi, &(d, s_j)) in stats.sorted().iter().enumerate() {
                    let c = match measure {
                        Measure::Percentile => compat_percentile(T::lit(d), T::lit(scale), phi),
                        Measure::Andalo => compat_andalo(T::lit(d), T::lit(scale), phi),
                    };
                    out[s_j * 4 + rel.index()] = c;
                }
            }
        });
    table
}

/// Redraws every entry `(i, j, R)` linked through some constant piece `c`
/// with `C(i, c, R) = 1` and `C(c, j, R) = 1`, then re-symmetrizes. Tables
/// with two or fewer constant pieces are returned unchanged. Returns the
/// adjusted table and the number of redrawn entries.
pub fn adjust_constant<T: Scalar>(
    table: &CompatibilityTable<T>,
    constant_flags: &[bool],
    seed: u64,
) -> (CompatibilityTable<T>, usize) {
    if constant_flags.iter().filter(|&&c| c).count() <= 2 {
        return (table.clone(), 0);
    }
    let states = table.states();
    let k = table.orientations();
    let mut affected = vec![false; states * states * 4];
    for rel in Relation::ALL {
        for s_c in (0..states).filter(|&s| constant_flags[s / k]) {
            let into: Vec<usize> = (0..states)
                .filter(|&a| table.get(a, s_c, rel) == T::one())
                .collect();
            if into.is_empty() {
                continue;
            }
            let out_of: Vec<usize> = (0..states)
                .filter(|&b| table.get(s_c, b, rel) == T::one())
                .collect();
            for &a in &into {
                for &b in &out_of {
                    if a / k != b / k && a / k != s_c / k && b / k != s_c / k {
                        affected[(a * states + b) * 4 + rel.index()] = true;
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adjusted = table.clone();
    let mut redrawn = 0;
    for (slot, hit) in affected.iter().enumerate() {
        if *hit {
            adjusted.values[slot] = T::lit(redraw_maximal(&mut rng));
            redrawn += 1;
        }
    }
    (adjusted.symmetrize(), redrawn)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompatibilityParams {
    pub measure: Measure,
    /// Percentile for the percentile measure, in `(0, 100]`.
    pub k: f64,
    pub seed: u64,
}

/// Result of the full compatibility pipeline.
#[derive(Clone, Debug)]
pub struct Compatibility<T> {
    pub table: CompatibilityTable<T>,
    pub constant_pieces: usize,
    pub redrawn: usize,
}

/// Full pipeline from piece rasters to the symmetric compatibility table.
pub fn build_compatibility<T: Scalar>(
    pieces: &PieceSet,
    puzzle_type: PuzzleType,
    params: &CompatibilityParams,
) -> Result<Compatibility<T>> {
    if !(params.k > 0.0 && params.k <= 100.0) {
        return Err(Error::Parameter(format!(
            "percentile k = {} outside (0, 100]",
            params.k
        )));
    }
    let dis = dissimilarity_table(pieces, puzzle_type)?;
    let raw = raw_compatibility::<T>(&dis, params.measure, params.k);
    let sym = raw.symmetrize();
    let (table, redrawn) = adjust_constant(&sym, pieces.constant_flags(), params.seed);
    Ok(Compatibility {
        table,
        constant_pieces: pieces.constant_count(),
        redrawn,
    })
}

//! Image ingestion, CIELAB piece rasters and the Mahalanobis gradient
//! dissimilarity between piece boundaries.

use std::path::Path;

use image::RgbImage;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problem::{GridDims, Position, PuzzleType, Relation};

/// CIELAB triple `(L*, a*, b*)`.
pub type Lab = [f64; 3];

// D65 reference white, Y normalized to 1.
const WHITE_X: f64 = 0.950_455_927_051_671_6;
const WHITE_Y: f64 = 1.0;
const WHITE_Z: f64 = 1.089_057_750_759_878_4;

// sRGB primaries to XYZ (D65).
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [
        0.412_390_799_265_959_5,
        0.357_584_339_383_878,
        0.180_480_788_401_834_3,
    ],
    [
        0.212_639_005_871_510_4,
        0.715_168_678_767_756,
        0.072_192_315_360_733_7,
    ],
    [
        0.019_330_818_715_591_8,
        0.119_194_779_794_625_99,
        0.950_532_152_249_660_7,
    ],
];

const LAB_EPSILON: f64 = 216.0 / 24389.0;
const LAB_KAPPA: f64 = 24389.0 / 27.0;

/// Covariance ridge added to every fitted gradient covariance.
pub const COVARIANCE_RIDGE: f64 = 1e-6;

#[inline]
fn srgb_to_linear(channel: u8) -> f64 {
    let c = f64::from(channel) / 255.0;
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

#[inline]
fn lab_f(t: f64) -> f64 {
    if t > LAB_EPSILON {
        t.cbrt()
    } else {
        (LAB_KAPPA * t + 16.0) / 116.0
    }
}

/// 8-bit sRGB to CIELAB under the D65 white point.
pub fn srgb_to_cielab(rgb: [u8; 3]) -> Lab {
    let lin = rgb.map(srgb_to_linear);
    let xyz: [f64; 3] = RGB_TO_XYZ.map(|row| row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2]);
    let fx = lab_f(xyz[0] / WHITE_X);
    let fy = lab_f(xyz[1] / WHITE_Y);
    let fz = lab_f(xyz[2] / WHITE_Z);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Square piece of CIELAB pixels, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PieceRaster {
    size: usize,
    pixels: Vec<Lab>,
}

impl PieceRaster {
    pub fn new(size: usize, pixels: Vec<Lab>) -> Result<PieceRaster> {
        if size == 0 || pixels.len() != size * size {
            return Err(Error::PieceSize {
                expected: size * size,
                found: pixels.len(),
            });
        }
        Ok(PieceRaster { size, pixels })
    }

    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> Lab) -> PieceRaster {
        let pixels = (0..size * size).map(|k| f(k / size, k % size)).collect();
        PieceRaster { size, pixels }
    }

    pub fn from_rgb(img: &RgbImage) -> Result<PieceRaster> {
        let (w, h) = img.dimensions();
        if w != h {
            return Err(Error::PieceSize {
                expected: w as usize,
                found: h as usize,
            });
        }
        let pixels = img.pixels().map(|p| srgb_to_cielab(p.0)).collect();
        PieceRaster::new(w as usize, pixels)
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> Lab {
        self.pixels[row * self.size + col]
    }

    pub fn pixels(&self) -> &[Lab] {
        &self.pixels
    }

    /// Clockwise rotation by `quarters` quarter turns.
    pub fn rotate_cw(&self, quarters: usize) -> PieceRaster {
        let p = self.size;
        match quarters % 4 {
            0 => self.clone(),
            1 => PieceRaster::from_fn(p, |r, c| self.at(p - 1 - c, r)),
            2 => PieceRaster::from_fn(p, |r, c| self.at(p - 1 - r, p - 1 - c)),
            _ => PieceRaster::from_fn(p, |r, c| self.at(c, p - 1 - r)),
        }
    }

    /// Largest per-channel spread `max - min` over the piece.
    pub fn channel_spread(&self) -> f64 {
        (0..3)
            .map(|ch| {
                let (lo, hi) = self
                    .pixels
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), px| {
                        (lo.min(px[ch]), hi.max(px[ch]))
                    });
                hi - lo
            })
            .fold(0.0, f64::max)
    }
}

/// Default constancy tolerance for photographic input (CIELAB units).
pub const PHOTO_CONSTANT_TOLERANCE: f64 = 0.5;
/// Default constancy tolerance for synthetic input.
pub const SYNTHETIC_CONSTANT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct PieceSet {
    pieces: Vec<PieceRaster>,
    piece_size: usize,
    constant_flags: Vec<bool>,
}

impl PieceSet {
    pub fn new(pieces: Vec<PieceRaster>, constant_tolerance: f64) -> Result<PieceSet> {
        let piece_size = pieces.first().map(PieceRaster::size).unwrap_or(0);
        if let Some(bad) = pieces.iter().find(|p| p.size() != piece_size) {
            return Err(Error::PieceSize {
                expected: piece_size,
                found: bad.size(),
            });
        }
        let constant_flags = detect_constant_pieces(&pieces, constant_tolerance);
        Ok(PieceSet {
            pieces,
            piece_size,
            constant_flags,
        })
    }

    pub fn from_rgb(images: &[RgbImage], constant_tolerance: f64) -> Result<PieceSet> {
        let pieces = images
            .iter()
            .map(PieceRaster::from_rgb)
            .collect::<Result<Vec<_>>>()?;
        PieceSet::new(pieces, constant_tolerance)
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn piece_size(&self) -> usize {
        self.piece_size
    }

    pub fn pieces(&self) -> &[PieceRaster] {
        &self.pieces
    }

    pub fn piece(&self, i: usize) -> &PieceRaster {
        &self.pieces[i]
    }

    pub fn constant_flags(&self) -> &[bool] {
        &self.constant_flags
    }

    pub fn constant_count(&self) -> usize {
        self.constant_flags.iter().filter(|&&c| c).count()
    }
}

/// Flags pieces whose per-channel spread is within `tol`.
pub fn detect_constant_pieces(pieces: &[PieceRaster], tol: f64) -> Vec<bool> {
    pieces.iter().map(|p| p.channel_spread() <= tol).collect()
}

pub fn load_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    Ok(image::open(path)?.to_rgb8())
}

/// Pieces cut from an image in row-major ground-truth order.
#[derive(Clone, Debug)]
pub struct CutImage {
    pub rgb: Vec<RgbImage>,
    pub pieces: PieceSet,
    /// Ground-truth position of piece `i` (identity placement).
    pub placement: Vec<Position>,
}

/// Cuts the top-left `N·P × M·P` region into `N·M` square pieces; excess
/// pixels on the right and bottom are discarded.
pub fn cut_image(
    image: &RgbImage,
    dims: GridDims,
    piece_size: usize,
    constant_tolerance: f64,
) -> Result<CutImage> {
    let rgb = cut_rgb(image, dims, piece_size)?;
    let pieces = PieceSet::from_rgb(&rgb, constant_tolerance)?;
    Ok(CutImage {
        rgb,
        pieces,
        placement: dims.positions().collect(),
    })
}

pub fn cut_rgb(image: &RgbImage, dims: GridDims, piece_size: usize) -> Result<Vec<RgbImage>> {
    let (w, h) = image.dimensions();
    let too_small = Error::ImageTooSmall {
        width: w,
        height: h,
        rows: dims.rows(),
        cols: dims.cols(),
        piece_size,
    };
    if piece_size == 0
        || (w as usize) < dims.cols() * piece_size
        || (h as usize) < dims.rows() * piece_size
    {
        return Err(too_small);
    }
    let p = piece_size as u32;
    Ok(dims
        .positions()
        .map(|pos| {
            let x0 = (pos.col as u32 - 1) * p;
            let y0 = (pos.row as u32 - 1) * p;
            image::imageops::crop_imm(image, x0, y0, p, p).to_image()
        })
        .collect())
}

type Mat3 = [[f64; 3]; 3];

/// Gaussian model of within-piece gradients next to one boundary.
#[derive(Clone, Debug)]
struct GradientModel {
    mean: Lab,
    /// Lower Cholesky factor of the regularized covariance.
    chol: Mat3,
}

impl GradientModel {
    fn fit(samples: &[Lab]) -> GradientModel {
        let count = samples.len();
        let mut mean = [0.0; 3];
        for s in samples {
            for c in 0..3 {
                mean[c] += s[c];
            }
        }
        if count > 0 {
            mean.iter_mut().for_each(|m| *m /= count as f64);
        }
        // scatter of the samples plus the zero and per-channel unit dummies
        let mut scatter = [[0.0; 3]; 3];
        for s in samples {
            let d = [s[0] - mean[0], s[1] - mean[1], s[2] - mean[2]];
            for a in 0..3 {
                for b in 0..3 {
                    scatter[a][b] += d[a] * d[b];
                }
            }
        }
        let denom = (count + 3) as f64;
        let mut cov = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                cov[a][b] = scatter[a][b] / denom;
            }
            cov[a][a] += 1.0 / denom + COVARIANCE_RIDGE;
        }
        GradientModel {
            mean,
            chol: cholesky3(&cov),
        }
    }

    /// Squared Mahalanobis distance of `g` from the model.
    #[inline]
    fn distance(&self, g: &Lab) -> f64 {
        let d = [
            g[0] - self.mean[0],
            g[1] - self.mean[1],
            g[2] - self.mean[2],
        ];
        let l = &self.chol;
        let y0 = d[0] / l[0][0];
        let y1 = (d[1] - l[1][0] * y0) / l[1][1];
        let y2 = (d[2] - l[2][0] * y0 - l[2][1] * y1) / l[2][2];
        y0 * y0 + y1 * y1 + y2 * y2
    }
}

fn cholesky3(a: &Mat3) -> Mat3 {
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                l[i][i] = sum.max(f64::MIN_POSITIVE).sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    l
}

/// Everything one side of a piece contributes to a seam comparison.
#[derive(Clone, Debug)]
struct EdgeProfile {
    /// Boundary pixels, top to bottom.
    boundary: Vec<Lab>,
    /// Differences between vertically consecutive boundary pixels.
    along: Vec<Lab>,
    across_model: GradientModel,
    along_model: GradientModel,
}

#[inline]
fn sub(a: Lab, b: Lab) -> Lab {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

impl EdgeProfile {
    /// Profile of the column `edge`, with `inner` the adjacent interior
    /// column; across-gradients point outward.
    fn from_columns(piece: &PieceRaster, edge: usize, inner: usize) -> EdgeProfile {
        let p = piece.size();
        let boundary: Vec<Lab> = (0..p).map(|r| piece.at(r, edge)).collect();
        let across: Vec<Lab> = (0..p)
            .map(|r| sub(piece.at(r, edge), piece.at(r, inner)))
            .collect();
        let along: Vec<Lab> = boundary.windows(2).map(|w| sub(w[1], w[0])).collect();
        EdgeProfile {
            across_model: GradientModel::fit(&across),
            along_model: GradientModel::fit(&along),
            boundary,
            along,
        }
    }

    fn right(piece: &PieceRaster) -> EdgeProfile {
        let p = piece.size();
        Self::from_columns(piece, p - 1, p.saturating_sub(2))
    }

    fn left(piece: &PieceRaster) -> EdgeProfile {
        Self::from_columns(piece, 0, 1.min(piece.size() - 1))
    }

    /// Disagreement of `other`'s boundary with the gradients this side
    /// predicts for the seam.
    fn seam_cost(&self, other: &EdgeProfile) -> f64 {
        let across: f64 = self
            .boundary
            .iter()
            .zip(&other.boundary)
            .map(|(own, theirs)| self.across_model.distance(&sub(*theirs, *own)))
            .sum();
        let along: f64 = other
            .along
            .iter()
            .map(|g| self.along_model.distance(g))
            .sum();
        across + along
    }
}

/// Dissimilarity of placing `right` immediately to the right of `left`.
fn seam_dissimilarity(left: &EdgeProfile, right: &EdgeProfile) -> f64 {
    left.seam_cost(right) + right.seam_cost(left)
}

/// Mahalanobis gradient dissimilarity of placing `b_j` in relation `rel` to
/// `b_i`. Relations other than `Right` are evaluated by rotating both pieces
/// so that the relation becomes `Right`.
pub fn mgc_dissimilarity(b_i: &PieceRaster, b_j: &PieceRaster, rel: Relation) -> Result<f64> {
    if b_i.size() != b_j.size() {
        return Err(Error::PieceSize {
            expected: b_i.size(),
            found: b_j.size(),
        });
    }
    let q = (4 - rel.quarters_from_right()) % 4;
    let (ri, rj) = (b_i.rotate_cw(q), b_j.rotate_cw(q));
    Ok(seam_dissimilarity(
        &EdgeProfile::right(&ri),
        &EdgeProfile::left(&rj),
    ))
}

/// Directed dissimilarities over piece states.
///
/// A state is a piece in a fixed orientation, `state = piece * K + quarters`,
/// with `K = 1` for Type 1 and `K = 4` for Type 2. Entries between two states
/// of the same piece are undefined and report `None`.
#[derive(Clone, Debug)]
pub struct DissimilarityTable {
    pieces: usize,
    orientations: usize,
    values: Vec<f64>,
}

impl DissimilarityTable {
    /// Assembles a table from raw values laid out `[(s_i * S + s_j) * 4 + R]`.
    pub fn from_values(
        pieces: usize,
        orientations: usize,
        values: Vec<f64>,
    ) -> Result<DissimilarityTable> {
        let states = pieces * orientations;
        if values.len() != states * states * 4 {
            return Err(Error::DimensionMismatch(format!(
                "{} dissimilarities for {states} states",
                values.len()
            )));
        }
        Ok(DissimilarityTable {
            pieces,
            orientations,
            values,
        })
    }

    pub fn pieces(&self) -> usize {
        self.pieces
    }

    pub fn orientations(&self) -> usize {
        self.orientations
    }

    pub fn states(&self) -> usize {
        self.pieces * self.orientations
    }

    #[inline]
    pub fn get(&self, s_i: usize, s_j: usize, rel: Relation) -> Option<f64> {
        let k = self.orientations;
        (s_i / k != s_j / k).then(|| self.values[(s_i * self.states() + s_j) * 4 + rel.index()])
    }

    /// Number of defined entries.
    pub fn defined_len(&self) -> usize {
        let k = self.orientations;
        4 * self.states() * (self.states() - k)
    }
}

/// Dissimilarities for every ordered pair of distinct piece states and every
/// relation. Only seams in relation `Right` are measured; the remaining
/// relations follow from rotating the pair configuration, since
/// `D(θ_i b_i, θ_j b_j, R) = D_right((θ_i + q) b_i, (θ_j + q) b_j)` with `q`
/// the quarter turns that carry `R` onto `Right`.
pub fn dissimilarity_table(
    pieces: &PieceSet,
    puzzle_type: PuzzleType,
) -> Result<DissimilarityTable> {
    let n = pieces.len();
    if n < 2 {
        return Err(Error::PieceCount {
            expected: 2,
            found: n,
        });
    }
    let k = puzzle_type.orientations();
    // per piece, per rotation: (right profile, left profile)
    let profiles: Vec<[(EdgeProfile, EdgeProfile); 4]> = pieces
        .pieces()
        .par_iter()
        .map(|piece| {
            [0, 1, 2, 3].map(|q| {
                let r = piece.rotate_cw(q);
                (EdgeProfile::right(&r), EdgeProfile::left(&r))
            })
        })
        .collect();

    let states = n * k;
    let mut values = vec![0.0; states * states * 4];
    values
        .par_chunks_mut(states * 4)
        .enumerate()
        .for_each(|(s_i, out)| {
            let (i, theta_i) = (s_i / k, s_i % k);
            for s_j in 0..states {
                let (j, theta_j) = (s_j / k, s_j % k);
                if i == j {
                    continue;
                }
                for rel in Relation::ALL {
                    let q = (4 - rel.quarters_from_right()) % 4;
                    let left = &profiles[i][(theta_i + q) % 4].0;
                    let right = &profiles[j][(theta_j + q) % 4].1;
                    out[s_j * 4 + rel.index()] = seam_dissimilarity(left, right);
                }
            }
        });
    Ok(DissimilarityTable {
        pieces: n,
        orientations: k,
        values,
    })
}

#![allow(dead_code)]

use image::{Rgb, RgbImage};
use jigsaw_rl::{
    Arrangement, GridDims, Orientation, PieceRaster, PieceSet, Placement,
    SYNTHETIC_CONSTANT_TOLERANCE,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A smooth, textured test image: a few random plane waves per channel.
pub fn smooth_image(width: u32, height: u32, seed: u64) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<[f64; 4]> = (0..12)
        .map(|_| {
            [
                rng.random_range(-0.08..0.08),
                rng.random_range(-0.08..0.08),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(20.0..45.0),
            ]
        })
        .collect();
    RgbImage::from_fn(width, height, |x, y| {
        let mut px = [0u8; 3];
        for (c, out) in px.iter_mut().enumerate() {
            let v: f64 = waves[c * 4..c * 4 + 4]
                .iter()
                .map(|[fx, fy, ph, amp]| amp * (fx * x as f64 + fy * y as f64 + ph).sin())
                .sum();
            *out = (128.0 + v).clamp(0.0, 255.0) as u8;
        }
        Rgb(px)
    })
}

/// A cut puzzle with its pieces shuffled (and turned, if `rotate`).
pub struct Shuffled {
    pub pieces: PieceSet,
    pub truth: Arrangement,
}

pub fn shuffled_puzzle(
    image: &RgbImage,
    dims: GridDims,
    piece_size: usize,
    seed: u64,
    rotate: bool,
    tol: f64,
) -> Shuffled {
    let cut = jigsaw_rl::cut_image(image, dims, piece_size, tol).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..dims.len()).collect();
    order.shuffle(&mut rng);
    let turns: Vec<usize> = order
        .iter()
        .map(|_| if rotate { rng.random_range(0..4) } else { 0 })
        .collect();
    let rasters: Vec<PieceRaster> = order
        .iter()
        .zip(&turns)
        .map(|(&i, &q)| cut.pieces.piece(i).rotate_cw(q))
        .collect();
    let truth = order
        .iter()
        .zip(&turns)
        .map(|(&i, &q)| Placement {
            position: dims.position(i),
            orientation: Orientation::from_quarters(q).inverse(),
        })
        .collect();
    Shuffled {
        pieces: PieceSet::new(rasters, tol).unwrap(),
        truth: Arrangement::new(dims, truth).unwrap(),
    }
}

pub fn synthetic_puzzle(
    rows: usize,
    cols: usize,
    piece_size: usize,
    seed: u64,
    rotate: bool,
) -> Shuffled {
    let dims = GridDims::new(rows, cols).unwrap();
    let img = smooth_image((cols * piece_size) as u32, (rows * piece_size) as u32, seed);
    shuffled_puzzle(
        &img,
        dims,
        piece_size,
        seed.wrapping_add(1),
        rotate,
        SYNTHETIC_CONSTANT_TOLERANCE,
    )
}

/// Paints the top band of an image one flat color so its pieces are constant.
pub fn paint_sky(image: &mut RgbImage, height: u32) {
    for y in 0..height.min(image.height()) {
        for x in 0..image.width() {
            image.put_pixel(x, y, Rgb([250, 250, 250]));
        }
    }
}

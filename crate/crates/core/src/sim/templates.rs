use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::linalg::Matrix;
use crate::rng::{derive_seed, rng_for, standard_normals};
use crate::stats;

/// Digit masks on a 33×33 canvas; `#` marks active pixels. The three digits
/// sit in separate horizontal bands. Other grid sizes are rendered by
/// nearest-pixel resampling.
pub const DIGIT_MASKS: [[&str; 33]; 3] = [
    [
        ".................................",
        ".................................",
        "................##...............",
        "...............###...............",
        "..............####...............",
        "................##...............",
        "................##...............",
        "................##...............",
        "................##...............",
        "................##...............",
        "..............######.............",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
    ],
    [
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        "..........##........##...........",
        "............#.........#..........",
        "...........#.........#...........",
        "..........#.........#............",
        "..........###.......###..........",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
    ],
    [
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
        ".....##........##........##......",
        ".......#.........#.........#.....",
        "......#.........#.........#......",
        ".......#.........#.........#.....",
        ".....##........##........##......",
        ".................................",
        ".................................",
        ".................................",
        ".................................",
    ],
];

const CANVAS: usize = 33;
const MIN_GRID: usize = 9;

/// Boolean activity mask of digit template `index` on a `height × width` grid.
pub fn template_mask(index: usize, height: usize, width: usize) -> Result<Vec<bool>> {
    if height < MIN_GRID || width < MIN_GRID {
        return Err(invalid!("grid {height}x{width} is too small to render digit masks (minimum {MIN_GRID}x{MIN_GRID})"));
    }
    let art = DIGIT_MASKS
        .get(index)
        .ok_or_else(|| invalid!("there are only {} digit templates", DIGIT_MASKS.len()))?;
    let mut mask = Vec::with_capacity(height * width);
    for r in 0..height {
        let line = art[r * CANVAS / height].as_bytes();
        for c in 0..width {
            mask.push(line[c * CANVAS / width] == b'#');
        }
    }
    Ok(mask)
}

/// The three group templates ("1", "2 2", "3 3 3") as standardized rows.
///
/// Active pixels are uniform on (0.5, 1); inactive ones are N(0, 0.001).
pub fn make_group_templates(height: usize, width: usize, seed: u64) -> Result<Matrix> {
    let raw = make_group_templates_raw(height, width, seed)?;
    let mut rows: Vec<Vec<f64>> = raw.rows_iter().map(|r| r.to_vec()).collect();
    for r in rows.iter_mut() {
        stats::standardize(r)?;
    }
    Matrix::from_rows(&rows)
}

/// Templates before standardization.
pub fn make_group_templates_raw(height: usize, width: usize, seed: u64) -> Result<Matrix> {
    let v = height * width;
    let inactive_sd = libm::sqrt(0.001);
    let mut rows = Vec::with_capacity(DIGIT_MASKS.len());
    for d in 0..DIGIT_MASKS.len() {
        let mask = template_mask(d, height, width)?;
        let mut rng = rng_for(derive_seed(seed, &[d as u64]), &[]);
        let noise = standard_normals(&mut rng, v);
        let mut row = Vec::with_capacity(v);
        for (i, &active) in mask.iter().enumerate() {
            row.push(if active {
                rand::Rng::random_range(&mut rng, 0.5..1.0)
            } else {
                inactive_sd * noise[i]
            });
        }
        rows.push(row);
    }
    Matrix::from_rows(&rows)
}

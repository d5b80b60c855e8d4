//! Synthetic patch injection and block-level detection metrics.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TvrError};
use crate::resurface::ResurfaceResult;
use crate::scalar::Scalar;
use crate::tensor::{ImageTensor, CHANNELS};

/// Rejection-sampling budget for random placement.
pub const PLACEMENT_ATTEMPTS: usize = 1_000;
/// Range of the per-patch side scale draw when jitter is enabled.
pub const SCALE_JITTER: (f64, f64) = (0.7, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub enum Placement {
    /// Uniformly random, non-overlapping.
    Random,
    /// Top-left `(row, col)` of each patch.
    Explicit(Vec<(usize, usize)>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Texture<T> {
    /// Independent uniform intensity per pixel and channel.
    Noise,
    /// Black and white squares of the given cell side.
    Checkerboard {
        cell: usize,
    },
    Solid([T; CHANNELS]),
    /// Resampled (nearest neighbour) to each patch's side.
    Image(ImageTensor<T>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatchSpec<T> {
    pub count: usize,
    /// Total patch area as a fraction of the image area.
    pub area_fraction: f64,
    pub placement: Placement,
    pub texture: Texture<T>,
    pub seed: u64,
    /// Scale each patch side by a draw from [`SCALE_JITTER`].
    pub scale_jitter: bool,
}

impl<T: Scalar> PatchSpec<T> {
    pub fn new(count: usize, area_fraction: f64, seed: u64) -> Self {
        Self {
            count,
            area_fraction,
            placement: Placement::Random,
            texture: Texture::Noise,
            seed,
            scale_jitter: false,
        }
    }

    pub fn with_placement(mut self, placement: Placement) -> Self {
        self.placement = placement;
        self
    }

    pub fn with_texture(mut self, texture: Texture<T>) -> Self {
        self.texture = texture;
        self
    }

    pub fn per_patch_area(&self) -> f64 {
        self.area_fraction / self.count as f64
    }

    /// Nominal patch side for an image of side `n`.
    pub fn patch_side(&self, n: usize) -> usize {
        (n as f64 * self.per_patch_area().sqrt()).round() as usize
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.count == 0 {
            return Err(TvrError::Config("patch count must be at least 1".into()));
        }
        if !(self.area_fraction > 0.0 && self.area_fraction < 1.0) {
            return Err(TvrError::Config(format!(
                "area fraction must lie in (0, 1), got {}",
                self.area_fraction
            )));
        }
        let side = self.patch_side(n);
        if side == 0 || side > n {
            return Err(TvrError::Config(format!(
                "patch side {side} does not fit an image of side {n}"
            )));
        }
        if let Texture::Checkerboard { cell: 0 } = self.texture {
            return Err(TvrError::Config("checkerboard cell must be positive".into()));
        }
        if let Placement::Explicit(corners) = &self.placement {
            if corners.len() != self.count {
                return Err(TvrError::Config(format!(
                    "{} corners given for {} patches",
                    corners.len(),
                    self.count
                )));
            }
        }
        Ok(())
    }
}

/// Pixel-level ground truth, row-major `n x n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PixelMask {
    side: usize,
    bits: Vec<bool>,
}

impl PixelMask {
    pub fn new(side: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != side * side {
            return Err(TvrError::Shape(format!(
                "expected {} truth pixels, got {}",
                side * side,
                bits.len()
            )));
        }
        Ok(Self { side, bits })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.side + col]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Blocks of side `k` that contain at least one marked pixel.
    pub fn touched_blocks(&self, k: usize) -> BTreeSet<usize> {
        let nrow = self.side / k;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, on)| **on)
            .map(|(p, _)| {
                let (r, c) = (p / self.side, p % self.side);
                (r / k) * nrow + c / k
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Rect {
    row: usize,
    col: usize,
    side: usize,
}

impl Rect {
    fn overlaps(&self, other: &Rect) -> bool {
        self.row < other.row + other.side
            && other.row < self.row + self.side
            && self.col < other.col + other.side
            && other.col < self.col + self.side
    }
}

fn place(spec_sides: &[usize], n: usize, placement: &Placement, rng: &mut ChaCha8Rng) -> Result<Vec<Rect>> {
    let mut placed: Vec<Rect> = Vec::with_capacity(spec_sides.len());
    match placement {
        Placement::Explicit(corners) => {
            for (&(row, col), &side) in corners.iter().zip(spec_sides) {
                let rect = Rect { row, col, side };
                if row + side > n || col + side > n {
                    return Err(TvrError::Config(format!(
                        "patch at ({row}, {col}) with side {side} leaves the {n}x{n} image"
                    )));
                }
                if placed.iter().any(|p| p.overlaps(&rect)) {
                    return Err(TvrError::Config(format!(
                        "patch at ({row}, {col}) overlaps another patch"
                    )));
                }
                placed.push(rect);
            }
        }
        Placement::Random => {
            let mut attempts = 0;
            for &side in spec_sides {
                loop {
                    if attempts == PLACEMENT_ATTEMPTS {
                        return Err(TvrError::Placement {
                            count: spec_sides.len(),
                            side,
                            attempts,
                        });
                    }
                    attempts += 1;
                    let rect = Rect {
                        row: rng.random_range(0..=n - side),
                        col: rng.random_range(0..=n - side),
                        side,
                    };
                    if !placed.iter().any(|p| p.overlaps(&rect)) {
                        placed.push(rect);
                        break;
                    }
                }
            }
        }
    }
    Ok(placed)
}

/// Stamps square patches into `x` and returns the patched image with its
/// pixel-level ground truth. Deterministic for a fixed seed.
pub fn inject_patches<T: Scalar>(x: &ImageTensor<T>, spec: &PatchSpec<T>) -> Result<(ImageTensor<T>, PixelMask)> {
    let n = x.side();
    spec.validate(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let nominal = spec.patch_side(n);
    let sides: Vec<usize> = (0..spec.count)
        .map(|_| {
            if spec.scale_jitter {
                let s = rng.random_range(SCALE_JITTER.0..=SCALE_JITTER.1);
                ((nominal as f64 * s).round() as usize).max(1)
            } else {
                nominal
            }
        })
        .collect();
    let rects = place(&sides, n, &spec.placement, &mut rng)?;

    let mut data = x.data().to_vec();
    let mut truth = vec![false; n * n];
    for rect in &rects {
        for c in 0..CHANNELS {
            for i in 0..rect.side {
                for j in 0..rect.side {
                    let v = match &spec.texture {
                        Texture::Noise => T::lit(rng.random::<f64>()),
                        Texture::Checkerboard { cell } => {
                            if (i / cell + j / cell) % 2 == 0 {
                                T::one()
                            } else {
                                T::zero()
                            }
                        }
                        Texture::Solid(rgb) => rgb[c],
                        Texture::Image(img) => {
                            let m = img.side();
                            img.get(c, i * m / rect.side, j * m / rect.side)
                        }
                    };
                    let (r, col) = (rect.row + i, rect.col + j);
                    data[(c * n + r) * n + col] = v;
                    truth[r * n + col] = true;
                }
            }
        }
    }
    Ok((ImageTensor::new(n, data)?, PixelMask::new(n, truth)?))
}

/// Block-level detection quality of one resurfacing run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub block_size: usize,
    pub true_patch_blocks: Vec<usize>,
    pub flagged_per_channel: Vec<Vec<usize>>,
    pub flagged_union: Vec<usize>,
    pub precision: f64,
    pub recall: f64,
    pub iou: f64,
    /// Fraction of (channel, patch pixel) entries left unmasked.
    pub residual_overlap: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Compares the blocks flagged in any channel against the blocks touched
/// by the ground-truth patch pixels. Empty denominators count as perfect.
pub fn evaluate_detection<T: Scalar>(result: &ResurfaceResult<T>, truth: &PixelMask) -> Result<DetectionReport> {
    let n = result.mask.side();
    if truth.side() != n {
        return Err(TvrError::Shape(format!(
            "truth is {0}x{0} but the image is {1}x{1}",
            truth.side(),
            n
        )));
    }
    let k = result.grid.block_side();
    let truth_blocks = truth.touched_blocks(k);
    let flagged = result.flags.blocks();
    let hit = flagged.intersection(&truth_blocks).count();
    let union = flagged.union(&truth_blocks).count();

    let patch_pixels = truth.count();
    let mut surviving = 0usize;
    for (p, on) in truth.bits().iter().enumerate() {
        if *on {
            let (r, col) = (p / n, p % n);
            surviving += (0..CHANNELS).filter(|&c| !result.mask.get(c, r, col)).count();
        }
    }
    let residual_overlap = if patch_pixels == 0 {
        0.0
    } else {
        surviving as f64 / (CHANNELS * patch_pixels) as f64
    };

    Ok(DetectionReport {
        block_size: k,
        true_patch_blocks: truth_blocks.into_iter().collect(),
        flagged_per_channel: (0..CHANNELS).map(|c| result.flags.channel(c)).collect(),
        flagged_union: flagged.into_iter().collect(),
        precision: ratio(hit, result.flags.blocks().len()),
        recall: ratio(hit, truth.touched_blocks(k).len()),
        iou: ratio(hit, union),
        residual_overlap,
    })
}

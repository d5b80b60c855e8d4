//! End-to-end cleansing: score, flag, crop, inpaint, compose.

use crate::error::{Result, TvrError};
use crate::inpaint::Inpainter;
use crate::scalar::Scalar;
use crate::tensor::{block_to_image, image_to_block, mask_to_image, ImageTensor, Mask, MaskSet, CHANNELS};
use crate::tv::{flag_blocks, score_grid, DetectorConfig, FlagSet, TvGrid};

#[derive(Clone, Debug, PartialEq)]
pub struct ResurfaceConfig<T> {
    pub detector: DetectorConfig<T>,
    /// Mask a block in every channel when any channel flags it.
    pub channel_union: bool,
    pub inpainter: Inpainter,
}

impl<T: Scalar> ResurfaceConfig<T> {
    pub fn new(detector: DetectorConfig<T>, inpainter: Inpainter) -> Self {
        Self {
            detector,
            channel_union: false,
            inpainter,
        }
    }

    pub fn with_channel_union(mut self, on: bool) -> Self {
        self.channel_union = on;
        self
    }
}

impl<T: Scalar> Default for ResurfaceConfig<T> {
    fn default() -> Self {
        Self::new(DetectorConfig::default(), Inpainter::Diffusion)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResurfaceResult<T> {
    pub cropped: ImageTensor<T>,
    pub mask: Mask,
    pub generated: ImageTensor<T>,
    pub reconstructed: ImageTensor<T>,
    pub grid: TvGrid<T>,
    /// Flags actually masked (after any channel union).
    pub flags: FlagSet,
}

/// Zeroes every flagged block and returns the cropped image with its mask.
pub fn crop_and_mask<T: Scalar>(
    x: &ImageTensor<T>,
    flags: &FlagSet,
    cfg: &ResurfaceConfig<T>,
) -> Result<(ImageTensor<T>, Mask)> {
    let mut blocks = image_to_block(x, cfg.detector.block_side)?;
    let nk = blocks.block_count();
    let mut set = MaskSet::empty(blocks.block_side(), blocks.nrow());
    let expanded;
    let flags = if cfg.channel_union {
        expanded = flags.union_channels();
        &expanded
    } else {
        flags
    };
    for (c, b) in flags.iter() {
        if c >= CHANNELS || b >= nk {
            return Err(TvrError::FlagIndex {
                channel: c,
                block: b,
                blocks: nk,
            });
        }
        blocks.zero_block(c, b);
        set.set(c, b, true);
    }
    Ok((block_to_image(&blocks), mask_to_image(&set)))
}

/// `(1 - m) * cropped + m * generated`, clamped to `[0, 1]`.
pub fn compose<T: Scalar>(cropped: &ImageTensor<T>, generated: &ImageTensor<T>, mask: &Mask) -> Result<ImageTensor<T>> {
    let n = cropped.side();
    if generated.side() != n || mask.side() != n {
        return Err(TvrError::Shape(format!(
            "cannot compose images of side {n} and {} with a mask of side {}",
            generated.side(),
            mask.side()
        )));
    }
    let data = cropped
        .data()
        .iter()
        .zip(generated.data())
        .zip(mask.bits())
        .map(|((xc, xg), on)| {
            let m = if *on { T::one() } else { T::zero() };
            ((T::one() - m) * *xc + m * *xg).max(T::zero()).min(T::one())
        })
        .collect();
    ImageTensor::new(n, data)
}

/// Runs the full pipeline on `x`, returning every intermediate.
pub fn resurface<T: Scalar>(x: &ImageTensor<T>, cfg: &ResurfaceConfig<T>) -> Result<ResurfaceResult<T>> {
    let blocks = image_to_block(x, cfg.detector.block_side)?;
    let grid = score_grid(&blocks, &cfg.detector)?;
    let mut flags = flag_blocks(&grid);
    if cfg.channel_union {
        flags = flags.union_channels();
    }
    let (cropped, mask) = crop_and_mask(x, &flags, cfg)?;
    let generated = if flags.is_empty() {
        cropped.clone()
    } else {
        cfg.inpainter.inpaint(&cropped, &mask)?
    };
    let reconstructed = compose(&cropped, &generated, &mask)?;
    Ok(ResurfaceResult {
        cropped,
        mask,
        generated,
        reconstructed,
        grid,
        flags,
    })
}

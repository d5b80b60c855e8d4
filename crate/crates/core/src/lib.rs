//! Detection and removal of localized adversarial patches.
//!
//! An image is split into `k x k` blocks, each block is scored per channel by
//! its total variation, and blocks scoring above the channel's upper IQR
//! fence are zeroed, inpainted and composed back into the image.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

pub mod bridge;
pub mod error;
pub mod harness;
pub mod inpaint;
pub mod io;
pub mod resurface;
pub mod scalar;
pub mod stats;
pub mod surface;
pub mod tensor;
pub mod tv;

pub use bridge::ExternalBridge;
pub use error::{Result, TvrError};
pub use harness::{evaluate_detection, inject_patches, DetectionReport, PatchSpec, PixelMask, Placement, Texture};
pub use inpaint::Inpainter;
pub use resurface::{compose, crop_and_mask, resurface, ResurfaceConfig, ResurfaceResult};
pub use scalar::Scalar;
pub use stats::{quantile_sorted, upper_fence, Fence};
pub use surface::{export_surface, SurfaceExport};
pub use tensor::{block_to_image, image_to_block, mask_to_image, BlockSet, ImageTensor, Mask, MaskSet, CHANNELS};
pub use tv::{flag_blocks, score_grid, tv_score, DetectorConfig, FlagSet, TvGrid};

pub type Image = ImageTensor<f64>;
pub type Image32 = ImageTensor<f32>;
pub type Blocks = BlockSet<f64>;
pub type Blocks32 = BlockSet<f32>;
pub type Grid = TvGrid<f64>;
pub type Grid32 = TvGrid<f32>;
pub type Detector = DetectorConfig<f64>;
pub type Detector32 = DetectorConfig<f32>;
pub type Config = ResurfaceConfig<f64>;
pub type Config32 = ResurfaceConfig<f32>;
pub type Resurfaced = ResurfaceResult<f64>;
pub type Resurfaced32 = ResurfaceResult<f32>;

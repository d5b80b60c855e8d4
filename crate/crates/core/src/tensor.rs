//! Image and block-set data model.
//!
//! Images are stored channel-major as `[channel][row][col]`. A block set
//! partitions each channel into `k x k` tiles; block `b` sits at grid row
//! `b / nrow` and grid column `b % nrow`, with `nrow = n / k`.

use crate::error::{Result, TvrError};
use crate::scalar::Scalar;

pub const CHANNELS: usize = 3;

/// Three-channel square image with intensities in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageTensor<T> {
    side: usize,
    data: Vec<T>,
}

impl<T: Scalar> ImageTensor<T> {
    pub fn new(side: usize, data: Vec<T>) -> Result<Self> {
        if side == 0 {
            return Err(TvrError::Shape("image side must be at least 1".into()));
        }
        let expected = CHANNELS * side * side;
        if data.len() != expected {
            return Err(TvrError::Shape(format!(
                "expected {expected} intensities for a 3x{side}x{side} image, got {}",
                data.len()
            )));
        }
        check_unit_range(&data)?;
        Ok(Self { side, data })
    }

    pub fn filled(side: usize, value: T) -> Result<Self> {
        Self::new(side, vec![value; CHANNELS * side * side])
    }

    pub fn zeros(side: usize) -> Self {
        assert!(side > 0, "image side must be at least 1");
        Self {
            side,
            data: vec![T::zero(); CHANNELS * side * side],
        }
    }

    /// Builds an image from `f(channel, row, col)`.
    pub fn from_fn(side: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(CHANNELS * side * side);
        for c in 0..CHANNELS {
            for r in 0..side {
                for col in 0..side {
                    data.push(f(c, r, col));
                }
            }
        }
        Self::new(side, data)
    }

    /// Values are assumed to be in range; only used for buffers built from
    /// already-validated tensors.
    pub(crate) fn from_parts(side: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), CHANNELS * side * side);
        Self { side, data }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn channel(&self, c: usize) -> &[T] {
        let plane = self.side * self.side;
        &self.data[c * plane..(c + 1) * plane]
    }

    #[inline]
    pub fn index(&self, c: usize, row: usize, col: usize) -> usize {
        (c * self.side + row) * self.side + col
    }

    #[inline]
    pub fn get(&self, c: usize, row: usize, col: usize) -> T {
        self.data[self.index(c, row, col)]
    }
}

fn check_unit_range<T: Scalar>(data: &[T]) -> Result<()> {
    match data.iter().position(|v| !(*v >= T::zero() && *v <= T::one())) {
        Some(index) => Err(TvrError::Range {
            index,
            value: data[index].to_f64_lossy(),
        }),
        None => Ok(()),
    }
}

/// Channel-major collection of `k x k` blocks, laid out as
/// `[channel][block][row-in-block][col-in-block]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSet<T> {
    block_side: usize,
    nrow: usize,
    data: Vec<T>,
}

impl<T: Scalar> BlockSet<T> {
    pub fn new(block_side: usize, block_count: usize, data: Vec<T>) -> Result<Self> {
        let nrow = grid_side(block_side, block_count)?;
        let expected = CHANNELS * block_count * block_side * block_side;
        if data.len() != expected {
            return Err(TvrError::Shape(format!(
                "expected {expected} values for 3x{block_count}x{block_side}x{block_side} blocks, got {}",
                data.len()
            )));
        }
        check_unit_range(&data)?;
        Ok(Self { block_side, nrow, data })
    }

    pub fn block_side(&self) -> usize {
        self.block_side
    }

    /// Blocks per grid row (and per grid column).
    pub fn nrow(&self) -> usize {
        self.nrow
    }

    pub fn block_count(&self) -> usize {
        self.nrow * self.nrow
    }

    pub fn image_side(&self) -> usize {
        self.nrow * self.block_side
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn block(&self, c: usize, b: usize) -> &[T] {
        let area = self.block_side * self.block_side;
        let start = (c * self.block_count() + b) * area;
        &self.data[start..start + area]
    }

    pub(crate) fn zero_block(&mut self, c: usize, b: usize) {
        let area = self.block_side * self.block_side;
        let start = (c * self.block_count() + b) * area;
        self.data[start..start + area].fill(T::zero());
    }
}

fn grid_side(block_side: usize, block_count: usize) -> Result<usize> {
    if block_side == 0 || block_count == 0 {
        return Err(TvrError::Shape(format!(
            "block side ({block_side}) and block count ({block_count}) must be positive"
        )));
    }
    let nrow = (block_count as f64).sqrt().round() as usize;
    if nrow * nrow != block_count {
        return Err(TvrError::Shape(format!(
            "{block_count} blocks do not form a square grid"
        )));
    }
    Ok(nrow)
}

fn check_tiling(n: usize, k: usize) -> Result<usize> {
    if k == 0 || k > n || !n.is_multiple_of(k) {
        return Err(TvrError::Tiling { n, k });
    }
    Ok(n / k)
}

/// Splits `x` into its `k x k` block set.
pub fn image_to_block<T: Scalar>(x: &ImageTensor<T>, k: usize) -> Result<BlockSet<T>> {
    let n = x.side();
    let nrow = check_tiling(n, k)?;
    let nk = nrow * nrow;
    let mut data = Vec::with_capacity(CHANNELS * nk * k * k);
    for c in 0..CHANNELS {
        for b in 0..nk {
            let (r0, c0) = ((b / nrow) * k, (b % nrow) * k);
            for i in 0..k {
                let start = x.index(c, r0 + i, c0);
                data.extend_from_slice(&x.data()[start..start + k]);
            }
        }
    }
    Ok(BlockSet {
        block_side: k,
        nrow,
        data,
    })
}

/// Inverse of [`image_to_block`].
pub fn block_to_image<T: Scalar>(blocks: &BlockSet<T>) -> ImageTensor<T> {
    let k = blocks.block_side();
    let nrow = blocks.nrow();
    let n = blocks.image_side();
    let mut data = vec![T::zero(); CHANNELS * n * n];
    for c in 0..CHANNELS {
        for b in 0..blocks.block_count() {
            let (r0, c0) = ((b / nrow) * k, (b % nrow) * k);
            let block = blocks.block(c, b);
            for i in 0..k {
                let start = (c * n + r0 + i) * n + c0;
                data[start..start + k].copy_from_slice(&block[i * k..(i + 1) * k]);
            }
        }
    }
    ImageTensor::from_parts(n, data)
}

/// Block-granular binary mask set: one flag per `(channel, block)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskSet {
    block_side: usize,
    nrow: usize,
    flags: Vec<bool>,
}

impl MaskSet {
    pub fn empty(block_side: usize, nrow: usize) -> Self {
        assert!(block_side > 0 && nrow > 0);
        Self {
            block_side,
            nrow,
            flags: vec![false; CHANNELS * nrow * nrow],
        }
    }

    /// Reads a mask set stored as block-set values, rejecting anything that
    /// is not exactly 0 or 1 or not constant over a block.
    pub fn from_values<T: Scalar>(block_side: usize, block_count: usize, values: &[T]) -> Result<Self> {
        let nrow = grid_side(block_side, block_count)?;
        let area = block_side * block_side;
        if values.len() != CHANNELS * block_count * area {
            return Err(TvrError::Shape(format!(
                "expected {} mask values, got {}",
                CHANNELS * block_count * area,
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| *v != T::zero() && *v != T::one()) {
            return Err(TvrError::NonBinary {
                index,
                value: values[index].to_f64_lossy(),
            });
        }
        let mut flags = Vec::with_capacity(CHANNELS * block_count);
        for (slot, block) in values.chunks_exact(area).enumerate() {
            if block.iter().any(|v| *v != block[0]) {
                return Err(TvrError::NotBlockConstant {
                    channel: slot / block_count,
                    block: slot % block_count,
                });
            }
            flags.push(block[0] == T::one());
        }
        Ok(Self {
            block_side,
            nrow,
            flags,
        })
    }

    pub fn block_side(&self) -> usize {
        self.block_side
    }

    pub fn nrow(&self) -> usize {
        self.nrow
    }

    pub fn block_count(&self) -> usize {
        self.nrow * self.nrow
    }

    pub fn set(&mut self, c: usize, b: usize, on: bool) {
        let nk = self.block_count();
        self.flags[c * nk + b] = on;
    }

    pub fn is_set(&self, c: usize, b: usize) -> bool {
        self.flags[c * self.block_count() + b]
    }
}

/// Image-shaped binary mask, constant over each `k x k` block per channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    side: usize,
    block_side: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn zeros(side: usize, block_side: usize) -> Self {
        Self {
            side,
            block_side,
            bits: vec![false; CHANNELS * side * side],
        }
    }

    pub fn from_bits(side: usize, block_side: usize, bits: Vec<bool>) -> Result<Self> {
        let nrow = check_tiling(side, block_side)?;
        if bits.len() != CHANNELS * side * side {
            return Err(TvrError::Shape(format!(
                "expected {} mask entries, got {}",
                CHANNELS * side * side,
                bits.len()
            )));
        }
        let mask = Self { side, block_side, bits };
        for c in 0..CHANNELS {
            for b in 0..nrow * nrow {
                let (r0, c0) = ((b / nrow) * block_side, (b % nrow) * block_side);
                let first = mask.get(c, r0, c0);
                for i in 0..block_side {
                    for j in 0..block_side {
                        if mask.get(c, r0 + i, c0 + j) != first {
                            return Err(TvrError::NotBlockConstant { channel: c, block: b });
                        }
                    }
                }
            }
        }
        Ok(mask)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn block_side(&self) -> usize {
        self.block_side
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, c: usize, row: usize, col: usize) -> bool {
        self.bits[(c * self.side + row) * self.side + col]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn channel_count(&self, c: usize) -> usize {
        let plane = self.side * self.side;
        self.bits[c * plane..(c + 1) * plane].iter().filter(|b| **b).count()
    }

    /// Mask as 0/1 reals in image layout.
    pub fn to_values<T: Scalar>(&self) -> Vec<T> {
        self.bits
            .iter()
            .map(|&on| if on { T::one() } else { T::zero() })
            .collect()
    }
}

/// Expands a mask set into its image-shaped mask.
pub fn mask_to_image(set: &MaskSet) -> Mask {
    let k = set.block_side();
    let nrow = set.nrow();
    let n = nrow * k;
    let mut bits = vec![false; CHANNELS * n * n];
    for c in 0..CHANNELS {
        for b in 0..set.block_count() {
            if !set.is_set(c, b) {
                continue;
            }
            let (r0, c0) = ((b / nrow) * k, (b % nrow) * k);
            for i in 0..k {
                let start = (c * n + r0 + i) * n + c0;
                bits[start..start + k].fill(true);
            }
        }
    }
    Mask {
        side: n,
        block_side: k,
        bits,
    }
}

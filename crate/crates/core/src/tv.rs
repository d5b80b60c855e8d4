//! Block-wise total-variation scoring and channel-wise outlier flagging.

use std::collections::BTreeSet;

use crate::error::{Result, TvrError};
use crate::scalar::Scalar;
use crate::stats::upper_fence;
use crate::tensor::{BlockSet, CHANNELS};

pub const DEFAULT_BLOCK_SIDE: usize = 28;
pub const DEFAULT_IQR_FACTOR: f64 = 1.5;

/// Anisotropic total variation of a single-channel `k x k` block: the sum of
/// `|a - b|` over every horizontally or vertically adjacent pixel pair inside
/// the block. There are exactly `2k(k-1)` such pairs.
pub fn tv_score<T: Scalar>(block: &[T], k: usize) -> Result<T> {
    if k < 2 {
        return Err(TvrError::DegenerateBlock(k));
    }
    if block.len() != k * k {
        return Err(TvrError::Shape(format!(
            "expected a {k}x{k} block, got {} values",
            block.len()
        )));
    }
    let mut total = T::zero();
    for row in block.chunks_exact(k) {
        for pair in row.windows(2) {
            total = total + (pair[1] - pair[0]).abs();
        }
    }
    for (upper, lower) in block.chunks_exact(k).zip(block.chunks_exact(k).skip(1)) {
        for (a, b) in upper.iter().zip(lower) {
            total = total + (*b - *a).abs();
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorConfig<T> {
    pub block_side: usize,
    /// Multiplier on the interquartile range above the third quartile.
    pub iqr_factor: T,
    /// Blocks scoring at or below this are never flagged.
    pub absolute_floor: Option<T>,
}

impl<T: Scalar> DetectorConfig<T> {
    pub fn new(block_side: usize) -> Self {
        Self {
            block_side,
            iqr_factor: T::lit(DEFAULT_IQR_FACTOR),
            absolute_floor: None,
        }
    }

    pub fn with_iqr_factor(mut self, factor: T) -> Self {
        self.iqr_factor = factor;
        self
    }

    pub fn with_absolute_floor(mut self, floor: Option<T>) -> Self {
        self.absolute_floor = floor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_side < 2 {
            return Err(TvrError::DegenerateBlock(self.block_side));
        }
        if !(self.iqr_factor > T::zero() && self.iqr_factor.is_finite()) {
            return Err(TvrError::Config(format!(
                "iqr factor must be positive, got {}",
                self.iqr_factor
            )));
        }
        if let Some(floor) = self.absolute_floor {
            if !(floor >= T::zero() && floor.is_finite()) {
                return Err(TvrError::Config(format!(
                    "absolute floor must be a nonnegative number, got {floor}"
                )));
            }
        }
        Ok(())
    }
}

impl<T: Scalar> Default for DetectorConfig<T> {
    fn default() -> Self {
        Self::new(DEFAULT_BLOCK_SIDE)
    }
}

/// Per-channel, per-block TV scores with each channel's quartiles and
/// outlier threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct TvGrid<T> {
    block_side: usize,
    nrow: usize,
    scores: Vec<T>,
    q1: [T; CHANNELS],
    q3: [T; CHANNELS],
    thresholds: [T; CHANNELS],
    absolute_floor: Option<T>,
}

impl<T: Scalar> TvGrid<T> {
    pub fn block_side(&self) -> usize {
        self.block_side
    }

    pub fn nrow(&self) -> usize {
        self.nrow
    }

    pub fn block_count(&self) -> usize {
        self.nrow * self.nrow
    }

    /// All scores, indexed `channel * block_count + block`.
    pub fn scores(&self) -> &[T] {
        &self.scores
    }

    pub fn channel_scores(&self, c: usize) -> &[T] {
        let nk = self.block_count();
        &self.scores[c * nk..(c + 1) * nk]
    }

    pub fn score(&self, c: usize, b: usize) -> T {
        self.scores[c * self.block_count() + b]
    }

    pub fn q1(&self) -> [T; CHANNELS] {
        self.q1
    }

    pub fn q3(&self) -> [T; CHANNELS] {
        self.q3
    }

    pub fn thresholds(&self) -> [T; CHANNELS] {
        self.thresholds
    }

    pub fn absolute_floor(&self) -> Option<T> {
        self.absolute_floor
    }
}

/// Scores every block and computes the per-channel thresholds.
pub fn score_grid<T: Scalar>(blocks: &BlockSet<T>, cfg: &DetectorConfig<T>) -> Result<TvGrid<T>> {
    cfg.validate()?;
    let k = blocks.block_side();
    if k != cfg.block_side {
        return Err(TvrError::Config(format!(
            "block set uses {k}x{k} blocks but the detector expects {0}x{0}",
            cfg.block_side
        )));
    }
    let nk = blocks.block_count();
    if nk < crate::stats::MIN_SAMPLES {
        return Err(TvrError::TooFewBlocks(nk));
    }
    let mut scores = Vec::with_capacity(CHANNELS * nk);
    for c in 0..CHANNELS {
        for b in 0..nk {
            scores.push(tv_score(blocks.block(c, b), k)?);
        }
    }
    let mut q1 = [T::zero(); CHANNELS];
    let mut q3 = [T::zero(); CHANNELS];
    let mut thresholds = [T::zero(); CHANNELS];
    for c in 0..CHANNELS {
        let fence = upper_fence(&scores[c * nk..(c + 1) * nk], cfg.iqr_factor)?;
        q1[c] = fence.q1;
        q3[c] = fence.q3;
        thresholds[c] = fence.upper;
    }
    Ok(TvGrid {
        block_side: k,
        nrow: blocks.nrow(),
        scores,
        q1,
        q3,
        thresholds,
        absolute_floor: cfg.absolute_floor,
    })
}

/// Indices of scores strictly above `threshold` (and above `floor`, if set).
pub fn flag_channel<T: Scalar>(scores: &[T], threshold: T, floor: Option<T>) -> Vec<usize> {
    scores
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > threshold && floor.is_none_or(|f| **s > f))
        .map(|(b, _)| b)
        .collect()
}

/// Flags every `(channel, block)` whose score exceeds its channel threshold.
pub fn flag_blocks<T: Scalar>(grid: &TvGrid<T>) -> FlagSet {
    let mut flags = FlagSet::new();
    for c in 0..CHANNELS {
        for b in flag_channel(grid.channel_scores(c), grid.thresholds[c], grid.absolute_floor) {
            flags.insert(c, b);
        }
    }
    flags
}

/// Set of flagged `(channel, block)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FlagSet(BTreeSet<(usize, usize)>);

impl FlagSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, channel: usize, block: usize) -> bool {
        self.0.insert((channel, block))
    }

    pub fn contains(&self, channel: usize, block: usize) -> bool {
        self.0.contains(&(channel, block))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().copied()
    }

    /// Flagged blocks of one channel, ascending.
    pub fn channel(&self, c: usize) -> Vec<usize> {
        self.0.range((c, 0)..(c + 1, 0)).map(|&(_, b)| b).collect()
    }

    /// Blocks flagged in any channel.
    pub fn blocks(&self) -> BTreeSet<usize> {
        self.0.iter().map(|&(_, b)| b).collect()
    }

    /// Every block flagged in some channel, flagged in all channels.
    pub fn union_channels(&self) -> FlagSet {
        let mut out = FlagSet::new();
        for b in self.blocks() {
            for c in 0..CHANNELS {
                out.insert(c, b);
            }
        }
        out
    }
}

impl FromIterator<(usize, usize)> for FlagSet {
    fn from_iter<I: IntoIterator<Item = (usize, usize)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

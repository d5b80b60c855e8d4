//! JSON export of TV score surfaces.
//!
//! Layout: `{"block_size", "nrow", "channels": [3 x nrow x nrow],
//! "thresholds": [3], "mean": [nrow x nrow]}` where `mean` averages the
//! three channel matrices.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io::write_atomic;
use crate::scalar::Scalar;
use crate::tensor::CHANNELS;
use crate::tv::TvGrid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceExport {
    pub block_size: usize,
    pub nrow: usize,
    pub channels: Vec<Vec<Vec<f64>>>,
    pub thresholds: Vec<f64>,
    pub mean: Vec<Vec<f64>>,
}

impl SurfaceExport {
    pub fn from_grid<T: Scalar>(grid: &TvGrid<T>) -> Self {
        let nrow = grid.nrow();
        let channels: Vec<Vec<Vec<f64>>> = (0..CHANNELS)
            .map(|c| {
                grid.channel_scores(c)
                    .chunks_exact(nrow)
                    .map(|row| row.iter().map(|v| v.to_f64_lossy()).collect())
                    .collect()
            })
            .collect();
        let mean = (0..nrow)
            .map(|r| {
                (0..nrow)
                    .map(|col| channels.iter().map(|m| m[r][col]).sum::<f64>() / CHANNELS as f64)
                    .collect()
            })
            .collect();
        Self {
            block_size: grid.block_side(),
            nrow,
            channels,
            thresholds: grid.thresholds().iter().map(|v| v.to_f64_lossy()).collect(),
            mean,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }

    /// Grid cell `(row, col)` of the largest channel-averaged score; the
    /// first one in row-major order on ties.
    pub fn mean_argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for (r, row) in self.mean.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                if *v > self.mean[best.0][best.1] {
                    best = (r, c);
                }
            }
        }
        best
    }
}

pub fn export_surface<T: Scalar>(grid: &TvGrid<T>, path: &Path) -> Result<()> {
    write_atomic(path, SurfaceExport::from_grid(grid).to_json()?.as_bytes())
}

//! File-based bridge to an external generator.
//!
//! Each call gets a fresh temporary directory holding `cropped.png` and
//! `mask.png` (8-bit RGB, 0 or 255 per channel). The configured program is
//! run with that directory as its only argument and must exit 0 after
//! writing `generated.png` with the same dimensions.

use std::path::PathBuf;
use std::process::Command;

use crate::error::{Result, TvrError};
use crate::io::{encode_image_png, encode_mask_png, read_png, write_atomic};
use crate::scalar::Scalar;
use crate::tensor::{ImageTensor, Mask};

pub const CROPPED_FILE: &str = "cropped.png";
pub const MASK_FILE: &str = "mask.png";
pub const GENERATED_FILE: &str = "generated.png";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExternalBridge {
    pub program: PathBuf,
    /// Parent for the per-call workspace; the system temp dir when unset.
    pub temp_root: Option<PathBuf>,
}

impl ExternalBridge {
    pub fn new(program: impl Into<PathBuf>) -> Self {
        Self {
            program: program.into(),
            temp_root: None,
        }
    }

    pub fn with_temp_root(mut self, root: Option<PathBuf>) -> Self {
        self.temp_root = root;
        self
    }

    pub fn generate<T: Scalar>(&self, cropped: &ImageTensor<T>, mask: &Mask) -> Result<ImageTensor<T>> {
        let workspace = match &self.temp_root {
            Some(root) => tempfile::Builder::new().prefix("tvr-bridge-").tempdir_in(root)?,
            None => tempfile::Builder::new().prefix("tvr-bridge-").tempdir()?,
        };
        let dir = workspace.path();
        write_atomic(&dir.join(CROPPED_FILE), &encode_image_png(cropped)?)?;
        write_atomic(&dir.join(MASK_FILE), &encode_mask_png(mask)?)?;

        let output = Command::new(&self.program)
            .arg(dir)
            .output()
            .map_err(|e| TvrError::Bridge(format!("could not run {}: {e}", self.program.display())))?;
        if !output.status.success() {
            return Err(TvrError::Bridge(format!(
                "{} exited with {}: {}{}",
                self.program.display(),
                output.status,
                String::from_utf8_lossy(&output.stderr).trim(),
                String::from_utf8_lossy(&output.stdout).trim(),
            )));
        }
        let generated_path = dir.join(GENERATED_FILE);
        if !generated_path.is_file() {
            return Err(TvrError::Bridge(format!(
                "{} did not write {GENERATED_FILE}",
                self.program.display()
            )));
        }
        let generated = read_png::<T>(&generated_path)
            .map_err(|e| TvrError::Bridge(format!("unreadable {GENERATED_FILE}: {e}")))?;
        if generated.side() != cropped.side() {
            return Err(TvrError::Bridge(format!(
                "{GENERATED_FILE} is {0}x{0}, expected {1}x{1}",
                generated.side(),
                cropped.side()
            )));
        }
        Ok(generated)
    }
}

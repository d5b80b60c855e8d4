//! Hole filling for masked blocks.
//!
//! Only values under the mask matter to the caller: composition keeps the
//! cropped image everywhere else.

use std::fmt;
use std::str::FromStr;

use crate::bridge::ExternalBridge;
use crate::error::{Result, TvrError};
use crate::scalar::Scalar;
use crate::tensor::{ImageTensor, Mask, CHANNELS};

/// Diffusion stops once no pixel moves by this much in a sweep.
pub const DIFFUSION_TOLERANCE: f64 = 1e-4;
pub const DIFFUSION_MAX_ITERATIONS: usize = 10_000;

pub const METHOD_NAMES: [&str; 4] = ["zero", "mean-fill", "diffusion", "external"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Inpainter {
    /// Leaves the zeroed holes as they are.
    Zero,
    /// Fills holes with the mean of the channel's unmasked pixels.
    MeanFill,
    /// Repeatedly replaces each hole pixel by the mean of its 4-neighbours
    /// while unmasked pixels stay fixed (a discrete harmonic fill).
    Diffusion,
    External(ExternalBridge),
}

impl Inpainter {
    pub fn name(&self) -> &'static str {
        match self {
            Inpainter::Zero => "zero",
            Inpainter::MeanFill => "mean-fill",
            Inpainter::Diffusion => "diffusion",
            Inpainter::External(_) => "external",
        }
    }

    /// Looks up a method by name. `external` needs a bridge.
    pub fn from_name(name: &str, bridge: Option<ExternalBridge>) -> Result<Self> {
        match name {
            "external" => bridge
                .map(Inpainter::External)
                .ok_or_else(|| TvrError::Config("the external inpainter needs a generator command".into())),
            other => other.parse(),
        }
    }

    pub fn inpaint<T: Scalar>(&self, cropped: &ImageTensor<T>, mask: &Mask) -> Result<ImageTensor<T>> {
        if mask.side() != cropped.side() {
            return Err(TvrError::Shape(format!(
                "mask side {} does not match image side {}",
                mask.side(),
                cropped.side()
            )));
        }
        match self {
            Inpainter::Zero => Ok(cropped.clone()),
            Inpainter::MeanFill => Ok(mean_fill(cropped, mask)),
            Inpainter::Diffusion => Ok(diffuse(cropped, mask)),
            Inpainter::External(bridge) => bridge.generate(cropped, mask),
        }
    }
}

impl FromStr for Inpainter {
    type Err = TvrError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Inpainter::Zero),
            "mean-fill" => Ok(Inpainter::MeanFill),
            "diffusion" => Ok(Inpainter::Diffusion),
            other => Err(TvrError::UnknownInpainter(other.to_string())),
        }
    }
}

impl fmt::Display for Inpainter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Mean of the unmasked pixels of channel `c`, or zero when the whole
/// channel is masked.
fn unmasked_mean<T: Scalar>(img: &ImageTensor<T>, mask: &Mask, c: usize) -> T {
    let plane = img.side() * img.side();
    let bits = &mask.bits()[c * plane..(c + 1) * plane];
    let (sum, count) = img
        .channel(c)
        .iter()
        .zip(bits)
        .filter(|(_, on)| !**on)
        .fold((T::zero(), 0usize), |(s, n), (v, _)| (s + *v, n + 1));
    if count == 0 {
        T::zero()
    } else {
        sum / T::from_usize(count).unwrap()
    }
}

fn mean_fill<T: Scalar>(cropped: &ImageTensor<T>, mask: &Mask) -> ImageTensor<T> {
    let plane = cropped.side() * cropped.side();
    let mut data = cropped.data().to_vec();
    for c in 0..CHANNELS {
        let fill = unmasked_mean(cropped, mask, c);
        for p in 0..plane {
            if mask.bits()[c * plane + p] {
                data[c * plane + p] = fill;
            }
        }
    }
    ImageTensor::from_parts(cropped.side(), data)
}

fn diffuse<T: Scalar>(cropped: &ImageTensor<T>, mask: &Mask) -> ImageTensor<T> {
    let n = cropped.side();
    let plane = n * n;
    let tolerance = T::lit(DIFFUSION_TOLERANCE);
    let mut data = cropped.data().to_vec();
    for c in 0..CHANNELS {
        let holes: Vec<usize> = (0..plane).filter(|p| mask.bits()[c * plane + p]).collect();
        if holes.is_empty() {
            continue;
        }
        let start = unmasked_mean(cropped, mask, c);
        let values = &mut data[c * plane..(c + 1) * plane];
        for &p in &holes {
            values[p] = start;
        }
        if holes.len() == plane {
            continue;
        }
        // Gauss-Seidel sweeps in row-major order; values stay convex
        // combinations of in-range values.
        for _ in 0..DIFFUSION_MAX_ITERATIONS {
            let mut max_update = T::zero();
            for &p in &holes {
                let (r, col) = (p / n, p % n);
                let mut sum = T::zero();
                let mut count = 0usize;
                if r > 0 {
                    sum = sum + values[p - n];
                    count += 1;
                }
                if r + 1 < n {
                    sum = sum + values[p + n];
                    count += 1;
                }
                if col > 0 {
                    sum = sum + values[p - 1];
                    count += 1;
                }
                if col + 1 < n {
                    sum = sum + values[p + 1];
                    count += 1;
                }
                if count == 0 {
                    continue;
                }
                let next = sum / T::from_usize(count).unwrap();
                max_update = max_update.max((next - values[p]).abs());
                values[p] = next;
            }
            if max_update < tolerance {
                break;
            }
        }
    }
    ImageTensor::from_parts(n, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{mask_to_image, MaskSet};

    fn single_block_mask(k: usize, nrow: usize, b: usize) -> Mask {
        let mut set = MaskSet::empty(k, nrow);
        for c in 0..CHANNELS {
            set.set(c, b, true);
        }
        mask_to_image(&set)
    }

    fn zero_under(img: &ImageTensor<f64>, mask: &Mask) -> ImageTensor<f64> {
        let data = img
            .data()
            .iter()
            .zip(mask.bits())
            .map(|(v, on)| if *on { 0.0 } else { *v })
            .collect();
        ImageTensor::new(img.side(), data).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for name in ["zero", "mean-fill", "diffusion"] {
            assert_eq!(Inpainter::from_name(name, None).unwrap().name(), name);
        }
        assert!(matches!(
            Inpainter::from_name("gan", None),
            Err(TvrError::UnknownInpainter(_))
        ));
        assert!(Inpainter::from_name("external", None).is_err());
        let bridge = ExternalBridge::new("/bin/true");
        assert_eq!(
            Inpainter::from_name("external", Some(bridge)).unwrap().name(),
            "external"
        );
    }

    #[test]
    fn mean_fill_on_uniform_background() {
        let x = ImageTensor::filled(16, 0.5f64).unwrap();
        let mask = single_block_mask(4, 4, 5);
        let cropped = zero_under(&x, &mask);
        let filled = Inpainter::MeanFill.inpaint(&cropped, &mask).unwrap();
        assert_eq!(filled, x);
    }

    #[test]
    fn zero_method_returns_cropped() {
        let x = ImageTensor::filled(8, 0.25f64).unwrap();
        let mask = single_block_mask(4, 2, 0);
        let cropped = zero_under(&x, &mask);
        assert_eq!(Inpainter::Zero.inpaint(&cropped, &mask).unwrap(), cropped);
    }

    #[test]
    fn diffusion_constant_surround() {
        let c = 0.37f64;
        let x = ImageTensor::filled(24, c).unwrap();
        let mask = single_block_mask(8, 3, 4);
        let cropped = zero_under(&x, &mask);
        let out = Inpainter::Diffusion.inpaint(&cropped, &mask).unwrap();
        assert!(out.data().iter().all(|v| (v - c).abs() < 1e-6));
    }

    #[test]
    fn diffusion_recovers_linear_ramp() {
        // a linear ramp is discrete-harmonic away from the border, so an
        // interior hole should be filled back close to the ramp
        let n = 24;
        let x = ImageTensor::from_fn(n, |_, r, col| (r + 2 * col) as f64 / (3 * n) as f64).unwrap();
        let mask = single_block_mask(8, 3, 4);
        let cropped = zero_under(&x, &mask);
        let out = Inpainter::Diffusion.inpaint(&cropped, &mask).unwrap();
        let worst = out
            .data()
            .iter()
            .zip(x.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 5e-3, "max error {worst}");
    }

    #[test]
    fn diffusion_f32_stays_in_range() {
        let x = ImageTensor::from_fn(16, |c, r, col| ((c + r * col) % 7) as f32 / 6.0).unwrap();
        let mask = single_block_mask(4, 4, 10);
        let out = Inpainter::Diffusion.inpaint(&x, &mask).unwrap();
        assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn fully_masked_channel_falls_back_to_zero() {
        let x = ImageTensor::filled(8, 0.5f64).unwrap();
        let mut set = MaskSet::empty(4, 2);
        for b in 0..4 {
            set.set(1, b, true);
        }
        let mask = mask_to_image(&set);
        for method in [Inpainter::MeanFill, Inpainter::Diffusion] {
            let out = method.inpaint(&x, &mask).unwrap();
            assert!(out.channel(1).iter().all(|v| *v == 0.0));
            assert!(out.channel(0).iter().all(|v| *v == 0.5));
        }
    }

    #[test]
    fn shape_mismatch() {
        let x = ImageTensor::filled(8, 0.5f64).unwrap();
        let mask = Mask::zeros(4, 2);
        assert!(matches!(Inpainter::Zero.inpaint(&x, &mask), Err(TvrError::Shape(_))));
    }
}

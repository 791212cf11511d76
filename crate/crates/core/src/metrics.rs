//! Image quality figures: peak-to-mean SNR, object-region contrast, and the
//! relative squared difference against an ideal object profile.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::geometry::{Footprint, GridSpec};
use crate::reconstruct::ImageGrid;
use crate::{Error, Result};

fn peak_and_mean(img: &ImageGrid) -> Result<(f64, f64)> {
    let (max, mean) = (img.max(), img.mean());
    if !(mean > 0.0) {
        return Err(Error::DegenerateImage);
    }
    Ok((max, mean))
}

/// `20·log10(max / mean)` over the unmasked pixels, in dB.
pub fn snr(img: &ImageGrid) -> Result<f64> {
    let (max, mean) = peak_and_mean(img)?;
    Ok(20.0 * (max / mean).log10())
}

/// `20·log10(mean over Ω / mean over all)`, in dB, where Ω holds the
/// unmasked pixels at or above half the maximum.
pub fn contrast(img: &ImageGrid) -> Result<f64> {
    let (max, mean) = peak_and_mean(img)?;
    let (sum, n) = img.unmasked().filter(|&v| v >= 0.5 * max).fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    Ok(20.0 * (sum / n as f64 / mean).log10())
}

/// Reference image `I(x, y)` with values in `[0, 1]` on the same grid and
/// mask as the images it is compared with.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealProfile {
    pub image: ImageGrid,
    pub footprints: Vec<Footprint>,
}

impl IdealProfile {
    pub fn new(image: ImageGrid, footprints: Vec<Footprint>) -> Result<Self> {
        if let Some(v) = image.unmasked().find(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter(format!("ideal profile value {v} outside [0, 1]")));
        }
        Ok(Self { image, footprints })
    }

    /// Binary profile: 1 on pixels inside any footprint, 0 elsewhere.
    pub fn from_footprints(spec: GridSpec, mask: Vec<bool>, footprints: Vec<Footprint>) -> Result<Self> {
        let pixels = spec.points().map(|p| if footprints.iter().any(|f| f.contains(p)) { 1.0 } else { 0.0 }).collect();
        let pixels = mask_zero(pixels, &mask);
        Self::new(ImageGrid::new(spec, pixels, mask)?, footprints)
    }
}

fn mask_zero(mut pixels: Vec<f64>, mask: &[bool]) -> Vec<f64> {
    for (v, &m) in pixels.iter_mut().zip(mask) {
        if !m {
            *v = 0.0;
        }
    }
    pixels
}

/// `Σ (I_r − I)² / Σ I²` over the ideal profile's unmasked pixels, both
/// images scaled to unit peak first. Pixel areas are equal and cancel.
///
/// The image mask may be a subset of the profile's (pixels a reconstruction
/// could not reach); those pixels count as zero.
pub fn relative_difference(img: &ImageGrid, ideal: &IdealProfile) -> Result<f64> {
    let reference = &ideal.image;
    if img.spec != reference.spec || img.mask.iter().zip(&reference.mask).any(|(&a, &b)| a && !b) {
        return Err(Error::GridMismatch("image grid differs from the ideal profile, or its mask is not contained in the profile's".into()));
    }
    let mut img = img.normalized();
    img.pixels = mask_zero(img.pixels, &img.mask);
    img.mask.clone_from(&reference.mask);
    let reference = reference.normalized();
    let denom: f64 = reference.unmasked().map(|v| v * v).sum();
    if !(denom > 0.0) {
        return Err(Error::DegenerateIdeal);
    }
    let num: f64 = img.unmasked().zip(reference.unmasked()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(num / denom)
}

/// One line of a metric table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub scene: String,
    pub algorithm: String,
    pub dielectric_variant: String,
    pub snr_db: f64,
    pub ctr_db: f64,
    pub delta: f64,
}

impl MetricRow {
    pub fn evaluate(scene: &str, algorithm: &str, variant: &str, img: &ImageGrid, ideal: &IdealProfile) -> Result<Self> {
        Ok(Self {
            scene: scene.into(),
            algorithm: algorithm.into(),
            dielectric_variant: variant.into(),
            snr_db: snr(img)?,
            ctr_db: contrast(img)?,
            delta: relative_difference(img, ideal)?,
        })
    }
}

/// Writes `rows` as CSV with a header line.
pub fn write_metric_csv(rows: &[MetricRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

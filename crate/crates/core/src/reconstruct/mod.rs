//! Image formation: phase-shift-and-sum (PSAS) and the time-shift baselines
//! (DAS, DMAS, RAR), plus single-channel waveform diagnostics.

mod image;
mod psas;
mod timeshift;
mod waveform;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::channel::{AntennaModel, ChannelOptions, MultipathMode};
use crate::geometry::GridSpec;
use crate::raypath::CylinderScene;
use crate::signal::frequency_grid;
use crate::{Error, Result};

pub use image::ImageGrid;
pub use psas::{psas, ChannelSpectra, PixelValue, PsasOperator};
pub use timeshift::{das, dmas, rar, ts_delay, DelayTable, Interpolation, PaddedTraces, TimeShiftOperator};
pub use waveform::{ps_compensated_waveform, time_shifted_waveform};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Psas,
    Das,
    Dmas,
    Rar,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Psas, Algorithm::Das, Algorithm::Dmas, Algorithm::Rar];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Psas => "psas",
            Algorithm::Das => "das",
            Algorithm::Dmas => "dmas",
            Algorithm::Rar => "rar",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm '{s}' (expected psas, das, dmas or rar)")))
    }
}

/// Everything an imaging run needs besides the data. `scene.interior` is
/// the reference dielectric the reconstruction assumes.
#[derive(Debug, Clone)]
pub struct ReconstructionConfig {
    pub scene: CylinderScene,
    /// PSAS frequencies, integrated with the trapezoid rule.
    pub frequencies: Vec<f64>,
    /// Frequency whose real index sets the time-shift delays.
    pub center_frequency: f64,
    pub antenna: Arc<AntennaModel>,
    pub channel: ChannelOptions,
    pub multipath_mode: MultipathMode,
    pub grid: GridSpec,
    pub interpolation: Interpolation,
}

/// 2–7 GHz in 0.5 GHz steps.
pub fn default_psas_frequencies() -> Vec<f64> {
    frequency_grid(2e9, 0.5e9, 7e9).expect("static grid")
}

impl ReconstructionConfig {
    /// 11 PSAS frequencies, 4.5 GHz centre, isotropic antennas, `H_eff`
    /// compensation and linear interpolation.
    pub fn new(scene: CylinderScene, grid: GridSpec) -> Self {
        Self {
            scene,
            frequencies: default_psas_frequencies(),
            center_frequency: 4.5e9,
            antenna: Arc::new(AntennaModel::isotropic()),
            channel: ChannelOptions::default(),
            multipath_mode: MultipathMode::default(),
            grid,
            interpolation: Interpolation::Linear,
        }
    }

    /// 1 mm grid covering the cylinder.
    pub fn with_default_grid(scene: CylinderScene) -> Self {
        let n = (2.0 * scene.radius / 1e-3).round() as usize + 1;
        let grid = GridSpec::centered(scene.center, 1e-3, n).expect("positive radius");
        Self::new(scene, grid)
    }

    pub fn validate(&self) -> Result<()> {
        crate::signal::check_frequencies(&self.frequencies)?;
        for &f in self.frequencies.iter().chain([&self.center_frequency]) {
            self.scene.indices(f)?;
        }
        Ok(())
    }

    /// Pixels strictly inside the cylinder.
    pub fn mask(&self) -> Vec<bool> {
        self.grid.points().map(|p| self.scene.contains(p)).collect()
    }
}

/// An image plus the bookkeeping of how it was formed.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub algorithm: Algorithm,
    /// Peak-normalized image (raw when `normalized` is false).
    pub image: ImageGrid,
    /// Largest raw pixel value before normalization.
    pub raw_peak: f64,
    /// False when every pixel was zero and normalization was skipped.
    pub normalized: bool,
    /// Number of summed terms per pixel; (channel, frequency) pairs for
    /// PSAS, channels for the time-shift methods. Zero outside the mask.
    pub terms: Vec<usize>,
    /// Terms dropped because a leg had no path.
    pub skipped_terms: usize,
    /// Pixels removed from the mask because no term reached them.
    pub empty_pixels: usize,
}

impl Reconstruction {
    pub(crate) fn finish(algorithm: Algorithm, mut image: ImageGrid, terms: Vec<usize>, skipped_terms: usize) -> Self {
        let mut empty_pixels = 0;
        for (i, &t) in terms.iter().enumerate() {
            if image.mask[i] && t == 0 {
                image.mask[i] = false;
                image.pixels[i] = 0.0;
                empty_pixels += 1;
            }
        }
        let raw_peak = image.max();
        let normalized = image.normalize();
        Self { algorithm, image, raw_peak, normalized, terms, skipped_terms, empty_pixels }
    }
}

/// Runs `algorithm` on `data`.
pub fn reconstruct(algorithm: Algorithm, data: &crate::signal::MultistaticDataset, cfg: &ReconstructionConfig) -> Result<Reconstruction> {
    match algorithm {
        Algorithm::Psas => psas(data, cfg),
        Algorithm::Das => das(data, cfg),
        Algorithm::Dmas => dmas(data, cfg),
        Algorithm::Rar => rar(data, cfg),
    }
}

/// Trapezoid weights for integrating over `x`; a single point gets weight 1.
pub(crate) fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| {
            let lo = if i > 0 { x[i] - x[i - 1] } else { 0.0 };
            let hi = if i + 1 < n { x[i + 1] - x[i] } else { 0.0 };
            0.5 * (lo + hi)
        })
        .collect()
}

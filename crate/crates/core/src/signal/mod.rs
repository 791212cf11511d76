//! Time traces, spectra, the source pulse, and multistatic datasets.

pub mod analysis;
mod dataset;
mod pulse;
mod spectrum;

use num_complex::Complex64;

use crate::{Error, Result};

pub use dataset::{ChannelId, MultistaticDataset, ScanGeometry, Timebase};
pub use pulse::synthesize_pulse;
pub use spectrum::{from_spectrum, to_spectrum};

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTrace {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl TimeTrace {
    pub fn new(t0: f64, dt: f64, samples: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("sample interval must be positive, got {dt}")));
        }
        if samples.len() < 2 {
            return Err(Error::InvalidParameter(format!("a trace needs at least 2 samples, got {}", samples.len())));
        }
        Ok(Self { t0, dt, samples })
    }

    pub fn zeros(t0: f64, dt: f64, len: usize) -> Result<Self> {
        Self::new(t0, dt, vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Largest absolute sample value.
    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Index of the largest absolute sample.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.samples.iter().enumerate() {
            if v.abs() > self.samples[best].abs() {
                best = i;
            }
        }
        best
    }

    /// Copy scaled to unit peak; an all-zero trace is returned unchanged.
    pub fn normalized(&self) -> Self {
        let peak = self.peak();
        if peak == 0.0 {
            return self.clone();
        }
        Self { samples: self.samples.iter().map(|v| v / peak).collect(), ..*self }
    }

    pub fn rms(&self) -> f64 {
        (self.samples.iter().map(|v| v * v).sum::<f64>() / self.len() as f64).sqrt()
    }
}

/// Complex values sampled at strictly increasing frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    pub frequencies: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl SpectrumTrace {
    pub fn new(frequencies: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if frequencies.len() != values.len() {
            return Err(Error::InvalidSpectrum(format!(
                "{} frequencies but {} values",
                frequencies.len(),
                values.len()
            )));
        }
        check_frequencies(&frequencies)?;
        Ok(Self { frequencies, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise product with another spectrum on the same grid.
    pub fn multiply(&self, factors: &[Complex64]) -> Result<Self> {
        if factors.len() != self.len() {
            return Err(Error::InvalidSpectrum(format!("{} factors for {} bins", factors.len(), self.len())));
        }
        Ok(Self {
            frequencies: self.frequencies.clone(),
            values: self.values.iter().zip(factors).map(|(v, f)| v * f).collect(),
        })
    }

    pub fn power(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

pub(crate) fn check_frequencies(frequencies: &[f64]) -> Result<()> {
    if let Some(f) = frequencies.iter().find(|f| !f.is_finite() || **f < 0.0) {
        return Err(Error::InvalidSpectrum(format!("invalid frequency {f}")));
    }
    if frequencies.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSpectrum("frequencies must be strictly increasing".into()));
    }
    Ok(())
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count).map(|i| if i == count - 1 { stop } else { start + step * i as f64 }).collect()
        }
    }
}

/// Frequencies `start, start + step, …` up to `stop` (inclusive within
/// half a step).
pub fn frequency_grid(start: f64, step: f64, stop: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidRange(format!("{start}:{step}:{stop}")));
    }
    let count = ((stop - start) / step + 0.5).floor() as usize + 1;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

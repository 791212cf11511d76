//! Dispersive, lossy media.
//!
//! A [`DielectricSpectrum`] is a table of `(frequency, ε_r, σ)` samples. Between
//! samples both columns are interpolated linearly; queries outside the table
//! are errors rather than extrapolations, because extrapolated loss has no
//! physical constraint. Magnetic permeability is μ₀ everywhere.
//!
//! The complex permittivity follows the `e^{+jωt}` convention,
//! `ε̃ = ε_r − jσ/(ωε₀)`, so a passive medium has `Im ε̃ ≤ 0` and the complex
//! wavenumber `k̃ = k − jκ` has a non-negative attenuation constant `κ`.

use std::io::Read;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum permittivity ε₀, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Band covered by [`DielectricSpectrum::constant`] tables.
const CONSTANT_BAND: (f64, f64) = (1.0e3, 1.0e13);

/// Glycerin-like reference medium, 1–10 GHz on a 0.5 GHz grid.
///
/// Generated from a single-pole relaxation (ε∞ = 4, Δε = 4.169,
/// f_r = 5.03 GHz) and rounded to four decimals. Permittivity falls and
/// conductivity rises monotonically with frequency, and
/// `(√ε(2 GHz) − √ε(7 GHz))·0.1 m / c = 0.1430 ns`.
const GLYCERIN_LIKE: [(f64, f64, f64); 19] = [
    (1.0e9, 8.0105, 0.0444),
    (1.5e9, 7.8285, 0.0953),
    (2.0e9, 7.5999, 0.1593),
    (2.5e9, 7.3432, 0.2311),
    (3.0e9, 7.0751, 0.3061),
    (3.5e9, 6.8090, 0.3806),
    (4.0e9, 6.5539, 0.4519),
    (4.5e9, 6.3156, 0.5186),
    (5.0e9, 6.0970, 0.5798),
    (5.5e9, 5.8988, 0.6353),
    (6.0e9, 5.7207, 0.6851),
    (6.5e9, 5.5615, 0.7297),
    (7.0e9, 5.4196, 0.7694),
    (7.5e9, 5.2934, 0.8047),
    (8.0e9, 5.1812, 0.8361),
    (8.5e9, 5.0813, 0.8640),
    (9.0e9, 4.9923, 0.8889),
    (9.5e9, 4.9128, 0.9112),
    (1.0e10, 4.8418, 0.9311),
];

/// One row of a dielectric table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DielectricSample {
    /// Hz.
    pub frequency: f64,
    /// Relative permittivity (real part).
    pub eps_r: f64,
    /// Conductivity, S/m.
    pub sigma: f64,
}

/// Frequency-sampled relative permittivity and conductivity of a medium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DielectricSpectrum {
    name: String,
    samples: Vec<DielectricSample>,
}

/// Complex wavenumber `k̃ = k − jκ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexWavenumber {
    /// Propagation constant, rad/m.
    pub k: f64,
    /// Attenuation constant, Np/m.
    pub kappa: f64,
}

impl ComplexWavenumber {
    pub fn complex(self) -> Complex64 {
        Complex64::new(self.k, -self.kappa)
    }

    /// Real wavelength `2π/k`.
    pub fn wavelength(self) -> f64 {
        std::f64::consts::TAU / self.k
    }
}

/// Direction of a dielectric perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbSign {
    Higher,
    Lower,
}

impl DielectricSpectrum {
    /// Builds a spectrum, checking that frequencies are positive and strictly
    /// increasing, `ε_r ≥ 1` and `σ ≥ 0`.
    pub fn new(name: impl Into<String>, samples: Vec<DielectricSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidSpectrum("no samples".into()));
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.frequency > 0.0) || !s.frequency.is_finite() {
                return Err(Error::InvalidSpectrum(format!(
                    "sample {i}: frequency must be positive, got {}",
                    s.frequency
                )));
            }
            if !(s.eps_r >= 1.0) || !s.eps_r.is_finite() {
                return Err(Error::InvalidSpectrum(format!(
                    "sample {i}: eps_r must be >= 1, got {}",
                    s.eps_r
                )));
            }
            if !(s.sigma >= 0.0) || !s.sigma.is_finite() {
                return Err(Error::InvalidSpectrum(format!(
                    "sample {i}: sigma must be >= 0, got {}",
                    s.sigma
                )));
            }
            if i > 0 && s.frequency <= samples[i - 1].frequency {
                return Err(Error::InvalidSpectrum(format!(
                    "sample {i}: frequencies must be strictly increasing"
                )));
            }
        }
        Ok(Self { name: name.into(), samples })
    }

    /// A frequency-independent medium valid from 1 kHz to 10 THz.
    pub fn constant(name: impl Into<String>, eps_r: f64, sigma: f64) -> Result<Self> {
        let (lo, hi) = CONSTANT_BAND;
        Self::new(
            name,
            vec![
                DielectricSample { frequency: lo, eps_r, sigma },
                DielectricSample { frequency: hi, eps_r, sigma },
            ],
        )
    }

    pub fn vacuum() -> Self {
        Self::constant("vacuum", 1.0, 0.0).expect("vacuum is a valid medium")
    }

    /// Built-in glycerin-like dispersive reference medium (1–10 GHz).
    pub fn glycerin_like() -> Self {
        let samples = GLYCERIN_LIKE
            .iter()
            .map(|&(frequency, eps_r, sigma)| DielectricSample { frequency, eps_r, sigma })
            .collect();
        Self::new("glycerin-like", samples).expect("built-in table is valid")
    }

    /// Looks up a built-in medium by name (`vacuum`, `air`, `glycerin-like`).
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "vacuum" | "air" => Some(Self::vacuum()),
            "glycerin-like" | "glycerin" => Some(Self::glycerin_like()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn samples(&self) -> &[DielectricSample] {
        &self.samples
    }

    /// `(first, last)` sampled frequency.
    pub fn band(&self) -> (f64, f64) {
        (self.samples[0].frequency, self.samples[self.samples.len() - 1].frequency)
    }

    pub fn contains(&self, frequency: f64) -> bool {
        let (lo, hi) = self.band();
        frequency >= lo && frequency <= hi
    }

    /// Linearly interpolated `(ε_r, σ)` at `frequency`.
    pub fn interpolate(&self, frequency: f64) -> Result<(f64, f64)> {
        let (lo, hi) = self.band();
        if !(frequency >= lo && frequency <= hi) {
            return Err(Error::FrequencyOutOfRange { frequency, lo, hi });
        }
        let s = &self.samples;
        if s.len() == 1 {
            return Ok((s[0].eps_r, s[0].sigma));
        }
        // first sample with frequency > f, clamped so [i-1, i] is a valid bracket
        let i = s.partition_point(|x| x.frequency <= frequency).clamp(1, s.len() - 1);
        let (a, b) = (&s[i - 1], &s[i]);
        let t = (frequency - a.frequency) / (b.frequency - a.frequency);
        Ok((a.eps_r + t * (b.eps_r - a.eps_r), a.sigma + t * (b.sigma - a.sigma)))
    }

    pub fn eps_r(&self, frequency: f64) -> Result<f64> {
        Ok(self.interpolate(frequency)?.0)
    }

    /// `ε̃ = ε_r − jσ/(2πfε₀)`.
    pub fn complex_permittivity(&self, frequency: f64) -> Result<Complex64> {
        let (eps_r, sigma) = self.interpolate(frequency)?;
        let omega = std::f64::consts::TAU * frequency;
        Ok(Complex64::new(eps_r, -sigma / (omega * VACUUM_PERMITTIVITY)))
    }

    /// `k̃ = (2πf/c)·√ε̃` on the branch with `k > 0`, `κ ≥ 0`.
    pub fn wavenumber(&self, frequency: f64) -> Result<ComplexWavenumber> {
        let eps = self.complex_permittivity(frequency)?;
        let n = eps.sqrt();
        let k0 = std::f64::consts::TAU * frequency / SPEED_OF_LIGHT;
        // principal sqrt of a number with Im ≤ 0 has Re > 0 and Im ≤ 0
        Ok(ComplexWavenumber { k: k0 * n.re, kappa: (-k0 * n.im).max(0.0) })
    }

    /// Real refractive index `Re √ε̃`.
    pub fn refractive_index(&self, frequency: f64) -> Result<f64> {
        Ok(self.complex_permittivity(frequency)?.sqrt().re)
    }

    /// Scales every `ε_r` and `σ` sample independently by `1 ± u`, with
    /// `u ~ U[lo, hi]` drawn from a ChaCha8 stream seeded with `seed`.
    ///
    /// `ε_r` is clamped at 1 so the result stays physical.
    pub fn perturb(&self, lo: f64, hi: f64, sign: PerturbSign, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&lo) || !(0.0..1.0).contains(&hi) {
            return Err(Error::InvalidRange(format!("fractions must lie in [0, 1), got [{lo}, {hi}]")));
        }
        if lo > hi {
            return Err(Error::InvalidRange(format!("lo {lo} exceeds hi {hi}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = match sign {
            PerturbSign::Higher => 1.0,
            PerturbSign::Lower => -1.0,
        };
        let samples = self
            .samples
            .iter()
            .map(|x| {
                let ue: f64 = rng.random_range(lo..=hi);
                let us: f64 = rng.random_range(lo..=hi);
                DielectricSample {
                    frequency: x.frequency,
                    eps_r: (x.eps_r * (1.0 + s * ue)).max(1.0),
                    sigma: x.sigma * (1.0 + s * us),
                }
            })
            .collect();
        let suffix = match sign {
            PerturbSign::Higher => "+",
            PerturbSign::Lower => "-",
        };
        Self::new(format!("{}{suffix}", self.name), samples)
    }

    /// Arrival-time spread between the `f_low` and `f_high` components after
    /// travelling `distance` through the medium, using real permittivity only:
    /// `|√ε(f_high) − √ε(f_low)|·d/c`.
    pub fn dispersive_time_spread(&self, f_low: f64, f_high: f64, distance: f64) -> Result<f64> {
        if !(f_low < f_high) {
            return Err(Error::InvalidParameter(format!(
                "f_low {f_low} must be below f_high {f_high}"
            )));
        }
        if !(distance > 0.0) {
            return Err(Error::InvalidParameter(format!("distance must be positive, got {distance}")));
        }
        let lo = self.eps_r(f_low)?.sqrt();
        let hi = self.eps_r(f_high)?.sqrt();
        Ok((hi - lo).abs() * distance / SPEED_OF_LIGHT)
    }

    /// Reads a comma-separated table with header
    /// `frequency_hz,eps_r,sigma_s_per_m`.
    pub fn from_csv_reader(name: impl Into<String>, reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expected = ["frequency_hz", "eps_r", "sigma_s_per_m"];
        if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(Error::Parse(format!(
                "expected header `frequency_hz,eps_r,sigma_s_per_m`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut samples = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let field = |i: usize| -> Result<f64> {
                record[i]
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {:?}: {e}", record.position().map(|p| p.line()))))
            };
            samples.push(DielectricSample { frequency: field(0)?, eps_r: field(1)?, sigma: field(2)? });
        }
        Self::new(name, samples)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Self::from_csv_reader(name, std::fs::File::open(path)?)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("frequency_hz,eps_r,sigma_s_per_m\n");
        for s in &self.samples {
            out.push_str(&format!("{},{},{}\n", s.frequency, s.eps_r, s.sigma));
        }
        out
    }
}

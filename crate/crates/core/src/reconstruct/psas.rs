use num_complex::Complex64;
use rayon::prelude::*;

use super::{trapezoid_weights, Algorithm, ImageGrid, Reconstruction, ReconstructionConfig};
use crate::channel::{media_table, one_way_sweep, Leg};
use crate::forward::antennas;
use crate::geometry::GridSpec;
use crate::signal::{to_spectrum, MultistaticDataset, ScanGeometry};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// PSAS with the per-pixel compensation precomputed.
///
/// Because `H_eff` is the product of the two one-way sums, its inverse
/// factors into a TX part and an RX part. The operator stores the inverse
/// one-way transfer for every (pixel, antenna, frequency) once, so imaging
/// several datasets against the same reference dielectric only pays for
/// the path search once.
#[derive(Debug, Clone)]
pub struct PsasOperator {
    grid: GridSpec,
    mask: Vec<bool>,
    frequencies: Vec<f64>,
    weights: Vec<f64>,
    geometry: ScanGeometry,
    n_tx: usize,
    n_rx: usize,
    rx_site_of: Vec<usize>,
    n_antennas: usize,
    /// Table row of each pixel, `usize::MAX` outside the mask.
    rows: Vec<usize>,
    /// Per row: antenna-major, frequency-minor inverse one-way transfers;
    /// zero marks a leg without a path. TX sites come first.
    table: Vec<Complex64>,
}

/// Spectra of every channel at the operator's frequencies, laid out
/// frequency-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpectra {
    values: Vec<Complex64>,
    n_channels: usize,
}

impl ChannelSpectra {
    /// Spectrum value of channel `ch` (TX-major linear index) at frequency
    /// index `k`.
    pub fn get(&self, ch: usize, k: usize) -> Complex64 {
        self.values[k * self.n_channels + ch]
    }
}

/// One pixel's PSAS value with its term accounting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelValue {
    pub value: f64,
    pub terms: usize,
    pub skipped: usize,
}

impl PsasOperator {
    pub fn new(cfg: &ReconstructionConfig, geometry: &ScanGeometry) -> Result<Self> {
        cfg.validate()?;
        geometry.validate()?;
        let media = media_table(&cfg.scene, &cfg.frequencies)?;
        let ant = antennas(geometry, &cfg.scene, &cfg.antenna);
        let sites: Vec<_> = ant.tx.iter().map(|a| (a, Leg::Transmit)).chain(ant.rx_sites.iter().map(|a| (a, Leg::Receive))).collect();
        let mask = cfg.mask();
        let pixels: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
        let mut rows = vec![usize::MAX; mask.len()];
        for (row, &i) in pixels.iter().enumerate() {
            rows[i] = row;
        }
        let per_pixel: Vec<Vec<Complex64>> = pixels
            .par_iter()
            .map(|&i| {
                let p = cfg.grid.point(i);
                let mut row = Vec::with_capacity(sites.len() * media.len());
                for &(a, leg) in &sites {
                    let inv = one_way_sweep(&cfg.scene, a, p, &media, cfg.channel, leg, cfg.multipath_mode, true)?;
                    row.extend(inv.into_iter().map(|v| v.unwrap_or(ZERO)));
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            grid: cfg.grid,
            mask,
            weights: trapezoid_weights(&cfg.frequencies),
            frequencies: cfg.frequencies.clone(),
            geometry: geometry.clone(),
            n_tx: ant.tx.len(),
            n_rx: geometry.rx_offsets_deg.len(),
            rx_site_of: ant.rx_site_of,
            n_antennas: sites.len(),
            rows,
            table: per_pixel.concat(),
        })
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Channel spectra of `data` at the operator's frequencies.
    pub fn spectra(&self, data: &MultistaticDataset) -> Result<ChannelSpectra> {
        if data.geometry() != &self.geometry {
            return Err(Error::InvalidParameter("dataset scan geometry differs from the operator's".into()));
        }
        let traces = data.channel_samples()?;
        let tb = data.timebase();
        let per_channel: Vec<Vec<Complex64>> = traces
            .par_iter()
            .map(|s| {
                let t = crate::signal::TimeTrace { t0: tb.t0, dt: tb.dt, samples: s.to_vec() };
                Ok(to_spectrum(&t, &self.frequencies)?.values)
            })
            .collect::<Result<_>>()?;
        let n_channels = per_channel.len();
        let mut values = vec![ZERO; n_channels * self.frequencies.len()];
        for (ch, spec) in per_channel.iter().enumerate() {
            for (k, v) in spec.iter().enumerate() {
                values[k * n_channels + ch] = *v;
            }
        }
        Ok(ChannelSpectra { values, n_channels })
    }

    fn inverse(&self, row: usize, antenna: usize, k: usize) -> Complex64 {
        self.table[(row * self.n_antennas + antenna) * self.frequencies.len() + k]
    }

    /// Compensated channel values at pixel `index` and frequency index `k`,
    /// in channel order; `None` where a leg has no path.
    pub fn compensated(&self, spectra: &ChannelSpectra, index: usize, k: usize) -> Vec<Option<Complex64>> {
        let row = self.rows[index];
        (0..spectra.n_channels)
            .map(|ch| {
                if row == usize::MAX {
                    return None;
                }
                let a = self.inverse(row, ch / self.n_rx, k);
                let b = self.inverse(row, self.n_tx + self.rx_site_of[ch], k);
                (a != ZERO && b != ZERO).then(|| spectra.get(ch, k) * a * b)
            })
            .collect()
    }

    /// `Σ_f w_f |Σ_channels V·(1/H_tx)·(1/H_rx)|²` at pixel `index`.
    #[allow(clippy::needless_range_loop)]
    pub fn pixel(&self, spectra: &ChannelSpectra, index: usize) -> PixelValue {
        let row = self.rows[index];
        if row == usize::MAX {
            return PixelValue { value: 0.0, terms: 0, skipped: 0 };
        }
        let n_channels = spectra.n_channels;
        let (mut value, mut terms, mut skipped) = (0.0, 0, 0);
        for (k, w) in self.weights.iter().enumerate() {
            let v = &spectra.values[k * n_channels..(k + 1) * n_channels];
            let mut sum = ZERO;
            for tx in 0..self.n_tx {
                let a = self.inverse(row, tx, k);
                if a == ZERO {
                    skipped += self.n_rx;
                    continue;
                }
                let mut inner = ZERO;
                for ch in tx * self.n_rx..(tx + 1) * self.n_rx {
                    let b = self.inverse(row, self.n_tx + self.rx_site_of[ch], k);
                    if b == ZERO {
                        skipped += 1;
                        continue;
                    }
                    inner += v[ch] * b;
                    terms += 1;
                }
                sum += a * inner;
            }
            value += w * sum.norm_sqr();
        }
        PixelValue { value, terms, skipped }
    }

    /// Pixel values in the order given by `indices`.
    pub fn pixels(&self, spectra: &ChannelSpectra, indices: &[usize]) -> Vec<PixelValue> {
        indices.par_iter().map(|&i| self.pixel(spectra, i)).collect()
    }

    /// Forms the normalized PSAS image of `data`.
    pub fn apply(&self, data: &MultistaticDataset) -> Result<Reconstruction> {
        let spectra = self.spectra(data)?;
        let all: Vec<usize> = (0..self.grid.len()).collect();
        let values = self.pixels(&spectra, &all);
        let pixels = values.iter().map(|v| v.value).collect();
        let terms = values.iter().map(|v| v.terms).collect();
        let skipped = values.iter().map(|v| v.skipped).sum();
        let image = ImageGrid::new(self.grid, pixels, self.mask.clone())?;
        Ok(Reconstruction::finish(Algorithm::Psas, image, terms, skipped))
    }
}

/// PSAS image of `data`: per pixel and frequency, the coherent sum of all
/// compensated channel responses, squared and integrated over frequency
/// with the trapezoid rule. Channels where either leg has no path are
/// skipped without renormalizing.
pub fn psas(data: &MultistaticDataset, cfg: &ReconstructionConfig) -> Result<Reconstruction> {
    PsasOperator::new(cfg, data.geometry())?.apply(data)
}

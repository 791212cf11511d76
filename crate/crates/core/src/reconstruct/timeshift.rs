//! Time-shift beamformers. Every trace is advanced by the least-time
//! two-way delay to the pixel, evaluated with the real refractive index at
//! a single centre frequency.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Algorithm, ImageGrid, Reconstruction, ReconstructionConfig};
use crate::channel::Antenna;
use crate::forward::antennas;
use crate::geometry::{GridSpec, Point};
use crate::signal::{MultistaticDataset, ScanGeometry};
use crate::{Error, Result};

/// How a trace is read between samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Nearest,
    #[default]
    Linear,
}

/// Two-way least-time delay TX → pixel → RX at the centre frequency.
pub fn ts_delay(pixel: Point, tx: Point, rx: Point, cfg: &ReconstructionConfig) -> Result<f64> {
    let f = cfg.center_frequency;
    let leg = |p: Point| {
        let a = Antenna::facing(p, cfg.scene.center, Arc::clone(&cfg.antenna));
        Ok::<_, Error>(a.least_time_path(&cfg.scene, pixel, f)?.travel_time)
    };
    Ok(leg(tx)? + leg(rx)?)
}

/// One-way least-time delays from every scan antenna to every pixel in the
/// mask.
#[derive(Debug, Clone)]
pub struct DelayTable {
    grid: GridSpec,
    mask: Vec<bool>,
    n_tx: usize,
    n_rx: usize,
    rx_site_of: Vec<usize>,
    n_antennas: usize,
    rows: Vec<usize>,
    delays: Vec<f64>,
    geometry: ScanGeometry,
}

impl DelayTable {
    pub fn new(cfg: &ReconstructionConfig, geometry: &ScanGeometry) -> Result<Self> {
        cfg.validate()?;
        geometry.validate()?;
        let f = cfg.center_frequency;
        let ant = antennas(geometry, &cfg.scene, &cfg.antenna);
        let sites: Vec<&Antenna> = ant.tx.iter().chain(&ant.rx_sites).collect();
        let mask = cfg.mask();
        let pixels: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
        let mut rows = vec![usize::MAX; mask.len()];
        for (row, &i) in pixels.iter().enumerate() {
            rows[i] = row;
        }
        let per_pixel: Vec<Vec<f64>> = pixels
            .par_iter()
            .map(|&i| {
                let p = cfg.grid.point(i);
                sites.iter().map(|a| Ok(a.least_time_path(&cfg.scene, p, f)?.travel_time)).collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            grid: cfg.grid,
            mask,
            n_tx: ant.tx.len(),
            n_rx: geometry.rx_offsets_deg.len(),
            rx_site_of: ant.rx_site_of,
            n_antennas: sites.len(),
            rows,
            delays: per_pixel.concat(),
            geometry: geometry.clone(),
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Two-way delay of channel `ch` (TX-major linear index) at pixel
    /// `index`; `None` outside the mask.
    pub fn delay(&self, index: usize, ch: usize) -> Option<f64> {
        let row = *self.rows.get(index)?;
        if row == usize::MAX {
            return None;
        }
        let base = row * self.n_antennas;
        Some(self.delays[base + ch / self.n_rx] + self.delays[base + self.n_tx + self.rx_site_of[ch]])
    }
}

/// Dataset traces zero-padded on both sides so any shift can be read with
/// plain slicing.
#[derive(Debug, Clone)]
pub struct PaddedTraces {
    traces: Vec<Vec<f64>>,
    len: usize,
    dt: f64,
}

impl PaddedTraces {
    fn new(data: &MultistaticDataset) -> Result<Self> {
        let len = data.timebase().len;
        let traces = data
            .channel_samples()?
            .into_iter()
            .map(|s| {
                let mut p = vec![0.0; 3 * len + 1];
                p[len..2 * len].copy_from_slice(s);
                p
            })
            .collect();
        Ok(Self { traces, len, dt: data.timebase().dt })
    }

    /// Writes `x(t_k + delay)` for every output sample into `out`.
    fn align(&self, ch: usize, delay: f64, interp: Interpolation, out: &mut [f64]) {
        let n = self.len as isize;
        let shift = delay / self.dt;
        let (i0, frac) = match interp {
            Interpolation::Linear => (shift.floor(), shift - shift.floor()),
            Interpolation::Nearest => (shift.round(), 0.0),
        };
        if !(i0.abs() < n as f64) {
            out.fill(0.0);
            return;
        }
        let start = (n + i0 as isize) as usize;
        let p = &self.traces[ch];
        let (a, b) = (&p[start..start + self.len], &p[start + 1..start + 1 + self.len]);
        let g = 1.0 - frac;
        for ((o, x0), x1) in out.iter_mut().zip(a).zip(b) {
            *o = g * x0 + frac * x1;
        }
    }
}

/// Precomputed delays plus the interpolation rule: images any number of
/// datasets that share a scan geometry and reference dielectric.
#[derive(Debug, Clone)]
pub struct TimeShiftOperator {
    pub delays: DelayTable,
    pub interpolation: Interpolation,
}

struct Scratch {
    aligned: Vec<f64>,
    sum: Vec<f64>,
    squares: Vec<f64>,
    group: Vec<Vec<f64>>,
}

impl TimeShiftOperator {
    pub fn new(cfg: &ReconstructionConfig, geometry: &ScanGeometry) -> Result<Self> {
        Ok(Self { delays: DelayTable::new(cfg, geometry)?, interpolation: cfg.interpolation })
    }

    pub fn prepare(&self, data: &MultistaticDataset) -> Result<PaddedTraces> {
        if data.geometry() != &self.delays.geometry {
            return Err(Error::InvalidParameter("dataset scan geometry differs from the operator's".into()));
        }
        PaddedTraces::new(data)
    }

    fn scratch(&self, len: usize) -> Scratch {
        Scratch {
            aligned: vec![0.0; len],
            sum: vec![0.0; len],
            squares: vec![0.0; len],
            group: vec![vec![0.0; len]; self.delays.n_rx],
        }
    }

    /// Unnormalized value of pixel `index` under a time-shift `algorithm`.
    pub fn pixel(&self, algorithm: Algorithm, traces: &PaddedTraces, index: usize) -> Result<f64> {
        let mut s = self.scratch(traces.len);
        self.pixel_with(algorithm, traces, index, &mut s)
    }

    fn pixel_with(&self, algorithm: Algorithm, traces: &PaddedTraces, index: usize, s: &mut Scratch) -> Result<f64> {
        if self.delays.rows[index] == usize::MAX {
            return Ok(0.0);
        }
        let n_channels = traces.traces.len();
        let delay = |ch: usize| self.delays.delay(index, ch).expect("pixel in mask");
        let interp = self.interpolation;
        let value = match algorithm {
            Algorithm::Psas => return Err(Error::InvalidParameter("psas is not a time-shift method".into())),
            Algorithm::Das => {
                s.sum.fill(0.0);
                for ch in 0..n_channels {
                    traces.align(ch, delay(ch), interp, &mut s.aligned);
                    s.sum.iter_mut().zip(&s.aligned).for_each(|(a, y)| *a += y);
                }
                s.sum.iter().map(|v| v * v).sum::<f64>()
            }
            Algorithm::Dmas => {
                s.sum.fill(0.0);
                s.squares.fill(0.0);
                for ch in 0..n_channels {
                    traces.align(ch, delay(ch), interp, &mut s.aligned);
                    for ((a, q), y) in s.sum.iter_mut().zip(s.squares.iter_mut()).zip(&s.aligned) {
                        *a += y;
                        *q += y * y;
                    }
                }
                // Σ_{i<j} y_i·y_j = ((Σy)² − Σy²) / 2
                s.sum.iter().zip(&s.squares).map(|(a, q)| (0.5 * (a * a - q)).abs()).sum::<f64>()
            }
            Algorithm::Rar => {
                let n_rx = self.delays.n_rx;
                let mut total = 0.0;
                for tx in 0..self.delays.n_tx {
                    for (j, y) in s.group.iter_mut().enumerate() {
                        traces.align(tx * n_rx + j, delay(tx * n_rx + j), interp, y);
                    }
                    let w = adjacent_correlation(&s.group);
                    if w == 0.0 {
                        continue;
                    }
                    s.sum.fill(0.0);
                    for y in &s.group {
                        s.sum.iter_mut().zip(y).for_each(|(a, v)| *a += v);
                    }
                    total += s.sum.iter().map(|v| (w * v).powi(2)).sum::<f64>();
                }
                total
            }
        };
        Ok(value * traces.dt)
    }

    /// Normalized image of `data` under a time-shift `algorithm`.
    pub fn apply(&self, algorithm: Algorithm, data: &MultistaticDataset) -> Result<Reconstruction> {
        let traces = self.prepare(data)?;
        let grid = self.delays.grid;
        let pixels = (0..grid.len())
            .into_par_iter()
            .map_init(|| self.scratch(traces.len), |s, i| self.pixel_with(algorithm, &traces, i, s))
            .collect::<Result<Vec<f64>>>()?;
        let n_channels = traces.traces.len();
        let terms = self.delays.mask.iter().map(|&m| if m { n_channels } else { 0 }).collect();
        let image = ImageGrid::new(grid, pixels, self.delays.mask.clone())?;
        Ok(Reconstruction::finish(algorithm, image, terms, 0))
    }
}

/// Mean normalized zero-lag correlation of neighbouring traces, clamped to
/// `[0, 1]`. Pairs with a silent trace contribute zero.
fn adjacent_correlation(group: &[Vec<f64>]) -> f64 {
    if group.len() < 2 {
        return 1.0;
    }
    let energy: Vec<f64> = group.iter().map(|y| y.iter().map(|v| v * v).sum()).collect();
    let mut acc = 0.0;
    for j in 0..group.len() - 1 {
        let denom = (energy[j] * energy[j + 1]).sqrt();
        if denom > 0.0 {
            acc += group[j].iter().zip(&group[j + 1]).map(|(a, b)| a * b).sum::<f64>() / denom;
        }
    }
    (acc / (group.len() - 1) as f64).clamp(0.0, 1.0)
}

/// Delay-and-sum: `∫ (Σ_channels x(t + τ))² dt`.
pub fn das(data: &MultistaticDataset, cfg: &ReconstructionConfig) -> Result<Reconstruction> {
    TimeShiftOperator::new(cfg, data.geometry())?.apply(Algorithm::Das, data)
}

/// Delay-multiply-and-sum: `∫ |Σ_{i<j} x_i(t + τ_i)·x_j(t + τ_j)| dt`.
pub fn dmas(data: &MultistaticDataset, cfg: &ReconstructionConfig) -> Result<Reconstruction> {
    TimeShiftOperator::new(cfg, data.geometry())?.apply(Algorithm::Dmas, data)
}

/// Multistatic RAR: `∫ Σ_tx (w_tx·Σ_rx x(t + τ))² dt`, where `w_tx` is the
/// mean normalized correlation of neighbouring aligned receivers.
///
/// This weight is an interpretation. Other RAR variants weight by
/// correlations over longer windows or more receivers.
pub fn rar(data: &MultistaticDataset, cfg: &ReconstructionConfig) -> Result<Reconstruction> {
    TimeShiftOperator::new(cfg, data.geometry())?.apply(Algorithm::Rar, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_neighbours_correlate_fully() {
        let y: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let group: Vec<Vec<f64>> = (1..5).map(|k| y.iter().map(|v| v * k as f64).collect()).collect();
        assert!((adjacent_correlation(&group) - 1.0).abs() < 1e-12);
        let flipped: Vec<Vec<f64>> = group.iter().enumerate().map(|(j, g)| g.iter().map(|v| if j % 2 == 0 { *v } else { -v }).collect()).collect();
        assert_eq!(adjacent_correlation(&flipped), 0.0);
    }

    #[test]
    fn alignment_interpolates_and_pads() {
        let data = {
            let g = ScanGeometry::default();
            let tb = crate::signal::Timebase::new(0.0, 1.0, 4).unwrap();
            let mut d = MultistaticDataset::zeros(g.clone(), tb).unwrap();
            d.samples_mut(g.channels()[0]).unwrap().copy_from_slice(&[1.0, 2.0, 3.0, 4.0]);
            d
        };
        let p = PaddedTraces::new(&data).unwrap();
        let mut out = [0.0; 4];
        p.align(0, 0.5, Interpolation::Linear, &mut out);
        assert_eq!(out, [1.5, 2.5, 3.5, 2.0]);
        p.align(0, -1.0, Interpolation::Linear, &mut out);
        assert_eq!(out, [0.0, 1.0, 2.0, 3.0]);
        p.align(0, 1.4, Interpolation::Nearest, &mut out);
        assert_eq!(out, [2.0, 3.0, 4.0, 0.0]);
        p.align(0, 9.0, Interpolation::Linear, &mut out);
        assert_eq!(out, [0.0; 4]);
    }
}

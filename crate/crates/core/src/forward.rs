//! Synthetic multistatic measurements.
//!
//! Each scatterer is a point with a complex reflectivity; extended objects
//! are dense point clouds. The scattered field of one channel is
//!
//! ```text
//! V(f) = S(f) · Σ_p H_tx→p(f) · Γ_p(f) · H_p→rx(f)
//! ```
//!
//! where `H` is the one-way multipath transfer of [`crate::channel`]. There
//! is no interaction between scatterers, so the model is linear in `Γ` and
//! obeys superposition. A background made of direct antenna coupling and a
//! specular echo off the cylinder surface, which depends only on the
//! transmitter–receiver offset, and seeded Gaussian noise can be added.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{media_table, one_way_sweep, Antenna, AntennaModel, ChannelOptions, Leg, Media, MultipathMode};
use crate::dielectric::SPEED_OF_LIGHT;
use crate::geometry::{Footprint, Point};
use crate::raypath::CylinderScene;
use crate::signal::{from_spectrum, to_spectrum, MultistaticDataset, ScanGeometry, Timebase, TimeTrace};
use crate::{Error, Result};

/// Complex reflection coefficient of a scatterer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Reflectivity {
    /// Same value at every frequency.
    Flat { magnitude: f64, phase_rad: f64 },
    /// `(frequency, re, im)` samples, linearly interpolated and held constant
    /// beyond the table.
    Table { samples: Vec<(f64, f64, f64)> },
}

impl Reflectivity {
    pub fn flat(magnitude: f64, phase_rad: f64) -> Self {
        Reflectivity::Flat { magnitude, phase_rad }
    }

    /// Perfect conductor: unit magnitude, phase π.
    pub fn metal() -> Self {
        Self::flat(1.0, std::f64::consts::PI)
    }

    /// Weak dielectric scatterer, 20 dB below [`metal`](Self::metal).
    pub fn plasticine() -> Self {
        Self::flat(0.1, 0.0)
    }

    pub fn at(&self, frequency: f64) -> Complex64 {
        match self {
            Reflectivity::Flat { magnitude, phase_rad } => Complex64::from_polar(*magnitude, *phase_rad),
            Reflectivity::Table { samples } => {
                let c = |s: &(f64, f64, f64)| Complex64::new(s.1, s.2);
                if frequency <= samples[0].0 {
                    return c(&samples[0]);
                }
                let last = &samples[samples.len() - 1];
                if frequency >= last.0 {
                    return c(last);
                }
                let hi = samples.partition_point(|s| s.0 <= frequency);
                let (a, b) = (&samples[hi - 1], &samples[hi]);
                let t = (frequency - a.0) / (b.0 - a.0);
                c(a) * (1.0 - t) + c(b) * t
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Reflectivity::Flat { magnitude, phase_rad } => *magnitude > 0.0 && magnitude.is_finite() && phase_rad.is_finite(),
            Reflectivity::Table { samples } => {
                !samples.is_empty()
                    && samples.windows(2).all(|w| w[1].0 > w[0].0)
                    && samples.iter().all(|s| Complex64::new(s.1, s.2).norm() > 0.0 && s.1.is_finite() && s.2.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("reflectivity must be finite and nonzero".into()))
        }
    }
}

/// A point scatterer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub position: Point,
    pub reflectivity: Reflectivity,
}

/// Points filling `footprint` at one per `spacing²`, all sharing
/// `reflectivity`.
pub fn extended_object(footprint: &Footprint, spacing: f64, reflectivity: &Reflectivity) -> Vec<Scatterer> {
    footprint
        .point_cloud(spacing)
        .into_iter()
        .map(|position| Scatterer { position, reflectivity: reflectivity.clone() })
        .collect()
}

/// Rotationally symmetric background: direct coupling between the two
/// antennas plus a specular echo from the cylinder surface.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ArtifactModel {
    /// Amplitude of the direct path, divided by its length.
    pub direct_gain: f64,
    /// Reflection coefficient magnitude of the surface echo, divided by the
    /// product of the two free-space legs.
    pub echo_gain: f64,
}

impl ArtifactModel {
    pub fn is_zero(&self) -> bool {
        self.direct_gain == 0.0 && self.echo_gain == 0.0
    }
}

/// Everything the simulator needs besides the scan and the pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub cylinder: CylinderScene,
    pub scatterers: Vec<Scatterer>,
    pub artifact: ArtifactModel,
    /// Standard deviation of additive noise as a fraction of the largest
    /// noise-free sample in the dataset.
    pub noise_rms: f64,
    /// Half-width of a uniform per-channel gain error on the scattered
    /// field (0.05 = ±5%).
    pub amplitude_jitter: f64,
    pub seed: u64,
    pub channel: ChannelOptions,
    pub antenna: Arc<AntennaModel>,
}

impl Scene {
    /// Noise-free, artifact-free scene with isotropic antennas.
    pub fn new(cylinder: CylinderScene, scatterers: Vec<Scatterer>) -> Self {
        Self {
            cylinder,
            scatterers,
            artifact: ArtifactModel::default(),
            noise_rms: 0.0,
            amplitude_jitter: 0.0,
            seed: 0,
            channel: ChannelOptions::default(),
            antenna: Arc::new(AntennaModel::isotropic()),
        }
    }

    fn validate(&self) -> Result<()> {
        for s in &self.scatterers {
            if !self.cylinder.contains(s.position) {
                return Err(Error::PointNotInterior { x: s.position.x, y: s.position.y });
            }
            s.reflectivity.validate()?;
        }
        for (name, v) in [("noise_rms", self.noise_rms), ("amplitude_jitter", self.amplitude_jitter)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }
}

/// Default synthesis grid: 1–10 GHz in 10 MHz steps.
pub fn default_frequency_grid() -> Vec<f64> {
    (0..=900).map(|i| 1e9 + 1e7 * i as f64).collect()
}

/// Default timebase: 10 ps sampling over 10 ns.
pub fn default_timebase() -> Timebase {
    Timebase { t0: 0.0, dt: 1e-11, len: 1000 }
}

/// Independent stream seed for one channel.
pub fn channel_seed(seed: u64, tx: usize, rx: usize, stream: u64) -> u64 {
    // splitmix64 finaliser over the packed inputs
    let mut z = seed ^ ((tx as u64) << 40) ^ ((rx as u64) << 20) ^ (stream << 60);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The scan's transmitters and distinct receiver sites, all facing the
/// cylinder centre. `rx_site_of[channel]` maps a channel to its site.
pub(crate) struct Antennas {
    pub tx: Vec<Antenna>,
    pub rx_sites: Vec<Antenna>,
    pub rx_site_of: Vec<usize>,
}

pub(crate) fn antennas(geometry: &ScanGeometry, cylinder: &CylinderScene, model: &Arc<AntennaModel>) -> Antennas {
    let tx = (0..geometry.tx_angles_deg.len())
        .map(|i| Antenna::facing(geometry.tx_position(i), cylinder.center, model.clone()))
        .collect();
    let (sites, rx_site_of) = geometry.receiver_sites();
    let rx_sites = sites.into_iter().map(|p| Antenna::facing(p, cylinder.center, model.clone())).collect();
    Antennas { tx, rx_sites, rx_site_of }
}

/// Scattered-field spectra of every channel (channel-major, frequency-minor),
/// without the source spectrum.
fn scattered_spectra(scene: &Scene, geometry: &ScanGeometry, media: &[Media]) -> Result<Vec<Vec<Complex64>>> {
    let ant = antennas(geometry, &scene.cylinder, &scene.antenna);
    let nf = media.len();
    let mut spectra = vec![vec![Complex64::new(0.0, 0.0); nf]; geometry.channel_count()];
    let n_rx = geometry.rx_offsets_deg.len();
    let sweep = |a: &Antenna, p: Point, leg: Leg| {
        one_way_sweep(&scene.cylinder, a, p, media, scene.channel, leg, MultipathMode::Heff, false)
    };
    for s in &scene.scatterers {
        let gamma: Vec<Complex64> = media.iter().map(|m| s.reflectivity.at(m.frequency)).collect();
        let h_tx = ant.tx.par_iter().map(|a| sweep(a, s.position, Leg::Transmit)).collect::<Result<Vec<_>>>()?;
        let h_rx = ant.rx_sites.par_iter().map(|a| sweep(a, s.position, Leg::Receive)).collect::<Result<Vec<_>>>()?;
        spectra.par_iter_mut().enumerate().for_each(|(ch, spec)| {
            let (tx, site) = (ch / n_rx, ant.rx_site_of[ch]);
            for (k, v) in spec.iter_mut().enumerate() {
                if let (Some(a), Some(b)) = (h_tx[tx][k], h_rx[site][k]) {
                    *v += a * gamma[k] * b;
                }
            }
        });
    }
    Ok(spectra)
}

/// Background spectrum for one receiver offset, evaluated with the
/// transmitter at the scan's zero angle so every rotation reuses it.
fn artifact_spectrum(model: &ArtifactModel, geometry: &ScanGeometry, cylinder: &CylinderScene, offset_deg: f64, freqs: &[f64]) -> Vec<Complex64> {
    let tx = Point::polar(geometry.center, geometry.tx_radius, 0.0);
    let rx = Point::polar(geometry.center, geometry.rx_radius, offset_deg.to_radians());
    let direct = tx.distance(rx);
    // specular point: shortest tx → boundary → rx route, on a 0.01° sweep
    let (mut best, mut legs) = (f64::INFINITY, (1.0, 1.0));
    for k in 0..36_000 {
        let b = Point::polar(cylinder.center, cylinder.radius, (k as f64 * 0.01).to_radians());
        let (d1, d2) = (tx.distance(b), b.distance(rx));
        if d1 + d2 < best {
            best = d1 + d2;
            legs = (d1, d2);
        }
    }
    freqs
        .iter()
        .map(|&f| {
            let w = std::f64::consts::TAU * f / SPEED_OF_LIGHT;
            Complex64::from_polar(model.direct_gain / direct, -w * direct)
                - Complex64::from_polar(model.echo_gain / (legs.0 * legs.1), -w * best)
        })
        .collect()
}

fn to_traces(spectra: &[Vec<Complex64>], source: &[Complex64], freqs: &[f64], timebase: Timebase) -> Result<Vec<Vec<f64>>> {
    spectra
        .par_iter()
        .map(|spec| {
            let values = spec.iter().zip(source).map(|(v, s)| v * s).collect();
            let st = crate::signal::SpectrumTrace { frequencies: freqs.to_vec(), values };
            Ok(from_spectrum(&st, timebase.t0, timebase.dt, timebase.len)?.samples)
        })
        .collect()
}

fn check_inputs(geometry: &ScanGeometry, pulse: &TimeTrace, fgrid: &[f64], timebase: Timebase) -> Result<()> {
    geometry.validate()?;
    if fgrid.is_empty() {
        return Err(Error::InvalidSpectrum("empty synthesis grid".into()));
    }
    if (pulse.dt - timebase.dt).abs() > 1e-9 * timebase.dt {
        return Err(Error::TimebaseMismatch(format!(
            "pulse sampled at {} s but dataset at {} s",
            pulse.dt, timebase.dt
        )));
    }
    Ok(())
}

/// Synthesises the full dataset: scattered field, background and noise.
pub fn simulate(scene: &Scene, geometry: &ScanGeometry, pulse: &TimeTrace, fgrid: &[f64], timebase: Timebase) -> Result<MultistaticDataset> {
    scene.validate()?;
    check_inputs(geometry, pulse, fgrid, timebase)?;
    let source = to_spectrum(pulse, fgrid)?.values;
    let media = media_table(&scene.cylinder, fgrid)?;

    let mut spectra = scattered_spectra(scene, geometry, &media)?;
    if scene.amplitude_jitter > 0.0 {
        for (ch, id) in geometry.channels().into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(channel_seed(scene.seed, id.tx, id.rx, 1));
            let g = 1.0 + rng.random_range(-scene.amplitude_jitter..=scene.amplitude_jitter);
            spectra[ch].iter_mut().for_each(|v| *v *= g);
        }
    }
    let mut traces = to_traces(&spectra, &source, fgrid, timebase)?;

    if !scene.artifact.is_zero() {
        let background = background_traces(scene, geometry, &source, fgrid, timebase)?;
        let n_rx = geometry.rx_offsets_deg.len();
        for (ch, t) in traces.iter_mut().enumerate() {
            for (a, b) in t.iter_mut().zip(&background[ch % n_rx]) {
                *a += b;
            }
        }
    }

    if scene.noise_rms > 0.0 {
        let peak = traces.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let sigma = scene.noise_rms * peak;
        for (ch, id) in geometry.channels().into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(channel_seed(scene.seed, id.tx, id.rx, 0));
            for v in traces[ch].iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v += sigma * z;
            }
        }
    }

    let mut data = MultistaticDataset::new(geometry.clone(), timebase)?;
    for (id, t) in geometry.channels().into_iter().zip(traces) {
        data.insert(id, t)?;
    }
    Ok(data)
}

/// One background trace per receiver offset.
fn background_traces(scene: &Scene, geometry: &ScanGeometry, source: &[Complex64], fgrid: &[f64], timebase: Timebase) -> Result<Vec<Vec<f64>>> {
    let spectra: Vec<Vec<Complex64>> = geometry
        .rx_offsets_deg
        .par_iter()
        .map(|&off| artifact_spectrum(&scene.artifact, geometry, &scene.cylinder, off, fgrid))
        .collect();
    to_traces(&spectra, source, fgrid, timebase)
}

/// The same pipeline with the scatterers and the noise removed: the
/// premeasured empty-scene field.
pub fn simulate_background_only(scene: &Scene, geometry: &ScanGeometry, pulse: &TimeTrace, fgrid: &[f64], timebase: Timebase) -> Result<MultistaticDataset> {
    let empty = Scene { scatterers: Vec::new(), noise_rms: 0.0, ..scene.clone() };
    simulate(&empty, geometry, pulse, fgrid, timebase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dielectric::DielectricSpectrum;
    use crate::signal::synthesize_pulse;

    fn cylinder() -> CylinderScene {
        CylinderScene::new(Point::ORIGIN, 0.05, DielectricSpectrum::vacuum(), DielectricSpectrum::glycerin_like()).unwrap()
    }

    fn pulse() -> TimeTrace {
        synthesize_pulse(4.5e9, 0.146e-9, 1e-11, 1e-9).unwrap()
    }

    fn coarse_grid() -> Vec<f64> {
        (0..=90).map(|i| 1e9 + 1e8 * i as f64).collect()
    }

    #[test]
    fn empty_scene_is_silent() {
        let scene = Scene::new(cylinder(), Vec::new());
        let d = simulate(&scene, &ScanGeometry::default(), &pulse(), &coarse_grid(), default_timebase()).unwrap();
        assert_eq!(d.len(), 456);
        assert!(d.iter().all(|(_, s)| s.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn rejects_exterior_scatterer() {
        let s = Scatterer { position: Point::new(0.06, 0.0), reflectivity: Reflectivity::metal() };
        let scene = Scene::new(cylinder(), vec![s]);
        let r = simulate(&scene, &ScanGeometry::default(), &pulse(), &coarse_grid(), default_timebase());
        assert!(matches!(r, Err(Error::PointNotInterior { .. })));
    }

    #[test]
    fn background_is_identical_within_groups() {
        let mut scene = Scene::new(cylinder(), Vec::new());
        scene.artifact = ArtifactModel { direct_gain: 1.0, echo_gain: 0.3 };
        let g = ScanGeometry::default();
        let d = simulate_background_only(&scene, &g, &pulse(), &coarse_grid(), default_timebase()).unwrap();
        for rx in 0..19 {
            let first = d.samples(crate::signal::ChannelId::new(0, rx)).unwrap();
            assert!(first.iter().any(|v| *v != 0.0));
            for tx in 1..24 {
                assert_eq!(d.samples(crate::signal::ChannelId::new(tx, rx)).unwrap(), first);
            }
        }
    }

    #[test]
    fn seeds_are_distinct_per_channel() {
        let a = channel_seed(7, 0, 1, 0);
        assert_ne!(a, channel_seed(7, 1, 0, 0));
        assert_ne!(a, channel_seed(8, 0, 1, 0));
        assert_ne!(a, channel_seed(7, 0, 1, 1));
    }

    #[test]
    fn reflectivity_table() {
        let r = Reflectivity::Table { samples: vec![(1e9, 1.0, 0.0), (3e9, 0.0, 1.0)] };
        assert_eq!(r.at(2e9), Complex64::new(0.5, 0.5));
        assert_eq!(r.at(5e9), Complex64::new(0.0, 1.0));
        assert!(Reflectivity::flat(0.0, 0.0).validate().is_err());
    }
}

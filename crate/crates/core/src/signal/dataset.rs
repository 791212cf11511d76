use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TimeTrace;
use crate::geometry::Point;
use crate::{Error, Result};

/// Rotating multistatic scan: every transmitter angle is paired with every
/// receiver offset, measured counter-clockwise from the transmitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGeometry {
    pub center: Point,
    pub tx_radius: f64,
    pub rx_radius: f64,
    pub tx_angles_deg: Vec<f64>,
    pub rx_offsets_deg: Vec<f64>,
}

impl Default for ScanGeometry {
    /// 24 transmitter stops 15° apart on a 130 mm ring, 19 receiver offsets
    /// from 45° to 315° on a 98 mm ring.
    fn default() -> Self {
        Self {
            center: Point::ORIGIN,
            tx_radius: 0.130,
            rx_radius: 0.098,
            tx_angles_deg: (0..24).map(|i| 15.0 * i as f64).collect(),
            rx_offsets_deg: (0..19).map(|i| 45.0 + 15.0 * i as f64).collect(),
        }
    }
}

/// A (transmitter stop, receiver offset) pair, both as indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChannelId {
    pub tx: usize,
    pub rx: usize,
}

impl ChannelId {
    pub const fn new(tx: usize, rx: usize) -> Self {
        Self { tx, rx }
    }
}

fn wrap_deg(a: f64) -> f64 {
    let w = a.rem_euclid(360.0);
    if (w - 360.0).abs() < 1e-9 {
        0.0
    } else {
        w
    }
}

impl ScanGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.tx_radius > 0.0) || !(self.rx_radius > 0.0) {
            return Err(Error::InvalidParameter("ring radii must be positive".into()));
        }
        if self.tx_angles_deg.is_empty() || self.rx_offsets_deg.is_empty() {
            return Err(Error::InvalidParameter("scan needs at least one transmitter and receiver".into()));
        }
        Ok(())
    }

    pub fn channel_count(&self) -> usize {
        self.tx_angles_deg.len() * self.rx_offsets_deg.len()
    }

    /// All channels, transmitter-major.
    pub fn channels(&self) -> Vec<ChannelId> {
        (0..self.tx_angles_deg.len())
            .flat_map(|tx| (0..self.rx_offsets_deg.len()).map(move |rx| ChannelId { tx, rx }))
            .collect()
    }

    /// Position of `id` in [`channels`](Self::channels).
    pub fn linear_index(&self, id: ChannelId) -> usize {
        id.tx * self.rx_offsets_deg.len() + id.rx
    }

    pub fn tx_position(&self, tx: usize) -> Point {
        Point::polar(self.center, self.tx_radius, self.tx_angles_deg[tx].to_radians())
    }

    /// Absolute receiver angle in degrees, in `[0, 360)`.
    pub fn rx_angle_deg(&self, id: ChannelId) -> f64 {
        wrap_deg(self.tx_angles_deg[id.tx] + self.rx_offsets_deg[id.rx])
    }

    pub fn rx_position(&self, id: ChannelId) -> Point {
        Point::polar(self.center, self.rx_radius, self.rx_angle_deg(id).to_radians())
    }

    /// Distinct receiver positions and, per channel in
    /// [`channels`](Self::channels) order, the index of its position.
    pub fn receiver_sites(&self) -> (Vec<Point>, Vec<usize>) {
        let mut angles: Vec<f64> = Vec::new();
        let mut site_of = Vec::with_capacity(self.channel_count());
        for id in self.channels() {
            let a = self.rx_angle_deg(id);
            let site = match angles.iter().position(|b| (a - b).abs() < 1e-9) {
                Some(s) => s,
                None => {
                    angles.push(a);
                    angles.len() - 1
                }
            };
            site_of.push(site);
        }
        let points = angles.iter().map(|a| Point::polar(self.center, self.rx_radius, a.to_radians())).collect();
        (points, site_of)
    }

    /// File name of a channel's trace: absolute angles rounded to degrees.
    pub fn trace_file_name(&self, id: ChannelId) -> String {
        let tx = wrap_deg(self.tx_angles_deg[id.tx]).round() as u32 % 360;
        let rx = self.rx_angle_deg(id).round() as u32 % 360;
        format!("tx{tx:03}_rx{rx:03}.csv")
    }
}

/// Common time axis of every trace in a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timebase {
    pub t0: f64,
    pub dt: f64,
    pub len: usize,
}

impl Timebase {
    pub fn new(t0: f64, dt: f64, len: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() || len < 2 || !t0.is_finite() {
            return Err(Error::InvalidParameter(format!("invalid timebase t0={t0} dt={dt} len={len}")));
        }
        Ok(Self { t0, dt, len })
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }
}

/// Traces of a multistatic scan on a shared timebase.
#[derive(Debug, Clone, PartialEq)]
pub struct MultistaticDataset {
    geometry: ScanGeometry,
    timebase: Timebase,
    traces: BTreeMap<ChannelId, Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    geometry: ScanGeometry,
    timebase: Timebase,
    traces: Vec<ManifestEntry>,
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    tx: usize,
    rx: usize,
    file: String,
}

impl MultistaticDataset {
    pub fn new(geometry: ScanGeometry, timebase: Timebase) -> Result<Self> {
        geometry.validate()?;
        Ok(Self { geometry, timebase, traces: BTreeMap::new() })
    }

    /// Dataset with a zero trace on every channel.
    pub fn zeros(geometry: ScanGeometry, timebase: Timebase) -> Result<Self> {
        let mut d = Self::new(geometry, timebase)?;
        for id in d.geometry.channels() {
            d.traces.insert(id, vec![0.0; timebase.len]);
        }
        Ok(d)
    }

    pub fn geometry(&self) -> &ScanGeometry {
        &self.geometry
    }

    pub fn timebase(&self) -> Timebase {
        self.timebase
    }

    pub fn insert(&mut self, id: ChannelId, samples: Vec<f64>) -> Result<()> {
        if id.tx >= self.geometry.tx_angles_deg.len() || id.rx >= self.geometry.rx_offsets_deg.len() {
            return Err(Error::InvalidParameter(format!("channel {id:?} is not part of the scan")));
        }
        if samples.len() != self.timebase.len {
            return Err(Error::TimebaseMismatch(format!(
                "trace {id:?} has {} samples, timebase has {}",
                samples.len(),
                self.timebase.len
            )));
        }
        self.traces.insert(id, samples);
        Ok(())
    }

    pub fn samples(&self, id: ChannelId) -> Option<&[f64]> {
        self.traces.get(&id).map(Vec::as_slice)
    }

    pub fn samples_mut(&mut self, id: ChannelId) -> Option<&mut Vec<f64>> {
        self.traces.get_mut(&id)
    }

    pub fn trace(&self, id: ChannelId) -> Option<TimeTrace> {
        self.traces.get(&id).map(|s| TimeTrace { t0: self.timebase.t0, dt: self.timebase.dt, samples: s.clone() })
    }

    pub fn iter(&self) -> impl Iterator<Item = (ChannelId, &[f64])> {
        self.traces.iter().map(|(id, s)| (*id, s.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn check_complete(&self) -> Result<()> {
        let expected = self.geometry.channel_count();
        let missing = self.geometry.channels().iter().filter(|id| !self.traces.contains_key(id)).count();
        if missing > 0 {
            return Err(Error::IncompleteDataset { missing, expected });
        }
        Ok(())
    }

    /// Samples of every channel in [`ScanGeometry::channels`] order.
    pub fn channel_samples(&self) -> Result<Vec<&[f64]>> {
        self.check_complete()?;
        Ok(self.geometry.channels().iter().map(|id| self.traces[id].as_slice()).collect())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.geometry != other.geometry || self.timebase != other.timebase {
            return Err(Error::TimebaseMismatch("datasets differ in geometry or timebase".into()));
        }
        Ok(())
    }

    /// Sample-wise `self + scale·other` over channels present in both.
    pub fn add_scaled(&self, other: &Self, scale: f64) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (id, samples) in out.traces.iter_mut() {
            if let Some(o) = other.traces.get(id) {
                for (a, b) in samples.iter_mut().zip(o) {
                    *a += scale * b;
                }
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for s in out.traces.values_mut() {
            s.iter_mut().for_each(|v| *v *= factor);
        }
        out
    }

    /// Subtracts from every trace the mean of the traces sharing its
    /// receiver offset. For a rotating scan those channels see the same
    /// rotationally symmetric background, which therefore cancels.
    pub fn remove_artifact(&self) -> Result<Self> {
        self.check_complete()?;
        let n_tx = self.geometry.tx_angles_deg.len();
        let len = self.timebase.len;
        let groups: Vec<Vec<(ChannelId, Vec<f64>)>> = (0..self.geometry.rx_offsets_deg.len())
            .into_par_iter()
            .map(|rx| {
                let mut mean = vec![0.0; len];
                for tx in 0..n_tx {
                    for (m, v) in mean.iter_mut().zip(&self.traces[&ChannelId { tx, rx }]) {
                        *m += v;
                    }
                }
                mean.iter_mut().for_each(|m| *m /= n_tx as f64);
                (0..n_tx)
                    .map(|tx| {
                        let id = ChannelId { tx, rx };
                        let out = self.traces[&id].iter().zip(&mean).map(|(v, m)| v - m).collect();
                        (id, out)
                    })
                    .collect()
            })
            .collect();
        Ok(Self { geometry: self.geometry.clone(), timebase: self.timebase, traces: groups.into_iter().flatten().collect() })
    }

    /// Writes `manifest.toml` and one `tx{DDD}_rx{DDD}.csv` per channel into
    /// `dir`, creating it if needed.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let mut entries = Vec::with_capacity(self.traces.len());
        let mut seen = std::collections::BTreeSet::new();
        for (id, samples) in &self.traces {
            let file = self.geometry.trace_file_name(*id);
            if !seen.insert(file.clone()) {
                return Err(Error::InvalidParameter(format!("two channels map to {file}; use whole-degree angles")));
            }
            let mut text = String::with_capacity(samples.len() * 32);
            text.push_str("t_s,value\n");
            for (i, v) in samples.iter().enumerate() {
                let _ = writeln!(text, "{},{}", self.timebase.time(i), v);
            }
            fs::write(dir.join(&file), text)?;
            entries.push(ManifestEntry { tx: id.tx, rx: id.rx, file });
        }
        let manifest = Manifest { geometry: self.geometry.clone(), timebase: self.timebase, traces: entries };
        fs::write(dir.join("manifest.toml"), toml::to_string(&manifest)?)?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest: Manifest = toml::from_str(&fs::read_to_string(dir.join("manifest.toml"))?)?;
        let tb = Timebase::new(manifest.timebase.t0, manifest.timebase.dt, manifest.timebase.len)?;
        let mut data = Self::new(manifest.geometry, tb)?;
        for entry in manifest.traces {
            let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(dir.join(&entry.file))?;
            let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
            if header != ["t_s", "value"] {
                return Err(Error::Parse(format!("{}: expected header t_s,value", entry.file)));
            }
            let mut samples = Vec::with_capacity(tb.len);
            for (i, rec) in rdr.deserialize().enumerate() {
                let (t, v): (f64, f64) = rec?;
                if (t - tb.time(i)).abs() > 1e-6 * tb.dt {
                    return Err(Error::TimebaseMismatch(format!("{}: sample {i} at t = {t} s", entry.file)));
                }
                samples.push(v);
            }
            data.insert(ChannelId { tx: entry.tx, rx: entry.rx }, samples)?;
        }
        Ok(data)
    }
}

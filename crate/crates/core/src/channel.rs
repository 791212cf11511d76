//! Complex transfer functions between antennas and interior points.
//!
//! Time dependence is `e^{+jωt}`, so a wave that travels a distance `d`
//! through a medium with wavenumber `k̃ = k − jκ` picks up `e^{−jk̃d}`: a phase
//! lag and an `e^{−κd}` amplitude decay. The compensator applied by the
//! imaging code is the exact algebraic inverse of the forward channel, which
//! includes the matching `e^{+κd}` growth.
//!
//! All paths through the boundary that reach a point contribute to the
//! one-way transfer. With several paths the transfer is their sum and the
//! compensator becomes `1 / H_eff`.

use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{angle_between, Point};
use crate::raypath::{CylinderScene, PathSolver, RayPath};
use crate::{Error, Result};

/// How amplitude falls off with path length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spreading {
    /// No geometric decay.
    None,
    /// Divide by the path length.
    #[default]
    Spherical,
    /// Divide by the square root of the path length.
    Cylindrical,
}

impl Spreading {
    pub fn divisor(self, length: f64) -> f64 {
        match self {
            Spreading::None => 1.0,
            Spreading::Spherical => length,
            Spreading::Cylindrical => length.sqrt(),
        }
    }
}

/// Which paths the compensator inverts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultipathMode {
    /// Single-path compensation along the least-time crossing everywhere.
    Eq2Only,
    /// Invert the sum over every stationary path.
    #[default]
    Heff,
}

/// Physics switches shared by the forward model and the compensator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelOptions {
    pub spreading: Spreading,
    /// Multiply by the perpendicular-polarisation Fresnel transmission
    /// coefficient at each boundary crossing.
    pub fresnel: bool,
}

/// Direction of travel along a leg, which matters for Fresnel coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leg {
    /// Antenna to interior point.
    Transmit,
    /// Interior point to antenna.
    Receive,
}

/// A premeasured antenna characteristic at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaSample {
    pub frequency: f64,
    /// Signed shift of the phase centre along boresight from the mount, m.
    pub phase_center_offset: f64,
    /// Phase added between the phase centre and the port, rad.
    pub port_phase: f64,
}

/// Power gain sampled over (angle off boresight, frequency), interpolated
/// bilinearly and clamped at the table edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainTable {
    angles: Vec<f64>,
    frequencies: Vec<f64>,
    // row-major by frequency
    gains: Vec<f64>,
}

fn bracket(axis: &[f64], x: f64) -> (usize, usize, f64) {
    if axis.len() == 1 || x <= axis[0] {
        return (0, 0, 0.0);
    }
    if x >= axis[axis.len() - 1] {
        let last = axis.len() - 1;
        return (last, last, 0.0);
    }
    let hi = axis.partition_point(|&a| a <= x);
    let lo = hi - 1;
    (lo, hi, (x - axis[lo]) / (axis[hi] - axis[lo]))
}

impl GainTable {
    /// `gains[i * angles.len() + j]` is the gain at `frequencies[i]`,
    /// `angles[j]` (radians off boresight).
    pub fn new(angles: Vec<f64>, frequencies: Vec<f64>, gains: Vec<f64>) -> Result<Self> {
        let increasing = |v: &[f64]| !v.is_empty() && v.windows(2).all(|w| w[1] > w[0]);
        if !increasing(&angles) || !increasing(&frequencies) {
            return Err(Error::InvalidParameter("gain table axes must be nonempty and strictly increasing".into()));
        }
        if gains.len() != angles.len() * frequencies.len() {
            return Err(Error::InvalidParameter(format!(
                "gain table has {} values for a {}x{} grid",
                gains.len(),
                frequencies.len(),
                angles.len()
            )));
        }
        if let Some(g) = gains.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            return Err(Error::InvalidParameter(format!("gain must be positive, got {g}")));
        }
        Ok(Self { angles, frequencies, gains })
    }

    /// Reads rows of `angle_deg,frequency_hz,gain` covering a full grid.
    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        if header != ["angle_deg", "frequency_hz", "gain"] {
            return Err(Error::Parse(format!("expected header angle_deg,frequency_hz,gain, got {}", header.join(","))));
        }
        let mut rows = Vec::new();
        for rec in rdr.deserialize() {
            let (angle, frequency, gain): (f64, f64, f64) = rec?;
            rows.push((angle.to_radians(), frequency, gain));
        }
        let mut angles: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let mut frequencies: Vec<f64> = rows.iter().map(|r| r.1).collect();
        angles.sort_by(f64::total_cmp);
        angles.dedup();
        frequencies.sort_by(f64::total_cmp);
        frequencies.dedup();
        let mut gains = vec![f64::NAN; angles.len() * frequencies.len()];
        for (a, f, g) in rows {
            let i = frequencies.partition_point(|&x| x < f);
            let j = angles.partition_point(|&x| x < a);
            gains[i * angles.len() + j] = g;
        }
        if gains.iter().any(|g| g.is_nan()) {
            return Err(Error::Parse("gain table does not cover a full angle x frequency grid".into()));
        }
        Self::new(angles, frequencies, gains)
    }

    pub fn gain(&self, angle: f64, frequency: f64) -> f64 {
        let (a0, a1, ta) = bracket(&self.angles, angle.abs());
        let (f0, f1, tf) = bracket(&self.frequencies, frequency);
        let at = |i: usize, j: usize| self.gains[i * self.angles.len() + j];
        let lo = at(f0, a0) * (1.0 - ta) + at(f0, a1) * ta;
        let hi = at(f1, a0) * (1.0 - ta) + at(f1, a1) * ta;
        lo * (1.0 - tf) + hi * tf
    }
}

/// Frequency-dependent antenna characteristics. The default is an isotropic
/// antenna whose phase centre sits on its mount point.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AntennaModel {
    samples: Vec<AntennaSample>,
    gain: Option<GainTable>,
}

impl AntennaModel {
    pub fn isotropic() -> Self {
        Self::default()
    }

    pub fn new(mut samples: Vec<AntennaSample>, gain: Option<GainTable>) -> Result<Self> {
        samples.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
        if samples.windows(2).any(|w| w[0].frequency == w[1].frequency) {
            return Err(Error::InvalidParameter("duplicate frequency in antenna table".into()));
        }
        if let Some(s) = samples
            .iter()
            .find(|s| !(s.frequency.is_finite() && s.phase_center_offset.is_finite() && s.port_phase.is_finite()))
        {
            return Err(Error::InvalidParameter(format!("non-finite antenna sample at {} Hz", s.frequency)));
        }
        Ok(Self { samples, gain })
    }

    /// Reads rows of `frequency_hz,phase_center_offset_m,port_phase_rad`.
    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        if header != ["frequency_hz", "phase_center_offset_m", "port_phase_rad"] {
            return Err(Error::Parse(format!(
                "expected header frequency_hz,phase_center_offset_m,port_phase_rad, got {}",
                header.join(",")
            )));
        }
        let mut samples = Vec::new();
        for rec in rdr.deserialize() {
            let (frequency, phase_center_offset, port_phase): (f64, f64, f64) = rec?;
            samples.push(AntennaSample { frequency, phase_center_offset, port_phase });
        }
        Self::new(samples, None)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn with_gain(self, gain: GainTable) -> Self {
        Self { gain: Some(gain), ..self }
    }

    fn interpolate(&self, frequency: f64, field: impl Fn(&AntennaSample) -> f64) -> f64 {
        let s = &self.samples;
        match s.len() {
            0 => return 0.0,
            1 => return field(&s[0]),
            _ => {}
        }
        if frequency <= s[0].frequency {
            return field(&s[0]);
        }
        if frequency >= s[s.len() - 1].frequency {
            return field(&s[s.len() - 1]);
        }
        let hi = s.partition_point(|x| x.frequency <= frequency);
        let (a, b) = (&s[hi - 1], &s[hi]);
        let t = (frequency - a.frequency) / (b.frequency - a.frequency);
        field(a) * (1.0 - t) + field(b) * t
    }

    /// Phase-centre offset along boresight, linearly interpolated and held
    /// constant beyond the table.
    pub fn phase_center_offset(&self, frequency: f64) -> f64 {
        self.interpolate(frequency, |s| s.phase_center_offset)
    }

    pub fn port_phase(&self, frequency: f64) -> f64 {
        self.interpolate(frequency, |s| s.port_phase)
    }

    /// Power gain at `angle` radians off boresight.
    pub fn gain(&self, angle: f64, frequency: f64) -> f64 {
        self.gain.as_ref().map_or(1.0, |g| g.gain(angle, frequency))
    }

    pub fn has_fixed_phase_center(&self) -> bool {
        self.samples.iter().all(|s| s.phase_center_offset == 0.0)
    }
}

/// A mounted antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct Antenna {
    pub position: Point,
    /// Unit vector the antenna points along.
    pub boresight: Point,
    pub model: Arc<AntennaModel>,
}

impl Antenna {
    /// Antenna at `position` pointing at `target`.
    pub fn facing(position: Point, target: Point, model: Arc<AntennaModel>) -> Self {
        Self { position, boresight: (target - position).unit(), model }
    }

    pub fn phase_center(&self, frequency: f64) -> Point {
        self.position + self.boresight * self.model.phase_center_offset(frequency)
    }

    /// Power gain towards `pixel`.
    pub fn gain_toward(&self, pixel: Point, frequency: f64) -> f64 {
        let angle = angle_between(self.boresight, pixel - self.position);
        self.model.gain(angle, frequency)
    }

    /// Stationary paths between the antenna's phase centre and `pixel`.
    pub fn paths(&self, scene: &CylinderScene, pixel: Point, frequency: f64) -> Result<Vec<RayPath>> {
        scene.solve_refraction_points(self.phase_center(frequency), pixel, frequency)
    }

    /// Least-time crossing between the antenna's phase centre and `pixel`.
    pub fn least_time_path(&self, scene: &CylinderScene, pixel: Point, frequency: f64) -> Result<RayPath> {
        scene.least_time_path(self.phase_center(frequency), pixel, frequency)
    }
}

/// Complex wavenumbers and real indices of both media at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Media {
    pub frequency: f64,
    /// `k̃ = k − jκ` outside the cylinder.
    pub k_out: Complex64,
    /// `k̃ = k − jκ` inside the cylinder.
    pub k_in: Complex64,
    pub n_out: f64,
    pub n_in: f64,
}

impl Media {
    pub fn at(scene: &CylinderScene, frequency: f64) -> Result<Self> {
        let k_out = scene.exterior.wavenumber(frequency)?;
        let k_in = scene.interior.wavenumber(frequency)?;
        let k0 = std::f64::consts::TAU * frequency / crate::dielectric::SPEED_OF_LIGHT;
        Ok(Self {
            frequency,
            k_out: k_out.complex(),
            k_in: k_in.complex(),
            n_out: k_out.k / k0,
            n_in: k_in.k / k0,
        })
    }

    /// `e^{−j(k̃_out·d_out + k̃_in·d_in)}`.
    pub fn propagator(&self, d_out: f64, d_in: f64) -> Complex64 {
        (-Complex64::i() * (self.k_out * d_out + self.k_in * d_in)).exp()
    }
}

/// Perpendicular-polarisation transmission coefficient for one crossing.
pub fn fresnel_transmission(path: &RayPath, media: &Media, leg: Leg) -> f64 {
    let (ci, ct) = (path.incidence_angle.cos(), path.refraction_angle.cos());
    let (n1, n2) = (media.n_out, media.n_in);
    match leg {
        Leg::Transmit => 2.0 * n1 * ci / (n1 * ci + n2 * ct),
        Leg::Receive => 2.0 * n2 * ct / (n2 * ct + n1 * ci),
    }
}

/// Transfer function of one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathTransfer {
    pub h: Complex64,
    pub path: RayPath,
    pub frequency: f64,
}

/// Real amplitude factors of one path: `sqrt(G)·t / R_spread`.
fn path_amplitude(path: &RayPath, antenna: &Antenna, pixel: Point, media: &Media, opts: ChannelOptions, leg: Leg) -> f64 {
    let mut amp = antenna.gain_toward(pixel, media.frequency).sqrt() / opts.spreading.divisor(path.length());
    if opts.fresnel {
        amp *= fresnel_transmission(path, media, leg);
    }
    amp
}

/// `sqrt(G)·e^{−jk̃₁d_out}·e^{−jk̃₂d_in}·e^{−jφ_port} / R_spread`, times the
/// Fresnel coefficient when enabled. `path` must start at the antenna's phase
/// centre for `media.frequency`.
pub fn path_transfer(path: &RayPath, antenna: &Antenna, pixel: Point, media: &Media, opts: ChannelOptions, leg: Leg) -> PathTransfer {
    let amp = path_amplitude(path, antenna, pixel, media, opts, leg);
    let port = Complex64::from_polar(1.0, -antenna.model.port_phase(media.frequency));
    PathTransfer { h: media.propagator(path.d_out, path.d_in) * port * amp, path: *path, frequency: media.frequency }
}

/// Sum of the transfers of every path on one leg.
pub fn one_way_transfer(paths: &[RayPath], antenna: &Antenna, pixel: Point, media: &Media, opts: ChannelOptions, leg: Leg) -> Result<Complex64> {
    if paths.is_empty() {
        return Err(Error::NoPath);
    }
    Ok(paths.iter().map(|p| path_transfer(p, antenna, pixel, media, opts, leg).h).sum())
}

/// Inverse of the one-way transfer. A single path is inverted in closed
/// form, `R·e^{+jk̃₁d_out}·e^{+jk̃₂d_in}·e^{+jφ_port} / sqrt(G)`.
pub fn one_way_inverse(paths: &[RayPath], antenna: &Antenna, pixel: Point, media: &Media, opts: ChannelOptions, leg: Leg) -> Result<Complex64> {
    match paths {
        [] => Err(Error::NoPath),
        [path] => {
            let amp = path_amplitude(path, antenna, pixel, media, opts, leg);
            let phase = Complex64::i() * (media.k_out * path.d_out + media.k_in * path.d_in)
                + Complex64::i() * antenna.model.port_phase(media.frequency);
            Ok(phase.exp() / amp)
        }
        _ => Ok(one_way_transfer(paths, antenna, pixel, media, opts, leg)?.inv()),
    }
}

/// `2π(d_1T/λ₁ + d_2T/λ₂ + d_3R/λ₂ + d_4R/λ₁)` with real wavelengths.
pub fn phase_shift(path_tx: &RayPath, path_rx: &RayPath, media: &Media) -> f64 {
    media.k_out.re * (path_tx.d_out + path_rx.d_out) + media.k_in.re * (path_tx.d_in + path_rx.d_in)
}

/// `H_eff`: the sum over every (TX path, RX path) combination of the product
/// of the two one-way transfers.
#[allow(clippy::too_many_arguments)]
pub fn combined_transfer(
    paths_tx: &[RayPath],
    paths_rx: &[RayPath],
    tx: &Antenna,
    rx: &Antenna,
    pixel: Point,
    media: &Media,
    opts: ChannelOptions,
) -> Result<Complex64> {
    if paths_tx.is_empty() || paths_rx.is_empty() {
        return Err(Error::NoPath);
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for pt in paths_tx {
        let ht = path_transfer(pt, tx, pixel, media, opts, Leg::Transmit).h;
        for pr in paths_rx {
            sum += ht * path_transfer(pr, rx, pixel, media, opts, Leg::Receive).h;
        }
    }
    Ok(sum)
}

/// Paths used on one leg under `mode`.
pub fn leg_paths(scene: &CylinderScene, antenna: &Antenna, pixel: Point, frequency: f64, mode: MultipathMode) -> Result<Vec<RayPath>> {
    match mode {
        MultipathMode::Heff => antenna.paths(scene, pixel, frequency),
        MultipathMode::Eq2Only => Ok(vec![antenna.least_time_path(scene, pixel, frequency)?]),
    }
}

/// Factor that undoes the TX→pixel→RX channel at `frequency`.
pub fn compensator(
    pixel: Point,
    tx: &Antenna,
    rx: &Antenna,
    frequency: f64,
    scene: &CylinderScene,
    opts: ChannelOptions,
    mode: MultipathMode,
) -> Result<Complex64> {
    let media = Media::at(scene, frequency)?;
    let paths_tx = leg_paths(scene, tx, pixel, frequency, mode)?;
    let paths_rx = leg_paths(scene, rx, pixel, frequency, mode)?;
    if paths_tx.len() == 1 && paths_rx.len() == 1 {
        let a = one_way_inverse(&paths_tx, tx, pixel, &media, opts, Leg::Transmit)?;
        let b = one_way_inverse(&paths_rx, rx, pixel, &media, opts, Leg::Receive)?;
        return Ok(a * b);
    }
    Ok(combined_transfer(&paths_tx, &paths_rx, tx, rx, pixel, &media, opts)?.inv())
}

/// Media of `scene` at each frequency.
pub fn media_table(scene: &CylinderScene, frequencies: &[f64]) -> Result<Vec<Media>> {
    frequencies.iter().map(|&f| Media::at(scene, f)).collect()
}

/// One-way transfers (or their inverses) from `antenna` to `pixel` at every
/// entry of `media`, reusing the geometric part of the path search while
/// the phase centre stays put. `None` where no path exists.
#[allow(clippy::too_many_arguments)]
pub fn one_way_sweep(
    scene: &CylinderScene,
    antenna: &Antenna,
    pixel: Point,
    media: &[Media],
    opts: ChannelOptions,
    leg: Leg,
    mode: MultipathMode,
    inverse: bool,
) -> Result<Vec<Option<Complex64>>> {
    let mut solver: Option<(Point, PathSolver)> = None;
    let mut out = Vec::with_capacity(media.len());
    for m in media {
        let center = antenna.phase_center(m.frequency);
        let paths = match mode {
            MultipathMode::Heff => {
                if !solver.as_ref().is_some_and(|(c, _)| *c == center) {
                    solver = Some((center, scene.path_solver(center, pixel)?));
                }
                let (_, s) = solver.as_ref().expect("solver built above");
                s.solve(m.n_out, m.n_in)
            }
            MultipathMode::Eq2Only => vec![scene.least_time_path(center, pixel, m.frequency)?],
        };
        let value = if inverse {
            one_way_inverse(&paths, antenna, pixel, m, opts, leg)
        } else {
            one_way_transfer(&paths, antenna, pixel, m, opts, leg)
        };
        out.push(match value {
            Ok(v) => Some(v),
            Err(Error::NoPath) => None,
            Err(e) => return Err(e),
        });
    }
    Ok(out)
}

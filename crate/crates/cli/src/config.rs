//! The run configuration file and its translation into library types.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use psas::channel::{AntennaModel, ChannelOptions, MultipathMode};
use psas::dielectric::{DielectricSpectrum, PerturbSign};
use psas::forward::{extended_object, ArtifactModel, Reflectivity, Scatterer, Scene};
use psas::raypath::CylinderScene;
use psas::reconstruct::{Algorithm, Interpolation, ReconstructionConfig};
use psas::signal::{frequency_grid, synthesize_pulse, ScanGeometry, TimeTrace, Timebase};
use psas::{Footprint, GridSpec, Point};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for noise, jitter and dielectric perturbations.
    pub seed: u64,
    pub cylinder: CylinderConfig,
    pub geometry: ScanGeometry,
    pub pulse: PulseConfig,
    pub simulation: SimulationConfig,
    pub objects: Vec<ObjectConfig>,
    pub reconstruction: ReconstructionSection,
    pub pathmap: PathmapConfig,
    pub compare: CompareConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            cylinder: CylinderConfig::default(),
            geometry: ScanGeometry::default(),
            pulse: PulseConfig::default(),
            simulation: SimulationConfig::default(),
            objects: vec![
                ObjectConfig {
                    name: "metal".into(),
                    material: Material::Named("metal".into()),
                    shape: Shape::Disk { center: Point::new(0.0, 0.035), radius: 0.0095 },
                },
                ObjectConfig {
                    name: "plasticine".into(),
                    material: Material::Named("plasticine".into()),
                    shape: Shape::Rect { center: Point::new(-0.015, -0.01), width: 0.017, height: 0.010 },
                },
            ],
            reconstruction: ReconstructionSection::default(),
            pathmap: PathmapConfig::default(),
            compare: CompareConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CylinderConfig {
    pub center: Point,
    /// m
    pub radius: f64,
    /// Built-in medium name or a path to a `frequency_hz,eps_r,sigma_s_per_m` CSV.
    pub exterior: String,
    pub interior: String,
}

impl Default for CylinderConfig {
    fn default() -> Self {
        Self { center: Point::ORIGIN, radius: 0.05, exterior: "vacuum".into(), interior: "glycerin-like".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseConfig {
    /// Hz
    pub center_frequency: f64,
    /// Envelope FWHM, s.
    pub fwhm: f64,
    /// s
    pub duration: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self { center_frequency: 4.5e9, fwhm: 0.146e-9, duration: 1e-9 }
    }
}

/// `start:step:stop` in Hz, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreqRange {
    pub start: f64,
    pub step: f64,
    pub stop: f64,
}

impl FreqRange {
    pub fn values(&self) -> psas::Result<Vec<f64>> {
        frequency_grid(self.start, self.step, self.stop)
    }
}

impl FromStr for FreqRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(format!("expected start:step:stop, got '{s}'"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
        Ok(Self { start: num(a)?, step: num(b)?, stop: num(c)? })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub frequencies: FreqRange,
    /// s
    pub dt: f64,
    pub samples: usize,
    pub noise_rms: f64,
    pub amplitude_jitter: f64,
    pub artifact: ArtifactModel,
    /// Lattice spacing used to fill extended objects with point scatterers, m.
    pub cloud_spacing: f64,
    pub channel: ChannelOptions,
    /// Optional antenna characteristic CSV; isotropic when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub antenna: Option<PathBuf>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            frequencies: FreqRange { start: 1e9, step: 1e7, stop: 10e9 },
            dt: 1e-11,
            samples: 1000,
            noise_rms: 0.0,
            amplitude_jitter: 0.0,
            artifact: ArtifactModel { direct_gain: 0.05, echo_gain: 0.3 },
            cloud_spacing: 1e-3,
            channel: ChannelOptions::default(),
            antenna: None,
        }
    }
}

/// `metal`, `plasticine`, or an explicit flat reflection coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Material {
    Named(String),
    Flat { magnitude: f64, phase_deg: f64 },
}

impl Material {
    pub fn reflectivity(&self) -> Result<Reflectivity, CliError> {
        match self {
            Material::Named(n) if n == "metal" => Ok(Reflectivity::metal()),
            Material::Named(n) if n == "plasticine" => Ok(Reflectivity::plasticine()),
            Material::Named(n) => Err(CliError::usage(format!("unknown material '{n}' (expected metal, plasticine or {{magnitude, phase_deg}})"))),
            Material::Flat { magnitude, phase_deg } => Ok(Reflectivity::flat(*magnitude, phase_deg.to_radians())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum Shape {
    Point { center: Point },
    Disk { center: Point, radius: f64 },
    Rect { center: Point, width: f64, height: f64 },
}

impl Shape {
    pub fn footprint(&self) -> Option<Footprint> {
        match *self {
            Shape::Point { .. } => None,
            Shape::Disk { center, radius } => Some(Footprint::Disk { center, radius }),
            Shape::Rect { center, width, height } => Some(Footprint::Rect { center, width, height }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectConfig {
    pub name: String,
    pub material: Material,
    #[serde(flatten)]
    pub shape: Shape,
}

impl ObjectConfig {
    pub fn scatterers(&self, cloud_spacing: f64) -> Result<Vec<Scatterer>, CliError> {
        let reflectivity = self.material.reflectivity()?;
        Ok(match (self.shape, self.shape.footprint()) {
            (Shape::Point { center }, _) => vec![Scatterer { position: center, reflectivity }],
            (_, Some(f)) => extended_object(&f, cloud_spacing, &reflectivity),
            (_, None) => unreachable!("only points lack a footprint"),
        })
    }
}

/// Which dielectric the reconstruction assumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// The medium the data was simulated with.
    Matched,
    /// Every sample raised by a random 8–12 %.
    Higher,
    Lower,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Matched, Variant::Higher, Variant::Lower];

    pub fn label(self) -> &'static str {
        match self {
            Variant::Matched => "matched",
            Variant::Higher => "higher",
            Variant::Lower => "lower",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Perturbation {
    pub lo: f64,
    pub hi: f64,
    /// Seed offsets added to the run seed for the two signs.
    pub higher_seed: u64,
    pub lower_seed: u64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self { lo: 0.08, hi: 0.12, higher_seed: 0, lower_seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructionSection {
    pub algorithm: Algorithm,
    pub frequencies: FreqRange,
    /// Hz; sets the time-shift delays.
    pub center_frequency: f64,
    /// m
    pub grid_spacing: f64,
    pub multipath_mode: MultipathMode,
    pub interpolation: Interpolation,
    pub channel: ChannelOptions,
    /// Subtract the per-offset mean trace before imaging.
    pub remove_artifact: bool,
    pub reference: Variant,
    pub perturbation: Perturbation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub antenna: Option<PathBuf>,
}

impl Default for ReconstructionSection {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Psas,
            frequencies: FreqRange { start: 2e9, step: 0.5e9, stop: 7e9 },
            center_frequency: 4.5e9,
            grid_spacing: 1e-3,
            multipath_mode: MultipathMode::Heff,
            interpolation: Interpolation::Linear,
            channel: ChannelOptions::default(),
            remove_artifact: true,
            reference: Variant::Matched,
            perturbation: Perturbation::default(),
            antenna: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathmapConfig {
    /// Source angle about the cylinder centre, degrees.
    pub source_angle_deg: f64,
    /// m; the transmitter ring radius when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_radius: Option<f64>,
    /// Hz
    pub frequency: f64,
    /// m
    pub grid_spacing: f64,
}

impl Default for PathmapConfig {
    fn default() -> Self {
        Self { source_angle_deg: 0.0, source_radius: None, frequency: 4.5e9, grid_spacing: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub algorithms: Vec<Algorithm>,
    pub variants: Vec<Variant>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self { algorithms: vec![Algorithm::Psas, Algorithm::Rar, Algorithm::Dmas], variants: Variant::ALL.to_vec() }
    }
}

fn medium(spec: &str, base: &Path) -> Result<DielectricSpectrum, CliError> {
    if let Some(m) = DielectricSpectrum::builtin(spec) {
        return Ok(m);
    }
    let path = base.join(spec);
    if !path.is_file() {
        return Err(CliError::usage(format!("'{spec}' is neither a built-in medium nor a readable file")));
    }
    DielectricSpectrum::load_csv(&path).map_err(CliError::usage)
}

fn antenna(path: Option<&PathBuf>, base: &Path) -> Result<Arc<AntennaModel>, CliError> {
    match path {
        None => Ok(Arc::new(AntennaModel::isotropic())),
        Some(p) => Ok(Arc::new(AntennaModel::load_csv(base.join(p)).map_err(CliError::usage)?)),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::usage(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Reads `path`; relative medium and antenna paths resolve against its
    /// directory.
    pub fn load(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::from_toml(&text)?, base))
    }

    pub fn cylinder(&self, base: &Path) -> Result<CylinderScene, CliError> {
        let c = &self.cylinder;
        CylinderScene::new(c.center, c.radius, medium(&c.exterior, base)?, medium(&c.interior, base)?).map_err(CliError::usage)
    }

    pub fn pulse(&self) -> Result<TimeTrace, CliError> {
        let p = &self.pulse;
        synthesize_pulse(p.center_frequency, p.fwhm, self.simulation.dt, p.duration).map_err(CliError::usage)
    }

    pub fn timebase(&self) -> Result<Timebase, CliError> {
        Timebase::new(0.0, self.simulation.dt, self.simulation.samples).map_err(CliError::usage)
    }

    /// Forward scene holding `objects`.
    pub fn scene(&self, base: &Path, objects: &[ObjectConfig]) -> Result<Scene, CliError> {
        let s = &self.simulation;
        let mut scatterers = Vec::new();
        for o in objects {
            scatterers.extend(o.scatterers(s.cloud_spacing)?);
        }
        let mut scene = Scene::new(self.cylinder(base)?, scatterers);
        scene.artifact = s.artifact;
        scene.noise_rms = s.noise_rms;
        scene.amplitude_jitter = s.amplitude_jitter;
        scene.seed = self.seed;
        scene.channel = s.channel;
        scene.antenna = antenna(s.antenna.as_ref(), base)?;
        Ok(scene)
    }

    /// Interior medium the reconstruction assumes under `variant`.
    pub fn reference(&self, base: &Path, variant: Variant) -> Result<CylinderScene, CliError> {
        let cyl = self.cylinder(base)?;
        let p = &self.reconstruction.perturbation;
        let (sign, offset) = match variant {
            Variant::Matched => return Ok(cyl),
            Variant::Higher => (PerturbSign::Higher, p.higher_seed),
            Variant::Lower => (PerturbSign::Lower, p.lower_seed),
        };
        let interior = cyl.interior.perturb(p.lo, p.hi, sign, self.seed.wrapping_add(offset)).map_err(CliError::usage)?;
        Ok(cyl.with_interior(interior))
    }

    pub fn reconstruction_config(&self, base: &Path, variant: Variant) -> Result<ReconstructionConfig, CliError> {
        let r = &self.reconstruction;
        let scene = self.reference(base, variant)?;
        let n = (2.0 * scene.radius / r.grid_spacing).round() as usize + 1;
        let grid = GridSpec::centered(scene.center, r.grid_spacing, n).map_err(CliError::usage)?;
        let mut cfg = ReconstructionConfig::new(scene, grid);
        cfg.frequencies = r.frequencies.values().map_err(CliError::usage)?;
        cfg.center_frequency = r.center_frequency;
        cfg.antenna = antenna(r.antenna.as_ref(), base)?;
        cfg.channel = r.channel;
        cfg.multipath_mode = r.multipath_mode;
        cfg.interpolation = r.interpolation;
        cfg.validate().map_err(CliError::usage)?;
        Ok(cfg)
    }

    pub fn pathmap_grid(&self) -> Result<GridSpec, CliError> {
        let c = &self.cylinder;
        let n = (2.0 * c.radius / self.pathmap.grid_spacing).round() as usize + 1;
        GridSpec::centered(c.center, self.pathmap.grid_spacing, n).map_err(CliError::usage)
    }

    pub fn pathmap_source(&self) -> Point {
        let r = self.pathmap.source_radius.unwrap_or(self.geometry.tx_radius);
        Point::polar(self.cylinder.center, r, self.pathmap.source_angle_deg.to_radians())
    }
}

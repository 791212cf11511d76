//! Scenes and datasets shared by several criteria. Each is built once.

use std::sync::OnceLock;

use psas::dielectric::{DielectricSpectrum, PerturbSign};
use psas::forward::{default_frequency_grid, default_timebase, extended_object, simulate, Reflectivity, Scatterer, Scene};
use psas::raypath::CylinderScene;
use psas::reconstruct::ReconstructionConfig;
use psas::signal::{synthesize_pulse, MultistaticDataset, ScanGeometry, TimeTrace};
use psas::{Footprint, Point};

/// Single point scatterer used for localization and the waveform check.
pub const POINT: Point = Point::new(0.02, 0.01);
/// Coin-stack stand-in, placed close to the container wall.
pub const METAL: Footprint = Footprint::Disk { center: Point::new(0.0, 0.035), radius: 0.0095 };
/// 17 mm × 10 mm block.
pub const PLASTICINE: Footprint = Footprint::Rect { center: Point::new(-0.015, -0.01), width: 0.017, height: 0.010 };
/// One scatterer per mm².
pub const CLOUD_SPACING: f64 = 1e-3;

pub const PLUS_SEED: u64 = 1;
pub const MINUS_SEED: u64 = 2;

pub fn cylinder() -> &'static CylinderScene {
    static S: OnceLock<CylinderScene> = OnceLock::new();
    S.get_or_init(|| CylinderScene::new(Point::ORIGIN, 0.05, DielectricSpectrum::vacuum(), DielectricSpectrum::glycerin_like()).unwrap())
}

pub fn geometry() -> &'static ScanGeometry {
    static G: OnceLock<ScanGeometry> = OnceLock::new();
    G.get_or_init(ScanGeometry::default)
}

pub fn pulse() -> &'static TimeTrace {
    static P: OnceLock<TimeTrace> = OnceLock::new();
    P.get_or_init(|| synthesize_pulse(4.5e9, 0.146e-9, 1e-11, 1e-9).unwrap())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Matched,
    Plus,
    Minus,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Matched, Variant::Plus, Variant::Minus];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Matched => "matched",
            Variant::Plus => "+8-12%",
            Variant::Minus => "-8-12%",
        }
    }

    /// Reconstruction settings on the 1 mm grid with this reference dielectric.
    pub fn config(self) -> ReconstructionConfig {
        let cyl = cylinder();
        let interior = match self {
            Variant::Matched => cyl.interior.clone(),
            Variant::Plus => cyl.interior.perturb(0.08, 0.12, PerturbSign::Higher, PLUS_SEED).unwrap(),
            Variant::Minus => cyl.interior.perturb(0.08, 0.12, PerturbSign::Lower, MINUS_SEED).unwrap(),
        };
        ReconstructionConfig::with_default_grid(cyl.with_interior(interior))
    }
}

fn run(scatterers: Vec<Scatterer>) -> MultistaticDataset {
    let scene = Scene::new(cylinder().clone(), scatterers);
    simulate(&scene, geometry(), pulse(), &default_frequency_grid(), default_timebase()).unwrap()
}

/// Raw (artifact-free, noise-free) response of the single point.
pub fn point_raw() -> &'static MultistaticDataset {
    static D: OnceLock<MultistaticDataset> = OnceLock::new();
    D.get_or_init(|| run(vec![Scatterer { position: POINT, reflectivity: Reflectivity::metal() }]))
}

pub fn point_data() -> &'static MultistaticDataset {
    static D: OnceLock<MultistaticDataset> = OnceLock::new();
    D.get_or_init(|| point_raw().remove_artifact().unwrap())
}

pub fn metal_data() -> &'static MultistaticDataset {
    static D: OnceLock<MultistaticDataset> = OnceLock::new();
    D.get_or_init(|| run(extended_object(&METAL, CLOUD_SPACING, &Reflectivity::metal())).remove_artifact().unwrap())
}

pub fn plasticine_data() -> &'static MultistaticDataset {
    static D: OnceLock<MultistaticDataset> = OnceLock::new();
    D.get_or_init(|| run(extended_object(&PLASTICINE, CLOUD_SPACING, &Reflectivity::plasticine())).remove_artifact().unwrap())
}

/// Both objects at once. The model is single-scattering and artifact
/// removal is linear, so this is the sum of the two single-object sets.
pub fn two_object_data() -> &'static MultistaticDataset {
    static D: OnceLock<MultistaticDataset> = OnceLock::new();
    D.get_or_init(|| metal_data().add_scaled(plasticine_data(), 1.0).unwrap())
}

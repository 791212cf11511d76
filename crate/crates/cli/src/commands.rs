//! One function per subcommand. Each writes its outputs, a copy of the
//! resolved config and a `run.toml` manifest into an output directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use psas::forward::{simulate, simulate_background_only};
use psas::metrics::{write_metric_csv, IdealProfile, MetricRow};
use psas::reconstruct::{reconstruct, Algorithm, PsasOperator, Reconstruction, TimeShiftOperator};
use psas::signal::MultistaticDataset;

use crate::config::{RunConfig, Variant};
use crate::CliError;

pub const CONFIG_FILE: &str = "config.toml";
pub const RUN_MANIFEST: &str = "run.toml";

#[derive(Debug, Serialize)]
struct RunManifest {
    command: &'static str,
    version: &'static str,
    /// sha256 of the resolved config file written next to this manifest.
    config_hash: String,
    /// sha256 over the dataset files read, when the command reads one.
    #[serde(skip_serializing_if = "Option::is_none")]
    input_hash: Option<String>,
    seed: u64,
    config: &'static str,
    outputs: Vec<String>,
    stats: toml::Table,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn config_hash(cfg: &RunConfig) -> String {
    hex(&Sha256::digest(cfg.to_toml().as_bytes()))
}

/// Hash of a dataset directory: its manifest and trace files in name order.
fn dataset_hash(dir: &Path) -> Result<String, CliError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    files.retain(|p| p.file_name().is_some_and(|n| n == "manifest.toml") || p.extension().is_some_and(|e| e == "csv"));
    files.sort();
    let mut h = Sha256::new();
    for f in files {
        h.update(f.file_name().expect("listed file").as_encoded_bytes());
        h.update(fs::read(&f)?);
    }
    Ok(hex(&h.finalize()))
}

/// Refuses to write into a non-empty directory unless `force` is set.
fn prepare_out(dir: &Path, force: bool) -> Result<(), CliError> {
    if dir.is_file() {
        return Err(CliError::usage(format!("{} is a file", dir.display())));
    }
    if !force && dir.is_dir() && fs::read_dir(dir)?.next().is_some() {
        return Err(CliError::usage(format!("{} is not empty; pass --force to overwrite", dir.display())));
    }
    fs::create_dir_all(dir)?;
    Ok(())
}

fn finish(cfg: &RunConfig, out: &Path, command: &'static str, input_hash: Option<String>, mut outputs: Vec<String>, stats: toml::Table) -> Result<(), CliError> {
    fs::write(out.join(CONFIG_FILE), cfg.to_toml())?;
    outputs.sort();
    let manifest = RunManifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config_hash: config_hash(cfg),
        input_hash,
        seed: cfg.seed,
        config: CONFIG_FILE,
        outputs,
        stats,
    };
    fs::write(out.join(RUN_MANIFEST), toml::to_string(&manifest).map_err(CliError::runtime)?)?;
    Ok(())
}

fn count(n: usize) -> toml::Value {
    toml::Value::Integer(n as i64)
}

/// Simulates the configured scan into a dataset directory.
pub fn simulate_cmd(cfg: &RunConfig, base: &Path, out: &Path, background_only: bool, force: bool) -> Result<String, CliError> {
    let objects = if background_only { &[][..] } else { &cfg.objects[..] };
    let scene = cfg.scene(base, objects)?;
    let pulse = cfg.pulse()?;
    let fgrid = cfg.simulation.frequencies.values().map_err(CliError::usage)?;
    let tb = cfg.timebase()?;
    cfg.geometry.validate().map_err(CliError::usage)?;
    prepare_out(out, force)?;
    let data = if background_only {
        simulate_background_only(&scene, &cfg.geometry, &pulse, &fgrid, tb)?
    } else {
        simulate(&scene, &cfg.geometry, &pulse, &fgrid, tb)?
    };
    data.save(out)?;
    let mut outputs: Vec<String> = data.iter().map(|(id, _)| cfg.geometry.trace_file_name(id)).collect();
    outputs.push("manifest.toml".into());
    let mut stats = toml::Table::new();
    stats.insert("channels".into(), count(data.len()));
    stats.insert("point_scatterers".into(), count(scene.scatterers.len()));
    stats.insert("background_only".into(), toml::Value::Boolean(background_only));
    finish(cfg, out, "simulate", None, outputs, stats)?;
    Ok(format!("wrote {} traces to {}", data.len(), out.display()))
}

fn load_dataset(dir: &Path, remove_artifact: bool) -> Result<MultistaticDataset, CliError> {
    if !dir.join("manifest.toml").is_file() {
        return Err(CliError::usage(format!("{} is not a dataset directory (no manifest.toml)", dir.display())));
    }
    let data = MultistaticDataset::load(dir)?;
    Ok(if remove_artifact { data.remove_artifact()? } else { data })
}

/// Images a dataset directory with the configured algorithm.
pub fn reconstruct_cmd(cfg: &RunConfig, base: &Path, data_dir: &Path, out: &Path, force: bool) -> Result<String, CliError> {
    let r = &cfg.reconstruction;
    let data = load_dataset(data_dir, r.remove_artifact)?;
    let rc = cfg.reconstruction_config(base, r.reference)?;
    prepare_out(out, force)?;
    let img: Reconstruction = reconstruct(r.algorithm, &data, &rc)?;
    fs::write(out.join("image.csv"), img.image.to_csv_string())?;
    fs::write(out.join("image.pgm"), img.image.to_pgm())?;
    let mut stats = toml::Table::new();
    stats.insert("algorithm".into(), toml::Value::String(r.algorithm.to_string()));
    stats.insert("reference".into(), toml::Value::String(r.reference.label().into()));
    stats.insert("frequencies".into(), count(rc.frequencies.len()));
    stats.insert("skipped_terms".into(), count(img.skipped_terms));
    stats.insert("empty_pixels".into(), count(img.empty_pixels));
    stats.insert("raw_peak".into(), toml::Value::Float(img.raw_peak));
    let peak = img.image.argmax_point().map(|p| format!("({:.4}, {:.4}) m", p.x, p.y)).unwrap_or_else(|| "none".into());
    finish(cfg, out, "reconstruct", Some(dataset_hash(data_dir)?), vec!["image.csv".into(), "image.pgm".into()], stats)?;
    Ok(format!("{} image written to {}; peak at {peak}, {} terms skipped", r.algorithm, out.display(), img.skipped_terms))
}

/// Ray-path count map for one source position.
pub fn pathmap_cmd(cfg: &RunConfig, base: &Path, out: &Path, force: bool) -> Result<String, CliError> {
    let cyl = cfg.cylinder(base)?;
    let grid = cfg.pathmap_grid()?;
    let source = cfg.pathmap_source();
    prepare_out(out, force)?;
    let map = cyl.path_count_map(source, &grid, cfg.pathmap.frequency)?;
    fs::write(out.join("pathmap.csv"), map.to_csv_string())?;
    fs::write(out.join("pathmap.pgm"), map.to_pgm())?;
    let h = map.histogram();
    let mut stats = toml::Table::new();
    for (k, n) in h.iter().enumerate() {
        stats.insert(format!("pixels_with_{k}_paths"), count(*n));
    }
    finish(cfg, out, "pathmap", None, vec!["pathmap.csv".into(), "pathmap.pgm".into()], stats)?;
    Ok(format!("path counts 0/1/2/3: {}/{}/{}/{}", h[0], h[1], h[2], h[3]))
}

/// One ordering check of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingCheck {
    pub scene: String,
    pub variant: Variant,
    pub pass: bool,
    pub psas: f64,
    pub best_other: (Algorithm, f64),
}

impl OrderingCheck {
    pub fn line(&self) -> String {
        format!(
            "{} psas-smallest-delta scene={} variant={} psas={:.4} best_other={}:{:.4}",
            if self.pass { "PASS" } else { "FAIL" },
            self.scene,
            self.variant.label(),
            self.psas,
            self.best_other.0,
            self.best_other.1
        )
    }
}

/// Simulates each extended object alone and scores every configured
/// algorithm under every reference dielectric.
pub fn compare_cmd(cfg: &RunConfig, base: &Path, out: &Path, force: bool) -> Result<String, CliError> {
    let objects: Vec<_> = cfg.objects.iter().filter(|o| o.shape.footprint().is_some()).collect();
    if objects.is_empty() {
        return Err(CliError::usage("compare needs at least one disk or rect object"));
    }
    if cfg.compare.algorithms.is_empty() || cfg.compare.variants.is_empty() {
        return Err(CliError::usage("compare needs at least one algorithm and one variant"));
    }
    let pulse = cfg.pulse()?;
    let fgrid = cfg.simulation.frequencies.values().map_err(CliError::usage)?;
    let tb = cfg.timebase()?;
    // validate every reference before any long work
    let configs = cfg.compare.variants.iter().map(|&v| Ok((v, cfg.reconstruction_config(base, v)?))).collect::<Result<Vec<_>, CliError>>()?;
    prepare_out(out, force)?;
    fs::create_dir_all(out.join("images"))?;

    let mut datasets = Vec::new();
    for o in &objects {
        let scene = cfg.scene(base, std::slice::from_ref(*o))?;
        let data = simulate(&scene, &cfg.geometry, &pulse, &fgrid, tb)?;
        datasets.push(if cfg.reconstruction.remove_artifact { data.remove_artifact()? } else { data });
    }
    let matched_mask = cfg.reconstruction_config(base, Variant::Matched)?.mask();

    let mut rows = Vec::new();
    let mut outputs = vec!["metrics.csv".to_string(), "orderings.txt".to_string()];
    for (variant, rc) in &configs {
        let psas_op = cfg.compare.algorithms.contains(&Algorithm::Psas).then(|| PsasOperator::new(rc, &cfg.geometry)).transpose()?;
        let ts_op = cfg.compare.algorithms.iter().any(|a| *a != Algorithm::Psas).then(|| TimeShiftOperator::new(rc, &cfg.geometry)).transpose()?;
        for (o, data) in objects.iter().zip(&datasets) {
            let ideal = IdealProfile::from_footprints(rc.grid, matched_mask.clone(), vec![o.shape.footprint().expect("filtered above")])?;
            for &algo in &cfg.compare.algorithms {
                let r = match algo {
                    Algorithm::Psas => psas_op.as_ref().expect("built when requested").apply(data)?,
                    a => ts_op.as_ref().expect("built when requested").apply(a, data)?,
                };
                let name = format!("images/{}_{}_{}.pgm", o.name, variant.label(), algo);
                fs::write(out.join(&name), r.image.to_pgm())?;
                outputs.push(name);
                rows.push(MetricRow::evaluate(&o.name, algo.name(), variant.label(), &r.image, &ideal)?);
            }
        }
    }
    // scene, then variant, then algorithm, in config order
    let rank = |r: &MetricRow| {
        let s = objects.iter().position(|o| o.name == r.scene).unwrap_or(usize::MAX);
        let v = cfg.compare.variants.iter().position(|v| v.label() == r.dielectric_variant).unwrap_or(usize::MAX);
        let a = cfg.compare.algorithms.iter().position(|a| a.name() == r.algorithm).unwrap_or(usize::MAX);
        (s, v, a)
    };
    rows.sort_by_key(rank);
    let mut csv = Vec::new();
    write_metric_csv(&rows, &mut csv)?;
    fs::write(out.join("metrics.csv"), &csv)?;

    let checks = orderings(&rows, &cfg.compare.variants);
    let text: String = checks.iter().map(|c| c.line() + "\n").collect();
    fs::write(out.join("orderings.txt"), &text)?;
    let mut stats = toml::Table::new();
    stats.insert("rows".into(), count(rows.len()));
    stats.insert("orderings_passed".into(), count(checks.iter().filter(|c| c.pass).count()));
    stats.insert("orderings_checked".into(), count(checks.len()));
    finish(cfg, out, "compare", None, outputs, stats)?;
    Ok(format!("{}{} rows written to {}", text, rows.len(), out.join("metrics.csv").display()))
}

/// For every (scene, variant) holding a PSAS row and at least one other:
/// does PSAS have the smallest δ?
pub fn orderings(rows: &[MetricRow], variants: &[Variant]) -> Vec<OrderingCheck> {
    let mut scenes: Vec<&str> = Vec::new();
    for r in rows {
        if !scenes.contains(&r.scene.as_str()) {
            scenes.push(&r.scene);
        }
    }
    let mut out = Vec::new();
    for scene in scenes {
        for &variant in variants {
            let group: Vec<&MetricRow> = rows.iter().filter(|r| r.scene == scene && r.dielectric_variant == variant.label()).collect();
            let Some(psas) = group.iter().find(|r| r.algorithm == Algorithm::Psas.name()) else { continue };
            let best = group
                .iter()
                .filter(|r| r.algorithm != Algorithm::Psas.name())
                .min_by(|a, b| a.delta.total_cmp(&b.delta));
            let Some(best) = best else { continue };
            let algo: Algorithm = best.algorithm.parse().expect("rows hold algorithm names");
            out.push(OrderingCheck {
                scene: scene.to_string(),
                variant,
                pass: psas.delta < best.delta,
                psas: psas.delta,
                best_other: (algo, best.delta),
            });
        }
    }
    out
}

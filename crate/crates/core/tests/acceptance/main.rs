//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are reported as FAIL but do not fail
//! the process; any other failure does. Set `PSAS_ACCEPTANCE_STRICT=1` to
//! make every FAIL fatal.

mod fixtures;
mod oracle;

use std::panic::{self, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use psas::channel::{combined_transfer, compensator, leg_paths, Antenna, AntennaModel, ChannelOptions, Media, MultipathMode};
use psas::dielectric::DielectricSpectrum;
use psas::forward::{default_frequency_grid, default_timebase, simulate, simulate_background_only, ArtifactModel, Reflectivity, Scatterer, Scene};
use psas::metrics::{contrast, relative_difference, snr, IdealProfile, MetricRow};
use psas::raypath::CylinderScene;
use psas::reconstruct::{ps_compensated_waveform, time_shifted_waveform, Algorithm, ImageGrid, PsasOperator, ReconstructionConfig, TimeShiftOperator};
use psas::signal::analysis::{envelope, envelope_fwhm, half_power_band, smooth, three_db_band};
use psas::signal::{to_spectrum, ChannelId, MultistaticDataset, TimeTrace};
use psas::{Footprint, GridSpec, Point};

use fixtures::*;

/// Criteria that fail on this model; see the README's acceptance section.
const KNOWN_FAILURES: &[u32] = &[6, 8, 9];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "refraction multiplicity", c1_refraction_multiplicity),
        (2, "path-count map", c2_path_count_map),
        (3, "dispersion spread", c3_dispersion_spread),
        (4, "pulse", c4_pulse),
        (5, "artifact removal", c5_artifact_removal),
        (6, "PSAS localization", c6_localization),
        (7, "dielectric robustness", c7_robustness),
        (8, "ordering", c8_ordering),
        (9, "weak-scatterer retention", c9_weak_scatterer),
        (10, "waveform recovery", c10_waveform),
        (11, "property suites", c11_properties),
        (12, "metric identities", c12_metric_identities),
    ];
    let strict = std::env::var("PSAS_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let (mut passed, mut failed, mut fatal) = (Vec::new(), Vec::new(), false);
    for (id, name, run) in criteria {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        let status = if result.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {status} {name}: {} [{secs:.1} s]", result.detail);
        if result.pass {
            passed.push(id);
        } else {
            if strict || !KNOWN_FAILURES.contains(&id) {
                fatal = true;
            }
            failed.push(id);
        }
    }
    println!("summary: {} passed, {} failed {:?} (known failures {:?})", passed.len(), failed.len(), failed, KNOWN_FAILURES);
    if fatal {
        std::process::exit(1);
    }
}

fn lossless_scene(eps_r: f64) -> CylinderScene {
    CylinderScene::new(Point::ORIGIN, 0.05, DielectricSpectrum::vacuum(), DielectricSpectrum::constant("lossless", eps_r, 0.0).unwrap()).unwrap()
}

const FIG_SOURCE: Point = Point::new(0.13, 0.0);
const FIG_FOCAL: Point = Point::new(-0.035, -0.003);

fn c1_refraction_multiplicity() -> Outcome {
    let start = Instant::now();
    let scene = lossless_scene(6.5);
    let paths = scene.solve_refraction_points(FIG_SOURCE, FIG_FOCAL, 4.5e9).unwrap();
    let curve = scene.candidate_times(FIG_SOURCE, FIG_FOCAL, 4.5e9, 1.0).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let n = 6.5f64.sqrt();
    let worst_snell = paths.iter().map(|p| p.snell_residual(n)).fold(0.0, f64::max);
    let worst_circle = paths.iter().map(|p| (p.refraction_point.norm() - 0.05).abs()).fold(0.0, f64::max);
    let times: Vec<f64> = curve.iter().map(|c| c.time).collect();
    let extrema = oracle::interior_extrema(&times);
    let pass = paths.len() == 3 && worst_snell < 1e-6 && worst_circle < 1e-9 && extrema == 3 && elapsed < 1.0;
    outcome(
        pass,
        format!(
            "{} paths, Snell residual {worst_snell:.1e}, on-circle error {worst_circle:.1e} m, {} candidates with {extrema} interior extrema, {:.3} s",
            paths.len(),
            curve.len(),
            elapsed
        ),
    )
}

fn c2_path_count_map() -> Outcome {
    let scene = lossless_scene(6.5);
    let grid = GridSpec::centered(Point::ORIGIN, 1e-3, 101).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let start = Instant::now();
    let map = pool.install(|| scene.path_count_map(FIG_SOURCE, &grid, 4.5e9)).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let hist = map.histogram();
    let (mut far, mut near) = (0usize, 0usize);
    for (i, c) in map.counts.iter().enumerate() {
        if matches!(c, Some(n) if *n >= 2) {
            if grid.point(i).x < 0.0 {
                far += 1;
            } else {
                near += 1;
            }
        }
    }
    let (n_out, n_in) = scene.indices(4.5e9).unwrap();
    let interior: Vec<usize> = (0..grid.len()).filter(|&i| map.counts[i].is_some()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = Vec::new();
    for _ in 0..10 {
        let i = interior[rng.random_range(0..interior.len())];
        let expected = oracle::brute_force_path_count(Point::ORIGIN, 0.05, n_out, n_in, FIG_SOURCE, grid.point(i));
        let got = map.counts[i].unwrap() as usize;
        if got != expected {
            mismatches.push((grid.point(i), got, expected));
        }
    }
    let pass = hist.iter().all(|&h| h > 0) && far > near && mismatches.is_empty() && elapsed < 60.0;
    outcome(
        pass,
        format!(
            "histogram [0,1,2,3] = {hist:?}, multipath pixels far/near side {far}/{near}, oracle mismatches {mismatches:?}, {elapsed:.1} s single worker"
        ),
    )
}

fn c3_dispersion_spread() -> Outcome {
    let spread = DielectricSpectrum::glycerin_like().dispersive_time_spread(2e9, 7e9, 0.10).unwrap();
    outcome((spread - 0.143e-9).abs() <= 0.002e-9, format!("spread {:.4} ns (target 0.143 ± 0.002)", spread * 1e9))
}

fn c4_pulse() -> Outcome {
    let p = pulse();
    let fwhm = envelope_fwhm(p).unwrap();
    let freqs: Vec<f64> = (1..=1200).map(|i| i as f64 * 1e7).collect();
    let (lo, hi) = three_db_band(&to_spectrum(p, &freqs).unwrap()).unwrap();
    let fwhm_ok = (fwhm / 0.146e-9 - 1.0).abs() <= 0.01;
    let band_ok = (lo / 2e9 - 1.0).abs() <= 0.05 && (hi / 7e9 - 1.0).abs() <= 0.05;
    outcome(fwhm_ok && band_ok, format!("FWHM {:.4} ns, 3 dB band {:.3}-{:.3} GHz", fwhm * 1e9, lo / 1e9, hi / 1e9))
}

fn c5_artifact_removal() -> Outcome {
    let mut scene = Scene::new(cylinder().clone(), vec![Scatterer { position: Point::new(-0.012, 0.018), reflectivity: Reflectivity::metal() }]);
    scene.artifact = ArtifactModel { direct_gain: 0.05, echo_gain: 0.3 };
    let (geo, fgrid) = (geometry(), default_frequency_grid());
    let total = simulate(&scene, geo, pulse(), &fgrid, default_timebase()).unwrap();
    let pre = simulate_background_only(&scene, geo, pulse(), &fgrid, default_timebase()).unwrap();
    let out = total.remove_artifact().unwrap();
    let oracle = total.add_scaled(&pre, -1.0).unwrap();
    let n_tx = geo.tx_angles_deg.len();
    let mut worst_ratio: f64 = 0.0;
    let mut bound_ok = true;
    for rx in 0..geo.rx_offsets_deg.len() {
        let envelopes: Vec<Vec<f64>> = (0..n_tx).map(|tx| envelope(oracle.samples(ChannelId { tx, rx }).unwrap())).collect();
        let bound: Vec<f64> = (0..envelopes[0].len()).map(|t| envelopes.iter().map(|e| e[t]).sum::<f64>() / n_tx as f64).collect();
        let scale = bound.iter().cloned().fold(0.0, f64::max);
        for tx in 0..n_tx {
            let id = ChannelId { tx, rx };
            for ((a, b), limit) in out.samples(id).unwrap().iter().zip(oracle.samples(id).unwrap()).zip(&bound) {
                let leak = (a - b).abs();
                if leak > limit + 1e-9 * scale {
                    bound_ok = false;
                }
                if *limit > 0.0 {
                    worst_ratio = worst_ratio.max(leak / limit);
                }
            }
        }
    }
    let bg = pre.remove_artifact().unwrap();
    let mut worst_bg: f64 = 0.0;
    for rx in 0..geo.rx_offsets_deg.len() {
        let rms = |d: &MultistaticDataset| {
            let (s, n) = (0..n_tx).flat_map(|tx| d.samples(ChannelId { tx, rx }).unwrap().iter()).fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
            (s / n as f64).sqrt()
        };
        worst_bg = worst_bg.max(rms(&bg) / rms(&pre));
    }
    let pass = bound_ok && worst_bg < 1e-12;
    outcome(pass, format!("leakage / (group envelope sum / 24) at most {worst_ratio:.3}, background residual {worst_bg:.1e} of group RMS"))
}

/// Circular spread of the PSAS compensated phases across channels at 4.5 GHz.
fn phase_spread(op: &PsasOperator, data: &MultistaticDataset, at: Point) -> f64 {
    let spectra = op.spectra(data).unwrap();
    let k = op.frequencies().iter().position(|&f| f == 4.5e9).unwrap();
    let index = op.grid().nearest(at).unwrap();
    let phases: Vec<f64> = op.compensated(&spectra, index, k).into_iter().flatten().map(|v| v.arg()).collect();
    oracle::circular_std(&phases)
}

fn c6_localization() -> Outcome {
    let cfg = Variant::Matched.config();
    let data = point_data();
    let start = Instant::now();
    let op = PsasOperator::new(&cfg, geometry()).unwrap();
    let image = op.apply(data).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let peak = image.image.argmax_point().unwrap();
    let err = peak.distance(POINT);
    // phase alignment is a property of the compensator, so it is measured on
    // the scatterer response before group-mean subtraction adds leakage
    let at_truth = phase_spread(&op, point_raw(), POINT);
    let away = phase_spread(&op, point_raw(), POINT - POINT.unit() * 0.03);
    let pass = err <= 5e-3 && at_truth < 0.1 && away > 1.0 && elapsed < 300.0;
    outcome(
        pass,
        format!(
            "truth ({:.3}, {:.3}) m, argmax ({:.3}, {:.3}) m, error {:.1} mm; phase std {at_truth:.3} rad at truth, {away:.2} rad 3 cm away; {elapsed:.1} s on {} worker(s)",
            POINT.x,
            POINT.y,
            peak.x,
            peak.y,
            err * 1e3,
            rayon::current_num_threads()
        ),
    )
}

struct SceneCase {
    name: &'static str,
    footprint: Footprint,
    data: fn() -> &'static MultistaticDataset,
}

const SCENES: [SceneCase; 2] = [
    SceneCase { name: "metal", footprint: METAL, data: metal_data },
    SceneCase { name: "plasticine", footprint: PLASTICINE, data: plasticine_data },
];

/// Images of both extended scenes under every reference variant, computed
/// once for criteria 7 and 8 (and the two-object scene for criterion 9).
struct Matrix {
    rows: Vec<(Variant, &'static str, Algorithm, MetricRow, Point)>,
    two_object: Vec<(Algorithm, ImageGrid)>,
}

fn matrix() -> &'static Matrix {
    static M: std::sync::OnceLock<Matrix> = std::sync::OnceLock::new();
    M.get_or_init(|| {
        let mut rows = Vec::new();
        let mut two_object = Vec::new();
        for variant in Variant::ALL {
            let cfg = variant.config();
            let psas_op = PsasOperator::new(&cfg, geometry()).unwrap();
            let ts_op = TimeShiftOperator::new(&cfg, geometry()).unwrap();
            let mask = cfg.mask();
            for case in &SCENES {
                let ideal = IdealProfile::from_footprints(cfg.grid, mask.clone(), vec![case.footprint]).unwrap();
                let mut algos = vec![Algorithm::Psas, Algorithm::Rar, Algorithm::Dmas];
                if variant == Variant::Matched {
                    algos.push(Algorithm::Das);
                }
                for algo in algos {
                    let r = match algo {
                        Algorithm::Psas => psas_op.apply((case.data)()).unwrap(),
                        a => ts_op.apply(a, (case.data)()).unwrap(),
                    };
                    let row = MetricRow::evaluate(case.name, algo.name(), variant.name(), &r.image, &ideal).unwrap();
                    rows.push((variant, case.name, algo, row, r.image.argmax_point().unwrap()));
                }
            }
            if variant == Variant::Minus {
                for algo in [Algorithm::Psas, Algorithm::Rar, Algorithm::Dmas] {
                    let r = match algo {
                        Algorithm::Psas => psas_op.apply(two_object_data()).unwrap(),
                        a => ts_op.apply(a, two_object_data()).unwrap(),
                    };
                    two_object.push((algo, r.image));
                }
            }
        }
        for (_, name, _, row, peak) in &rows {
            let err = peak.distance(SCENES.iter().find(|c| c.name == *name).unwrap().footprint.center());
            println!(
                "    {:<10} {:<5} {:<8} SNR {:>6.2} dB  Ctr {:>6.2} dB  delta {:.4}  peak error {:.1} mm",
                row.scene,
                row.algorithm,
                row.dielectric_variant,
                row.snr_db,
                row.ctr_db,
                row.delta,
                err * 1e3
            );
        }
        Matrix { rows, two_object }
    })
}

impl Matrix {
    /// Metrics and argmax of one cell.
    fn get(&self, variant: Variant, scene: &str, algo: Algorithm) -> (&MetricRow, Point) {
        self.rows
            .iter()
            .find(|(v, s, a, _, _)| *v == variant && *s == scene && *a == algo)
            .map(|(_, _, _, row, peak)| (row, *peak))
            .unwrap()
    }
}

fn c7_robustness() -> Outcome {
    let m = matrix();
    let mut pass = true;
    let mut parts = Vec::new();
    for case in &SCENES {
        let (base, base_peak) = m.get(Variant::Matched, case.name, Algorithm::Psas);
        for variant in [Variant::Plus, Variant::Minus] {
            let (row, peak) = m.get(variant, case.name, Algorithm::Psas);
            let shift = peak.distance(base_peak);
            let change = (row.delta - base.delta).abs() / base.delta;
            pass &= shift < 5e-3 && change < 0.15;
            parts.push(format!("{} {}: shift {:.1} mm, delta {:+.1}%", case.name, variant.name(), shift * 1e3, 100.0 * (row.delta - base.delta) / base.delta));
        }
    }
    outcome(pass, parts.join("; "))
}

fn c8_ordering() -> Outcome {
    let m = matrix();
    let mut pass = true;
    let mut failures = Vec::new();
    for variant in Variant::ALL {
        for case in &SCENES {
            let (p, _) = m.get(variant, case.name, Algorithm::Psas);
            for other in [Algorithm::Rar, Algorithm::Dmas] {
                let (o, _) = m.get(variant, case.name, other);
                if p.delta >= o.delta || p.delta.is_nan() {
                    pass = false;
                    failures.push(format!("{} {}: delta psas {:.3} >= {} {:.3}", case.name, variant.name(), p.delta, other, o.delta));
                }
            }
        }
    }
    let mut loc = Vec::new();
    for case in &SCENES {
        let center = case.footprint.center();
        let ep = m.get(Variant::Matched, case.name, Algorithm::Psas).1.distance(center);
        let ed = m.get(Variant::Matched, case.name, Algorithm::Das).1.distance(center);
        if ep > ed {
            pass = false;
        }
        loc.push(format!("{} peak error psas {:.1} mm vs das {:.1} mm", case.name, ep * 1e3, ed * 1e3));
    }
    let cells = if failures.is_empty() { "all 12 delta orderings hold".to_string() } else { failures.join("; ") };
    outcome(pass, format!("{cells}; {}", loc.join("; ")))
}

fn c9_weak_scatterer() -> Outcome {
    let m = matrix();
    let fraction = |algo: Algorithm| {
        let (_, img) = m.two_object.iter().find(|(a, _)| *a == algo).unwrap();
        img.local_peak(PLASTICINE.center(), 0.01) / img.max()
    };
    let strong = |algo: Algorithm| {
        let (_, img) = m.two_object.iter().find(|(a, _)| *a == algo).unwrap();
        img.local_peak(METAL.center(), 0.01) / img.max()
    };
    let (p, r, d) = (fraction(Algorithm::Psas), fraction(Algorithm::Rar), fraction(Algorithm::Dmas));
    let between = d >= r.min(p) && d <= r.max(p);
    outcome(
        p > r,
        format!(
            "weak peak / max: psas {p:.3}, rar {r:.3}, dmas {d:.3} ({}); strong peak / max: psas {:.3}, rar {:.3}, dmas {:.3}",
            if between { "dmas between" } else { "dmas outside" },
            strong(Algorithm::Psas),
            strong(Algorithm::Rar),
            strong(Algorithm::Dmas)
        ),
    )
}

/// Smoothing width for the spectra of criterion 10, in 10 MHz bins.
const SPECTRUM_SMOOTHING_BINS: f64 = 5.0;

fn c10_waveform() -> Outcome {
    let geo = geometry();
    let fgrid = default_frequency_grid();
    let rx = geo.rx_offsets_deg.iter().position(|&o| o == 180.0).unwrap();
    let id = ChannelId { tx: 0, rx };
    let trace = point_raw().trace(id).unwrap();
    let mut cfg = Variant::Matched.config();
    cfg.frequencies = fgrid.clone();
    let (tx_pos, rx_pos) = (geo.tx_position(0), geo.rx_position(id));
    let ps = ps_compensated_waveform(&trace, POINT, tx_pos, rx_pos, &cfg).unwrap();
    let ts = time_shifted_waveform(&trace, POINT, tx_pos, rx_pos, &cfg).unwrap();
    let band = |t: &TimeTrace| {
        let power = smooth(&to_spectrum(t, &fgrid).unwrap().power(), SPECTRUM_SMOOTHING_BINS);
        half_power_band(&fgrid, &power).unwrap()
    };
    let (s_lo, s_hi) = band(pulse());
    let (p_lo, p_hi) = band(&ps);
    let (t_lo, t_hi) = band(&ts);
    let (fw_ps, fw_ts) = (envelope_fwhm(&ps).unwrap(), envelope_fwhm(&ts).unwrap());
    let (bw_s, bw_p, bw_t) = (s_hi - s_lo, p_hi - p_lo, t_hi - t_lo);
    let t_center = 0.5 * (t_lo + t_hi);
    let pass = fw_ps < fw_ts && bw_p >= 0.9 * bw_s && bw_t < bw_s && t_center < 4.5e9;
    outcome(
        pass,
        format!(
            "FWHM ps {:.3} ns vs ts {:.3} ns; 3 dB band source {:.2}-{:.2}, ps {:.2}-{:.2} ({:.0}% of source), ts {:.2}-{:.2} GHz (centre {:.2} GHz)",
            fw_ps * 1e9,
            fw_ts * 1e9,
            s_lo / 1e9,
            s_hi / 1e9,
            p_lo / 1e9,
            p_hi / 1e9,
            100.0 * bw_p / bw_s,
            t_lo / 1e9,
            t_hi / 1e9,
            t_center / 1e9
        ),
    )
}

fn c11_properties() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let mut check = |ok: bool, note: String| {
        pass &= ok;
        notes.push(format!("{}: {}", if ok { "ok" } else { "FAILED" }, note));
    };

    // compensator × H_eff = 1 and H_eff reciprocity, including three-path pixels
    let model = Arc::new(AntennaModel::isotropic());
    let geo = geometry();
    let opts = ChannelOptions::default();
    let (mut worst_inv, mut worst_recip, mut multipath_seen) = (0.0f64, 0.0f64, 0usize);
    for scene in [lossless_scene(6.5), cylinder().clone()] {
        for &pixel in &[FIG_FOCAL, POINT, Point::new(-0.03, 0.025), Point::new(0.004, -0.041)] {
            for tx_i in [0, 5, 12] {
                for &f in &[2e9, 4.5e9, 7e9] {
                    let tx = Antenna::facing(geo.tx_position(tx_i), Point::ORIGIN, Arc::clone(&model));
                    let rx = Antenna::facing(geo.rx_position(ChannelId { tx: tx_i, rx: 9 }), Point::ORIGIN, Arc::clone(&model));
                    let media = Media::at(&scene, f).unwrap();
                    let (pt, pr) = (
                        leg_paths(&scene, &tx, pixel, f, MultipathMode::Heff).unwrap(),
                        leg_paths(&scene, &rx, pixel, f, MultipathMode::Heff).unwrap(),
                    );
                    if pt.is_empty() || pr.is_empty() {
                        continue;
                    }
                    multipath_seen += usize::from(pt.len() > 1 || pr.len() > 1);
                    let h = combined_transfer(&pt, &pr, &tx, &rx, pixel, &media, opts).unwrap();
                    let c = compensator(pixel, &tx, &rx, f, &scene, opts, MultipathMode::Heff).unwrap();
                    worst_inv = worst_inv.max((c * h - Complex64::new(1.0, 0.0)).norm());
                    let swapped = combined_transfer(&pr, &pt, &rx, &tx, pixel, &media, opts).unwrap();
                    worst_recip = worst_recip.max((swapped - h).norm() / h.norm());
                }
            }
        }
    }
    check(worst_inv < 1e-9 && multipath_seen > 0, format!("compensator inverse error {worst_inv:.1e} ({multipath_seen} multipath cases)"));
    check(worst_recip < 1e-12, format!("H_eff reciprocity error {worst_recip:.1e}"));

    let scene = lossless_scene(6.5);
    let mut worst_path: f64 = 0.0;
    for &pixel in &[FIG_FOCAL, Point::new(0.01, 0.02), Point::new(-0.04, 0.01)] {
        let fwd = scene.solve_refraction_points(FIG_SOURCE, pixel, 4.5e9).unwrap();
        let rev = scene.solve_from_interior(pixel, FIG_SOURCE, 4.5e9).unwrap();
        if fwd.len() != rev.len() {
            worst_path = f64::INFINITY;
        }
        for (a, b) in fwd.iter().zip(&rev) {
            worst_path = worst_path.max(a.refraction_point.distance(b.refraction_point));
        }
    }
    check(worst_path < 1e-9, format!("path reciprocity {worst_path:.1e} m"));

    // superposition and linearity of the forward model
    let fgrid = default_frequency_grid();
    let a = Scatterer { position: Point::new(0.01, -0.02), reflectivity: Reflectivity::metal() };
    let b = Scatterer { position: Point::new(-0.025, 0.005), reflectivity: Reflectivity::plasticine() };
    let sim = |s: Vec<Scatterer>| simulate(&Scene::new(cylinder().clone(), s), geo, pulse(), &fgrid, default_timebase()).unwrap();
    let (da, db, dab) = (sim(vec![a.clone()]), sim(vec![b.clone()]), sim(vec![a.clone(), b.clone()]));
    let doubled = sim(vec![Scatterer { reflectivity: Reflectivity::flat(2.0, std::f64::consts::PI), ..a.clone() }]);
    let peak = da.iter().flat_map(|(_, s)| s.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let sum = da.add_scaled(&db, 1.0).unwrap();
    let sup = max_abs_diff(&dab, &sum) / peak;
    let lin = max_abs_diff(&doubled, &da.scaled(2.0)) / peak;
    check(sup < 1e-12 && lin < 1e-12, format!("superposition {sup:.1e}, linearity {lin:.1e} of peak"));

    // coarse grid for the image properties
    let cfg = ReconstructionConfig::new(cylinder().clone(), GridSpec::centered(Point::ORIGIN, 4e-3, 26).unwrap());
    cfg.validate().unwrap();
    let data = point_data();
    let scaled = data.scaled(3.7);
    let build = || (PsasOperator::new(&cfg, geo).unwrap(), TimeShiftOperator::new(&cfg, geo).unwrap());
    let (psas_op, ts_op) = build();
    let image = |algo: Algorithm, d: &MultistaticDataset, p: &PsasOperator, t: &TimeShiftOperator| match algo {
        Algorithm::Psas => p.apply(d).unwrap().image,
        a => t.apply(a, d).unwrap().image,
    };
    let mut worst_scale: f64 = 0.0;
    let mut metric_scale: f64 = 0.0;
    for algo in Algorithm::ALL {
        let (x, y) = (image(algo, data, &psas_op, &ts_op), image(algo, &scaled, &psas_op, &ts_op));
        worst_scale = worst_scale.max(x.pixels.iter().zip(&y.pixels).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        let mut raw = x.clone();
        raw.pixels.iter_mut().for_each(|v| *v *= 42.0);
        metric_scale = metric_scale.max((snr(&raw).unwrap() - snr(&x).unwrap()).abs()).max((contrast(&raw).unwrap() - contrast(&x).unwrap()).abs());
    }
    check(worst_scale < 1e-9, format!("normalized images under 3.7x data differ by {worst_scale:.1e}"));
    check(metric_scale < 1e-9, format!("SNR/Ctr under 42x image differ by {metric_scale:.1e} dB"));

    // worker count
    let mut worker_diff = 0usize;
    let reference: Vec<ImageGrid> = Algorithm::ALL.iter().map(|&a| image(a, data, &psas_op, &ts_op)).collect();
    for threads in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let (p, t) = build();
            for (algo, r) in Algorithm::ALL.iter().zip(&reference) {
                worker_diff += usize::from(image(*algo, data, &p, &t) != *r);
            }
        });
    }
    check(worker_diff == 0, format!("{worker_diff} images changed with 1 or 3 workers"));

    // pixel order
    let mut order: Vec<usize> = (0..cfg.grid.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(11));
    let spectra = psas_op.spectra(data).unwrap();
    let shuffled = psas_op.pixels(&spectra, &order);
    let in_order = psas_op.pixels(&spectra, &(0..cfg.grid.len()).collect::<Vec<_>>());
    let mut order_diff = order.iter().zip(&shuffled).filter(|(&i, v)| **v != in_order[i]).count();
    let traces = ts_op.prepare(data).unwrap();
    for algo in [Algorithm::Das, Algorithm::Dmas, Algorithm::Rar] {
        let direct: Vec<f64> = (0..cfg.grid.len()).map(|i| ts_op.pixel(algo, &traces, i).unwrap()).collect();
        for &i in order.iter().take(200) {
            order_diff += usize::from(ts_op.pixel(algo, &traces, i).unwrap() != direct[i]);
        }
    }
    check(order_diff == 0, format!("{order_diff} pixels changed with shuffled evaluation order"));

    outcome(pass, notes.join("; "))
}

fn max_abs_diff(a: &MultistaticDataset, b: &MultistaticDataset) -> f64 {
    a.iter().map(|(id, s)| s.iter().zip(b.samples(id).unwrap()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)).fold(0.0, f64::max)
}

fn c12_metric_identities() -> Outcome {
    let grid = GridSpec::new(Point::ORIGIN, 1e-3, 10, 10).unwrap();
    let uniform = ImageGrid::new(grid, vec![0.37; 100], vec![true; 100]).unwrap();
    let mut hot = vec![0.0; 100];
    hot[42] = 1.0;
    let hot = ImageGrid::new(grid, hot, vec![true; 100]).unwrap();
    let fp = Footprint::Disk { center: Point::new(4e-3, 4e-3), radius: 2.5e-3 };
    let ideal = IdealProfile::from_footprints(grid, vec![true; 100], vec![fp]).unwrap();
    let zero = ImageGrid::zeros(grid, vec![true; 100]).unwrap();
    let values = [
        snr(&uniform).unwrap(),
        contrast(&hot).unwrap() - 40.0,
        relative_difference(&ideal.image, &ideal).unwrap(),
        relative_difference(&zero, &ideal).unwrap() - 1.0,
    ];
    let pass = values.iter().all(|v| v.abs() < 1e-12);
    outcome(pass, format!("residuals snr(uniform) {:.1e}, contrast(hot) - 40 {:.1e}, delta(I, I) {:.1e}, delta(0, I) - 1 {:.1e}", values[0], values[1], values[2], values[3]))
}

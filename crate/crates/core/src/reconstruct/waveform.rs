use std::sync::Arc;

use num_complex::Complex64;

use super::{ts_delay, Interpolation, ReconstructionConfig};
use crate::channel::{media_table, one_way_sweep, Antenna, Leg};
use crate::geometry::Point;
use crate::signal::{from_spectrum, to_spectrum, TimeTrace};
use crate::{Error, Result};

/// One received trace with its TX → pixel → RX channel undone frequency by
/// frequency at `cfg.frequencies`, then returned to the time domain on the
/// trace's own timebase and scaled to unit peak. Frequencies where a leg
/// has no path are dropped; if every frequency lacks a path the result is
/// [`Error::NoPath`].
pub fn ps_compensated_waveform(trace: &TimeTrace, pixel: Point, tx: Point, rx: Point, cfg: &ReconstructionConfig) -> Result<TimeTrace> {
    cfg.validate()?;
    let media = media_table(&cfg.scene, &cfg.frequencies)?;
    let sweep = |p: Point, leg: Leg| {
        let a = Antenna::facing(p, cfg.scene.center, Arc::clone(&cfg.antenna));
        one_way_sweep(&cfg.scene, &a, pixel, &media, cfg.channel, leg, cfg.multipath_mode, true)
    };
    let (inv_tx, inv_rx) = (sweep(tx, Leg::Transmit)?, sweep(rx, Leg::Receive)?);
    let factors: Vec<Complex64> = inv_tx
        .iter()
        .zip(&inv_rx)
        .map(|(a, b)| match (a, b) {
            (Some(a), Some(b)) => a * b,
            _ => Complex64::new(0.0, 0.0),
        })
        .collect();
    if factors.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
        return Err(Error::NoPath);
    }
    let spectrum = to_spectrum(trace, &cfg.frequencies)?.multiply(&factors)?;
    Ok(from_spectrum(&spectrum, trace.t0, trace.dt, trace.len())?.normalized())
}

/// The same trace only advanced by the least-time delay at the centre
/// frequency, scaled to unit peak.
pub fn time_shifted_waveform(trace: &TimeTrace, pixel: Point, tx: Point, rx: Point, cfg: &ReconstructionConfig) -> Result<TimeTrace> {
    cfg.validate()?;
    let shift = ts_delay(pixel, tx, rx, cfg)? / trace.dt;
    let n = trace.len() as isize;
    let at = |j: isize| if (0..n).contains(&j) { trace.samples[j as usize] } else { 0.0 };
    let samples = (0..n)
        .map(|k| match cfg.interpolation {
            Interpolation::Nearest => at(k + shift.round() as isize),
            Interpolation::Linear => {
                let (i0, frac) = (shift.floor(), shift - shift.floor());
                let j = k + i0 as isize;
                (1.0 - frac) * at(j) + frac * at(j + 1)
            }
        })
        .collect();
    Ok(TimeTrace { samples, ..trace.clone() }.normalized())
}

use num_complex::Complex64;

use super::{check_frequencies, SpectrumTrace, TimeTrace};
use crate::{Error, Result};

// Phasor recurrences are re-anchored this often to stop rounding drift.
const REANCHOR: usize = 128;

fn phasor(frequency: f64, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * frequency * t)
}

/// `X(f) = Σₙ xₙ e^{−j2πf tₙ}` at exactly the requested frequencies.
pub fn to_spectrum(trace: &TimeTrace, frequencies: &[f64]) -> Result<SpectrumTrace> {
    check_frequencies(frequencies)?;
    let nyquist = 0.5 / trace.dt;
    if let Some(&f) = frequencies.iter().find(|&&f| f >= nyquist) {
        return Err(Error::NyquistViolation { frequency: f, nyquist });
    }
    let values = frequencies
        .iter()
        .map(|&f| {
            let step = phasor(-f, trace.dt);
            let mut acc = Complex64::new(0.0, 0.0);
            for (block, chunk) in trace.samples.chunks(REANCHOR).enumerate() {
                let mut z = phasor(-f, trace.time(block * REANCHOR));
                for &x in chunk {
                    acc += z * x;
                    z *= step;
                }
            }
            acc
        })
        .collect();
    Ok(SpectrumTrace { frequencies: frequencies.to_vec(), values })
}

/// Integration weight of each bin: the width of its Voronoi cell, with the
/// end cells mirrored outwards.
fn bin_widths(frequencies: &[f64], n: usize, dt: f64) -> Vec<f64> {
    let m = frequencies.len();
    if m == 1 {
        return vec![1.0 / (n as f64 * dt)];
    }
    (0..m)
        .map(|i| {
            let lo = if i == 0 { frequencies[1] - frequencies[0] } else { frequencies[i] - frequencies[i - 1] };
            let hi = if i == m - 1 { frequencies[m - 1] - frequencies[m - 2] } else { frequencies[i + 1] - frequencies[i] };
            0.5 * (lo + hi)
        })
        .collect()
}

/// Real signal `x(t) = 2·dt·Re Σ_m w_m X_m e^{+j2πf_m t}` on `n` samples
/// starting at `t0`, where `w_m` are the frequency-cell widths. This inverts
/// [`to_spectrum`] for a trace sampled at the same `dt` whose spectrum is
/// confined to the grid's band.
pub fn from_spectrum(spec: &SpectrumTrace, t0: f64, dt: f64, n: usize) -> Result<TimeTrace> {
    if spec.is_empty() {
        return Err(Error::InvalidSpectrum("empty spectrum".into()));
    }
    let mut out = TimeTrace::zeros(t0, dt, n)?;
    let widths = bin_widths(&spec.frequencies, n, dt);
    for ((&f, &x), &w) in spec.frequencies.iter().zip(&spec.values).zip(&widths) {
        let c = x * (2.0 * dt * w);
        let step = phasor(f, dt);
        for (block, chunk) in out.samples.chunks_mut(REANCHOR).enumerate() {
            let mut z = c * phasor(f, t0 + (block * REANCHOR) as f64 * dt);
            for y in chunk {
                *y += z.re;
                z *= step;
            }
        }
    }
    Ok(out)
}

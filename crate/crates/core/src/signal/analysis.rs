//! Pulse and spectrum measurements.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{SpectrumTrace, TimeTrace};
use crate::{Error, Result};

/// Magnitude of the analytic signal, computed by FFT with 8× zero padding.
pub fn envelope(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    let len = (8 * n).next_power_of_two();
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    buf.resize(len, Complex64::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        if k == 0 || k == len / 2 {
            continue;
        }
        *v *= if k < len / 2 { 2.0 } else { 0.0 };
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    buf.iter().take(n).map(|v| v.norm() / len as f64).collect()
}

/// Width of the region around the maximum of `values` that stays at or
/// above half of it, with linear interpolation at both crossings.
pub fn full_width_half_max(values: &[f64], step: f64) -> Result<f64> {
    let (peak_at, peak) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    if !(peak > 0.0) {
        return Err(Error::InvalidParameter("no positive peak to measure".into()));
    }
    let half = peak / 2.0;
    let mut hi = peak_at;
    while hi + 1 < values.len() && values[hi + 1] >= half {
        hi += 1;
    }
    let mut lo = peak_at;
    while lo > 0 && values[lo - 1] >= half {
        lo -= 1;
    }
    if hi + 1 == values.len() || lo == 0 {
        return Err(Error::InvalidParameter("half-maximum crossing lies outside the samples".into()));
    }
    let right = hi as f64 + (values[hi] - half) / (values[hi] - values[hi + 1]);
    let left = lo as f64 - (values[lo] - half) / (values[lo] - values[lo - 1]);
    Ok((right - left) * step)
}

/// FWHM of a pulse's envelope, in seconds.
pub fn envelope_fwhm(trace: &TimeTrace) -> Result<f64> {
    full_width_half_max(&envelope(&trace.samples), trace.dt)
}

/// Lower and upper frequency where `power` falls to half its maximum on
/// either side of the peak, interpolated linearly.
pub fn half_power_band(frequencies: &[f64], power: &[f64]) -> Result<(f64, f64)> {
    if frequencies.len() != power.len() || frequencies.len() < 3 {
        return Err(Error::InvalidSpectrum("need at least 3 matching bins".into()));
    }
    let (peak_at, peak) = power
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    if !(peak > 0.0) {
        return Err(Error::InvalidSpectrum("spectrum has no energy".into()));
    }
    let half = peak / 2.0;
    let cross = |a: usize, b: usize| {
        let t = (power[a] - half) / (power[a] - power[b]);
        frequencies[a] + t * (frequencies[b] - frequencies[a])
    };
    let mut hi = peak_at;
    while hi + 1 < power.len() && power[hi + 1] >= half {
        hi += 1;
    }
    let mut lo = peak_at;
    while lo > 0 && power[lo - 1] >= half {
        lo -= 1;
    }
    let upper = if hi + 1 < power.len() { cross(hi, hi + 1) } else { frequencies[hi] };
    let lower = if lo > 0 { cross(lo, lo - 1) } else { frequencies[lo] };
    Ok((lower, upper))
}

/// 3 dB band of a spectrum (half of peak `|X|²`).
pub fn three_db_band(spec: &SpectrumTrace) -> Result<(f64, f64)> {
    half_power_band(&spec.frequencies, &spec.power())
}

/// Gaussian smoothing with standard deviation `sigma` samples; edges are
/// handled by renormalising the truncated kernel.
pub fn smooth(values: &[f64], sigma: f64) -> Vec<f64> {
    if !(sigma > 0.0) {
        return values.to_vec();
    }
    let radius = (4.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-radius..=radius).map(|k| (-0.5 * (k as f64 / sigma).powi(2)).exp()).collect();
    let n = values.len() as isize;
    (0..n)
        .map(|i| {
            let (mut acc, mut norm) = (0.0, 0.0);
            for (j, w) in (i - radius..=i + radius).zip(&kernel) {
                if (0..n).contains(&j) {
                    acc += w * values[j as usize];
                    norm += w;
                }
            }
            acc / norm
        })
        .collect()
}

/// Frequency of the largest `|X|`.
pub fn peak_frequency(spec: &SpectrumTrace) -> f64 {
    let mut best = 0;
    for (i, v) in spec.values.iter().enumerate() {
        if v.norm() > spec.values[best].norm() {
            best = i;
        }
    }
    spec.frequencies[best]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_of_modulated_gaussian() {
        let dt = 1e-12;
        let sigma = 0.2e-9;
        let samples: Vec<f64> = (0..4001)
            .map(|i| {
                let t = (i as f64 - 2000.0) * dt;
                (-0.5 * (t / sigma).powi(2)).exp() * (std::f64::consts::TAU * 5e9 * t).cos()
            })
            .collect();
        let env = envelope(&samples);
        for i in (1000..3000).step_by(100) {
            let t = (i as f64 - 2000.0) * dt;
            assert!((env[i] - (-0.5 * (t / sigma).powi(2)).exp()).abs() < 1e-3);
        }
        let expected = 2.0 * (2.0 * 2f64.ln()).sqrt() * sigma;
        let measured = full_width_half_max(&env, dt).unwrap();
        assert!((measured / expected - 1.0).abs() < 1e-3);
    }

    #[test]
    fn fwhm_of_triangle() {
        let v = [0.0, 0.5, 1.0, 0.5, 0.0];
        assert!((full_width_half_max(&v, 1.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(full_width_half_max(&[1.0, 0.9, 0.8], 1.0).is_err());
        assert!(full_width_half_max(&[0.0, 0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn half_power_band_interpolates() {
        let f = [1.0, 2.0, 3.0, 4.0, 5.0];
        let p = [0.0, 1.0, 2.0, 1.0, 0.0];
        assert_eq!(half_power_band(&f, &p).unwrap(), (2.0, 4.0));
    }

    #[test]
    fn smoothing_preserves_constants() {
        let v = vec![3.0; 50];
        assert!(smooth(&v, 2.5).iter().all(|x| (x - 3.0).abs() < 1e-12));
    }
}

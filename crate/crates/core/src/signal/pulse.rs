use super::analysis::{envelope, full_width_half_max};
use super::TimeTrace;
use crate::{Error, Result};

const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_4; // 2·sqrt(2 ln 2)

fn sample(fc: f64, sigma: f64, dt: f64, n: usize) -> Vec<f64> {
    let center = (n - 1) / 2;
    (0..n)
        .map(|i| {
            let t = (i as f64 - center as f64) * dt;
            (-0.5 * (t / sigma).powi(2)).exp() * (std::f64::consts::TAU * fc * t).cos()
        })
        .collect()
}

/// Gaussian-modulated cosine of carrier `fc`, peaking at 1 on the centre
/// sample, with `t0 = 0` and an odd sample count covering `duration`.
///
/// The Gaussian width is tuned so that the FWHM of the pulse's measured
/// envelope (see [`envelope`]) equals `fwhm`. For wideband pulses this is
/// a few percent narrower than the nominal Gaussian, because the spectrum
/// overlaps its own negative-frequency image.
pub fn synthesize_pulse(fc: f64, fwhm: f64, dt: f64, duration: f64) -> Result<TimeTrace> {
    for (name, v) in [("carrier", fc), ("fwhm", fwhm), ("dt", dt), ("duration", duration)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    if fc >= 0.5 / dt {
        return Err(Error::InvalidParameter(format!("carrier {fc} Hz is above the Nyquist limit of dt = {dt} s")));
    }
    let mut n = (duration / dt).round() as usize + 1;
    if n % 2 == 0 {
        n += 1;
    }
    let half_span = (n - 1) as f64 / 2.0 * dt;

    let measure = |sigma: f64| full_width_half_max(&envelope(&sample(fc, sigma, dt, n)), dt);
    let mut s0 = fwhm / FWHM_PER_SIGMA;
    let mut g0 = measure(s0)? - fwhm;
    let mut s1 = s0 * 0.97;
    for _ in 0..40 {
        let g1 = measure(s1)? - fwhm;
        if g1.abs() < 1e-9 * fwhm || g1 == g0 {
            break;
        }
        let next = s1 - g1 * (s1 - s0) / (g1 - g0);
        (s0, g0, s1) = (s1, g1, next);
    }
    let sigma = s1;

    let edge = (-0.5 * (half_span / sigma).powi(2)).exp();
    if edge >= 1e-4 {
        return Err(Error::InvalidParameter(format!(
            "duration {duration} s truncates the envelope at {edge:.2e} of its peak"
        )));
    }
    TimeTrace::new(0.0, dt, sample(fc, sigma, dt, n))
}

use std::f64::consts::TAU;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralPeak {
    /// Angular frequency in units of `gamma_0`.
    pub omega: f64,
    pub magnitude: f64,
}

/// The `count` largest local maxima of the Hann-windowed, zero-padded
/// magnitude spectrum of `values` (sample spacing `dt`), strongest first.
/// Peak positions are refined by a parabola through the log-magnitudes.
/// The mean is removed first.
pub fn dominant_peaks(values: &[f64], dt: f64, zero_pad: usize, count: usize) -> Result<Vec<SpectralPeak>> {
    let n = values.len();
    if n < 4 {
        return Err(Error::InvalidParameter("spectrum needs at least four samples".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let len = (n * zero_pad.max(1)).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); len];
    for (k, (slot, v)) in buf.iter_mut().zip(values).enumerate() {
        let w = 0.5 - 0.5 * (TAU * k as f64 / (n - 1) as f64).cos();
        *slot = Complex::new((v - mean) * w, 0.0);
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let mag: Vec<f64> = buf[..=len / 2].iter().map(|c| c.norm()).collect();
    let bin = TAU / (len as f64 * dt);

    let mut peaks: Vec<SpectralPeak> = (1..mag.len() - 1)
        .filter(|&k| mag[k] > mag[k - 1] && mag[k] >= mag[k + 1] && mag[k] > 0.0)
        .map(|k| {
            let (a, b, c) = (mag[k - 1].ln(), mag[k].ln(), mag[k + 1].ln());
            let denom = a - 2.0 * b + c;
            let p = if denom < 0.0 && a.is_finite() && c.is_finite() {
                (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
            } else {
                0.0
            };
            SpectralPeak {
                omega: (k as f64 + p) * bin,
                magnitude: (b - 0.25 * (a - c) * p).exp(),
            }
        })
        .collect();
    peaks.sort_by(|x, y| y.magnitude.total_cmp(&x.magnitude));
    peaks.truncate(count);
    Ok(peaks)
}

/// Centered moving average applied twice (triangular kernel) with a
/// window of `width` samples; windows shrink at the ends.
pub fn moving_baseline(values: &[f64], width: usize) -> Vec<f64> {
    let pass = |v: &[f64]| -> Vec<f64> {
        let n = v.len();
        let half = width / 2;
        let mut prefix = vec![0.0; n + 1];
        for (k, x) in v.iter().enumerate() {
            prefix[k + 1] = prefix[k] + x;
        }
        (0..n)
            .map(|k| {
                let lo = k.saturating_sub(half);
                let hi = (k + width - half).min(n);
                (prefix[hi] - prefix[lo]) / (hi - lo) as f64
            })
            .collect()
    };
    if width <= 1 {
        return values.to_vec();
    }
    pass(&pass(values))
}

/// Samples per period of `omega`, rounded to an odd count so averaging
/// windows stay centered.
pub(crate) fn period_samples(omega: f64, dt: f64) -> usize {
    let n = ((TAU / omega / dt).round() as usize).max(3);
    n | 1
}

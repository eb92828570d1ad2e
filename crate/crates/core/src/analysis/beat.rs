//! Beat detection on a single oscillating column.
//!
//! The slowly varying part of the column is removed with a triangular
//! moving average one carrier period wide. Upper and lower envelopes are
//! natural cubic splines through the residual's maxima and minima, and
//! their half-difference is the oscillation amplitude. Its overall
//! exponential decay is fitted and divided out before measuring depth,
//! so a plain damped oscillation does not register as modulated.

use std::fmt;

use super::spectrum::{dominant_peaks, moving_baseline, period_samples};
use super::spline::CubicSpline;
use super::{uniform_step, CorrelationTrace};
use crate::error::{Error, Result};

pub const MIN_MAXIMA: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeatOptions {
    /// Depth above which a beat is declared.
    pub beat_threshold: f64,
    /// Depth below which the column is a plain oscillation.
    pub oscillation_threshold: f64,
    /// Zero-padding factor of the spectrum.
    pub zero_pad: usize,
    /// A second spectral peak weaker than this fraction of the first is ignored.
    pub secondary_peak_ratio: f64,
    /// Envelope dips shallower than this fraction of the envelope maximum
    /// are not beat nodes.
    pub node_prominence: f64,
}

impl Default for BeatOptions {
    fn default() -> Self {
        Self {
            beat_threshold: 0.5,
            oscillation_threshold: 0.2,
            zero_pad: 16,
            secondary_peak_ratio: 0.1,
            node_prominence: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BeatClass {
    Beat,
    Oscillation,
    Indeterminate,
}

impl BeatClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            BeatClass::Beat => "beat",
            BeatClass::Oscillation => "oscillation",
            BeatClass::Indeterminate => "indeterminate",
        }
    }
}

impl fmt::Display for BeatClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeatReport {
    pub envelope_minima_times: Vec<f64>,
    pub modulation_depth: f64,
    /// Mean of the two dominant angular frequencies.
    pub carrier_freq: f64,
    /// Half their difference; zero when only one peak is significant.
    pub envelope_freq: f64,
    pub classification: BeatClass,
    /// Fitted exponential rate of the amplitude (negative when decaying).
    pub amplitude_rate: f64,
    pub maxima_count: usize,
}

impl BeatReport {
    /// Flat `beat.key = value` pairs for CSV metadata.
    pub fn to_meta(&self) -> Vec<(String, String)> {
        let minima = self
            .envelope_minima_times
            .iter()
            .map(|t| format!("{t:.6}"))
            .collect::<Vec<_>>()
            .join(" ");
        vec![
            ("beat.classification".into(), self.classification.to_string()),
            ("beat.modulation_depth".into(), format!("{:.6}", self.modulation_depth)),
            ("beat.carrier_freq".into(), format!("{:.6}", self.carrier_freq)),
            ("beat.envelope_freq".into(), format!("{:.6}", self.envelope_freq)),
            ("beat.envelope_minima_times".into(), minima),
            ("beat.amplitude_rate".into(), format!("{:.6}", self.amplitude_rate)),
            ("beat.maxima_count".into(), self.maxima_count.to_string()),
        ]
    }
}

impl fmt::Display for BeatReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.to_meta() {
            writeln!(f, "# {k} = {v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
struct Extremum {
    t: f64,
    value: f64,
    is_max: bool,
}

/// Oscillating part of a column and the index range where it is reliable.
struct Residual {
    values: Vec<f64>,
    lo: usize,
    hi: usize,
}

fn insufficient(found: usize) -> Error {
    Error::InsufficientOscillation {
        found,
        needed: MIN_MAXIMA,
    }
}

fn residual(values: &[f64], dt: f64, zero_pad: usize) -> Result<Residual> {
    let n = values.len();
    if n < 8 {
        return Err(insufficient(0));
    }
    // Differencing suppresses the slow trend so the carrier dominates.
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let carrier = dominant_peaks(&diffs, dt, zero_pad, 1)?
        .first()
        .copied()
        .ok_or_else(|| insufficient(0))?;
    let width = period_samples(carrier.omega, dt);
    if 2 * width + 3 >= n {
        return Err(insufficient(0));
    }
    let base = moving_baseline(values, width);
    Ok(Residual {
        values: values.iter().zip(&base).map(|(v, b)| v - b).collect(),
        lo: width,
        hi: n - width,
    })
}

/// Local extrema with parabolic refinement, filtered to positive maxima and
/// negative minima, and thinned so maxima and minima alternate.
fn alternating_extrema(r: &Residual, t0: f64, dt: f64) -> Vec<Extremum> {
    let y = &r.values;
    let mut out: Vec<Extremum> = Vec::new();
    for k in r.lo.max(1)..r.hi.min(y.len() - 1) {
        let (a, b, c) = (y[k - 1], y[k], y[k + 1]);
        let is_max = b > a && b >= c && b > 0.0;
        let is_min = b < a && b <= c && b < 0.0;
        if !(is_max || is_min) {
            continue;
        }
        let denom = a - 2.0 * b + c;
        let p = if denom != 0.0 { (0.5 * (a - c) / denom).clamp(-0.5, 0.5) } else { 0.0 };
        let e = Extremum {
            t: t0 + (k as f64 + p) * dt,
            value: b - 0.25 * (a - c) * p,
            is_max,
        };
        match out.last_mut() {
            Some(last) if last.is_max == e.is_max => {
                if e.value.abs() > last.value.abs() {
                    *last = e;
                }
            }
            _ => out.push(e),
        }
    }
    out
}

/// Least-squares slope of `ln|value|` against time.
fn log_linear_rate(points: &[Extremum]) -> f64 {
    let n = points.len() as f64;
    let mt = points.iter().map(|p| p.t).sum::<f64>() / n;
    let my = points.iter().map(|p| p.value.abs().ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for p in points {
        let dx = p.t - mt;
        sxy += dx * (p.value.abs().ln() - my);
        sxx += dx * dx;
    }
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}

/// Indices of local minima whose topographic prominence is at least `min_prominence`.
fn prominent_minima(env: &[f64], min_prominence: f64) -> Vec<usize> {
    let n = env.len();
    let mut out = Vec::new();
    for k in 1..n.saturating_sub(1) {
        if !(env[k] < env[k - 1] && env[k] <= env[k + 1]) {
            continue;
        }
        let mut left = env[k];
        for j in (0..k).rev() {
            if env[j] < env[k] {
                break;
            }
            left = left.max(env[j]);
        }
        let mut right = env[k];
        for &v in &env[k + 1..] {
            if v < env[k] {
                break;
            }
            right = right.max(v);
        }
        if left.min(right) - env[k] >= min_prominence {
            out.push(k);
        }
    }
    out
}

pub fn beat_analysis_series(times: &[f64], values: &[f64], opts: &BeatOptions) -> Result<BeatReport> {
    if times.len() != values.len() {
        return Err(Error::InvalidParameter("times and values differ in length".into()));
    }
    let dt = uniform_step(times)?;
    let r = residual(values, dt, opts.zero_pad)?;
    let extrema = alternating_extrema(&r, times[0], dt);
    let (maxima, minima): (Vec<Extremum>, Vec<Extremum>) = extrema.iter().partition(|e| e.is_max);
    if maxima.len() < MIN_MAXIMA || minima.len() < 2 {
        return Err(insufficient(maxima.len()));
    }

    let upper = CubicSpline::new(maxima.iter().map(|e| e.t).collect(), maxima.iter().map(|e| e.value).collect())?;
    let lower = CubicSpline::new(minima.iter().map(|e| e.t).collect(), minima.iter().map(|e| -e.value).collect())?;
    let start = upper.domain().0.max(lower.domain().0);
    let end = upper.domain().1.min(lower.domain().1);

    let rate = log_linear_rate(&extrema);
    let window: Vec<f64> = times.iter().copied().filter(|t| *t >= start && *t <= end).collect();
    let envelope: Vec<f64> = window
        .iter()
        .map(|&t| 0.5 * (upper.eval(t) + lower.eval(t)) * (-rate * (t - start)).exp())
        .collect();
    let env_max = envelope.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(env_max > 0.0) {
        return Err(Error::Numerical("envelope has no positive amplitude".into()));
    }
    let env_min = envelope.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
    let modulation_depth = ((env_max - env_min) / env_max).clamp(0.0, 1.0);
    let envelope_minima_times = prominent_minima(&envelope, opts.node_prominence * env_max)
        .into_iter()
        .map(|k| window[k])
        .collect();

    let peaks = dominant_peaks(&r.values[r.lo..r.hi], dt, opts.zero_pad, 2)?;
    let (carrier_freq, envelope_freq) = match peaks.as_slice() {
        [p1, p2] if p2.magnitude >= opts.secondary_peak_ratio * p1.magnitude => {
            (0.5 * (p1.omega + p2.omega), 0.5 * (p1.omega - p2.omega).abs())
        }
        [p1, ..] => (p1.omega, 0.0),
        [] => return Err(insufficient(maxima.len())),
    };

    let classification = if modulation_depth > opts.beat_threshold {
        BeatClass::Beat
    } else if modulation_depth < opts.oscillation_threshold {
        BeatClass::Oscillation
    } else {
        BeatClass::Indeterminate
    };

    Ok(BeatReport {
        envelope_minima_times,
        modulation_depth,
        carrier_freq,
        envelope_freq,
        classification,
        amplitude_rate: rate,
        maxima_count: maxima.len(),
    })
}

pub fn beat_analysis(trace: &CorrelationTrace, column: &str, opts: &BeatOptions) -> Result<BeatReport> {
    beat_analysis_series(&trace.times, trace.require(column)?, opts)
}

/// Dominant angular frequency of the oscillating part of a column.
pub fn oscillation_frequency(times: &[f64], values: &[f64], zero_pad: usize) -> Result<f64> {
    let dt = uniform_step(times)?;
    let r = residual(values, dt, zero_pad)?;
    dominant_peaks(&r.values[r.lo..r.hi], dt, zero_pad, 1)?
        .first()
        .map(|p| p.omega)
        .ok_or_else(|| insufficient(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(t_max: f64, dt: f64) -> Vec<f64> {
        let n = (t_max / dt).round() as usize;
        (0..=n).map(|k| k as f64 * dt).collect()
    }

    #[test]
    fn two_tones_beat() {
        let t = grid(25.0, 0.01);
        let y: Vec<f64> = t
            .iter()
            .map(|t| 1.0 - 0.002 * t + 1e-3 * (-0.2 * t).exp() * ((10.0 * t).cos() + 0.8 * (9.0 * t).cos()))
            .collect();
        let r = beat_analysis_series(&t, &y, &BeatOptions::default()).unwrap();
        assert_eq!(r.classification, BeatClass::Beat);
        assert!(r.modulation_depth > 0.8, "{r:?}");
        assert!(r.envelope_minima_times.len() >= 3, "{r:?}");
        for (k, tm) in r.envelope_minima_times.iter().enumerate() {
            let node = std::f64::consts::PI * (2 * k + 1) as f64;
            assert!((tm - node).abs() < 0.3, "{tm} vs {node}");
        }
        assert!((r.envelope_freq - 0.5).abs() < 0.05, "{r:?}");
        assert!((r.carrier_freq - 9.5).abs() < 0.1, "{r:?}");
        assert!(r.envelope_freq < r.carrier_freq);
        assert!((r.amplitude_rate + 0.2).abs() < 0.05, "{r:?}");
    }

    #[test]
    fn damped_single_tone_is_plain_oscillation() {
        let t = grid(25.0, 0.01);
        let y: Vec<f64> = t
            .iter()
            .map(|t| 0.9 - 0.001 * t + 2e-3 * (-0.2 * t).exp() * (10.0 * t).cos())
            .collect();
        let r = beat_analysis_series(&t, &y, &BeatOptions::default()).unwrap();
        assert_eq!(r.classification, BeatClass::Oscillation);
        assert!(r.modulation_depth < 0.05, "{r:?}");
        assert!(r.envelope_minima_times.is_empty(), "{r:?}");
        assert_eq!(r.envelope_freq, 0.0);
        assert!((r.carrier_freq - 10.0).abs() < 0.05);
    }

    #[test]
    fn flat_trace_is_insufficient() {
        let t = grid(10.0, 0.01);
        let y = vec![1.0; t.len()];
        assert!(matches!(
            beat_analysis_series(&t, &y, &BeatOptions::default()),
            Err(Error::InsufficientOscillation { .. })
        ));
        let slow: Vec<f64> = t.iter().map(|t| (0.3 * t).cos()).collect();
        assert!(matches!(
            beat_analysis_series(&t, &slow, &BeatOptions::default()),
            Err(Error::InsufficientOscillation { .. })
        ));
    }

    #[test]
    fn report_serializes_as_comment_lines() {
        let report = BeatReport {
            envelope_minima_times: vec![3.1, 9.4],
            modulation_depth: 0.87,
            carrier_freq: 9.5,
            envelope_freq: 0.5,
            classification: BeatClass::Beat,
            amplitude_rate: -0.2,
            maxima_count: 30,
        };
        let text = report.to_string();
        assert!(text.lines().all(|l| l.starts_with("# beat.")));
        assert!(text.contains("# beat.envelope_minima_times = 3.100000 9.400000"));
        assert!(text.contains("# beat.classification = beat"));
    }
}

use super::CorrelationTrace;
use crate::error::Result;

/// Values at or below this count as zero entanglement.
pub const ESD_THRESHOLD: f64 = 1e-12;
/// Runs shorter than this many samples are isolated zeros, not dead intervals.
const MIN_RUN: usize = 2;
const BISECTION_STEPS: usize = 80;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EsdInterval {
    pub start: f64,
    pub end: f64,
}

impl EsdInterval {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Boundary between `outside` (value above threshold) and `inside`.
fn bisect(f: &dyn Fn(f64) -> f64, mut outside: f64, mut inside: f64) -> f64 {
    if f(outside) <= ESD_THRESHOLD || f(inside) > ESD_THRESHOLD {
        return inside;
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (outside + inside);
        if mid == outside || mid == inside {
            break;
        }
        if f(mid) <= ESD_THRESHOLD {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Maximal runs of at least two samples at or below [`ESD_THRESHOLD`].
/// When `refine` evaluates the column at arbitrary times, interior
/// boundaries are located by bisection between neighbouring samples.
pub fn detect_esd_intervals(
    times: &[f64],
    values: &[f64],
    refine: Option<&dyn Fn(f64) -> f64>,
) -> Vec<EsdInterval> {
    let n = times.len().min(values.len());
    let mut out = Vec::new();
    let mut k = 0;
    while k < n {
        if values[k] > ESD_THRESHOLD {
            k += 1;
            continue;
        }
        let first = k;
        while k < n && values[k] <= ESD_THRESHOLD {
            k += 1;
        }
        let last = k - 1;
        if last + 1 - first < MIN_RUN {
            continue;
        }
        let mut interval = EsdInterval {
            start: times[first],
            end: times[last],
        };
        if let Some(f) = refine {
            if first > 0 {
                interval.start = bisect(f, times[first - 1], times[first]);
            }
            if last + 1 < n {
                interval.end = bisect(f, times[last + 1], times[last]);
            }
        }
        out.push(interval);
    }
    out
}

impl CorrelationTrace {
    pub fn esd_intervals(&self, column: &str, refine: Option<&dyn Fn(f64) -> f64>) -> Result<Vec<EsdInterval>> {
        Ok(detect_esd_intervals(&self.times, self.require(column)?, refine))
    }
}

use super::{uniform_grid, GTrace, ReservoirParams, GAMMA0};
use crate::error::{Error, Result};
use crate::linalg::C64;

/// Below this `|d|` the two characteristic roots coincide and the
/// double-root limit is used directly.
pub const DEGENERATE_D_THRESHOLD: f64 = 1e-8;

/// `|d t / 2|` below which `sinh(x)/x` is taken from its Taylor series.
const SERIES_THRESHOLD: f64 = 0.05;

/// Exact survival amplitude for the Lorentzian reservoir,
///
/// `G(t) = e^{-s t/2} [cosh(d t/2) + (s/d) sinh(d t/2)]`, `s = lambda - i delta`,
/// `d = sqrt(s^2 - 2 gamma0 lambda)`.
///
/// Evaluated as `c+ e^{r+ t} + c- e^{r- t}` with `r± = (-s ± d)/2` so it
/// stays finite for long times. The result does not depend on the branch
/// of `d`.
pub fn g_closed_form(t: f64, p: &ReservoirParams) -> C64 {
    let s = p.complex_rate();
    let d = (s * s - 2.0 * GAMMA0 * p.lambda).sqrt();
    g_from_roots(t, s, d)
}

pub(crate) fn g_from_roots(t: f64, s: C64, d: C64) -> C64 {
    if t == 0.0 {
        return C64::new(1.0, 0.0);
    }
    let half = 0.5 * t;
    let x = d * half;
    if d.norm() < DEGENERATE_D_THRESHOLD {
        // Double root: e^{-s t/2} (1 + s t/2).
        return (-s * half).exp() * (1.0 + s * half);
    }
    let grow = (-s * half + x).exp();
    let shrink = (-s * half - x).exp();
    let cosh_part = 0.5 * (grow + shrink);
    let sinh_part = if x.norm() < SERIES_THRESHOLD {
        // (s/d) sinh(x) = s (t/2) sinh(x)/x, free of the 1/d cancellation.
        s * half * (-s * half).exp() * sinhc_series(x)
    } else {
        s / d * 0.5 * (grow - shrink)
    };
    cosh_part + sinh_part
}

fn sinhc_series(x: C64) -> C64 {
    let x2 = x * x;
    // 1 + x^2/3! + x^4/5! + x^6/7! + x^8/9!
    1.0 + x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0 * (1.0 + x2 / 72.0)))
}

/// Closed-form amplitude sampled at `n_intervals + 1` points on `[0, t_max]`.
pub fn g_closed_form_trace(p: &ReservoirParams, t_max: f64, n_intervals: usize) -> Result<GTrace> {
    if !(t_max > 0.0) || n_intervals == 0 {
        return Err(Error::InvalidParameter(format!(
            "need t_max > 0 and at least one interval (t_max = {t_max}, n = {n_intervals})"
        )));
    }
    let times = uniform_grid(t_max, n_intervals);
    let values = times.iter().map(|&t| g_closed_form(t, p)).collect();
    Ok(GTrace {
        times,
        values,
        diagnostics: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textbook(t: f64, p: &ReservoirParams, d: C64) -> C64 {
        let s = p.complex_rate();
        (-s * t / 2.0).exp() * ((d * t / 2.0).cosh() + s / d * (d * t / 2.0).sinh())
    }

    #[test]
    fn initial_condition() {
        for (l, d) in [(0.2, 0.0), (5.0, 3.0), (2.0, 0.0), (1e-3, 2.0)] {
            let p = ReservoirParams::new(l, d).unwrap();
            assert_eq!(g_closed_form(0.0, &p), C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn resonant_strong_coupling_value() {
        // lambda = 0.2, delta = 0: d = 0.6 i, G(1) = e^{-0.1} (cos 0.3 + sin 0.3 / 3).
        let p = ReservoirParams::new(0.2, 0.0).unwrap();
        let g = g_closed_form(1.0, &p);
        let expected = (-0.1f64).exp() * (0.3f64.cos() + 0.3f64.sin() / 3.0);
        assert!((g.re - expected).abs() < 1e-15);
        assert!(g.im.abs() < 1e-15);
        assert!((g.re - 0.953_56).abs() < 5e-5);
    }

    #[test]
    fn agrees_with_textbook_form_where_it_is_finite() {
        for (l, delta) in [(0.2, 10.0), (0.2, 0.0), (5.0, 0.0), (0.7, -4.0), (3.0, 1.5)] {
            let p = ReservoirParams::new(l, delta).unwrap();
            let s = p.complex_rate();
            let d = (s * s - 2.0 * l).sqrt();
            for t in [0.01, 0.5, 2.0, 10.0, 30.0] {
                let a = g_closed_form(t, &p);
                let b = textbook(t, &p, d);
                assert!((a - b).norm() < 1e-11, "l={l} delta={delta} t={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn branch_of_d_is_irrelevant() {
        for (l, delta) in [(0.2, 10.0), (0.2, 0.0), (5.0, 0.0), (0.05, -7.0), (2.0, 0.3)] {
            let p = ReservoirParams::new(l, delta).unwrap();
            let s = p.complex_rate();
            let d = (s * s - 2.0 * l).sqrt();
            for t in [0.0, 0.001, 0.3, 4.0, 50.0, 500.0] {
                let a = g_from_roots(t, s, d);
                let b = g_from_roots(t, s, -d);
                assert!((a - b).norm() < 1e-13, "t={t}");
            }
        }
    }

    #[test]
    fn degenerate_double_root() {
        // (lambda - i delta)^2 = 2 gamma0 lambda at lambda = 2, delta = 0.
        let p = ReservoirParams::new(2.0, 0.0).unwrap();
        for t in [0.0f64, 0.5, 1.0, 7.0] {
            let expected = (-t).exp() * (1.0 + t);
            assert!((g_closed_form(t, &p).re - expected).abs() < 1e-15);
        }
        // Slightly off the double root the series branch takes over smoothly.
        let near = ReservoirParams::new(2.0 + 1e-9, 0.0).unwrap();
        for t in [0.5f64, 1.0, 7.0] {
            let expected = (-t).exp() * (1.0 + t);
            assert!((g_closed_form(t, &near) - expected).norm() < 1e-8);
        }
    }

    #[test]
    fn long_times_stay_finite_and_bounded() {
        for (l, delta) in [(0.2, 10.0), (0.05, 2.0), (5.0, 0.0), (1.0, 15.0)] {
            let p = ReservoirParams::new(l, delta).unwrap();
            for t in [100.0, 1e3, 1e4] {
                let g = g_closed_form(t, &p);
                assert!(g.norm().is_finite() && g.norm() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn small_width_limit_preserves_the_amplitude() {
        let p = ReservoirParams::new(1e-3, 2.0).unwrap();
        let trace = g_closed_form_trace(&p, 50.0, 5000).unwrap();
        let min = trace.values.iter().map(|g| g.norm()).fold(f64::INFINITY, f64::min);
        assert!(min >= 0.99, "min |G| = {min}");
    }
}

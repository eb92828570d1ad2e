//! Numerical solution of `G'(t) = -int_0^t f(t - s) G(s) ds`, `G(0) = 1`.
//!
//! Two routes:
//! * the exponential (Lorentzian) kernel reduces exactly to the linear
//!   system `G' = -gamma0 lambda / 2 * z`, `z' = G - (lambda - i delta) z`,
//!   integrated with classic RK4;
//! * any kernel can be stepped with trapezoidal product quadrature, which is
//!   second order in the step and costs `O(n^2)` kernel products.
//!
//! Both routes run at two step sizes; the difference is the error estimate
//! carried in [`SolverDiagnostics`].

use super::{uniform_grid, GTrace, MemoryKernel, ReservoirParams, TabulatedKernel, GAMMA0};
use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolterraOptions {
    /// Upper bound on the internal integration step.
    pub max_step: f64,
    /// Requested accuracy; compared against the step-doubling estimate.
    pub tolerance: f64,
    /// Combine the two quadrature runs by Richardson extrapolation.
    pub extrapolate: bool,
}

impl Default for VolterraOptions {
    fn default() -> Self {
        Self {
            max_step: 1e-3,
            tolerance: 1e-6,
            extrapolate: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverMethod {
    ExponentialOde,
    TrapezoidalQuadrature,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverDiagnostics {
    pub method: SolverMethod,
    /// Step of the finer of the two runs.
    pub internal_step: f64,
    pub substeps_per_sample: usize,
    /// Estimated max error of the returned values over the output grid.
    pub error_estimate: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
    pub max_modulus: f64,
}

/// What to integrate.
#[derive(Clone, Copy)]
pub enum KernelSource<'a> {
    Lorentzian(ReservoirParams),
    Tabulated(&'a TabulatedKernel),
}

/// Solves for `G` on `n_steps + 1` uniform samples over `[0, t_max]`.
///
/// Lorentzian kernels use the exact ODE reduction; tabulated kernels go
/// through the generic quadrature stepper.
pub fn volterra_solve(
    source: KernelSource<'_>,
    t_max: f64,
    n_steps: usize,
    opts: &VolterraOptions,
) -> Result<GTrace> {
    match source {
        KernelSource::Lorentzian(p) => solve_exponential_ode(&p, t_max, n_steps, opts),
        KernelSource::Tabulated(table) => solve_quadrature(table, t_max, n_steps, opts),
    }
}

fn check_grid(t_max: f64, n_steps: usize, opts: &VolterraOptions) -> Result<()> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidParameter(format!("t_max must be positive, got {t_max}")));
    }
    if n_steps < 10 {
        return Err(Error::InvalidParameter(format!(
            "need at least 10 output steps, got {n_steps}"
        )));
    }
    if !(opts.max_step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "max_step must be positive, got {}",
            opts.max_step
        )));
    }
    Ok(())
}

/// Internal substeps per output interval so that the step is `<= max_step`.
fn substeps(t_max: f64, n_steps: usize, max_step: f64) -> usize {
    let sample_dt = t_max / n_steps as f64;
    ((sample_dt / max_step).ceil() as usize).max(1)
}

/// RK4 integration of the exact two-variable reduction of the Lorentzian
/// kernel. The returned values come from the finer of two runs (`h` and
/// `h/2`); the estimate is `|G_h - G_{h/2}| / 15`.
pub fn solve_exponential_ode(
    p: &ReservoirParams,
    t_max: f64,
    n_steps: usize,
    opts: &VolterraOptions,
) -> Result<GTrace> {
    check_grid(t_max, n_steps, opts)?;
    let k = substeps(t_max, n_steps, opts.max_step);
    let sample_dt = t_max / n_steps as f64;
    let coarse = rk4_run(p, sample_dt / k as f64, k, n_steps);
    let fine = rk4_run(p, sample_dt / (2 * k) as f64, 2 * k, n_steps);
    let error_estimate = max_diff(&coarse, &fine) / 15.0;
    finish(
        fine,
        t_max,
        n_steps,
        SolverMethod::ExponentialOde,
        sample_dt / (2 * k) as f64,
        2 * k,
        error_estimate,
        opts,
    )
}

fn rk4_run(p: &ReservoirParams, h: f64, per_sample: usize, n_steps: usize) -> Vec<C64> {
    let coupling = 0.5 * GAMMA0 * p.lambda;
    let s = p.complex_rate();
    let rhs = |g: C64, z: C64| (-coupling * z, g - s * z);

    let mut out = Vec::with_capacity(n_steps + 1);
    let (mut g, mut z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    out.push(g);
    for _ in 0..n_steps {
        for _ in 0..per_sample {
            let (k1g, k1z) = rhs(g, z);
            let (k2g, k2z) = rhs(g + 0.5 * h * k1g, z + 0.5 * h * k1z);
            let (k3g, k3z) = rhs(g + 0.5 * h * k2g, z + 0.5 * h * k2z);
            let (k4g, k4z) = rhs(g + h * k3g, z + h * k3z);
            g += h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
            z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
        }
        out.push(g);
    }
    out
}

/// Trapezoidal product-quadrature stepping for an arbitrary kernel.
///
/// With `opts.extrapolate` the `h` and `h/2` runs are combined as
/// `(4 G_{h/2} - G_h) / 3`; the reported estimate is `|G_h - G_{h/2}| / 3`
/// either way, i.e. the error of the unextrapolated fine run.
pub fn solve_quadrature(
    kernel: &dyn MemoryKernel,
    t_max: f64,
    n_steps: usize,
    opts: &VolterraOptions,
) -> Result<GTrace> {
    check_grid(t_max, n_steps, opts)?;
    if t_max > kernel.max_lag() * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "kernel is tabulated up to lag {} but t_max = {t_max}",
            kernel.max_lag()
        )));
    }
    let k = substeps(t_max, n_steps, opts.max_step);
    let sample_dt = t_max / n_steps as f64;
    let coarse = trapezoid_run(kernel, sample_dt / k as f64, k, n_steps);
    let fine = trapezoid_run(kernel, sample_dt / (2 * k) as f64, 2 * k, n_steps);
    let error_estimate = max_diff(&coarse, &fine) / 3.0;
    let values = if opts.extrapolate {
        coarse
            .iter()
            .zip(&fine)
            .map(|(c, f)| (4.0 * f - c) / 3.0)
            .collect()
    } else {
        fine
    };
    finish(
        values,
        t_max,
        n_steps,
        SolverMethod::TrapezoidalQuadrature,
        sample_dt / (2 * k) as f64,
        2 * k,
        error_estimate,
        opts,
    )
}

fn trapezoid_run(kernel: &dyn MemoryKernel, h: f64, per_sample: usize, n_steps: usize) -> Vec<C64> {
    let total = n_steps * per_sample;
    let f: Vec<C64> = (0..=total).map(|j| kernel.value(j as f64 * h)).collect();
    let mut g = Vec::with_capacity(total + 1);
    g.push(C64::new(1.0, 0.0));

    // memory = int_0^{t_n} f(t_n - s) G(s) ds by the trapezoidal rule.
    let mut memory = C64::new(0.0, 0.0);
    let implicit = 1.0 + 0.25 * h * h * f[0];
    for n in 0..total {
        let m = n + 1;
        // Every node of the next memory integral except the unknown endpoint.
        let mut partial = 0.5 * f[m] * g[0];
        for j in 1..m {
            partial += f[m - j] * g[j];
        }
        partial *= h;
        let next = (g[n] - 0.5 * h * (memory + partial)) / implicit;
        memory = partial + 0.5 * h * f[0] * next;
        g.push(next);
    }
    g.into_iter().step_by(per_sample).collect()
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    mut values: Vec<C64>,
    t_max: f64,
    n_steps: usize,
    method: SolverMethod,
    internal_step: f64,
    substeps_per_sample: usize,
    error_estimate: f64,
    opts: &VolterraOptions,
) -> Result<GTrace> {
    values[0] = C64::new(1.0, 0.0);
    if values.iter().any(|g| !g.re.is_finite() || !g.im.is_finite()) {
        return Err(Error::Numerical("Volterra solution is not finite".into()));
    }
    let max_modulus = values.iter().map(|g| g.norm()).fold(0.0, f64::max);
    let within_tolerance = error_estimate <= opts.tolerance;
    if !within_tolerance {
        log::warn!(
            "Volterra step {internal_step:.3e} gives estimated error {error_estimate:.3e} > tolerance {:.3e}",
            opts.tolerance
        );
    }
    Ok(GTrace {
        times: uniform_grid(t_max, n_steps),
        values,
        diagnostics: Some(SolverDiagnostics {
            method,
            internal_step,
            substeps_per_sample,
            error_estimate,
            tolerance: opts.tolerance,
            within_tolerance,
            max_modulus,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reservoir::{g_closed_form, g_closed_form_trace, KernelFn};

    #[test]
    fn zero_kernel_keeps_amplitude() {
        let zero = KernelFn(|_| C64::new(0.0, 0.0));
        let trace = solve_quadrature(&zero, 5.0, 50, &VolterraOptions::default()).unwrap();
        assert!(trace.values.iter().all(|g| *g == C64::new(1.0, 0.0)));
    }

    #[test]
    fn ode_matches_closed_form_resonant() {
        let p = ReservoirParams::new(0.2, 0.0).unwrap();
        let trace = volterra_solve(KernelSource::Lorentzian(p), 50.0, 500, &VolterraOptions::default()).unwrap();
        let exact = g_closed_form_trace(&p, 50.0, 500).unwrap();
        assert!(trace.max_deviation(&exact).unwrap() < 1e-6);
        assert_eq!(trace.values[0], C64::new(1.0, 0.0));
        let diag = trace.diagnostics.unwrap();
        assert!(diag.within_tolerance);
        assert!(diag.internal_step <= 1e-3);
    }

    #[test]
    fn ode_matches_closed_form_far_detuned() {
        let p = ReservoirParams::new(0.2, 10.0).unwrap();
        let trace = solve_exponential_ode(&p, 50.0, 1000, &VolterraOptions::default()).unwrap();
        let exact = g_closed_form_trace(&p, 50.0, 1000).unwrap();
        assert!(trace.max_deviation(&exact).unwrap() <= 1e-6);
    }

    #[test]
    fn quadrature_is_second_order() {
        let p = ReservoirParams::new(0.2, 0.0).unwrap();
        let exact = g_closed_form(5.0, &p);
        let err = |h: f64| {
            let opts = VolterraOptions {
                max_step: h,
                extrapolate: false,
                ..Default::default()
            };
            let trace = solve_quadrature(&p, 5.0, 10, &opts).unwrap();
            (trace.values[10] - exact).norm()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((3.6..4.4).contains(&ratio), "error ratio {ratio}");
    }

    #[test]
    fn quadrature_matches_ode_reduction() {
        for (l, delta) in [(0.2, 0.0), (0.2, 10.0), (5.0, 0.0), (1.0, -3.0)] {
            let p = ReservoirParams::new(l, delta).unwrap();
            let opts = VolterraOptions::default();
            let ode = solve_exponential_ode(&p, 10.0, 100, &opts).unwrap();
            let quad = solve_quadrature(&p, 10.0, 100, &opts).unwrap();
            let dev = ode.max_deviation(&quad).unwrap();
            assert!(dev < 1e-8, "lambda={l} delta={delta}: {dev:.3e}");
        }
    }

    #[test]
    fn weak_coupling_population_is_monotone() {
        let p = ReservoirParams::new(5.0, 0.0).unwrap();
        let trace = solve_exponential_ode(&p, 20.0, 2000, &VolterraOptions::default()).unwrap();
        let pop = trace.populations();
        for w in pop.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn coarse_step_is_flagged() {
        let p = ReservoirParams::new(0.2, 10.0).unwrap();
        let opts = VolterraOptions {
            max_step: 0.5,
            tolerance: 1e-10,
            extrapolate: false,
        };
        let trace = solve_quadrature(&p, 20.0, 40, &opts).unwrap();
        let diag = trace.diagnostics.unwrap();
        assert!(!diag.within_tolerance);
        assert!(diag.error_estimate > 1e-10);
    }

    #[test]
    fn rejects_bad_grids() {
        let p = ReservoirParams::new(0.2, 0.0).unwrap();
        let opts = VolterraOptions::default();
        assert!(solve_exponential_ode(&p, 0.0, 100, &opts).is_err());
        assert!(solve_exponential_ode(&p, 1.0, 5, &opts).is_err());
    }
}

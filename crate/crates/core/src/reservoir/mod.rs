//! Single-qubit decoherence amplitude `G(t)` for a qubit in a vacuum
//! reservoir with a Lorentzian spectral density.
//!
//! Time is measured in units of `1/gamma0` and every rate or detuning in
//! units of `gamma0`, so `gamma0 = 1` throughout.

mod closed_form;
mod kernel_table;
mod volterra;

pub use closed_form::{g_closed_form, g_closed_form_trace, DEGENERATE_D_THRESHOLD};
#[cfg(test)]
pub(crate) use closed_form::g_from_roots;
pub use kernel_table::TabulatedKernel;
pub use volterra::{
    solve_exponential_ode, solve_quadrature, volterra_solve, KernelSource, SolverDiagnostics,
    SolverMethod, VolterraOptions,
};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Free-space decay rate; the unit of every rate in the crate.
pub const GAMMA0: f64 = 1.0;

/// Lorentzian environment of one qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReservoirParams {
    /// Half-width of the cavity line (photon leakage rate), `> 0`.
    pub lambda: f64,
    /// Qubit-cavity detuning `omega0 - omega_c`.
    pub delta: f64,
}

impl ReservoirParams {
    pub fn new(lambda: f64, delta: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Lorentzian width must be positive, got {lambda}"
            )));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("detuning {delta} is not finite")));
        }
        Ok(Self { lambda, delta })
    }

    /// `lambda - i delta`, the complex decay constant of the kernel.
    pub fn complex_rate(&self) -> C64 {
        C64::new(self.lambda, -self.delta)
    }

    /// `gamma0 > lambda / 2`: oscillatory, memory-dominated dynamics.
    pub fn is_strong_coupling(&self) -> bool {
        GAMMA0 > 0.5 * self.lambda
    }
}

/// Lorentzian spectral density `J(omega)` for a qubit of transition
/// frequency `omega0`; it peaks where `omega0 - omega = delta`.
pub fn spectral_density(omega: f64, omega0: f64, p: &ReservoirParams) -> f64 {
    let x = omega0 - omega - p.delta;
    GAMMA0 * p.lambda * p.lambda / (2.0 * PI * (x * x + p.lambda * p.lambda))
}

/// Reservoir correlation function `f(dt) = gamma0 lambda / 2 * exp(-(lambda - i delta) dt)`.
pub fn kernel(dt: f64, p: &ReservoirParams) -> C64 {
    0.5 * GAMMA0 * p.lambda * (-p.complex_rate() * dt).exp()
}

/// A memory kernel `f(dt)` for the integro-differential equation
/// `G'(t) = -int_0^t f(t - s) G(s) ds`.
pub trait MemoryKernel {
    fn value(&self, lag: f64) -> C64;

    /// Largest lag the kernel is defined for.
    fn max_lag(&self) -> f64 {
        f64::INFINITY
    }
}

impl MemoryKernel for ReservoirParams {
    fn value(&self, lag: f64) -> C64 {
        kernel(lag, self)
    }
}

/// Adapts a closure into a [`MemoryKernel`].
pub struct KernelFn<F>(pub F);

impl<F: Fn(f64) -> C64> MemoryKernel for KernelFn<F> {
    fn value(&self, lag: f64) -> C64 {
        (self.0)(lag)
    }
}

/// Time-sampled survival amplitude of one qubit.
#[derive(Clone, Debug)]
pub struct GTrace {
    pub times: Vec<f64>,
    pub values: Vec<C64>,
    /// Present for numerically integrated traces.
    pub diagnostics: Option<SolverDiagnostics>,
}

impl GTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|g| g.norm()).fold(0.0, f64::max)
    }

    /// `|G(t_i)|^2` at every sample.
    pub fn populations(&self) -> Vec<f64> {
        self.values.iter().map(|g| g.norm_sqr()).collect()
    }

    /// Largest `|self - other|` over samples; both traces must share a grid.
    pub fn max_deviation(&self, other: &GTrace) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::InvalidParameter(format!(
                "trace lengths differ ({} vs {})",
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// `n_intervals + 1` uniformly spaced times on `[0, t_max]`.
pub(crate) fn uniform_grid(t_max: f64, n_intervals: usize) -> Vec<f64> {
    let dt = t_max / n_intervals as f64;
    (0..=n_intervals).map(|i| i as f64 * dt).collect()
}

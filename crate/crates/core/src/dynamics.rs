//! Two-qubit state at time `t` built from the two survival amplitudes.
//!
//! Each qubit undergoes the exact amplitude-damping map of its own
//! reservoir. For the two Bell-like families the resulting X-state elements
//! are written down directly; [`apply_local_damping`] composes the two
//! single-qubit maps on an arbitrary 4x4 matrix and serves as the
//! independent check of those closed-form elements.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix4, Mat2, Mat4, C64};

/// `|G|` may exceed 1 by this much from rounding before it is rejected.
pub const AMPLITUDE_TOL: f64 = 1e-9;
const NORM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BellFamily {
    /// `a|00> + b e^{i theta}|11>`
    Psi,
    /// `alpha|01> + beta e^{i delta}|10>`
    Phi,
}

impl BellFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            BellFamily::Psi => "psi",
            BellFamily::Phi => "phi",
        }
    }
}

impl fmt::Display for BellFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BellFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "psi" => Ok(BellFamily::Psi),
            "phi" => Ok(BellFamily::Phi),
            other => Err(Error::Config(format!("unknown state family '{other}' (psi|phi)"))),
        }
    }
}

/// Bell-like initial state of either family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialState {
    family: BellFamily,
    amp1: f64,
    amp2: f64,
    phase: f64,
}

impl InitialState {
    pub fn new(family: BellFamily, amp1: f64, amp2: f64, phase: f64) -> Result<Self> {
        if !(amp1 >= 0.0 && amp2 >= 0.0) || !phase.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "amplitudes must be non-negative and the phase finite ({amp1}, {amp2}, {phase})"
            )));
        }
        let norm = amp1 * amp1 + amp2 * amp2;
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            family,
            amp1,
            amp2,
            phase,
        })
    }

    pub fn psi(a: f64, b: f64, theta: f64) -> Result<Self> {
        Self::new(BellFamily::Psi, a, b, theta)
    }

    pub fn phi(alpha: f64, beta: f64, delta: f64) -> Result<Self> {
        Self::new(BellFamily::Phi, alpha, beta, delta)
    }

    /// Maximally entangled member of the family with the given phase.
    pub fn bell(family: BellFamily, phase: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            family,
            amp1: s,
            amp2: s,
            phase,
        }
    }

    /// State whose first amplitude squared is `weight` (`a^2` or `alpha^2`).
    pub fn with_weight(family: BellFamily, weight: f64, phase: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::InvalidParameter(format!("weight {weight} outside [0, 1]")));
        }
        Self::new(family, weight.sqrt(), (1.0 - weight).sqrt(), phase)
    }

    pub fn family(&self) -> BellFamily {
        self.family
    }

    pub fn amp1(&self) -> f64 {
        self.amp1
    }

    pub fn amp2(&self) -> f64 {
        self.amp2
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn state_vector(&self) -> [C64; 4] {
        let zero = C64::new(0.0, 0.0);
        let first = C64::new(self.amp1, 0.0);
        let second = C64::from_polar(self.amp2, self.phase);
        match self.family {
            BellFamily::Psi => [first, zero, zero, second],
            BellFamily::Phi => [zero, first, second, zero],
        }
    }

    pub fn projector(&self) -> Mat4 {
        Mat4::projector(&self.state_vector())
    }
}

/// Two-qubit state at time `t`.
#[derive(Clone, Copy, Debug)]
pub struct EvolvedState {
    pub rho: DensityMatrix4,
    pub g_a: C64,
    pub g_b: C64,
    pub t: f64,
    pub family: BellFamily,
}

impl EvolvedState {
    pub fn new(t: f64, initial: &InitialState, g_a: C64, g_b: C64) -> Result<Self> {
        Ok(Self {
            rho: evolve(initial, g_a, g_b)?,
            g_a,
            g_b,
            t,
            family: initial.family(),
        })
    }
}

fn check_amplitude(g: C64) -> Result<()> {
    let modulus = g.norm();
    if !(modulus <= 1.0 + AMPLITUDE_TOL) {
        return Err(Error::UnphysicalAmplitude { modulus });
    }
    Ok(())
}

/// The amplitude-damping map as a linear map on arbitrary 2x2 matrices
/// (basis `|0>` ground, `|1>` excited).
fn damp_linear(m: &Mat2, g: C64) -> Mat2 {
    let p = g.norm_sqr();
    let mut out = Mat2::zeros();
    out[(1, 1)] = p * m[(1, 1)];
    out[(0, 0)] = m[(0, 0)] + (1.0 - p) * m[(1, 1)];
    out[(1, 0)] = g * m[(1, 0)];
    out[(0, 1)] = g.conj() * m[(0, 1)];
    out
}

/// Exact single-qubit evolution for survival amplitude `g`.
pub fn single_qubit_map(rho: &Mat2, g: C64) -> Result<Mat2> {
    check_amplitude(g)?;
    let dev = rho.hermiticity_deviation();
    if dev > 1e-12 {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let tr = rho.trace().re;
    if (tr - 1.0).abs() > 1e-12 {
        return Err(Error::TraceNotUnit { trace: tr });
    }
    let det = (rho[(0, 0)] * rho[(1, 1)] - rho[(0, 1)] * rho[(1, 0)]).re;
    if rho[(0, 0)].re < -1e-12 || rho[(1, 1)].re < -1e-12 || det < -1e-12 {
        return Err(Error::NotPositive { eigenvalue: det.min(rho[(0, 0)].re).min(rho[(1, 1)].re) });
    }
    Ok(damp_linear(rho, g))
}

/// Applies the damping map of qubit A (amplitude `g_a`) and qubit B
/// (amplitude `g_b`) to an arbitrary 4x4 matrix by expanding it in
/// products of 2x2 matrix units.
pub fn apply_local_damping(rho: &Mat4, g_a: C64, g_b: C64) -> Mat4 {
    let unit = |i: usize, j: usize| {
        let mut e = Mat2::zeros();
        e[(i, j)] = C64::new(1.0, 0.0);
        e
    };
    let mut out = Mat4::zeros();
    for a in 0..2 {
        for a2 in 0..2 {
            let ea = damp_linear(&unit(a, a2), g_a);
            for b in 0..2 {
                for b2 in 0..2 {
                    let coeff = rho[(2 * a + b, 2 * a2 + b2)];
                    if coeff == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let eb = damp_linear(&unit(b, b2), g_b);
                    out = out + ea.kron(&eb).scale(coeff);
                }
            }
        }
    }
    out
}

/// Closed-form evolved state for the `psi` family.
pub fn evolve_psi(state: &InitialState, g_a: C64, g_b: C64) -> Result<DensityMatrix4> {
    if state.family != BellFamily::Psi {
        return Err(Error::InvalidParameter("evolve_psi needs a psi-family state".into()));
    }
    check_amplitude(g_a)?;
    check_amplitude(g_b)?;
    let (a, b) = (state.amp1, state.amp2);
    let (pa, pb) = (g_a.norm_sqr(), g_b.norm_sqr());
    let b2 = b * b;
    let mut m = Mat4::from_diag([
        a * a + (1.0 - pa) * (1.0 - pb) * b2,
        (1.0 - pa) * pb * b2,
        pa * (1.0 - pb) * b2,
        pa * pb * b2,
    ]);
    let coherence = g_a.conj() * g_b.conj() * a * b * C64::from_polar(1.0, -state.phase);
    m[(0, 3)] = coherence;
    m[(3, 0)] = coherence.conj();
    DensityMatrix4::new(m)
}

/// Closed-form evolved state for the `phi` family.
pub fn evolve_phi(state: &InitialState, g_a: C64, g_b: C64) -> Result<DensityMatrix4> {
    if state.family != BellFamily::Phi {
        return Err(Error::InvalidParameter("evolve_phi needs a phi-family state".into()));
    }
    check_amplitude(g_a)?;
    check_amplitude(g_b)?;
    let (alpha, beta) = (state.amp1, state.amp2);
    let (pa, pb) = (g_a.norm_sqr(), g_b.norm_sqr());
    let mut m = Mat4::from_diag([
        (1.0 - pb) * alpha * alpha + (1.0 - pa) * beta * beta,
        alpha * alpha * pb,
        beta * beta * pa,
        0.0,
    ]);
    let coherence = alpha * beta * C64::from_polar(1.0, -state.phase) * g_a.conj() * g_b;
    m[(1, 2)] = coherence;
    m[(2, 1)] = coherence.conj();
    DensityMatrix4::new(m)
}

pub fn evolve(state: &InitialState, g_a: C64, g_b: C64) -> Result<DensityMatrix4> {
    match state.family {
        BellFamily::Psi => evolve_psi(state, g_a, g_b),
        BellFamily::Phi => evolve_phi(state, g_a, g_b),
    }
}

/// Matrix positions (0-based) that may be nonzero for the family's X state.
pub fn x_pattern(family: BellFamily) -> &'static [(usize, usize)] {
    match family {
        BellFamily::Psi => &[(0, 0), (1, 1), (2, 2), (3, 3), (0, 3), (3, 0)],
        BellFamily::Phi => &[(0, 0), (1, 1), (2, 2), (1, 2), (2, 1)],
    }
}

/// Largest modulus among entries outside the family's X pattern.
pub fn x_pattern_violation(rho: &Mat4, family: BellFamily) -> f64 {
    let allowed = x_pattern(family);
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            if !allowed.contains(&(i, j)) {
                worst = worst.max(rho[(i, j)].norm());
            }
        }
    }
    worst
}

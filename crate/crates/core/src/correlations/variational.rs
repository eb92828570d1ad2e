//! Classical correlation by direct optimization over projective
//! measurements on qubit B.

use std::f64::consts::{PI, TAU};

use crate::error::Result;
use crate::linalg::{binary_entropy_of_bloch, partial_trace, DensityMatrix4, Mat2, Subsystem, C64};

/// Outcomes with probability below this contribute no conditional entropy.
const MIN_OUTCOME_PROB: f64 = 1e-14;
const INV_GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Rank-1 projective measurement `{|v><v|, 1 - |v><v|}` with
/// `|v> = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementBasis {
    pub theta: f64,
    pub phi: f64,
}

impl MeasurementBasis {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self {
            theta: theta.clamp(0.0, PI),
            phi: phi.rem_euclid(TAU),
        }
    }

    /// The two orthonormal vectors defining the projectors.
    pub fn vectors(&self) -> [[C64; 2]; 2] {
        let (s, c) = (0.5 * self.theta).sin_cos();
        let e = C64::from_polar(1.0, self.phi);
        [
            [C64::new(c, 0.0), e * s],
            [C64::new(-s, 0.0) * e.conj(), C64::new(c, 0.0)],
        ]
    }

    pub fn projectors(&self) -> [Mat2; 2] {
        self.vectors().map(|v| Mat2::projector(&v))
    }
}

/// Search resolution: `theta_steps + 1` polar angles over `[0, pi]` times
/// `phi_steps` azimuths over `[0, 2 pi)`, then golden-section refinement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub theta_steps: usize,
    pub phi_steps: usize,
    pub refine_rounds: usize,
    pub angle_tolerance: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            theta_steps: 64,
            phi_steps: 64,
            refine_rounds: 3,
            angle_tolerance: 1e-6,
        }
    }
}

impl GridSpec {
    pub fn coarse(theta_steps: usize, phi_steps: usize) -> Self {
        Self {
            theta_steps,
            phi_steps,
            refine_rounds: 0,
            ..Self::default()
        }
    }
}

/// Entropy of `rho_A` minus the average conditional entropy after measuring B.
struct Objective {
    rho: [[C64; 4]; 4],
    entropy_a: f64,
}

impl Objective {
    fn new(rho: &DensityMatrix4) -> Self {
        let reduced = partial_trace(rho, Subsystem::A);
        Self {
            rho: *rho.matrix().rows(),
            entropy_a: entropy_2x2(&reduced, 1.0),
        }
    }

    fn value(&self, basis: MeasurementBasis) -> f64 {
        let conditional: f64 = basis
            .vectors()
            .iter()
            .map(|v| {
                let m = self.conditional(v);
                let p = m[(0, 0)].re + m[(1, 1)].re;
                if p < MIN_OUTCOME_PROB {
                    0.0
                } else {
                    p * entropy_2x2(&m, p)
                }
            })
            .sum();
        self.entropy_a - conditional
    }

    /// Unnormalized `<v|_B rho |v>_B`.
    fn conditional(&self, v: &[C64; 2]) -> Mat2 {
        let mut out = Mat2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for b in 0..2 {
                    for b2 in 0..2 {
                        acc += v[b].conj() * self.rho[2 * i + b][2 * j + b2] * v[b2];
                    }
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

/// Entropy of the qubit state `m / p` from its Bloch radius.
fn entropy_2x2(m: &Mat2, p: f64) -> f64 {
    let diff = m[(0, 0)].re - m[(1, 1)].re;
    let r = ((diff * diff + 4.0 * m[(0, 1)].norm_sqr()).sqrt() / p).min(1.0);
    binary_entropy_of_bloch(r)
}

/// Best grid point then coordinate-wise golden-section refinement. The
/// result is a lower bound on the supremum over projective measurements.
pub fn classical_correlation_variational(
    rho: &DensityMatrix4,
    grid: &GridSpec,
) -> Result<(f64, MeasurementBasis)> {
    let objective = Objective::new(rho);
    let n_theta = grid.theta_steps.max(1);
    let n_phi = grid.phi_steps.max(1);
    let d_theta = PI / n_theta as f64;
    let d_phi = TAU / n_phi as f64;

    // Row-major scan with strict improvement keeps the lexicographically
    // smallest (theta, phi) among ties.
    let mut best = MeasurementBasis::new(0.0, 0.0);
    let mut best_value = f64::NEG_INFINITY;
    for i in 0..=n_theta {
        let theta = i as f64 * d_theta;
        // The poles do not depend on phi.
        let phi_count = if i == 0 || i == n_theta { 1 } else { n_phi };
        for j in 0..phi_count {
            let basis = MeasurementBasis {
                theta,
                phi: j as f64 * d_phi,
            };
            let v = objective.value(basis);
            if v > best_value {
                best_value = v;
                best = basis;
            }
        }
    }

    for _ in 0..grid.refine_rounds {
        let lo = (best.theta - d_theta).max(0.0);
        let hi = (best.theta + d_theta).min(PI);
        let (theta, v) = golden_max(|t| objective.value(MeasurementBasis { theta: t, ..best }), lo, hi, grid.angle_tolerance);
        if v > best_value {
            best_value = v;
            best.theta = theta;
        }
        let (phi, v) = golden_max(
            |p| objective.value(MeasurementBasis::new(best.theta, p)),
            best.phi - d_phi,
            best.phi + d_phi,
            grid.angle_tolerance,
        );
        if v > best_value {
            best_value = v;
            best.phi = phi.rem_euclid(TAU);
        }
    }
    Ok((best_value.max(0.0), best))
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_GOLDEN * (hi - lo);
    let mut x2 = lo + INV_GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_GOLDEN * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_GOLDEN * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

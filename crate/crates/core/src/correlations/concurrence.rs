use crate::dynamics::{BellFamily, InitialState};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigensystem, matrix_sqrt_psd, DensityMatrix4, Mat4, Matrix, C64};

/// Diagonal of the anti-diagonal matrix `sigma_y ⊗ sigma_y`.
const SPIN_FLIP_SIGNS: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];

/// Spin-flipped matrix `(sigma_y ⊗ sigma_y) m* (sigma_y ⊗ sigma_y)`:
/// entry `(i, j)` is `s_i s_j conj(m[3 - i][3 - j])`.
pub fn spin_flip(m: &Mat4) -> Mat4 {
    let mut out = Mat4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            out[(i, j)] = SPIN_FLIP_SIGNS[i] * SPIN_FLIP_SIGNS[j] * m[(3 - i, 3 - j)].conj();
        }
    }
    out
}

/// Square roots of the eigenvalues of `rho rho~`, descending.
///
/// These equal the singular values of `sqrt(rho) sqrt(rho~)`, which are read
/// off the Hermitian dilation `[[0, X], [X^dagger, 0]]` (eigenvalues `±sigma`).
/// Taking square roots of the eigenvalues of `sqrt(rho) rho~ sqrt(rho)`
/// instead would turn `1e-17` rounding into `1e-8` errors for the
/// rank-deficient states the dynamics produces.
pub fn wootters_lambdas(rho: &DensityMatrix4) -> Result<[f64; 4]> {
    let root = matrix_sqrt_psd(rho.matrix())?;
    let flipped_root = spin_flip(&root);
    let x = root * flipped_root;

    let mut dilation = Matrix::<8>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            dilation[(i, 4 + j)] = x[(i, j)];
            dilation[(4 + j, i)] = x[(i, j)].conj();
        }
    }
    let values = hermitian_eigensystem(&dilation)?.values;
    let mut lambdas = [values[0], values[1], values[2], values[3]];
    for l in lambdas.iter_mut() {
        if *l < -1e-9 {
            return Err(Error::Numerical(format!("negative singular value {l:.3e}")));
        }
        *l = l.max(0.0);
    }
    Ok(lambdas)
}

/// Wootters concurrence of an arbitrary two-qubit state.
pub fn concurrence_general(rho: &DensityMatrix4) -> Result<f64> {
    let l = wootters_lambdas(rho)?;
    Ok((l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0))
}

fn family_check(state: &InitialState, family: BellFamily) -> Result<()> {
    if state.family() != family {
        return Err(Error::InvalidParameter(format!(
            "expected a {family}-family state, got {}",
            state.family()
        )));
    }
    Ok(())
}

/// Closed-form concurrence of the evolved `psi` state; zero while the
/// sudden-death condition holds.
pub fn concurrence_psi(state: &InitialState, g_a: C64, g_b: C64) -> Result<f64> {
    family_check(state, BellFamily::Psi)?;
    let (a, b) = (state.amp1(), state.amp2());
    let prod = (g_a * g_b).norm();
    let mixing = ((1.0 - g_a.norm_sqr()) * (1.0 - g_b.norm_sqr())).max(0.0).sqrt();
    Ok((2.0 * prod * a * b - 2.0 * b * b * prod * mixing).max(0.0))
}

/// `|a| - |b| sqrt((1 - |G_A|^2)(1 - |G_B|^2)) < 0`: the psi state has no
/// entanglement at this instant.
pub fn esd_condition(state: &InitialState, g_a: C64, g_b: C64) -> bool {
    state.family() == BellFamily::Psi
        && state.amp1()
            - state.amp2() * ((1.0 - g_a.norm_sqr()) * (1.0 - g_b.norm_sqr())).max(0.0).sqrt()
            < 0.0
}

/// Closed-form concurrence `2 |alpha beta G_A G_B|` of the evolved `phi` state.
pub fn concurrence_phi(state: &InitialState, g_a: C64, g_b: C64) -> Result<f64> {
    family_check(state, BellFamily::Phi)?;
    Ok(2.0 * state.amp1() * state.amp2() * (g_a * g_b).norm())
}

pub fn concurrence_closed_form(state: &InitialState, g_a: C64, g_b: C64) -> f64 {
    match state.family() {
        BellFamily::Psi => concurrence_psi(state, g_a, g_b),
        BellFamily::Phi => concurrence_phi(state, g_a, g_b),
    }
    .expect("family matches by construction")
}

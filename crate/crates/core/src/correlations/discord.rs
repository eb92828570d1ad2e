//! Closed-form discord of the two evolved X-state families, with the
//! measurement on qubit B restricted to the sigma_z and sigma_x directions.

use crate::dynamics::{x_pattern_violation, BellFamily};
use crate::error::{Error, Result};
use crate::linalg::{binary_entropy_of_bloch, entropy_term, DensityMatrix4};

/// Entries outside the X pattern must vanish to this level.
const STRUCTURE_TOL: f64 = 1e-14;
/// Negative results below this are reported before clamping.
pub const CLAMP_WARN: f64 = 1e-6;

/// Intermediate quantities of the closed-form discord, kept for inspection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticDiscord {
    /// `S(rho_B)` in bits.
    pub entropy_b: f64,
    /// `-S(rho_AB)` in bits, i.e. `sum lambda log2 lambda`.
    pub neg_joint_entropy: f64,
    /// Conditional entropy after measuring B along z.
    pub s1: f64,
    /// Conditional entropy after measuring B in the equatorial plane.
    pub s2: f64,
    /// Discord before clamping.
    pub raw: f64,
    /// Discord reported to callers, `>= 0`.
    pub value: f64,
}

fn check_structure(rho: &DensityMatrix4, family: BellFamily) -> Result<()> {
    let violation = x_pattern_violation(rho.matrix(), family);
    if violation > STRUCTURE_TOL {
        return Err(Error::Structure(format!(
            "{family}-family discord needs its X pattern; off-pattern entry of size {violation:.3e}"
        )));
    }
    Ok(())
}

/// `eta = |x - y| / (x + y)` with an empty branch counted as pure.
fn bloch_ratio(x: f64, y: f64) -> f64 {
    let total = x + y;
    if total <= 0.0 {
        1.0
    } else {
        ((x - y).abs() / total).min(1.0)
    }
}

fn clamp(raw: f64, what: &str) -> f64 {
    if raw < 0.0 {
        if raw < -CLAMP_WARN {
            log::warn!("{what} discord {raw:.3e} clamped to 0");
        }
        0.0
    } else {
        raw
    }
}

/// Discord of the evolved `psi` state `a|00> + b e^{i theta}|11>`.
pub fn discord_psi_analytic(rho: &DensityMatrix4) -> Result<AnalyticDiscord> {
    check_structure(rho, BellFamily::Psi)?;
    let r = |i, j| rho.element(i, j);
    let (r11, r22, r33, r44) = (r(1, 1).re, r(2, 2).re, r(3, 3).re, r(4, 4).re);
    let c14 = r(1, 4).norm();

    let entropy_b = entropy_term(r11 + r33) + entropy_term(r22 + r44);

    let root = ((r11 - r44).powi(2) + 4.0 * c14 * c14).sqrt();
    let eigenvalues = [
        0.5 * ((r11 + r44) + root),
        0.5 * ((r11 + r44) - root),
        r22,
        r33,
    ];
    let neg_joint_entropy = -eigenvalues.iter().copied().map(entropy_term).sum::<f64>();

    let eta = bloch_ratio(r22, r44);
    let eta_prime = bloch_ratio(r11, r33);
    let s1 = (r22 + r44) * binary_entropy_of_bloch(eta) + (r11 + r33) * binary_entropy_of_bloch(eta_prime);
    let epsilon = ((r11 + r22 - r33 - r44).powi(2) + 4.0 * c14 * c14).sqrt().min(1.0);
    let s2 = binary_entropy_of_bloch(epsilon);

    let raw = entropy_b + neg_joint_entropy + s1.min(s2);
    Ok(AnalyticDiscord {
        entropy_b,
        neg_joint_entropy,
        s1,
        s2,
        raw,
        value: clamp(raw, "psi-family"),
    })
}

/// Discord of the evolved `phi` state `alpha|01> + beta e^{i delta}|10>`.
///
/// The joint spectrum is `{rho_11, rho_22 + rho_33, 0, 0}` because the
/// central block of this family stays rank one.
pub fn discord_phi_analytic(rho: &DensityMatrix4) -> Result<AnalyticDiscord> {
    check_structure(rho, BellFamily::Phi)?;
    let r = |i, j| rho.element(i, j);
    let (r11, r22, r33) = (r(1, 1).re, r(2, 2).re, r(3, 3).re);
    let c23 = r(2, 3).norm();

    let entropy_b = entropy_term(r11 + r33) + entropy_term(r22);
    let neg_joint_entropy = -(entropy_term(r11) + entropy_term(r22 + r33));

    let big_lambda = bloch_ratio(r11, r33);
    let s1 = (r11 + r33) * binary_entropy_of_bloch(big_lambda);
    let lambda_prime = ((r11 + r22 - r33).powi(2) + 4.0 * c23 * c23).sqrt().min(1.0);
    let s2 = binary_entropy_of_bloch(lambda_prime);

    let raw = entropy_b + neg_joint_entropy + s1.min(s2);
    Ok(AnalyticDiscord {
        entropy_b,
        neg_joint_entropy,
        s1,
        s2,
        raw,
        value: clamp(raw, "phi-family"),
    })
}

pub fn discord_analytic(rho: &DensityMatrix4, family: BellFamily) -> Result<AnalyticDiscord> {
    match family {
        BellFamily::Psi => discord_psi_analytic(rho),
        BellFamily::Phi => discord_phi_analytic(rho),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::{discord_variational, GridSpec};
    use crate::dynamics::{evolve, InitialState};
    use crate::linalg::C64;

    fn real(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn bell_states_carry_one_bit() {
        for family in [BellFamily::Psi, BellFamily::Phi] {
            let s = InitialState::bell(family, 0.3);
            let rho = evolve(&s, real(1.0), real(1.0)).unwrap();
            let d = discord_analytic(&rho, family).unwrap().value;
            assert!((d - 1.0).abs() < 1e-12, "{family}: {d}");
            let v = discord_variational(&rho, &GridSpec::default()).unwrap();
            assert!((v - 1.0).abs() < 1e-9, "{family} variational: {v}");
        }
    }

    #[test]
    fn fully_decayed_states_carry_none() {
        for family in [BellFamily::Psi, BellFamily::Phi] {
            let s = InitialState::bell(family, 0.0);
            let rho = evolve(&s, real(0.0), real(0.0)).unwrap();
            assert_eq!(discord_analytic(&rho, family).unwrap().value, 0.0);
        }
    }

    #[test]
    fn agrees_with_variational_at_sample_points() {
        let (ga, gb) = (real(0.8f64.sqrt()), real(0.6f64.sqrt()));
        for family in [BellFamily::Psi, BellFamily::Phi] {
            let s = InitialState::with_weight(family, 0.5, 0.0).unwrap();
            let rho = evolve(&s, ga, gb).unwrap();
            let analytic = discord_analytic(&rho, family).unwrap().value;
            let variational = discord_variational(&rho, &GridSpec::default()).unwrap();
            assert!((analytic - variational).abs() < 1e-3, "{family}: {analytic} vs {variational}");
        }
    }

    #[test]
    fn wrong_structure_is_rejected() {
        let s = InitialState::bell(BellFamily::Phi, 0.0);
        let rho = evolve(&s, real(0.9), real(0.7)).unwrap();
        assert!(matches!(discord_psi_analytic(&rho), Err(Error::Structure(_))));
        let s = InitialState::bell(BellFamily::Psi, 0.0);
        let rho = evolve(&s, real(0.9), real(0.7)).unwrap();
        assert!(matches!(discord_phi_analytic(&rho), Err(Error::Structure(_))));
    }
}

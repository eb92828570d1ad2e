//! Entanglement and discord of two-qubit states.
//!
//! Discord is one-sided: the measurement defining the classical
//! correlation acts on qubit B.

mod concurrence;
mod discord;
mod variational;

pub use concurrence::{
    concurrence_closed_form, concurrence_general, concurrence_phi, concurrence_psi, esd_condition,
    spin_flip, wootters_lambdas,
};
pub use discord::{
    discord_analytic, discord_phi_analytic, discord_psi_analytic, AnalyticDiscord, CLAMP_WARN,
};
pub use variational::{classical_correlation_variational, GridSpec, MeasurementBasis};

use std::fmt;
use std::str::FromStr;

use crate::dynamics::BellFamily;
use crate::error::{Error, Result};
use crate::linalg::{partial_trace, von_neumann_entropy, DensityMatrix4, Subsystem};

/// `S(rho_A) + S(rho_B) - S(rho_AB)` in bits.
pub fn mutual_information(rho: &DensityMatrix4) -> Result<f64> {
    let sa = von_neumann_entropy(&partial_trace(rho, Subsystem::A))?;
    let sb = von_neumann_entropy(&partial_trace(rho, Subsystem::B))?;
    let sab = rho.entropy()?;
    Ok((sa + sb - sab).max(0.0))
}

/// Mutual information minus the optimized classical correlation. Because
/// the optimizer returns a lower bound on the classical part, this is an
/// upper bound on the discord.
pub fn discord_variational(rho: &DensityMatrix4, grid: &GridSpec) -> Result<f64> {
    let total = mutual_information(rho)?;
    let (classical, _) = classical_correlation_variational(rho, grid)?;
    let d = total - classical;
    if d < -CLAMP_WARN {
        log::warn!("variational discord {d:.3e} clamped to 0");
    }
    Ok(d.max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiscordMethod {
    Analytic,
    Variational,
}

impl DiscordMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiscordMethod::Analytic => "analytic",
            DiscordMethod::Variational => "variational",
        }
    }
}

impl fmt::Display for DiscordMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DiscordMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "analytic" => Ok(DiscordMethod::Analytic),
            "variational" => Ok(DiscordMethod::Variational),
            other => Err(Error::Config(format!("unknown discord method '{other}'"))),
        }
    }
}

/// All correlation measures of one state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationValues {
    pub concurrence: f64,
    pub mutual_info: f64,
    pub classical_corr: f64,
    pub discord: f64,
    pub discord_method: DiscordMethod,
}

impl CorrelationValues {
    /// Computes every measure. The analytic route needs the X-state family
    /// of `rho`; the classical correlation is then `I - D`.
    pub fn compute(
        rho: &DensityMatrix4,
        method: DiscordMethod,
        family: Option<BellFamily>,
        grid: &GridSpec,
    ) -> Result<Self> {
        let concurrence = concurrence_general(rho)?;
        let mutual_info = mutual_information(rho)?;
        let (classical_corr, discord) = match method {
            DiscordMethod::Analytic => {
                let family = family.ok_or_else(|| {
                    Error::InvalidParameter("analytic discord needs the state family".into())
                })?;
                let d = discord_analytic(rho, family)?.value;
                ((mutual_info - d).max(0.0), d)
            }
            DiscordMethod::Variational => {
                let (q, _) = classical_correlation_variational(rho, grid)?;
                let d = (mutual_info - q).max(0.0);
                (mutual_info - d, d)
            }
        };
        Ok(Self {
            concurrence,
            mutual_info,
            classical_corr,
            discord,
            discord_method: method,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Mat2, Mat4, C64};

    #[test]
    fn mutual_information_examples() {
        let product = DensityMatrix4::product(&Mat2::from_diag([0.2, 0.8]), &Mat2::from_diag([0.5, 0.5])).unwrap();
        assert!(mutual_information(&product).unwrap().abs() < 1e-12);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let bell = DensityMatrix4::from_pure([C64::new(s, 0.0), z, z, C64::new(s, 0.0)]).unwrap();
        assert!((mutual_information(&bell).unwrap() - 2.0).abs() < 1e-12);

        let classical = DensityMatrix4::new(Mat4::from_diag([0.5, 0.0, 0.0, 0.5])).unwrap();
        assert!((mutual_information(&classical).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn variational_discord_examples() {
        let grid = GridSpec::default();
        let product = DensityMatrix4::product(&Mat2::from_diag([0.2, 0.8]), &Mat2::from_diag([0.5, 0.5])).unwrap();
        assert!(discord_variational(&product, &grid).unwrap() < 1e-12);

        let classical = DensityMatrix4::new(Mat4::from_diag([0.5, 0.0, 0.0, 0.5])).unwrap();
        assert!(discord_variational(&classical, &grid).unwrap() < 1e-12);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let singlet = DensityMatrix4::from_pure([z, C64::new(s, 0.0), C64::new(-s, 0.0), z]).unwrap();
        assert!((discord_variational(&singlet, &grid).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn values_satisfy_decomposition() {
        let grid = GridSpec::default();
        let s = crate::dynamics::InitialState::bell(BellFamily::Psi, 0.5);
        let rho = crate::dynamics::evolve(&s, C64::from_polar(0.8, 0.2), C64::from_polar(0.7, 1.0)).unwrap();
        for method in [DiscordMethod::Analytic, DiscordMethod::Variational] {
            let v = CorrelationValues::compute(&rho, method, Some(BellFamily::Psi), &grid).unwrap();
            assert!((v.discord - (v.mutual_info - v.classical_corr)).abs() < 1e-9);
            assert!(v.discord >= 0.0 && v.discord <= v.mutual_info);
        }
        assert!(CorrelationValues::compute(&rho, DiscordMethod::Analytic, None, &grid).is_err());
    }
}

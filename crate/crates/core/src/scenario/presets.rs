use super::{Measure, ScenarioConfig};
use crate::dynamics::{BellFamily, InitialState};
use crate::error::{Error, Result};
use crate::reservoir::ReservoirParams;

pub const FIGURE_IDS: [u32; 5] = [1, 2, 3, 4, 5];

const BEAT_LAMBDA: f64 = 0.2;
const BEAT_DELTA_A: f64 = 50.0 * BEAT_LAMBDA;
const BEAT_DELTA_B: f64 = 45.0 * BEAT_LAMBDA;
/// About four envelope periods of the `Delta_A - Delta_B = 1` beat.
const BEAT_T_MAX: f64 = 25.0;
const BEAT_SAMPLES: usize = 2501;

/// Long enough for the slowest protected curve to pass half its initial value.
const PROTECTION_T_MAX: f64 = 1500.0;
const PROTECTION_SAMPLES: usize = 15001;
const DETUNING_SWEEP: [f64; 4] = [0.0, 2.0, 5.0, 10.0];
const WIDTH_SWEEP: [f64; 3] = [0.05, 0.2, 1.0];
const WIDTH_SWEEP_DELTA: f64 = 2.0;

const FAMILIES: [BellFamily; 2] = [BellFamily::Phi, BellFamily::Psi];

fn lorentzian(lambda: f64, delta: f64) -> Option<ReservoirParams> {
    Some(ReservoirParams::new(lambda, delta).expect("preset parameters are valid"))
}

fn beat_pair(prefix: &str, measure: Measure) -> Vec<ScenarioConfig> {
    FAMILIES
        .iter()
        .map(|&family| {
            ScenarioConfig::new(
                format!("{prefix}_{family}"),
                lorentzian(BEAT_LAMBDA, BEAT_DELTA_A),
                lorentzian(BEAT_LAMBDA, BEAT_DELTA_B),
                InitialState::bell(family, 0.0),
                BEAT_T_MAX,
                BEAT_SAMPLES,
                &[measure],
            )
        })
        .collect()
}

/// Parameter sets of the five figures. The beat figures share one
/// window; the protection sweeps use representative values and a long
/// window at coarser resolution.
pub fn figure_preset(id: u32) -> Result<Vec<ScenarioConfig>> {
    let configs = match id {
        1 => beat_pair("fig1", Measure::Concurrence),
        2 => {
            let mut out = Vec::new();
            for (measure, label) in [(Measure::Concurrence, "concurrence"), (Measure::Discord, "discord")] {
                for (side, a, b) in [
                    ("A_only", lorentzian(BEAT_LAMBDA, BEAT_DELTA_A), None),
                    ("B_only", None, lorentzian(BEAT_LAMBDA, BEAT_DELTA_B)),
                ] {
                    out.push(ScenarioConfig::new(
                        format!("fig2_{side}_{label}"),
                        a,
                        b,
                        InitialState::bell(BellFamily::Phi, 0.0),
                        BEAT_T_MAX,
                        BEAT_SAMPLES,
                        &[measure],
                    ));
                }
            }
            out
        }
        3 => beat_pair("fig3", Measure::Discord),
        4 => FAMILIES
            .iter()
            .flat_map(|&family| {
                DETUNING_SWEEP.iter().map(move |&delta| {
                    ScenarioConfig::new(
                        format!("fig4_{family}_delta{delta}"),
                        lorentzian(BEAT_LAMBDA, delta),
                        lorentzian(BEAT_LAMBDA, delta),
                        InitialState::bell(family, 0.0),
                        PROTECTION_T_MAX,
                        PROTECTION_SAMPLES,
                        &[Measure::Discord],
                    )
                })
            })
            .collect(),
        5 => FAMILIES
            .iter()
            .flat_map(|&family| {
                WIDTH_SWEEP.iter().map(move |&lambda| {
                    ScenarioConfig::new(
                        format!("fig5_{family}_lambda{lambda}"),
                        lorentzian(lambda, WIDTH_SWEEP_DELTA),
                        lorentzian(lambda, WIDTH_SWEEP_DELTA),
                        InitialState::bell(family, 0.0),
                        PROTECTION_T_MAX,
                        PROTECTION_SAMPLES,
                        &[Measure::Discord],
                    )
                })
            })
            .collect(),
        other => {
            return Err(Error::InvalidParameter(format!(
                "no figure preset {other}; valid ids are 1 to 5"
            )))
        }
    };
    Ok(configs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_shapes() {
        let f1 = figure_preset(1).unwrap();
        assert_eq!(f1.len(), 2);
        for c in &f1 {
            assert_eq!(c.reservoir_a.unwrap().lambda, 0.2);
            assert!((c.reservoir_a.unwrap().delta - 10.0).abs() < 1e-12);
            assert!((c.reservoir_b.unwrap().delta - 9.0).abs() < 1e-12);
        }
        let families: Vec<BellFamily> = f1.iter().map(|c| c.initial.family()).collect();
        assert!(families.contains(&BellFamily::Psi) && families.contains(&BellFamily::Phi));

        let f2 = figure_preset(2).unwrap();
        assert_eq!(f2.len(), 4);
        assert!(f2.iter().all(|c| c.initial.family() == BellFamily::Phi));
        assert!(f2.iter().all(|c| c.reservoir_a.is_none() != c.reservoir_b.is_none()));

        let f5 = figure_preset(5).unwrap();
        assert!(f5.iter().all(|c| c.reservoir_a.unwrap().delta == 2.0));
        assert_eq!(f5.len(), 6);
        assert_eq!(figure_preset(4).unwrap().len(), 8);
        assert_eq!(figure_preset(3).unwrap().len(), 2);
        assert!(figure_preset(0).is_err() && figure_preset(6).is_err());
    }

    #[test]
    fn preset_names_are_unique_and_valid() {
        let mut names = Vec::new();
        for id in FIGURE_IDS {
            for c in figure_preset(id).unwrap() {
                c.validate().unwrap();
                names.push(c.name);
            }
        }
        let n = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), n);
    }
}

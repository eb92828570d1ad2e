//! Scenario configuration, execution, figure presets and CSV output.

mod config;
mod presets;

pub use config::{DiscordMode, GMethod, Measure, ScenarioConfig};
pub use presets::{figure_preset, FIGURE_IDS};

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::analysis::{CorrelationTrace, COL_C, COL_D, COL_GA2, COL_GB2, COL_I, COL_Q};
use crate::correlations::{
    classical_correlation_variational, concurrence_general, discord_analytic, mutual_information, GridSpec,
};
use crate::dynamics::evolve;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::reservoir::{g_closed_form, volterra_solve, KernelSource, ReservoirParams, VolterraOptions};

pub const COL_D_VAR: &str = "D_var";
pub const COL_Q_VAR: &str = "Q_var";
pub const COL_GA2_VOLTERRA: &str = "gA2_volterra";
pub const COL_GB2_VOLTERRA: &str = "gB2_volterra";

/// The solver needs at least this many output intervals.
const MIN_SOLVER_INTERVALS: usize = 10;

/// Survival amplitudes of one qubit on the scenario grid.
fn amplitudes(res: Option<&ReservoirParams>, times: &[f64], t_max: f64, integrate: bool) -> Result<Vec<C64>> {
    let Some(p) = res else {
        return Ok(vec![C64::new(1.0, 0.0); times.len()]);
    };
    if !integrate {
        return Ok(times.iter().map(|&t| g_closed_form(t, p)).collect());
    }
    let intervals = times.len() - 1;
    let stride = MIN_SOLVER_INTERVALS.div_ceil(intervals);
    let solved = volterra_solve(KernelSource::Lorentzian(*p), t_max, intervals * stride, &VolterraOptions::default())?;
    Ok(solved.values.iter().step_by(stride).copied().collect())
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[derive(Default)]
struct Row {
    c: f64,
    i: f64,
    d: f64,
    d_var: f64,
}

/// Runs one scenario. Errors carry the scenario name.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<CorrelationTrace> {
    log::info!("scenario {}: {} samples on [0, {}]", cfg.name, cfg.n_steps, cfg.t_max);
    run_inner(cfg).map_err(|e| e.in_scenario(&cfg.name))
}

fn run_inner(cfg: &ScenarioConfig) -> Result<CorrelationTrace> {
    cfg.validate()?;
    let times = cfg.times();
    let integrate_primary = cfg.g_method == GMethod::Volterra;
    let ga = amplitudes(cfg.reservoir_a.as_ref(), &times, cfg.t_max, integrate_primary)?;
    let gb = amplitudes(cfg.reservoir_b.as_ref(), &times, cfg.t_max, integrate_primary)?;

    let need_discord = cfg.wants(Measure::Discord) || cfg.wants(Measure::Classical);
    let need_info = need_discord || cfg.wants(Measure::MutualInfo);
    let analytic = cfg.discord_method != DiscordMode::Variational;
    let variational = cfg.discord_method != DiscordMode::Analytic;
    let grid = GridSpec::default();
    let family = cfg.initial.family();

    let rows: Vec<Row> = (0..times.len())
        .into_par_iter()
        .map(|k| -> Result<Row> {
            let rho = evolve(&cfg.initial, ga[k], gb[k])?;
            let mut row = Row::default();
            if cfg.wants(Measure::Concurrence) {
                row.c = concurrence_general(&rho)?;
            }
            if need_info {
                row.i = mutual_information(&rho)?;
            }
            if need_discord && analytic {
                row.d = discord_analytic(&rho, family)?.value;
            }
            if need_discord && variational {
                let (q, _) = classical_correlation_variational(&rho, &grid)?;
                row.d_var = (row.i - q).max(0.0);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let mut trace = CorrelationTrace::new(times);
    trace.meta = cfg.to_pairs();
    let column = |f: &dyn Fn(&Row) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let primary_d = |r: &Row| if analytic { r.d } else { r.d_var };

    if cfg.wants(Measure::Concurrence) {
        trace.push_column(COL_C, column(&|r| r.c))?;
    }
    if cfg.wants(Measure::Discord) {
        trace.push_column(COL_D, column(&primary_d))?;
    }
    if cfg.wants(Measure::MutualInfo) {
        trace.push_column(COL_I, column(&|r| r.i))?;
    }
    if cfg.wants(Measure::Classical) {
        trace.push_column(COL_Q, column(&|r| r.i - primary_d(r)))?;
    }
    trace.push_column(COL_GA2, ga.iter().map(|g| g.norm_sqr()).collect())?;
    trace.push_column(COL_GB2, gb.iter().map(|g| g.norm_sqr()).collect())?;

    if cfg.discord_method == DiscordMode::Both && need_discord {
        if cfg.wants(Measure::Discord) {
            trace.push_column(COL_D_VAR, column(&|r| r.d_var))?;
        }
        if cfg.wants(Measure::Classical) {
            trace.push_column(COL_Q_VAR, column(&|r| r.i - r.d_var))?;
        }
        let dev = max_abs_diff(&column(&|r| r.d), &column(&|r| r.d_var));
        trace.set_meta("max_dev.discord", format!("{dev:.6e}"));
    }
    if cfg.g_method == GMethod::Both {
        let va = amplitudes(cfg.reservoir_a.as_ref(), &trace.times, cfg.t_max, true)?;
        let vb = amplitudes(cfg.reservoir_b.as_ref(), &trace.times, cfg.t_max, true)?;
        let dev = ga
            .iter()
            .zip(&va)
            .chain(gb.iter().zip(&vb))
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        trace.push_column(COL_GA2_VOLTERRA, va.iter().map(|g| g.norm_sqr()).collect())?;
        trace.push_column(COL_GB2_VOLTERRA, vb.iter().map(|g| g.norm_sqr()).collect())?;
        trace.set_meta("max_dev.g", format!("{dev:.6e}"));
    }
    trace.validate()?;
    Ok(trace)
}

/// Runs independent scenarios in parallel, preserving input order.
pub fn run_scenarios(configs: &[ScenarioConfig]) -> Vec<Result<CorrelationTrace>> {
    configs.par_iter().map(run_scenario).collect()
}

/// Writes `trace` as `<dir>/<name>.csv` through a temporary file and a
/// rename, so readers never observe a partial file.
pub fn write_trace_atomic(dir: &Path, name: &str, trace: &CorrelationTrace) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let target = dir.join(format!("{name}.csv"));
    let tmp = dir.join(format!(".{name}.csv.tmp"));
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        trace.write_csv(&mut w)?;
        w.flush()?;
        w.get_ref().sync_all()?;
    }
    fs::rename(&tmp, &target).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::from(e)
    })?;
    Ok(target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::{concurrence_closed_form, DiscordMethod};
    use crate::dynamics::{BellFamily, InitialState};

    fn base(name: &str) -> ScenarioConfig {
        ScenarioConfig::new(
            name,
            Some(ReservoirParams::new(0.2, 0.0).unwrap()),
            Some(ReservoirParams::new(0.5, 1.0).unwrap()),
            InitialState::with_weight(BellFamily::Psi, 0.3, 0.4).unwrap(),
            4.0,
            41,
            &Measure::ALL,
        )
    }

    #[test]
    fn two_row_trace_starts_at_initial_state() {
        let mut cfg = base("tiny");
        cfg.t_max = 1.0;
        cfg.n_steps = 2;
        cfg.g_method = GMethod::Both;
        let tr = run_scenario(&cfg).unwrap();
        assert_eq!(tr.times, vec![0.0, 1.0]);
        let (a, b) = (cfg.initial.amp1(), cfg.initial.amp2());
        let c0 = 2.0 * a * b;
        assert!((tr.column(COL_C).unwrap()[0] - c0).abs() < 1e-12);
        let h = -(a * a * (a * a).log2() + b * b * (b * b).log2());
        assert!((tr.column(COL_D).unwrap()[0] - h).abs() < 1e-12);
        assert!((tr.column(COL_I).unwrap()[0] - 2.0 * h).abs() < 1e-12);
        assert!((tr.column(COL_Q).unwrap()[0] - h).abs() < 1e-12);
        assert_eq!(tr.column(COL_GA2).unwrap()[0], 1.0);
        let dev: f64 = tr.meta_value("max_dev.g").unwrap().parse().unwrap();
        assert!(dev < 1e-6);
    }

    #[test]
    fn columns_follow_measures() {
        let mut cfg = base("subset");
        cfg.measures = vec![Measure::Discord];
        let tr = run_scenario(&cfg).unwrap();
        let names: Vec<&str> = tr.column_names().collect();
        assert_eq!(names, vec![COL_D, COL_GA2, COL_GB2]);
    }

    #[test]
    fn concurrence_column_matches_closed_form() {
        let cfg = base("closed");
        let tr = run_scenario(&cfg).unwrap();
        let c = tr.column(COL_C).unwrap();
        for (k, &t) in tr.times.iter().enumerate() {
            let ga = g_closed_form(t, &cfg.reservoir_a.unwrap());
            let gb = g_closed_form(t, &cfg.reservoir_b.unwrap());
            assert!((c[k] - concurrence_closed_form(&cfg.initial, ga, gb)).abs() < 1e-10);
        }
    }

    #[test]
    fn both_discord_methods_are_reported() {
        let mut cfg = base("both");
        cfg.n_steps = 9;
        cfg.discord_method = DiscordMode::Both;
        let tr = run_scenario(&cfg).unwrap();
        assert!(tr.column(COL_D_VAR).is_some() && tr.column(COL_Q_VAR).is_some());
        let dev: f64 = tr.meta_value("max_dev.discord").unwrap().parse().unwrap();
        assert!(dev < 2e-3, "{dev}");
        assert_eq!(cfg.discord_method.primary(), DiscordMethod::Analytic);
    }

    #[test]
    fn disabled_reservoir_keeps_qubit_excited() {
        let mut cfg = base("one-sided");
        cfg.reservoir_b = None;
        let tr = run_scenario(&cfg).unwrap();
        assert!(tr.column(COL_GB2).unwrap().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn errors_carry_scenario_name() {
        let mut cfg = base("broken");
        cfg.measures.clear();
        let err = run_scenario(&cfg).unwrap_err();
        assert!(err.to_string().contains("broken"), "{err}");
        assert!(matches!(err.root(), Error::Config(_)));
    }

    #[test]
    fn output_is_deterministic_and_atomic() {
        let cfg = base("det");
        let dir = tempfile::tempdir().unwrap();
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        let pa = write_trace_atomic(dir.path(), "a", &a).unwrap();
        let pb = write_trace_atomic(dir.path(), "b", &b).unwrap();
        assert_eq!(fs::read(&pa).unwrap(), fs::read(&pb).unwrap());
        let leftovers: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
            .collect();
        assert!(leftovers.is_empty());
        let parsed = CorrelationTrace::parse_csv(&fs::read_to_string(&pa).unwrap()).unwrap();
        assert_eq!(ScenarioConfig::from_meta(&parsed.meta).unwrap(), cfg);
    }
}

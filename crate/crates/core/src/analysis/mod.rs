//! Post-processing of correlation traces.

mod beat;
mod esd;
mod spectrum;
mod spline;

pub use beat::{beat_analysis, beat_analysis_series, oscillation_frequency, BeatClass, BeatOptions, BeatReport};
pub use esd::{detect_esd_intervals, EsdInterval, ESD_THRESHOLD};
pub use spectrum::{dominant_peaks, moving_baseline, SpectralPeak};
pub use spline::CubicSpline;

use std::io::Write;

use crate::error::{Error, Result};

pub const COL_T: &str = "t";
pub const COL_C: &str = "C";
pub const COL_D: &str = "D";
pub const COL_I: &str = "I";
pub const COL_Q: &str = "Q";
pub const COL_GA2: &str = "gA2";
pub const COL_GB2: &str = "gB2";

/// Relative spacing error tolerated by routines that need a uniform grid.
const UNIFORM_TOL: f64 = 1e-9;
/// Slack on the physical ranges checked by [`CorrelationTrace::validate`].
const RANGE_TOL: f64 = 1e-9;

/// Time series of correlation measures on a shared uniform grid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CorrelationTrace {
    pub times: Vec<f64>,
    columns: Vec<(String, Vec<f64>)>,
    /// Ordered `key = value` pairs describing how the trace was produced.
    pub meta: Vec<(String, String)>,
}

impl CorrelationTrace {
    pub fn new(times: Vec<f64>) -> Self {
        Self {
            times,
            columns: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.times.len() {
            return Err(Error::InvalidParameter(format!(
                "column {name} has {} rows, trace has {}",
                values.len(),
                self.times.len()
            )));
        }
        if name == COL_T || self.column(&name).is_some() {
            return Err(Error::InvalidParameter(format!("duplicate column {name}")));
        }
        self.columns.push((name, values));
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn require(&self, name: &str) -> Result<&[f64]> {
        self.column(name)
            .ok_or_else(|| Error::InvalidParameter(format!("trace has no column {name}")))
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }

    pub fn set_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.meta.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.meta.push((key, value)),
        }
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Sample spacing, or an error if the grid is not uniform.
    pub fn uniform_step(&self) -> Result<f64> {
        uniform_step(&self.times)
    }

    /// Checks column lengths and the ranges `0 <= C <= 1`, `0 <= D <= I`.
    pub fn validate(&self) -> Result<()> {
        for (name, values) in &self.columns {
            if values.len() != self.times.len() {
                return Err(Error::Structure(format!("column {name} length mismatch")));
            }
            if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!("column {name} holds {bad}")));
            }
        }
        if let Some(c) = self.column(COL_C) {
            if let Some(v) = c.iter().find(|&&v| !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&v)) {
                return Err(Error::Numerical(format!("concurrence {v} outside [0, 1]")));
            }
        }
        if let Some(d) = self.column(COL_D) {
            if let Some(v) = d.iter().find(|&&v| v < -RANGE_TOL) {
                return Err(Error::Numerical(format!("negative discord {v}")));
            }
            if let Some(i) = self.column(COL_I) {
                if let Some((dv, iv)) = d.iter().zip(i).find(|(dv, iv)| **dv > **iv + RANGE_TOL) {
                    return Err(Error::Numerical(format!("discord {dv} exceeds mutual information {iv}")));
                }
            }
        }
        Ok(())
    }

    /// CSV with `# key = value` metadata lines, a header row and one row per
    /// sample. Values carry 17 significant digits so parsing is lossless.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, v) in &self.meta {
            writeln!(w, "# {k} = {v}")?;
        }
        let mut header = String::from(COL_T);
        for (name, _) in &self.columns {
            header.push(',');
            header.push_str(name);
        }
        writeln!(w, "{header}")?;
        let mut line = String::new();
        for (row, t) in self.times.iter().enumerate() {
            line.clear();
            line.push_str(&format!("{t:.16e}"));
            for (_, values) in &self.columns {
                line.push_str(&format!(",{:.16e}", values[row]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut meta = Vec::new();
        let mut header: Option<Vec<String>> = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    meta.push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            match &header {
                None => {
                    let names: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
                    if names.first().map(String::as_str) != Some(COL_T) {
                        return Err(Error::Parse {
                            line: line_no,
                            message: "header must start with t".into(),
                        });
                    }
                    header = Some(names);
                }
                Some(names) => {
                    let values = line
                        .split(',')
                        .map(|s| s.trim().parse::<f64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| Error::Parse {
                            line: line_no,
                            message: e.to_string(),
                        })?;
                    if values.len() != names.len() {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("expected {} fields, found {}", names.len(), values.len()),
                        });
                    }
                    rows.push(values);
                }
            }
        }
        let names = header.ok_or(Error::Parse {
            line: 0,
            message: "missing header row".into(),
        })?;
        let mut trace = CorrelationTrace::new(rows.iter().map(|r| r[0]).collect());
        for (col, name) in names.iter().enumerate().skip(1) {
            trace
                .push_column(name.clone(), rows.iter().map(|r| r[col]).collect())
                .map_err(|e| Error::Parse {
                    line: 1,
                    message: e.to_string(),
                })?;
        }
        trace.meta = meta;
        Ok(trace)
    }
}

pub(crate) fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter("time grid must increase".into()));
    }
    for (k, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > UNIFORM_TOL * dt.max(1.0) {
            return Err(Error::InvalidParameter(format!("time grid not uniform at sample {}", k + 1)));
        }
    }
    Ok(dt)
}

/// Time to fall below half the initial value, and the value at the end.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecaySummary {
    /// `f64::INFINITY` if the column never drops below half.
    pub t_half: f64,
    pub final_value: f64,
}

pub fn decay_summary(times: &[f64], values: &[f64]) -> Result<DecaySummary> {
    if times.len() != values.len() || times.is_empty() {
        return Err(Error::InvalidParameter("times and values must be nonempty and equal length".into()));
    }
    let half = 0.5 * values[0];
    let mut t_half = f64::INFINITY;
    for k in 1..values.len() {
        if values[k] < half {
            let (y0, y1) = (values[k - 1], values[k]);
            let frac = if y0 > y1 { (y0 - half) / (y0 - y1) } else { 1.0 };
            t_half = times[k - 1] + frac.clamp(0.0, 1.0) * (times[k] - times[k - 1]);
            break;
        }
    }
    Ok(DecaySummary {
        t_half,
        final_value: values[values.len() - 1],
    })
}

impl CorrelationTrace {
    pub fn decay_summary(&self, column: &str) -> Result<DecaySummary> {
        decay_summary(&self.times, self.require(column)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CorrelationTrace {
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        let mut tr = CorrelationTrace::new(times.clone());
        tr.push_column(COL_C, times.iter().map(|t| (-t).exp() / 3.0).collect()).unwrap();
        tr.push_column(COL_D, times.iter().map(|t| (0.7 * t).sin().abs() * 1e-300).collect()).unwrap();
        tr.set_meta("name", "sample");
        tr.set_meta("lambda", 0.2);
        tr
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let tr = sample();
        let text = tr.to_csv_string();
        let back = CorrelationTrace::parse_csv(&text).unwrap();
        assert_eq!(back.times.len(), tr.times.len());
        for (a, b) in back.times.iter().zip(&tr.times) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        for name in [COL_C, COL_D] {
            for (a, b) in back.column(name).unwrap().iter().zip(tr.column(name).unwrap()) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
        assert_eq!(back.meta, tr.meta);
        assert_eq!(back.to_csv_string(), text);
    }

    #[test]
    fn parse_rejects_bad_rows() {
        assert!(CorrelationTrace::parse_csv("t,C\n0.0,1.0,2.0\n").is_err());
        assert!(CorrelationTrace::parse_csv("t,C\n0.0,abc\n").is_err());
        assert!(CorrelationTrace::parse_csv("C,t\n").is_err());
        assert!(CorrelationTrace::parse_csv("# only = comments\n").is_err());
    }

    #[test]
    fn columns_must_match_grid() {
        let mut tr = CorrelationTrace::new(vec![0.0, 1.0]);
        assert!(tr.push_column(COL_C, vec![1.0]).is_err());
        tr.push_column(COL_C, vec![1.0, 0.5]).unwrap();
        assert!(tr.push_column(COL_C, vec![1.0, 0.5]).is_err());
    }

    #[test]
    fn validate_checks_ranges() {
        let mut tr = CorrelationTrace::new(vec![0.0, 1.0]);
        tr.push_column(COL_C, vec![1.0, 1.5]).unwrap();
        assert!(tr.validate().is_err());
        let mut tr = CorrelationTrace::new(vec![0.0, 1.0]);
        tr.push_column(COL_D, vec![0.5, 0.5]).unwrap();
        tr.push_column(COL_I, vec![1.0, 0.4]).unwrap();
        assert!(tr.validate().is_err());
    }

    #[test]
    fn decay_summary_examples() {
        let times: Vec<f64> = (0..11).map(|k| k as f64).collect();
        let constant = vec![0.7; 11];
        let s = decay_summary(&times, &constant).unwrap();
        assert!(s.t_half.is_infinite());
        assert_eq!(s.final_value, 0.7);

        let linear: Vec<f64> = times.iter().map(|t| 1.0 - 0.1 * t).collect();
        let s = decay_summary(&times, &linear).unwrap();
        assert!((s.t_half - 5.0).abs() < 1e-12 || (s.t_half - 6.0).abs() < 1e-12);
        let steep: Vec<f64> = times.iter().map(|t| 1.0 - 0.15 * t).collect();
        let s = decay_summary(&times, &steep).unwrap();
        assert!((s.t_half - 10.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn non_uniform_grid_is_rejected() {
        assert!(uniform_step(&[0.0, 1.0, 3.0]).is_err());
        assert!(uniform_step(&[0.0]).is_err());
        assert!((uniform_step(&[0.0, 0.5, 1.0]).unwrap() - 0.5).abs() < 1e-15);
    }
}

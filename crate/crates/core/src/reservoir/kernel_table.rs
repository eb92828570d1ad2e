//! Plain-text memory-kernel tables for the generic Volterra solver.
//!
//! One sample per line, three numeric columns separated by whitespace or
//! commas: `lag  re(f)  im(f)`. Lags start at 0 and are uniformly spaced.
//! Lines starting with `#` and blank lines are ignored.

use std::io::Write;
use std::path::Path;

use super::MemoryKernel;
use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedKernel {
    spacing: f64,
    values: Vec<C64>,
}

impl TabulatedKernel {
    pub fn new(spacing: f64, values: Vec<C64>) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidParameter(format!("kernel spacing {spacing} must be positive")));
        }
        if values.len() < 2 {
            return Err(Error::InvalidParameter("kernel table needs at least two samples".into()));
        }
        Ok(Self { spacing, values })
    }

    /// Samples `kernel` at lags `0, spacing, ..., n * spacing`.
    pub fn sample(kernel: &dyn MemoryKernel, spacing: f64, n: usize) -> Result<Self> {
        Self::new(spacing, (0..=n).map(|j| kernel.value(j as f64 * spacing)).collect())
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lags = Vec::new();
        let mut values = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected 3 columns (lag, re, im), found {}", fields.len()),
                });
            }
            let num = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: format!("'{s}': {e}"),
                })
            };
            lags.push(num(fields[0])?);
            values.push(C64::new(num(fields[1])?, num(fields[2])?));
        }
        if lags.len() < 2 {
            return Err(Error::Parse {
                line: 0,
                message: "kernel table needs at least two rows".into(),
            });
        }
        if lags[0] != 0.0 {
            return Err(Error::Parse {
                line: 0,
                message: format!("first lag must be 0, found {}", lags[0]),
            });
        }
        let spacing = lags[1] - lags[0];
        for (i, &lag) in lags.iter().enumerate() {
            let expected = i as f64 * spacing;
            if (lag - expected).abs() > 1e-9 * expected.abs().max(spacing) {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("lags are not uniformly spaced at row {} ({lag} vs {expected})", i + 1),
                });
            }
        }
        Self::new(spacing, values)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "# lag re im")?;
        for (j, f) in self.values.iter().enumerate() {
            writeln!(w, "{:.16e} {:.16e} {:.16e}", j as f64 * self.spacing, f.re, f.im)?;
        }
        Ok(())
    }
}

impl MemoryKernel for TabulatedKernel {
    /// Linear interpolation between table rows.
    fn value(&self, lag: f64) -> C64 {
        let x = lag / self.spacing;
        let last = self.values.len() - 1;
        if x <= 0.0 {
            return self.values[0];
        }
        let i = x.floor() as usize;
        if i >= last {
            return self.values[last];
        }
        let frac = x - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    fn max_lag(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.spacing
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reservoir::{
        g_closed_form_trace, volterra_solve, KernelSource, ReservoirParams, VolterraOptions,
    };

    #[test]
    fn parse_accepts_comments_and_commas() {
        let table = TabulatedKernel::parse("# f\n0, 1, 0\n0.5 0.5 -0.5\n\n1.0,0.25,0\n").unwrap();
        assert_eq!(table.spacing(), 0.5);
        assert_eq!(table.values().len(), 3);
        assert_eq!(table.value(0.75), C64::new(0.375, -0.25));
        assert_eq!(table.max_lag(), 1.0);
    }

    #[test]
    fn parse_rejects_malformed_tables() {
        assert!(TabulatedKernel::parse("0 1\n1 1\n").is_err());
        assert!(TabulatedKernel::parse("0.1 1 0\n0.2 1 0\n").is_err());
        assert!(TabulatedKernel::parse("0 1 0\n0.1 1 0\n0.3 1 0\n").is_err());
        assert!(TabulatedKernel::parse("0 1 0\n").is_err());
        assert!(TabulatedKernel::parse("0 x 0\n1 1 0\n").is_err());
    }

    #[test]
    fn written_table_parses_back_exactly() {
        let p = ReservoirParams::new(0.3, 4.0).unwrap();
        let table = TabulatedKernel::sample(&p, 0.01, 100).unwrap();
        let mut buf = Vec::new();
        table.write_to(&mut buf).unwrap();
        let back = TabulatedKernel::parse(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.values(), table.values());
    }

    #[test]
    fn tabulated_lorentzian_reproduces_closed_form() {
        let p = ReservoirParams::new(0.2, 2.0).unwrap();
        let table = TabulatedKernel::sample(&p, 1e-3, 10_000).unwrap();
        let opts = VolterraOptions::default();
        let trace = volterra_solve(KernelSource::Tabulated(&table), 10.0, 100, &opts).unwrap();
        let exact = g_closed_form_trace(&p, 10.0, 100).unwrap();
        assert!(trace.max_deviation(&exact).unwrap() < 1e-6);
    }

    #[test]
    fn solver_refuses_to_extrapolate_past_the_table() {
        let p = ReservoirParams::new(0.2, 2.0).unwrap();
        let table = TabulatedKernel::sample(&p, 0.01, 100).unwrap();
        let r = volterra_solve(KernelSource::Tabulated(&table), 5.0, 50, &VolterraOptions::default());
        assert!(r.is_err());
    }
}

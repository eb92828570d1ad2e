use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::analysis::BeatOptions;
use crate::correlations::DiscordMethod;
use crate::dynamics::{BellFamily, InitialState};
use crate::error::{Error, Result};
use crate::reservoir::ReservoirParams;

/// Correlation measure selectable per scenario, in column order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Measure {
    Concurrence,
    Discord,
    MutualInfo,
    Classical,
}

impl Measure {
    pub const ALL: [Measure; 4] = [
        Measure::Concurrence,
        Measure::Discord,
        Measure::MutualInfo,
        Measure::Classical,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Measure::Concurrence => "concurrence",
            Measure::Discord => "discord",
            Measure::MutualInfo => "mutual_info",
            Measure::Classical => "classical",
        }
    }
}

impl FromStr for Measure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown measure '{}'", s.trim())))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiscordMode {
    Analytic,
    Variational,
    /// Analytic values in the main columns, variational ones alongside.
    Both,
}

impl DiscordMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiscordMode::Analytic => "analytic",
            DiscordMode::Variational => "variational",
            DiscordMode::Both => "both",
        }
    }

    pub fn primary(&self) -> DiscordMethod {
        match self {
            DiscordMode::Variational => DiscordMethod::Variational,
            _ => DiscordMethod::Analytic,
        }
    }
}

impl FromStr for DiscordMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "analytic" => Ok(DiscordMode::Analytic),
            "variational" => Ok(DiscordMode::Variational),
            "both" => Ok(DiscordMode::Both),
            other => Err(Error::Config(format!("unknown discord_method '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GMethod {
    Closed,
    Volterra,
    /// Closed form in the main columns, integrated values alongside.
    Both,
}

impl GMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            GMethod::Closed => "closed",
            GMethod::Volterra => "volterra",
            GMethod::Both => "both",
        }
    }
}

impl FromStr for GMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "closed" => Ok(GMethod::Closed),
            "volterra" => Ok(GMethod::Volterra),
            "both" => Ok(GMethod::Both),
            other => Err(Error::Config(format!("unknown g_method '{other}'"))),
        }
    }
}

/// One simulation run. A `None` reservoir leaves that qubit untouched (`G = 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub reservoir_a: Option<ReservoirParams>,
    pub reservoir_b: Option<ReservoirParams>,
    pub initial: InitialState,
    pub t_max: f64,
    /// Number of time samples including `t = 0` and `t = t_max`.
    pub n_steps: usize,
    /// Sorted, without duplicates.
    pub measures: Vec<Measure>,
    pub discord_method: DiscordMode,
    pub g_method: GMethod,
    pub beat: BeatOptions,
}

impl ScenarioConfig {
    pub fn new(
        name: impl Into<String>,
        reservoir_a: Option<ReservoirParams>,
        reservoir_b: Option<ReservoirParams>,
        initial: InitialState,
        t_max: f64,
        n_steps: usize,
        measures: &[Measure],
    ) -> Self {
        let mut measures = measures.to_vec();
        measures.sort();
        measures.dedup();
        Self {
            name: name.into(),
            reservoir_a,
            reservoir_b,
            initial,
            t_max,
            n_steps,
            measures,
            discord_method: DiscordMode::Analytic,
            g_method: GMethod::Closed,
            beat: BeatOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::Config(format!("t_max must be positive, got {}", self.t_max)));
        }
        if self.n_steps < 2 {
            return Err(Error::Config(format!("n_steps must be at least 2, got {}", self.n_steps)));
        }
        if self.measures.is_empty() {
            return Err(Error::Config("at least one measure must be selected".into()));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\', '\n']) {
            return Err(Error::Config(format!("invalid scenario name '{}'", self.name)));
        }
        if !(self.beat.oscillation_threshold <= self.beat.beat_threshold) {
            return Err(Error::Config("beat thresholds are inverted".into()));
        }
        Ok(())
    }

    pub fn wants(&self, m: Measure) -> bool {
        self.measures.contains(&m)
    }

    pub fn times(&self) -> Vec<f64> {
        let last = (self.n_steps - 1) as f64;
        (0..self.n_steps)
            .map(|k| if k + 1 == self.n_steps { self.t_max } else { self.t_max * k as f64 / last })
            .collect()
    }

    /// Ordered `key`/`value` pairs in the config file syntax.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = vec![
            ("name".into(), self.name.clone()),
            ("state".into(), self.initial.family().to_string()),
            ("amp1".into(), self.initial.amp1().to_string()),
            ("amp2".into(), self.initial.amp2().to_string()),
            ("phase".into(), self.initial.phase().to_string()),
        ];
        for (prefix, res) in [("reservoir_a", &self.reservoir_a), ("reservoir_b", &self.reservoir_b)] {
            out.push((format!("{prefix}.enabled"), res.is_some().to_string()));
            if let Some(p) = res {
                out.push((format!("{prefix}.lambda"), p.lambda.to_string()));
                out.push((format!("{prefix}.delta"), p.delta.to_string()));
            }
        }
        out.push(("t_max".into(), self.t_max.to_string()));
        out.push(("n_steps".into(), self.n_steps.to_string()));
        out.push((
            "measures".into(),
            self.measures.iter().map(Measure::as_str).collect::<Vec<_>>().join(","),
        ));
        out.push(("discord_method".into(), self.discord_method.as_str().into()));
        out.push(("g_method".into(), self.g_method.as_str().into()));
        out.push(("beat.beat_threshold".into(), self.beat.beat_threshold.to_string()));
        out.push(("beat.oscillation_threshold".into(), self.beat.oscillation_threshold.to_string()));
        out
    }

    pub fn to_config_string(&self) -> String {
        self.to_string()
    }

    /// Builds a config from `(line, key, value)` triples; unknown or
    /// repeated keys are rejected.
    fn from_pairs(pairs: &[(usize, String, String)]) -> Result<Self> {
        let mut seen: Vec<&str> = Vec::new();
        for (line, key, _) in pairs {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("unknown key '{key}'"),
                });
            }
            if seen.contains(&key.as_str()) {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("repeated key '{key}'"),
                });
            }
            seen.push(key);
        }
        let get = |key: &str| pairs.iter().find(|(_, k, _)| k == key).map(|(l, _, v)| (*l, v.as_str()));
        let num = |key: &str| -> Result<Option<f64>> {
            get(key)
                .map(|(line, v)| {
                    v.parse::<f64>().map_err(|e| Error::Parse {
                        line,
                        message: format!("{key}: {e}"),
                    })
                })
                .transpose()
        };
        let required = |key: &str| -> Result<f64> {
            num(key)?.ok_or_else(|| Error::Config(format!("missing key '{key}'")))
        };
        let boolean = |key: &str| -> Result<bool> {
            match get(key) {
                None => Ok(true),
                Some((_, "true")) => Ok(true),
                Some((_, "false")) => Ok(false),
                Some((line, other)) => Err(Error::Parse {
                    line,
                    message: format!("{key}: expected true or false, got '{other}'"),
                }),
            }
        };

        let family: BellFamily = get("state")
            .ok_or_else(|| Error::Config("missing key 'state'".into()))?
            .1
            .parse()?;
        let phase = num("phase")?.unwrap_or(0.0);
        let initial = match (num("amp1")?, num("amp2")?) {
            (None, None) => InitialState::bell(family, phase),
            (Some(a1), None) => InitialState::new(family, a1, (1.0 - a1 * a1).max(0.0).sqrt(), phase)?,
            (None, Some(a2)) => InitialState::new(family, (1.0 - a2 * a2).max(0.0).sqrt(), a2, phase)?,
            (Some(a1), Some(a2)) => InitialState::new(family, a1, a2, phase)?,
        };

        let mut reservoirs = [None, None];
        for (slot, prefix) in reservoirs.iter_mut().zip(["reservoir_a", "reservoir_b"]) {
            if boolean(&format!("{prefix}.enabled"))? {
                let lambda = required(&format!("{prefix}.lambda"))?;
                let delta = required(&format!("{prefix}.delta"))?;
                *slot = Some(ReservoirParams::new(lambda, delta)?);
            }
        }

        let n_steps = match get("n_steps") {
            Some((line, v)) => v.parse::<usize>().map_err(|e| Error::Parse {
                line,
                message: format!("n_steps: {e}"),
            })?,
            None => return Err(Error::Config("missing key 'n_steps'".into())),
        };
        let measures = match get("measures") {
            Some((_, v)) => v
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(Measure::from_str)
                .collect::<Result<Vec<_>>>()?,
            None => vec![Measure::Concurrence, Measure::Discord],
        };
        let mut cfg = ScenarioConfig::new(
            get("name").map(|(_, v)| v).unwrap_or("scenario"),
            reservoirs[0],
            reservoirs[1],
            initial,
            required("t_max")?,
            n_steps,
            &measures,
        );
        if let Some((_, v)) = get("discord_method") {
            cfg.discord_method = v.parse()?;
        }
        if let Some((_, v)) = get("g_method") {
            cfg.g_method = v.parse()?;
        }
        if let Some(v) = num("beat.beat_threshold")? {
            cfg.beat.beat_threshold = v;
        }
        if let Some(v) = num("beat.oscillation_threshold")? {
            cfg.beat.oscillation_threshold = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses the flat `key = value` format; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: format!("expected 'key = value', got '{line}'"),
            })?;
            pairs.push((idx + 1, k.trim().to_string(), v.trim().to_string()));
        }
        Self::from_pairs(&pairs)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Recovers the config from the metadata of a written trace.
    pub fn from_meta(meta: &[(String, String)]) -> Result<Self> {
        let pairs: Vec<(usize, String, String)> = meta
            .iter()
            .filter(|(k, _)| KNOWN_KEYS.contains(&k.as_str()))
            .map(|(k, v)| (0, k.clone(), v.clone()))
            .collect();
        Self::from_pairs(&pairs)
    }
}

const KNOWN_KEYS: &[&str] = &[
    "name",
    "state",
    "amp1",
    "amp2",
    "phase",
    "reservoir_a.enabled",
    "reservoir_a.lambda",
    "reservoir_a.delta",
    "reservoir_b.enabled",
    "reservoir_b.lambda",
    "reservoir_b.delta",
    "t_max",
    "n_steps",
    "measures",
    "discord_method",
    "g_method",
    "beat.beat_threshold",
    "beat.oscillation_threshold",
];

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.to_pairs() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # reference grid-world run
//! env = gridworld
//! rows = 10
//! cols = 5
//! eps = 0.15
//! horizon = 100
//! agent = ucbmq
//! episodes = 3000
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::agents::{AgentKind, BonusMode};
use crate::environments::{build_chain, build_gridworld, build_random_mdp, GridWorldSpec};
use crate::error::{Error, Result};
use crate::mdp::TabularMdp;

pub const DEFAULT_RUNS: usize = 8;
pub const DEFAULT_DELTA: f64 = 0.1;

const KEYS: &[&str] = &[
    "env", "rows", "cols", "eps", "horizon", "start_row", "start_col", "reward_row",
    "reward_col", "agent", "bonus", "episodes", "runs", "seed", "delta", "out", "length",
    "states", "actions",
];

#[derive(Debug, Clone, PartialEq)]
pub enum EnvSpec {
    GridWorld(GridWorldSpec),
    Chain { length: usize, horizon: usize },
    /// A fresh random MDP per run, generated from the run seed.
    Random { states: usize, actions: usize, horizon: usize },
}

impl EnvSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::GridWorld(_) => "gridworld",
            Self::Chain { .. } => "chain",
            Self::Random { .. } => "random",
        }
    }

    pub fn horizon(&self) -> usize {
        match self {
            Self::GridWorld(g) => g.horizon,
            Self::Chain { horizon, .. } | Self::Random { horizon, .. } => *horizon,
        }
    }

    pub fn build(&self, seed: u64) -> Result<TabularMdp> {
        match self {
            Self::GridWorld(spec) => build_gridworld(spec),
            Self::Chain { length, horizon } => build_chain(*length, *horizon),
            Self::Random { states, actions, horizon } => build_random_mdp(*states, *actions, *horizon, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvSpec,
    pub agent: AgentKind,
    pub bonus: BonusMode,
    pub episodes: usize,
    pub runs: usize,
    pub seed: u64,
    pub delta: f64,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::invalid("episodes must be at least 1"));
        }
        if self.runs == 0 {
            return Err(Error::invalid("runs must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid(format!("delta {} must lie in the open range (0, 1)", self.delta)));
        }
        if self.agent == AgentKind::Ucbmq && self.bonus == BonusMode::Theoretical && self.episodes < 3 {
            return Err(Error::invalid("ucbmq with the theoretical bonus needs episodes >= 3"));
        }
        match &self.env {
            EnvSpec::GridWorld(spec) => spec.validate()?,
            EnvSpec::Chain { length, horizon } => {
                if *length < 2 || *horizon == 0 {
                    return Err(Error::invalid("chain needs length >= 2 and a positive horizon"));
                }
            }
            EnvSpec::Random { states, actions, horizon } => {
                if *states == 0 || *actions == 0 || *horizon == 0 {
                    return Err(Error::invalid("random env needs positive states, actions and horizon"));
                }
            }
        }
        Ok(())
    }
}

/// Raw `key -> (value, line)` entries, before typing and validation.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
    last_line: usize,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            raw.last_line = lineno;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::config(lineno, format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::config(lineno, format!("unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(Error::config(lineno, format!("missing value for `{key}`")));
            }
            if let Some((_, first)) = raw.entries.get(key) {
                return Err(Error::config(
                    lineno,
                    format!("duplicate key `{key}` (first set on line {first}, again on line {lineno})"),
                ));
            }
            raw.entries.insert(key.to_string(), (value.to_string(), lineno));
        }
        Ok(raw)
    }

    /// Overrides a key as if it were set on the command line (reported as line 0).
    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), (value.to_string(), 0));
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((value, line)) => value
                .parse()
                .map(Some)
                .map_err(|_| Error::config(*line, format!("malformed value `{value}` for `{key}`"))),
        }
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?.ok_or_else(|| {
            Error::config(self.last_line, format!("missing required key `{key}`"))
        })
    }

    fn parse_with<T>(&self, key: &str, f: impl Fn(&str) -> Result<T>) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((value, line)) => f(value).map(Some).map_err(|e| Error::config(*line, e.to_string())),
        }
    }

    pub fn into_config(self) -> Result<ExperimentConfig> {
        let horizon: usize = self.require("horizon")?;
        let env_name: String = self.require("env")?;
        let env = match env_name.as_str() {
            "gridworld" => {
                let rows: usize = self.require("rows")?;
                let cols: usize = self.require("cols")?;
                EnvSpec::GridWorld(GridWorldSpec {
                    rows,
                    cols,
                    noise: self.require("eps")?,
                    horizon,
                    start: (
                        self.get("start_row")?.unwrap_or(1),
                        self.get("start_col")?.unwrap_or(1),
                    ),
                    reward_cell: (
                        self.get("reward_row")?.unwrap_or(rows),
                        self.get("reward_col")?.unwrap_or(cols),
                    ),
                })
            }
            "chain" => EnvSpec::Chain {
                length: self.require("length")?,
                horizon,
            },
            "random" => EnvSpec::Random {
                states: self.require("states")?,
                actions: self.require("actions")?,
                horizon,
            },
            other => {
                return Err(Error::config(
                    self.line_of("env"),
                    format!("unknown env `{other}` (expected gridworld, chain or random)"),
                ))
            }
        };

        let agent = self
            .parse_with("agent", AgentKind::from_str)?
            .ok_or_else(|| Error::config(self.last_line, "missing required key `agent`"))?;
        let bonus = self.parse_with("bonus", BonusMode::from_str)?.unwrap_or_default();

        let config = ExperimentConfig {
            env,
            agent,
            bonus,
            episodes: self.require("episodes")?,
            runs: self.get("runs")?.unwrap_or(DEFAULT_RUNS),
            seed: self.get("seed")?.unwrap_or(0),
            delta: self.get("delta")?.unwrap_or(DEFAULT_DELTA),
            out: self.get::<String>("out")?.map(PathBuf::from),
        };
        let at = |key: &str, ok: bool, msg: String| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::config(self.line_of(key), msg))
            }
        };
        at("episodes", config.episodes >= 1, "episodes must be at least 1".into())?;
        at("runs", config.runs >= 1, "runs must be at least 1".into())?;
        at(
            "delta",
            config.delta > 0.0 && config.delta < 1.0,
            format!("delta {} must lie in the open range (0, 1)", config.delta),
        )?;
        at(
            "episodes",
            !(config.agent == AgentKind::Ucbmq && config.bonus == BonusMode::Theoretical && config.episodes < 3),
            "ucbmq with the theoretical bonus needs episodes >= 3".into(),
        )?;
        // remaining failures are environment geometry
        config
            .validate()
            .map_err(|e| Error::config(self.line_of("env"), e.to_string()))?;
        Ok(config)
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map_or(self.last_line, |(_, l)| *l)
    }
}

/// Parses and validates a configuration file's text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    RawConfig::parse(text)?.into_config()
}

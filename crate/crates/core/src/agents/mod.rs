//! Learning agents and the interface the harness drives them through.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mdp::{DeterministicPolicy, Trajectory};

pub mod baselines;
pub mod ucbmq;

pub use baselines::{simplified_bonus, OptQlState, Planning, RandomAgent, UcbviState};
pub use ucbmq::{compute_rates, cumulative_weights, BonusMode, RateBundle, UcbmqState};

/// An episodic learner.
///
/// Per episode the harness calls [`Agent::begin_episode`], reads
/// [`Agent::policy`] for regret accounting, plays the episode through
/// [`Agent::act`] and finally hands the trajectory to [`Agent::end_episode`].
pub trait Agent: Send {
    fn name(&self) -> &'static str;

    fn begin_episode(&mut self) {}

    /// Greedy policy with respect to the agent's current optimistic tables.
    fn policy(&self) -> DeterministicPolicy;

    fn act(&mut self, step: usize, state: usize) -> usize;

    fn end_episode(&mut self, trajectory: &Trajectory) -> Result<()>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentKind {
    Ucbmq,
    OptQl,
    Ucbvi,
    UcbviGreedy,
    Random,
}

impl AgentKind {
    pub const ALL: [AgentKind; 5] = [
        Self::Ucbmq,
        Self::OptQl,
        Self::Ucbvi,
        Self::UcbviGreedy,
        Self::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ucbmq => "ucbmq",
            Self::OptQl => "optql",
            Self::Ucbvi => "ucbvi",
            Self::UcbviGreedy => "ucbvi_greedy",
            Self::Random => "random",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown agent `{s}` (expected one of ucbmq, optql, ucbvi, ucbvi_greedy, random)"
                ))
            })
    }
}

use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::agents::{Agent, AgentKind, BonusMode, OptQlState, Planning, RandomAgent, UcbmqState, UcbviState};
use crate::error::Result;
use crate::mdp::{backward_induction, initial_value, sample_episode, TabularMdp};
use crate::rng;

/// Regret of the policy played in one episode of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretRecord {
    pub run: usize,
    /// 1-based episode index.
    pub episode: usize,
    pub regret: f64,
    pub cum_regret: f64,
}

pub fn make_agent(
    kind: AgentKind,
    mdp: &TabularMdp,
    bonus: BonusMode,
    episodes: usize,
    delta: f64,
    seed: u64,
) -> Result<Box<dyn Agent>> {
    let (horizon, ns, na) = mdp.dims();
    Ok(match kind {
        AgentKind::Ucbmq => Box::new(UcbmqState::new(ns, na, horizon, episodes.max(3) as u64, delta, bonus)?),
        AgentKind::OptQl => Box::new(OptQlState::new(ns, na, horizon)),
        AgentKind::Ucbvi => Box::new(UcbviState::new(ns, na, horizon, Planning::Full)),
        AgentKind::UcbviGreedy => Box::new(UcbviState::new(ns, na, horizon, Planning::RealTime)),
        AgentKind::Random => Box::new(RandomAgent::new(ns, na, horizon, seed)),
    })
}

/// Runs `episodes` episodes of `agent` on `mdp`, recording the exact regret of
/// the greedy policy the agent holds at the start of each episode.
///
/// `after_episode(episode, agent)` runs once the agent has absorbed the episode.
pub fn run_agent<A, F>(
    mdp: &TabularMdp,
    agent: &mut A,
    episodes: usize,
    run: usize,
    seed: u64,
    mut after_episode: F,
) -> Result<Vec<RegretRecord>>
where
    A: Agent + ?Sized,
    F: FnMut(usize, &A) -> Result<()>,
{
    let optimal = backward_induction(mdp).v[[0, mdp.initial_state()]];
    let mut stream = rng::stream(seed, rng::EPISODE_STREAM);
    let mut records = Vec::with_capacity(episodes);
    let mut cum_regret = 0.0;
    for episode in 1..=episodes {
        agent.begin_episode();
        let value = initial_value(mdp, &agent.policy())?;
        let regret = (optimal - value).max(0.0);
        cum_regret += regret;
        records.push(RegretRecord {
            run,
            episode,
            regret,
            cum_regret,
        });
        let trajectory = sample_episode(mdp, |h, s| agent.act(h, s), &mut stream);
        agent.end_episode(&trajectory)?;
        after_episode(episode, agent)?;
    }
    Ok(records)
}

/// All runs of a configuration, ordered by `(run, episode)`. Run `r` uses seed
/// `config.seed + r` for its environment, episodes and agent.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RegretRecord>> {
    config.validate()?;
    let per_run: Vec<Vec<RegretRecord>> = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let seed = config.seed.wrapping_add(run as u64);
            let mdp = config.env.build(seed)?;
            let mut agent = make_agent(config.agent, &mdp, config.bonus, config.episodes, config.delta, seed)?;
            run_agent(&mdp, agent.as_mut(), config.episodes, run, seed, |_, _| Ok(()))
        })
        .collect::<Result<_>>()?;
    Ok(per_run.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::GridWorldSpec;
    use crate::harness::EnvSpec;
    use ndarray::{Array3, Array4};

    fn config(agent: AgentKind) -> ExperimentConfig {
        ExperimentConfig {
            env: EnvSpec::GridWorld(GridWorldSpec {
                rows: 3,
                cols: 3,
                noise: 0.1,
                horizon: 6,
                start: (1, 1),
                reward_cell: (3, 3),
            }),
            agent,
            bonus: BonusMode::Simplified,
            episodes: 40,
            runs: 3,
            seed: 5,
            delta: 0.1,
            out: None,
        }
    }

    #[test]
    fn single_state_mdp_has_no_regret() {
        let mdp = TabularMdp::new(Array4::ones((4, 1, 1, 1)), Array3::from_elem((4, 1, 1), 0.5), 0).unwrap();
        for kind in AgentKind::ALL {
            let mut agent = make_agent(kind, &mdp, BonusMode::Simplified, 10, 0.1, 0).unwrap();
            let records = run_agent(&mdp, agent.as_mut(), 10, 0, 0, |_, _| Ok(())).unwrap();
            assert!(records.iter().all(|r| r.regret == 0.0 && r.cum_regret == 0.0));
        }
    }

    #[test]
    fn records_are_ordered_and_cumulative() {
        for kind in AgentKind::ALL {
            let records = run_experiment(&config(kind)).unwrap();
            assert_eq!(records.len(), 120);
            for (i, r) in records.iter().enumerate() {
                assert_eq!((r.run, r.episode), (i / 40, i % 40 + 1));
                assert!(r.regret >= 0.0);
                let prev = if r.episode == 1 { 0.0 } else { records[i - 1].cum_regret };
                assert_eq!(r.cum_regret, prev + r.regret);
            }
        }
    }

    #[test]
    fn experiments_are_deterministic() {
        for kind in AgentKind::ALL {
            assert_eq!(run_experiment(&config(kind)).unwrap(), run_experiment(&config(kind)).unwrap());
        }
    }

    #[test]
    fn runs_use_different_streams() {
        let records = run_experiment(&config(AgentKind::Random)).unwrap();
        let run0: Vec<f64> = records.iter().filter(|r| r.run == 0).map(|r| r.regret).collect();
        let run1: Vec<f64> = records.iter().filter(|r| r.run == 1).map(|r| r.regret).collect();
        assert_ne!(run0, run1);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut cfg = config(AgentKind::Ucbmq);
        cfg.episodes = 0;
        assert!(run_experiment(&cfg).is_err());
    }
}

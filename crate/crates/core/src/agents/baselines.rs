//! Comparison agents sharing the simplified exploration bonus: optimistic
//! Q-learning, UCBVI with full planning, UCBVI with one-step real-time planning,
//! and a uniform-random control.

use ndarray::{s, Array2, Array3, Array4};
use rand::Rng;

use super::Agent;
use crate::error::{Error, Result};
use crate::mdp::{argmax_first, DeterministicPolicy, TabularMdp, Trajectory};
use crate::rng::{self, Stream};

/// `min(sqrt(1/n) + r/n, r)` with `r = horizon - step` remaining steps; `r` when `n = 0`.
pub fn simplified_bonus(count: u64, step: usize, horizon: usize) -> f64 {
    let remaining = (horizon - step) as f64;
    if count == 0 {
        return remaining;
    }
    let n = count as f64;
    ((1.0 / n).sqrt() + remaining / n).min(remaining)
}

fn remaining_value_cap(horizon: usize, num_states: usize) -> Array2<f64> {
    Array2::from_shape_fn((horizon + 1, num_states), |(h, _)| (horizon - h) as f64)
}

fn validate_trajectory(trajectory: &Trajectory, horizon: usize, ns: usize, na: usize) -> Result<()> {
    if trajectory.len() != horizon {
        return Err(Error::invalid(format!(
            "trajectory has {} steps, expected {horizon}",
            trajectory.len()
        )));
    }
    for (i, st) in trajectory.steps.iter().enumerate() {
        if st.step != i || st.state >= ns || st.next_state >= ns || st.action >= na {
            return Err(Error::invalid(format!("malformed trajectory step {i}: {st:?}")));
        }
    }
    Ok(())
}

fn greedy(qbar: &Array3<f64>) -> DeterministicPolicy {
    let (horizon, ns, na) = qbar.dim();
    let actions = Array2::from_shape_fn((horizon, ns), |(h, s)| argmax_first(qbar.slice(s![h, s, ..])));
    DeterministicPolicy::new(actions, na).expect("argmax is a valid action")
}

/// Optimistic Q-learning with learning rate `(H+1)/(H+n)`.
#[derive(Debug, Clone)]
pub struct OptQlState {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    counts: Array3<u64>,
    qbar: Array3<f64>,
    vbar: Array2<f64>,
    bonus_scale: f64,
}

impl OptQlState {
    pub fn new(num_states: usize, num_actions: usize, horizon: usize) -> Self {
        let vbar = remaining_value_cap(horizon, num_states);
        let qbar = Array3::from_shape_fn((horizon, num_states, num_actions), |(h, _, _)| {
            (horizon - h) as f64
        });
        Self {
            horizon,
            num_states,
            num_actions,
            counts: Array3::zeros((horizon, num_states, num_actions)),
            qbar,
            vbar,
            bonus_scale: 1.0,
        }
    }

    /// Multiplies every bonus by `scale` (0 turns exploration off).
    pub fn with_bonus_scale(mut self, scale: f64) -> Self {
        self.bonus_scale = scale;
        self
    }

    pub fn counts(&self) -> &Array3<u64> {
        &self.counts
    }

    pub fn qbar(&self) -> &Array3<f64> {
        &self.qbar
    }

    pub fn vbar(&self) -> &Array2<f64> {
        &self.vbar
    }

    pub fn update(&mut self, trajectory: &Trajectory) -> Result<()> {
        validate_trajectory(trajectory, self.horizon, self.num_states, self.num_actions)?;
        let snapshot = self.vbar.clone();
        for st in &trajectory.steps {
            let (h, s, a) = (st.step, st.state, st.action);
            self.counts[[h, s, a]] += 1;
            let n = self.counts[[h, s, a]];
            let eta = (self.horizon as f64 + 1.0) / (self.horizon as f64 + n as f64);
            let target = st.reward
                + snapshot[[h + 1, st.next_state]]
                + self.bonus_scale * simplified_bonus(n, h, self.horizon);
            self.qbar[[h, s, a]] = (1.0 - eta) * self.qbar[[h, s, a]] + eta * target;
            let best = self.qbar.slice(s![h, s, ..]).fold(f64::NEG_INFINITY, |m, &x| m.max(x));
            self.vbar[[h, s]] = best.min((self.horizon - h) as f64);
        }
        Ok(())
    }
}

impl Agent for OptQlState {
    fn name(&self) -> &'static str {
        "optql"
    }

    fn policy(&self) -> DeterministicPolicy {
        greedy(&self.qbar)
    }

    fn act(&mut self, step: usize, state: usize) -> usize {
        argmax_first(self.qbar.slice(s![step, state, ..]))
    }

    fn end_episode(&mut self, trajectory: &Trajectory) -> Result<()> {
        self.update(trajectory)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Planning {
    /// Backward induction on the optimistic model after every episode.
    Full,
    /// One-step backup of the visited state just before acting.
    RealTime,
}

/// Model-based optimistic value iteration on the empirical model.
#[derive(Debug, Clone)]
pub struct UcbviState {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    planning: Planning,
    counts: Array3<u64>,
    transition_counts: Array4<u32>,
    // observed next states per (h, s, a), ascending
    observed: Vec<Vec<usize>>,
    p_hat: Array4<f64>,
    rewards: Array3<f64>,
    qbar: Array3<f64>,
    vbar: Array2<f64>,
    bonus_scale: f64,
}

impl UcbviState {
    pub fn new(num_states: usize, num_actions: usize, horizon: usize, planning: Planning) -> Self {
        let qbar = Array3::from_shape_fn((horizon, num_states, num_actions), |(h, _, _)| {
            (horizon - h) as f64
        });
        Self {
            horizon,
            num_states,
            num_actions,
            planning,
            counts: Array3::zeros((horizon, num_states, num_actions)),
            transition_counts: Array4::zeros((horizon, num_states, num_actions, num_states)),
            observed: vec![Vec::new(); horizon * num_states * num_actions],
            p_hat: Array4::zeros((horizon, num_states, num_actions, num_states)),
            rewards: Array3::zeros((horizon, num_states, num_actions)),
            qbar,
            vbar: remaining_value_cap(horizon, num_states),
            bonus_scale: 1.0,
        }
    }

    pub fn with_bonus_scale(mut self, scale: f64) -> Self {
        self.bonus_scale = scale;
        self
    }

    /// Replaces the empirical model with the true one, as if every pair had
    /// been visited `count` times.
    pub fn inject_model(&mut self, mdp: &TabularMdp, count: u64) -> Result<()> {
        if mdp.dims() != (self.horizon, self.num_states, self.num_actions) {
            return Err(Error::ShapeMismatch("injected model has different dimensions".into()));
        }
        self.p_hat.assign(mdp.transitions());
        self.rewards.assign(mdp.rewards());
        self.counts.fill(count);
        for h in 0..self.horizon {
            for s in 0..self.num_states {
                for a in 0..self.num_actions {
                    let i = self.flat(h, s, a);
                    self.observed[i] = mdp.next_states(h, s, a).iter().map(|&(sn, _)| sn).collect();
                }
            }
        }
        Ok(())
    }

    fn flat(&self, h: usize, s: usize, a: usize) -> usize {
        (h * self.num_states + s) * self.num_actions + a
    }

    pub fn planning(&self) -> Planning {
        self.planning
    }

    pub fn counts(&self) -> &Array3<u64> {
        &self.counts
    }

    pub fn transition_counts(&self) -> &Array4<u32> {
        &self.transition_counts
    }

    /// Empirical transitions. Rows of unvisited pairs are all zero; planning
    /// treats them as uniform.
    pub fn p_hat(&self) -> &Array4<f64> {
        &self.p_hat
    }

    pub fn qbar(&self) -> &Array3<f64> {
        &self.qbar
    }

    pub fn vbar(&self) -> &Array2<f64> {
        &self.vbar
    }

    fn backup(&self, h: usize, s: usize, a: usize) -> f64 {
        let n = self.counts[[h, s, a]];
        let next = self.vbar.row(h + 1);
        let expected: f64 = if n == 0 {
            next.sum() / self.num_states as f64
        } else {
            self.observed[self.flat(h, s, a)]
                .iter()
                .map(|&sn| self.p_hat[[h, s, a, sn]] * next[sn])
                .sum()
        };
        let raw = self.rewards[[h, s, a]]
            + self.bonus_scale * simplified_bonus(n, h, self.horizon)
            + expected;
        raw.min((self.horizon - h) as f64)
    }

    /// Backward induction on the optimistic empirical model.
    pub fn plan(&mut self) {
        for h in (0..self.horizon).rev() {
            for s in 0..self.num_states {
                let mut best = f64::NEG_INFINITY;
                for a in 0..self.num_actions {
                    let q = self.backup(h, s, a);
                    self.qbar[[h, s, a]] = q;
                    best = best.max(q);
                }
                self.vbar[[h, s]] = best;
            }
        }
    }

    /// Refreshes the Q row of `(h, s)`, lowers `vbar[h][s]` accordingly and
    /// returns the greedy action.
    pub fn greedy_step(&mut self, h: usize, s: usize) -> usize {
        let mut best = f64::NEG_INFINITY;
        for a in 0..self.num_actions {
            let q = self.backup(h, s, a);
            self.qbar[[h, s, a]] = q;
            best = best.max(q);
        }
        self.vbar[[h, s]] = self.vbar[[h, s]].min(best);
        argmax_first(self.qbar.slice(s![h, s, ..]))
    }

    /// Adds the episode's transitions to the empirical model.
    pub fn record(&mut self, trajectory: &Trajectory) -> Result<()> {
        validate_trajectory(trajectory, self.horizon, self.num_states, self.num_actions)?;
        for st in &trajectory.steps {
            let (h, s, a, sn) = (st.step, st.state, st.action, st.next_state);
            self.counts[[h, s, a]] += 1;
            self.transition_counts[[h, s, a, sn]] += 1;
            self.rewards[[h, s, a]] = st.reward;
            let i = self.flat(h, s, a);
            if let Err(pos) = self.observed[i].binary_search(&sn) {
                self.observed[i].insert(pos, sn);
            }
            let n = self.counts[[h, s, a]] as f64;
            for &o in &self.observed[i] {
                self.p_hat[[h, s, a, o]] = self.transition_counts[[h, s, a, o]] as f64 / n;
            }
        }
        Ok(())
    }
}

impl Agent for UcbviState {
    fn name(&self) -> &'static str {
        match self.planning {
            Planning::Full => "ucbvi",
            Planning::RealTime => "ucbvi_greedy",
        }
    }

    fn policy(&self) -> DeterministicPolicy {
        greedy(&self.qbar)
    }

    fn act(&mut self, step: usize, state: usize) -> usize {
        match self.planning {
            Planning::Full => argmax_first(self.qbar.slice(s![step, state, ..])),
            Planning::RealTime => self.greedy_step(step, state),
        }
    }

    fn end_episode(&mut self, trajectory: &Trajectory) -> Result<()> {
        self.record(trajectory)?;
        if self.planning == Planning::Full {
            self.plan();
        }
        Ok(())
    }
}

/// Plays a fresh uniformly drawn deterministic policy every episode.
#[derive(Debug, Clone)]
pub struct RandomAgent {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    current: DeterministicPolicy,
    rng: Stream,
}

impl RandomAgent {
    pub fn new(num_states: usize, num_actions: usize, horizon: usize, seed: u64) -> Self {
        Self {
            horizon,
            num_states,
            num_actions,
            current: DeterministicPolicy::constant(horizon, num_states, 0),
            rng: rng::stream(seed, rng::AGENT_STREAM),
        }
    }
}

impl Agent for RandomAgent {
    fn name(&self) -> &'static str {
        "random"
    }

    fn begin_episode(&mut self) {
        let na = self.num_actions;
        let rng = &mut self.rng;
        let actions = Array2::from_shape_fn((self.horizon, self.num_states), |_| rng.gen_range(0..na));
        self.current = DeterministicPolicy::new(actions, na).expect("sampled in range");
    }

    fn policy(&self) -> DeterministicPolicy {
        self.current.clone()
    }

    fn act(&mut self, step: usize, state: usize) -> usize {
        self.current.action(step, state)
    }

    fn end_episode(&mut self, _trajectory: &Trajectory) -> Result<()> {
        Ok(())
    }
}

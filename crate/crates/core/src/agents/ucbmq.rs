//! UCB momentum Q-learning.
//!
//! Each visited `(h, s, a)` keeps a biased Q estimate, a bias-value function
//! over next states, and running sums for the variance proxy and the momentum
//! correction of the bonus. Updates happen once per episode against a snapshot
//! of the optimistic values taken before the episode.

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array2, Array3, Array4};

use super::baselines::simplified_bonus;
use super::Agent;
use crate::error::{Error, Result};
use crate::mdp::{argmax_first, DeterministicPolicy, Trajectory};

/// Learning rate, momentum and their derived quantities for one visit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBundle {
    pub alpha: f64,
    pub gamma: f64,
    pub eta: f64,
    /// `gamma / alpha`, the per-sample momentum weight of the unfolded update.
    pub gamma_bar: f64,
}

/// Rates for the `count`-th visit of a state-action pair (`count >= 1`).
pub fn compute_rates(count: u64, horizon: usize) -> Result<RateBundle> {
    if count == 0 {
        return Err(Error::invalid("rates are only defined for visited pairs (count >= 1)"));
    }
    let n = count as f64;
    let h = horizon as f64;
    Ok(RateBundle {
        alpha: 1.0 / n,
        gamma: h / (h + n) * ((n - 1.0) / n),
        eta: (h + 1.0) / (h + n),
        gamma_bar: h * (n - 1.0) / (n + h),
    })
}

/// `log(32 e (2T + 1) / delta)`.
pub fn exploration_threshold(episodes: u64, delta: f64) -> f64 {
    (32.0 * (2.0 * episodes as f64 + 1.0) / delta).ln() + 1.0
}

/// `S2 / n - (S1 / n)^2`, clamped at zero.
pub fn empirical_variance(sum: f64, sq_sum: f64, count: u64) -> f64 {
    let n = count as f64;
    let mean = sum / n;
    (sq_sum / n - mean * mean).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BonusMode {
    /// Bernstein-type bonus with the variance proxy and momentum correction.
    Theoretical,
    /// The shared bonus `min(sqrt(1/n) + (H-h+1)/n, H-h+1)`.
    #[default]
    Simplified,
}

impl BonusMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Theoretical => "theoretical",
            Self::Simplified => "simplified",
        }
    }
}

impl fmt::Display for BonusMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BonusMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theoretical" => Ok(Self::Theoretical),
            "simplified" => Ok(Self::Simplified),
            _ => Err(Error::invalid(format!(
                "unknown bonus `{s}` (expected theoretical or simplified)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct UcbmqState {
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    counts: Array3<u64>,
    q: Array3<f64>,
    qbar: Array3<f64>,
    vbar: Array2<f64>,
    bias_value: Array4<f64>,
    target_sum: Array3<f64>,
    target_sq_sum: Array3<f64>,
    correction_sum: Array3<f64>,
    zeta: f64,
    episodes: u64,
    log_episodes: f64,
    delta: f64,
    bonus_mode: BonusMode,
}

impl UcbmqState {
    /// Fresh learner for an episode budget of `episodes` (at least 3) and
    /// confidence `delta` in `(0, 1)`.
    pub fn new(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        episodes: u64,
        delta: f64,
        bonus_mode: BonusMode,
    ) -> Result<Self> {
        if num_states == 0 || num_actions == 0 || horizon == 0 {
            return Err(Error::invalid("states, actions and horizon must be positive"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!("delta {delta} must lie in (0, 1)")));
        }
        if episodes < 3 {
            return Err(Error::invalid(format!("episode budget {episodes} must be at least 3")));
        }
        let h = horizon as f64;
        let mut vbar = Array2::from_elem((horizon + 1, num_states), h);
        vbar.row_mut(horizon).fill(0.0);
        Ok(Self {
            num_states,
            num_actions,
            horizon,
            counts: Array3::zeros((horizon, num_states, num_actions)),
            q: Array3::zeros((horizon, num_states, num_actions)),
            qbar: Array3::from_elem((horizon, num_states, num_actions), h),
            vbar,
            bias_value: Array4::from_elem((horizon, num_states, num_actions, num_states), h),
            target_sum: Array3::zeros((horizon, num_states, num_actions)),
            target_sq_sum: Array3::zeros((horizon, num_states, num_actions)),
            correction_sum: Array3::zeros((horizon, num_states, num_actions)),
            zeta: exploration_threshold(episodes, delta),
            episodes,
            log_episodes: (episodes as f64).ln(),
            delta,
            bonus_mode,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn counts(&self) -> &Array3<u64> {
        &self.counts
    }

    pub fn q(&self) -> &Array3<f64> {
        &self.q
    }

    pub fn qbar(&self) -> &Array3<f64> {
        &self.qbar
    }

    /// Optimistic values, `(H + 1, S)` with a zero terminal row.
    pub fn vbar(&self) -> &Array2<f64> {
        &self.vbar
    }

    /// `bias_value[h][s][a][s']`.
    pub fn bias_value(&self) -> &Array4<f64> {
        &self.bias_value
    }

    pub fn target_sum(&self) -> &Array3<f64> {
        &self.target_sum
    }

    pub fn target_sq_sum(&self) -> &Array3<f64> {
        &self.target_sq_sum
    }

    pub fn correction_sum(&self) -> &Array3<f64> {
        &self.correction_sum
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn bonus_mode(&self) -> BonusMode {
        self.bonus_mode
    }

    pub fn select_action(&self, h: usize, s: usize) -> usize {
        argmax_first(self.qbar.slice(s![h, s, ..]))
    }

    /// Empirical variance of the bootstrap targets observed at `(h, s, a)`.
    pub fn variance_proxy(&self, h: usize, s: usize, a: usize) -> Result<f64> {
        let n = self.counts[[h, s, a]];
        if n == 0 {
            return Err(Error::invalid(format!(
                "variance proxy undefined for unvisited (h={h}, s={s}, a={a})"
            )));
        }
        Ok(empirical_variance(
            self.target_sum[[h, s, a]],
            self.target_sq_sum[[h, s, a]],
            n,
        ))
    }

    pub fn bonus(&self, h: usize, s: usize, a: usize) -> f64 {
        let n = self.counts[[h, s, a]];
        match self.bonus_mode {
            BonusMode::Simplified => simplified_bonus(n, h, self.horizon),
            BonusMode::Theoretical if n == 0 => self.horizon as f64,
            BonusMode::Theoretical => {
                let nf = n as f64;
                let hf = self.horizon as f64;
                let w = empirical_variance(
                    self.target_sum[[h, s, a]],
                    self.target_sq_sum[[h, s, a]],
                    n,
                );
                2.0 * (w * self.zeta / nf).sqrt()
                    + 53.0 * hf.powi(3) * self.zeta * self.log_episodes / nf
                    + self.correction_sum[[h, s, a]] / (hf * self.log_episodes * nf)
            }
        }
    }

    /// Applies one episode of experience. All reads of `vbar` and of the
    /// visited bias rows see their values from before the episode.
    pub fn update_after_episode(&mut self, trajectory: &Trajectory) -> Result<()> {
        self.check_trajectory(trajectory)?;
        let snapshot = self.vbar.clone();
        for step in &trajectory.steps {
            let (h, s, a, sn) = (step.step, step.state, step.action, step.next_state);
            let idx = [h, s, a];

            self.counts[idx] += 1;
            let rates = compute_rates(self.counts[idx], self.horizon)?;

            let next_values = snapshot.row(h + 1);
            let target = next_values[sn];
            // each (h, s, a) appears at most once per episode, so this row is still pre-episode
            let bias = self.bias_value[[h, s, a, sn]];

            self.target_sum[idx] += target;
            self.target_sq_sum[idx] += target * target;
            self.correction_sum[idx] += rates.gamma_bar * (bias - target);

            self.q[idx] = rates.alpha * (step.reward + target)
                + rates.gamma * (target - bias)
                + (1.0 - rates.alpha) * self.q[idx];

            // written as v + (1 - eta)(b - v) so that b >= v survives rounding
            let mut row = self.bias_value.slice_mut(s![h, s, a, ..]);
            for (b, &v) in row.iter_mut().zip(next_values.iter()) {
                *b = v + (1.0 - rates.eta) * (*b - v);
            }

            self.qbar[idx] = self.q[idx] + self.bonus(h, s, a);
            let best = self
                .qbar
                .slice(s![h, s, ..])
                .iter()
                .fold(f64::NEG_INFINITY, |m, &x| m.max(x));
            self.vbar[[h, s]] = best.max(0.0).min(snapshot[[h, s]]);
        }
        Ok(())
    }

    fn check_trajectory(&self, trajectory: &Trajectory) -> Result<()> {
        if trajectory.len() != self.horizon {
            return Err(Error::invalid(format!(
                "trajectory has {} steps, expected {}",
                trajectory.len(),
                self.horizon
            )));
        }
        for (i, step) in trajectory.steps.iter().enumerate() {
            if step.step != i
                || step.state >= self.num_states
                || step.next_state >= self.num_states
                || step.action >= self.num_actions
            {
                return Err(Error::invalid(format!("malformed trajectory step {i}: {step:?}")));
            }
        }
        Ok(())
    }

    pub fn greedy_policy(&self) -> DeterministicPolicy {
        let actions = Array2::from_shape_fn((self.horizon, self.num_states), |(h, s)| {
            self.select_action(h, s)
        });
        DeterministicPolicy::new(actions, self.num_actions).expect("argmax is a valid action")
    }
}

impl Agent for UcbmqState {
    fn name(&self) -> &'static str {
        "ucbmq"
    }

    fn policy(&self) -> DeterministicPolicy {
        self.greedy_policy()
    }

    fn act(&mut self, step: usize, state: usize) -> usize {
        self.select_action(step, state)
    }

    fn end_episode(&mut self, trajectory: &Trajectory) -> Result<()> {
        self.update_after_episode(trajectory)
    }
}

/// Cumulative weights `w[t][k] = eta_k * prod_{l=k+1..t} (1 - eta_l)` for a
/// visit-indicator sequence, with `eta_l = flag_l (H+1)/(H+n_l)` and `n_l` the
/// running visit count. Indices are 0-based episodes; entries with `k > t` are 0.
pub fn cumulative_weights(visits: &[bool], horizon: usize) -> Array2<f64> {
    let len = visits.len();
    let h = horizon as f64;
    let mut weights = Array2::zeros((len, len));
    let mut count = 0u64;
    for (t, &visited) in visits.iter().enumerate() {
        let eta = if visited {
            count += 1;
            (h + 1.0) / (h + count as f64)
        } else {
            0.0
        };
        for k in 0..t {
            weights[[t, k]] = weights[[t - 1, k]] * (1.0 - eta);
        }
        weights[[t, t]] = eta;
    }
    weights
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::{build_gridworld, build_random_mdp, GridWorldSpec};
    use crate::mdp::sample_episode;
    use crate::rng;
    use approx::assert_abs_diff_eq;

    #[test]
    fn first_visit_has_no_momentum() {
        for horizon in [1, 5, 100] {
            let r = compute_rates(1, horizon).unwrap();
            assert_eq!((r.alpha, r.gamma, r.gamma_bar, r.eta), (1.0, 0.0, 0.0, 1.0));
        }
    }

    #[test]
    fn rates_for_second_visit() {
        let r = compute_rates(2, 2).unwrap();
        assert_eq!(r.alpha, 0.5);
        assert_eq!(r.gamma, 0.25);
        assert_eq!(r.eta, 0.75);
        assert_eq!(r.gamma_bar, 0.5);
    }

    #[test]
    fn rate_identities() {
        for horizon in 1..=10 {
            for n in 1..=100 {
                let r = compute_rates(n, horizon).unwrap();
                assert_abs_diff_eq!(r.eta, r.alpha * (1.0 + r.gamma_bar), epsilon = 1e-15);
                assert_abs_diff_eq!(r.eta, r.alpha + r.gamma, epsilon = 1e-15);
                assert!(r.alpha + r.gamma <= 1.0 + 1e-15);
                assert!(r.gamma_bar <= horizon as f64);
            }
        }
        assert!(compute_rates(0, 3).is_err());
    }

    #[test]
    fn init_is_optimistic() {
        let st = UcbmqState::new(3, 2, 4, 10, 0.1, BonusMode::Theoretical).unwrap();
        assert!(st.qbar().iter().all(|&x| x == 4.0));
        assert!(st.q().iter().all(|&x| x == 0.0));
        assert!(st.bias_value().iter().all(|&x| x == 4.0));
        assert!(st.vbar().row(4).iter().all(|&x| x == 0.0));
        assert!(st.vbar().slice(s![..4, ..]).iter().all(|&x| x == 4.0));
        assert_eq!(st.select_action(0, 0), 0);
    }

    #[test]
    fn zeta_for_small_budget() {
        let st = UcbmqState::new(1, 1, 1, 3, 0.1, BonusMode::Theoretical).unwrap();
        // log(32 e * 7 / 0.1) = log(2240) + 1
        assert_abs_diff_eq!(st.zeta(), 2240f64.ln() + 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(st.zeta(), 8.714, epsilon = 1e-3);
    }

    #[test]
    fn init_rejects_bad_parameters() {
        assert!(UcbmqState::new(2, 2, 2, 10, 0.0, BonusMode::Simplified).is_err());
        assert!(UcbmqState::new(2, 2, 2, 10, 1.0, BonusMode::Simplified).is_err());
        assert!(UcbmqState::new(2, 2, 2, 2, 0.5, BonusMode::Simplified).is_err());
    }

    #[test]
    fn empirical_variance_examples() {
        assert_eq!(empirical_variance(3.0, 9.0, 1), 0.0);
        assert_eq!(empirical_variance(6.0, 20.0, 2), 1.0);
        for x in [0.1, 0.3, 0.7, 1.1, 97.3] {
            let w = empirical_variance(3.0 * x, 3.0 * x * x, 3);
            assert!((0.0..1e-12).contains(&w));
        }
    }

    #[test]
    fn bonus_examples() {
        let st = UcbmqState::new(1, 1, 2, 3, 0.1, BonusMode::Theoretical).unwrap();
        assert_eq!(st.bonus(0, 0, 0), 2.0);

        let mdp = crate::environments::build_chain(2, 2).unwrap();
        let mut st = UcbmqState::new(2, 2, 2, 3, 0.1, BonusMode::Theoretical).unwrap();
        let traj = sample_episode(&mdp, |_, _| 0, &mut rng::stream(0, 1));
        st.update_after_episode(&traj).unwrap();
        let expected = 53.0 * 8.0 * (2240f64.ln() + 1.0) * 3f64.ln();
        assert_abs_diff_eq!(st.bonus(0, 0, 0), expected, epsilon = 1e-9);

        let st = UcbmqState::new(1, 1, 5, 10, 0.1, BonusMode::Simplified).unwrap();
        assert_eq!(st.bonus(4, 0, 0), 1.0);
        assert_eq!(st.bonus(0, 0, 0), 5.0);
    }

    #[test]
    fn first_visit_sets_q_to_target() {
        let mdp = build_random_mdp(3, 2, 4, 5).unwrap();
        let mut st = UcbmqState::new(3, 2, 4, 10, 0.1, BonusMode::Simplified).unwrap();
        let traj = sample_episode(&mdp, |h, s| st.select_action(h, s), &mut rng::stream(1, 1));
        let before = st.vbar().clone();
        st.update_after_episode(&traj).unwrap();
        for step in &traj.steps {
            let target = before[[step.step + 1, step.next_state]];
            assert_eq!(st.q()[[step.step, step.state, step.action]], step.reward + target);
        }
    }

    #[test]
    fn rejects_wrong_length() {
        let mut st = UcbmqState::new(3, 2, 4, 10, 0.1, BonusMode::Simplified).unwrap();
        let mdp = build_random_mdp(3, 2, 3, 5).unwrap();
        let traj = sample_episode(&mdp, |_, _| 0, &mut rng::stream(1, 1));
        assert!(st.update_after_episode(&traj).is_err());
    }

    #[test]
    fn optimistic_values_never_increase() {
        let spec = GridWorldSpec {
            rows: 3,
            cols: 3,
            noise: 0.2,
            horizon: 8,
            start: (1, 1),
            reward_cell: (3, 3),
        };
        let mdp = build_gridworld(&spec).unwrap();
        let mut st = UcbmqState::new(9, 4, 8, 300, 0.1, BonusMode::Simplified).unwrap();
        let mut stream = rng::stream(3, 1);
        for _ in 0..300 {
            let before = st.vbar().clone();
            let traj = sample_episode(&mdp, |h, s| st.select_action(h, s), &mut stream);
            st.update_after_episode(&traj).unwrap();
            for (new, old) in st.vbar().iter().zip(before.iter()) {
                assert!(new <= old && *new >= 0.0);
            }
        }
    }

    #[test]
    fn weights_single_and_empty() {
        let w = cumulative_weights(&[true], 4);
        assert_eq!(w[[0, 0]], 1.0);
        let w = cumulative_weights(&[false; 6], 4);
        assert!(w.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn weight_rows_sum_to_one_after_a_visit() {
        let flags = [false, true, false, true, true, false, true];
        let w = cumulative_weights(&flags, 3);
        for t in 1..flags.len() {
            assert_abs_diff_eq!(w.row(t).sum(), 1.0, epsilon = 1e-12);
        }
        assert_eq!(w.row(0).sum(), 0.0);
    }
}

//! Exact finite-horizon tabular MDPs.
//!
//! Transitions and rewards are stored per step, so non-stationary instances are
//! first class. All solvers are plain backward or forward recursions in `f64`.

use ndarray::{Array2, Array3, Array4, ArrayView1};
use rand::Rng;

use crate::error::{Error, Result};

/// Row-stochasticity tolerance for transition tables.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Upper limit on the number of support trajectories [`enumerate_trajectories`] will visit.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone)]
pub struct TabularMdp {
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    initial_state: usize,
    transitions: Array4<f64>,
    rewards: Array3<f64>,
    // nonzero next-state entries per (h, s, a), ascending in s'
    support: Vec<Vec<(usize, f64)>>,
}

impl TabularMdp {
    /// Builds an MDP from `transitions[h][s][a][s']` and `rewards[h][s][a]`.
    ///
    /// Rejects empty dimensions, inconsistent shapes, rows that are not
    /// probability vectors (within [`ROW_SUM_TOLERANCE`]), rewards outside
    /// `[0, 1]` and an out-of-range initial state.
    pub fn new(transitions: Array4<f64>, rewards: Array3<f64>, initial_state: usize) -> Result<Self> {
        let (horizon, num_states, num_actions, next) = transitions.dim();
        if horizon == 0 || num_states == 0 || num_actions == 0 {
            return Err(Error::InvalidMdp("states, actions and horizon must be positive".into()));
        }
        if next != num_states {
            return Err(Error::InvalidMdp(format!(
                "transition table has {next} next states for {num_states} states"
            )));
        }
        if rewards.dim() != (horizon, num_states, num_actions) {
            return Err(Error::InvalidMdp(format!(
                "reward table shape {:?} does not match (H, S, A) = {:?}",
                rewards.dim(),
                (horizon, num_states, num_actions)
            )));
        }
        if initial_state >= num_states {
            return Err(Error::InvalidMdp(format!(
                "initial state {initial_state} out of range for {num_states} states"
            )));
        }

        let mut support = Vec::with_capacity(horizon * num_states * num_actions);
        for h in 0..horizon {
            for s in 0..num_states {
                for a in 0..num_actions {
                    let row = transitions.slice(ndarray::s![h, s, a, ..]);
                    if row.iter().any(|&p| !p.is_finite() || p < 0.0) {
                        return Err(Error::InvalidMdp(format!(
                            "negative or non-finite probability at (h={h}, s={s}, a={a})"
                        )));
                    }
                    let sum: f64 = row.sum();
                    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                        return Err(Error::InvalidMdp(format!(
                            "transition row (h={h}, s={s}, a={a}) sums to {sum}"
                        )));
                    }
                    let r = rewards[[h, s, a]];
                    if !(0.0..=1.0).contains(&r) {
                        return Err(Error::InvalidMdp(format!(
                            "reward {r} at (h={h}, s={s}, a={a}) is outside [0, 1]"
                        )));
                    }
                    support.push(
                        row.iter()
                            .enumerate()
                            .filter(|(_, &p)| p > 0.0)
                            .map(|(s_next, &p)| (s_next, p))
                            .collect(),
                    );
                }
            }
        }

        Ok(Self {
            num_states,
            num_actions,
            horizon,
            initial_state,
            transitions,
            rewards,
            support,
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

    /// `(H, S, A)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.horizon, self.num_states, self.num_actions)
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    pub fn transitions(&self) -> &Array4<f64> {
        &self.transitions
    }

    pub fn rewards(&self) -> &Array3<f64> {
        &self.rewards
    }

    pub fn reward(&self, h: usize, s: usize, a: usize) -> f64 {
        self.rewards[[h, s, a]]
    }

    /// Next states with positive probability, ascending by state index.
    pub fn next_states(&self, h: usize, s: usize, a: usize) -> &[(usize, f64)] {
        &self.support[(h * self.num_states + s) * self.num_actions + a]
    }

    /// `p_h f (s, a)`: expectation of `f` over the next state.
    pub fn expect(&self, h: usize, s: usize, a: usize, f: ArrayView1<'_, f64>) -> f64 {
        self.next_states(h, s, a).iter().map(|&(sn, p)| p * f[sn]).sum()
    }

    /// `Var_{p_h}(f)(s, a)`.
    pub fn variance(&self, h: usize, s: usize, a: usize, f: ArrayView1<'_, f64>) -> f64 {
        let next = self.next_states(h, s, a);
        let mean: f64 = next.iter().map(|&(sn, p)| p * f[sn]).sum();
        next.iter().map(|&(sn, p)| p * (f[sn] - mean).powi(2)).sum()
    }

    pub fn is_deterministic(&self) -> bool {
        self.support.iter().all(|row| row.len() == 1)
    }
}

/// Variance of `f` under the probability vector `p` (two-pass, never negative).
pub fn variance_of(p: &[f64], f: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), f.len());
    let mean: f64 = p.iter().zip(f).map(|(p, f)| p * f).sum();
    p.iter().zip(f).map(|(p, f)| p * (f - mean).powi(2)).sum()
}

/// Index of the first maximal entry.
pub fn argmax_first<'a>(row: impl IntoIterator<Item = &'a f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, &v) in row.into_iter().enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicPolicy {
    actions: Array2<usize>,
}

impl DeterministicPolicy {
    /// `actions[h][s]`, shape `(H, S)`.
    pub fn new(actions: Array2<usize>, num_actions: usize) -> Result<Self> {
        if let Some(&bad) = actions.iter().find(|&&a| a >= num_actions) {
            return Err(Error::invalid(format!(
                "policy action {bad} out of range for {num_actions} actions"
            )));
        }
        Ok(Self { actions })
    }

    pub fn constant(horizon: usize, num_states: usize, action: usize) -> Self {
        Self {
            actions: Array2::from_elem((horizon, num_states), action),
        }
    }

    pub fn action(&self, h: usize, s: usize) -> usize {
        self.actions[[h, s]]
    }

    pub fn actions(&self) -> &Array2<usize> {
        &self.actions
    }

    fn check_shape(&self, mdp: &TabularMdp) -> Result<()> {
        if self.actions.dim() != (mdp.horizon, mdp.num_states) {
            return Err(Error::ShapeMismatch(format!(
                "policy shape {:?} does not match (H, S) = {:?}",
                self.actions.dim(),
                (mdp.horizon, mdp.num_states)
            )));
        }
        if self.actions.iter().any(|&a| a >= mdp.num_actions) {
            return Err(Error::ShapeMismatch("policy action out of range".into()));
        }
        Ok(())
    }
}

/// `v` has shape `(H + 1, S)` with a zero terminal row; `q` has shape `(H, S, A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    pub v: Array2<f64>,
    pub q: Array3<f64>,
}

impl ValueTable {
    /// Greedy policy with respect to `q`, smallest action on ties.
    pub fn greedy_policy(&self) -> DeterministicPolicy {
        let (horizon, num_states, _) = self.q.dim();
        let actions = Array2::from_shape_fn((horizon, num_states), |(h, s)| {
            argmax_first(self.q.slice(ndarray::s![h, s, ..]))
        });
        DeterministicPolicy { actions }
    }
}

/// Reach probabilities `d[h][s][a]` of a policy.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyTable {
    pub d: Array3<f64>,
}

impl OccupancyTable {
    pub fn state_probability(&self, h: usize, s: usize) -> f64 {
        self.d.slice(ndarray::s![h, s, ..]).sum()
    }
}

/// Bellman-type variance tables: `q_var` is `(H, S, A)`, `v_var` is `(H + 1, S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceTable {
    pub q_var: Array3<f64>,
    pub v_var: Array2<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub step: usize,
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub steps: Vec<Step>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }
}

/// Optimal values `Q*` and `V*` by backward induction.
pub fn backward_induction(mdp: &TabularMdp) -> ValueTable {
    let (horizon, ns, na) = (mdp.horizon, mdp.num_states, mdp.num_actions);
    let mut v = Array2::zeros((horizon + 1, ns));
    let mut q = Array3::zeros((horizon, ns, na));
    for h in (0..horizon).rev() {
        for s in 0..ns {
            let mut best = f64::NEG_INFINITY;
            for a in 0..na {
                let value = mdp.reward(h, s, a) + mdp.expect(h, s, a, v.row(h + 1));
                q[[h, s, a]] = value;
                best = best.max(value);
            }
            v[[h, s]] = best;
        }
    }
    ValueTable { v, q }
}

/// `Q^pi` for every action and `V^pi(s) = Q^pi(s, pi(s))`.
pub fn evaluate_policy(mdp: &TabularMdp, policy: &DeterministicPolicy) -> Result<ValueTable> {
    policy.check_shape(mdp)?;
    let (horizon, ns, na) = (mdp.horizon, mdp.num_states, mdp.num_actions);
    let mut v = Array2::zeros((horizon + 1, ns));
    let mut q = Array3::zeros((horizon, ns, na));
    for h in (0..horizon).rev() {
        for s in 0..ns {
            for a in 0..na {
                q[[h, s, a]] = mdp.reward(h, s, a) + mdp.expect(h, s, a, v.row(h + 1));
            }
            v[[h, s]] = q[[h, s, policy.action(h, s)]];
        }
    }
    Ok(ValueTable { v, q })
}

/// Value of `policy` at the initial state only. Cheaper than [`evaluate_policy`]
/// since it skips the off-policy actions.
pub fn initial_value(mdp: &TabularMdp, policy: &DeterministicPolicy) -> Result<f64> {
    policy.check_shape(mdp)?;
    let ns = mdp.num_states;
    let mut next = vec![0.0; ns];
    let mut current = vec![0.0; ns];
    for h in (0..mdp.horizon).rev() {
        for (s, slot) in current.iter_mut().enumerate() {
            let a = policy.action(h, s);
            *slot = mdp.reward(h, s, a)
                + mdp.next_states(h, s, a).iter().map(|&(sn, p)| p * next[sn]).sum::<f64>();
        }
        std::mem::swap(&mut next, &mut current);
    }
    Ok(next[mdp.initial_state])
}

/// Forward recursion of the state-action reach probabilities of `policy`.
pub fn occupancy(mdp: &TabularMdp, policy: &DeterministicPolicy) -> Result<OccupancyTable> {
    policy.check_shape(mdp)?;
    let (horizon, ns, na) = (mdp.horizon, mdp.num_states, mdp.num_actions);
    let mut d = Array3::zeros((horizon, ns, na));
    let s1 = mdp.initial_state;
    d[[0, s1, policy.action(0, s1)]] = 1.0;
    for h in 0..horizon - 1 {
        let mut reach = vec![0.0; ns];
        for s in 0..ns {
            for a in 0..na {
                let mass = d[[h, s, a]];
                if mass == 0.0 {
                    continue;
                }
                for &(sn, p) in mdp.next_states(h, s, a) {
                    reach[sn] += mass * p;
                }
            }
        }
        for (sn, mass) in reach.into_iter().enumerate() {
            d[[h + 1, sn, policy.action(h + 1, sn)]] = mass;
        }
    }
    Ok(OccupancyTable { d })
}

/// Variance of the return-to-go under `policy`, by the Bellman recursion for
/// variances: `Qvar_h = Var_{p_h}(V_{h+1}) + p_h Vvar_{h+1}`.
pub fn variance_recursion(mdp: &TabularMdp, policy: &DeterministicPolicy) -> Result<VarianceTable> {
    let values = evaluate_policy(mdp, policy)?;
    let (horizon, ns, na) = (mdp.horizon, mdp.num_states, mdp.num_actions);
    let mut v_var = Array2::zeros((horizon + 1, ns));
    let mut q_var = Array3::zeros((horizon, ns, na));
    for h in (0..horizon).rev() {
        for s in 0..ns {
            for a in 0..na {
                q_var[[h, s, a]] = mdp.variance(h, s, a, values.v.row(h + 1))
                    + mdp.expect(h, s, a, v_var.row(h + 1));
            }
            v_var[[h, s]] = q_var[[h, s, policy.action(h, s)]];
        }
    }
    Ok(VarianceTable { q_var, v_var })
}

/// Number of positive-probability trajectories of `policy` (saturating).
pub fn count_trajectories(mdp: &TabularMdp, policy: &DeterministicPolicy) -> Result<u128> {
    policy.check_shape(mdp)?;
    let mut paths = vec![1u128; mdp.num_states];
    for h in (0..mdp.horizon).rev() {
        paths = (0..mdp.num_states)
            .map(|s| {
                mdp.next_states(h, s, policy.action(h, s))
                    .iter()
                    .fold(0u128, |acc, &(sn, _)| acc.saturating_add(paths[sn]))
            })
            .collect();
    }
    Ok(paths[mdp.initial_state])
}

/// Every support trajectory of `policy` as `(probability, return)`, including
/// the final transition out of step `H`.
///
/// Fails with [`Error::InstanceTooLarge`] when there are more than
/// [`ENUMERATION_LIMIT`] trajectories.
pub fn enumerate_trajectories(
    mdp: &TabularMdp,
    policy: &DeterministicPolicy,
) -> Result<Vec<(f64, f64)>> {
    let count = count_trajectories(mdp, policy)?;
    if count > ENUMERATION_LIMIT {
        return Err(Error::InstanceTooLarge {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    enumerate_from(mdp, policy, 0, mdp.initial_state, 1.0, 0.0, &mut out);
    Ok(out)
}

fn enumerate_from(
    mdp: &TabularMdp,
    policy: &DeterministicPolicy,
    h: usize,
    s: usize,
    prob: f64,
    ret: f64,
    out: &mut Vec<(f64, f64)>,
) {
    let a = policy.action(h, s);
    let ret = ret + mdp.reward(h, s, a);
    for &(sn, p) in mdp.next_states(h, s, a) {
        if h + 1 == mdp.horizon {
            out.push((prob * p, ret));
        } else {
            enumerate_from(mdp, policy, h + 1, sn, prob * p, ret, out);
        }
    }
}

/// Plays one episode from the initial state, asking `select(h, s)` for actions.
///
/// Panics if the selector returns an out-of-range action.
pub fn sample_episode<R, F>(mdp: &TabularMdp, mut select: F, rng: &mut R) -> Trajectory
where
    R: Rng + ?Sized,
    F: FnMut(usize, usize) -> usize,
{
    let mut steps = Vec::with_capacity(mdp.horizon);
    let mut s = mdp.initial_state;
    for h in 0..mdp.horizon {
        let a = select(h, s);
        assert!(a < mdp.num_actions, "selector returned action {a} of {}", mdp.num_actions);
        let next = sample_next(mdp.next_states(h, s, a), rng);
        steps.push(Step {
            step: h,
            state: s,
            action: a,
            reward: mdp.reward(h, s, a),
            next_state: next,
        });
        s = next;
    }
    Trajectory { steps }
}

fn sample_next<R: Rng + ?Sized>(next: &[(usize, f64)], rng: &mut R) -> usize {
    if let [(only, _)] = next {
        return *only;
    }
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for &(sn, p) in next {
        acc += p;
        if u < acc {
            return sn;
        }
    }
    next.last().expect("transition rows are never empty").0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::{build_chain, build_random_mdp};
    use crate::rng;
    use approx::assert_abs_diff_eq;

    /// Two states, uniform transitions, reward 1 only in state 1 at the last step.
    fn coin_flip(horizon: usize) -> TabularMdp {
        let p = Array4::from_elem((horizon, 2, 1, 2), 0.5);
        let mut r = Array3::zeros((horizon, 2, 1));
        r[[horizon - 1, 1, 0]] = 1.0;
        TabularMdp::new(p, r, 0).unwrap()
    }

    #[test]
    fn rejects_non_stochastic_rows() {
        let mut p = Array4::from_elem((1, 2, 1, 2), 0.5);
        p[[0, 1, 0, 1]] = 0.6;
        let r = Array3::zeros((1, 2, 1));
        assert!(matches!(TabularMdp::new(p, r, 0), Err(Error::InvalidMdp(_))));
    }

    #[test]
    fn rejects_rewards_outside_unit_interval() {
        let p = Array4::from_elem((1, 1, 1, 1), 1.0);
        let r = Array3::from_elem((1, 1, 1), 1.5);
        assert!(TabularMdp::new(p, r, 0).is_err());
    }

    #[test]
    fn rejects_bad_initial_state() {
        let p = Array4::from_elem((1, 1, 1, 1), 1.0);
        let r = Array3::zeros((1, 1, 1));
        assert!(TabularMdp::new(p, r, 1).is_err());
    }

    #[test]
    fn one_step_horizon_takes_best_reward() {
        let mdp = build_random_mdp(5, 3, 1, 11).unwrap();
        let values = backward_induction(&mdp);
        for s in 0..5 {
            let best = (0..3).map(|a| mdp.reward(0, s, a)).fold(f64::MIN, f64::max);
            assert_eq!(values.v[[0, s]], best);
        }
    }

    #[test]
    fn zero_rewards_give_zero_values() {
        let mut mdp = build_random_mdp(4, 2, 5, 3).unwrap();
        mdp.rewards.fill(0.0);
        let values = backward_induction(&mdp);
        assert!(values.v.iter().all(|&v| v == 0.0));
        let eval = evaluate_policy(&mdp, &DeterministicPolicy::constant(5, 4, 1)).unwrap();
        assert!(eval.v.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn chain_optimal_and_lazy_values() {
        // hand unrolled: move at h=1, collect at h=2 and h=3
        let mdp = build_chain(2, 3).unwrap();
        assert_eq!(backward_induction(&mdp).v[[0, 0]], 2.0);
        let stay = DeterministicPolicy::constant(3, 2, 0);
        assert_eq!(evaluate_policy(&mdp, &stay).unwrap().v[[0, 0]], 0.0);
    }

    #[test]
    fn greedy_policy_recovers_optimal_values() {
        let mdp = build_random_mdp(6, 3, 7, 42).unwrap();
        let optimal = backward_induction(&mdp);
        let eval = evaluate_policy(&mdp, &optimal.greedy_policy()).unwrap();
        for (a, b) in eval.v.iter().zip(optimal.v.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        let v1 = initial_value(&mdp, &optimal.greedy_policy()).unwrap();
        assert_abs_diff_eq!(v1, optimal.v[[0, mdp.initial_state()]], epsilon = 1e-12);
    }

    #[test]
    fn occupancy_starts_at_initial_pair() {
        let mdp = build_random_mdp(4, 3, 4, 8).unwrap();
        let policy = DeterministicPolicy::constant(4, 4, 2);
        let occ = occupancy(&mdp, &policy).unwrap();
        assert_eq!(occ.d[[0, 0, 2]], 1.0);
        assert_eq!(occ.d.slice(ndarray::s![0, .., ..]).sum(), 1.0);
    }

    #[test]
    fn occupancy_tracks_deterministic_chain() {
        let mdp = build_chain(4, 6).unwrap();
        let go = DeterministicPolicy::constant(6, 4, 1);
        let occ = occupancy(&mdp, &go).unwrap();
        for h in 0..6 {
            let pos = h.min(3);
            assert_eq!(occ.d[[h, pos, 1]], 1.0);
            assert_eq!(occ.d.slice(ndarray::s![h, .., ..]).sum(), 1.0);
        }
    }

    #[test]
    fn occupancy_of_uniform_two_state_mdp() {
        let mdp = coin_flip(4);
        let occ = occupancy(&mdp, &DeterministicPolicy::constant(4, 2, 0)).unwrap();
        for h in 1..4 {
            assert_eq!(occ.d[[h, 0, 0]], 0.5);
            assert_eq!(occ.d[[h, 1, 0]], 0.5);
        }
    }

    #[test]
    fn deterministic_mdps_have_zero_variance() {
        let mdp = build_chain(3, 5).unwrap();
        let vt = variance_recursion(&mdp, &DeterministicPolicy::constant(5, 3, 1)).unwrap();
        assert!(vt.v_var.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn one_step_horizon_has_zero_variance() {
        let mdp = build_random_mdp(3, 2, 1, 5).unwrap();
        let vt = variance_recursion(&mdp, &DeterministicPolicy::constant(1, 3, 0)).unwrap();
        assert!(vt.v_var.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bernoulli_return_variance() {
        let mdp = coin_flip(2);
        let policy = DeterministicPolicy::constant(2, 2, 0);
        let vt = variance_recursion(&mdp, &policy).unwrap();
        assert_eq!(vt.v_var[[0, 0]], 0.25);

        let trajectories = enumerate_trajectories(&mdp, &policy).unwrap();
        assert_eq!(trajectories.len(), 4);
        assert!(trajectories.iter().all(|&(p, _)| p == 0.25));
    }

    #[test]
    fn deterministic_enumeration_is_a_single_path() {
        let mdp = build_chain(3, 4).unwrap();
        let traj = enumerate_trajectories(&mdp, &DeterministicPolicy::constant(4, 3, 1)).unwrap();
        assert_eq!(traj, vec![(1.0, 2.0)]);
    }

    #[test]
    fn enumeration_guard_trips() {
        let mdp = build_random_mdp(10, 1, 7, 1).unwrap();
        let policy = DeterministicPolicy::constant(7, 10, 0);
        assert!(matches!(
            enumerate_trajectories(&mdp, &policy),
            Err(Error::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn enumeration_matches_policy_value() {
        let mdp = build_random_mdp(3, 2, 4, 99).unwrap();
        let policy = DeterministicPolicy::constant(4, 3, 1);
        let traj = enumerate_trajectories(&mdp, &policy).unwrap();
        let total: f64 = traj.iter().map(|t| t.0).sum();
        let mean: f64 = traj.iter().map(|t| t.0 * t.1).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
        let v = evaluate_policy(&mdp, &policy).unwrap().v[[0, 0]];
        assert_abs_diff_eq!(mean, v, epsilon = 1e-9);
    }

    #[test]
    fn policy_shape_is_checked() {
        let mdp = build_random_mdp(3, 2, 4, 1).unwrap();
        let policy = DeterministicPolicy::constant(3, 3, 0);
        assert!(matches!(evaluate_policy(&mdp, &policy), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn deterministic_sampling_ignores_seed() {
        let mdp = build_chain(3, 5).unwrap();
        let a = sample_episode(&mdp, |_, _| 1, &mut rng::stream(1, 0));
        let b = sample_episode(&mdp, |_, _| 1, &mut rng::stream(2, 0));
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        assert_eq!(a.steps[0].state, 0);
    }

    #[test]
    fn sampling_is_reproducible() {
        let mdp = build_random_mdp(5, 2, 10, 4).unwrap();
        let a = sample_episode(&mdp, |h, s| (h + s) % 2, &mut rng::stream(17, 1));
        let b = sample_episode(&mdp, |h, s| (h + s) % 2, &mut rng::stream(17, 1));
        assert_eq!(a, b);
        for (i, step) in a.steps.iter().enumerate() {
            assert_eq!(step.step, i);
            assert_eq!(step.reward, mdp.reward(i, step.state, step.action));
        }
    }

    #[test]
    fn sampled_frequencies_match_transition_row() {
        let mdp = build_random_mdp(4, 1, 1, 23).unwrap();
        let n = 100_000;
        let mut counts = [0usize; 4];
        let mut rng = rng::stream(5, 1);
        for _ in 0..n {
            counts[sample_episode(&mdp, |_, _| 0, &mut rng).steps[0].next_state] += 1;
        }
        for (sn, &c) in counts.iter().enumerate() {
            let p = mdp.transitions()[[0, 0, 0, sn]];
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((c as f64 / n as f64 - p).abs() <= 3.0 * se, "s'={sn}");
        }
    }

    #[test]
    fn variance_of_is_nonnegative() {
        assert_eq!(variance_of(&[0.5, 0.5], &[4.0, 2.0]), 1.0);
        assert_eq!(variance_of(&[1.0, 0.0], &[4.0, 2.0]), 0.0);
    }

    #[test]
    fn argmax_picks_first_maximizer() {
        assert_eq!(argmax_first(&[1.0, 3.0, 2.0, 3.0]), 1);
        assert_eq!(argmax_first(&[0.0; 4]), 0);
    }
}

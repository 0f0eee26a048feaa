//! Executable checks of the analysis: a log-space evaluator for the regret
//! bound, an optimism monitor, and oracle comparisons for the auxiliary lemmas.

use ndarray::{Array2, Array3};
use rand::Rng;

use crate::agents::{ucbmq::exploration_threshold, BonusMode, UcbmqState};
use crate::environments::build_random_mdp;
use crate::error::{Error, Result};
use crate::harness::run_agent;
use crate::mdp::{
    backward_induction, enumerate_trajectories, evaluate_policy, variance_of, variance_recursion,
    DeterministicPolicy, TabularMdp, ValueTable,
};
use crate::rng;

/// Slack below the optimal values before a table entry counts as pessimistic.
pub const OPTIMISM_TOLERANCE: f64 = 1e-9;
pub const TOTAL_VARIANCE_TOLERANCE: f64 = 1e-9;
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;
/// Relative slack on the right-hand side of inequality checks.
pub const INEQUALITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub states: usize,
    pub actions: usize,
    pub horizon: usize,
    pub episodes: u64,
    pub delta: f64,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        if self.states == 0 || self.actions == 0 || self.horizon == 0 {
            return Err(Error::invalid("S, A and H must be positive"));
        }
        if self.episodes < 3 {
            return Err(Error::invalid(format!("T = {} must be at least 3", self.episodes)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid(format!("delta {} is outside (0, 1)", self.delta)));
        }
        Ok(())
    }

    fn zeta(&self) -> f64 {
        exploration_threshold(self.episodes, self.delta)
    }
}

/// Natural log of `C1 = 126 e^127 log(T) sqrt(zeta)`.
pub fn ln_c1(params: &BoundParams) -> Result<f64> {
    params.validate()?;
    let ln_t = (params.episodes as f64).ln();
    Ok(126f64.ln() + 127.0 + ln_t.ln() + 0.5 * params.zeta().ln())
}

/// Natural log of `C2 = 3527 e^127 log(T)^2 zeta`.
pub fn ln_c2(params: &BoundParams) -> Result<f64> {
    params.validate()?;
    let ln_t = (params.episodes as f64).ln();
    Ok(3527f64.ln() + 127.0 + 2.0 * ln_t.ln() + params.zeta().ln())
}

/// `log10(C1 sqrt(H^3 S A T) + C2 H^4 S A)`, never leaving log space.
pub fn theoretical_bound_log10(params: &BoundParams) -> Result<f64> {
    let (s, a, h, t) = (
        (params.states as f64).ln(),
        (params.actions as f64).ln(),
        (params.horizon as f64).ln(),
        (params.episodes as f64).ln(),
    );
    let first = ln_c1(params)? + 0.5 * (3.0 * h + s + a + t);
    let second = ln_c2(params)? + 4.0 * h + s + a;
    let hi = first.max(second);
    let ln_bound = hi + ((first - hi).exp() + (second - hi).exp()).ln();
    Ok(ln_bound / std::f64::consts::LN_10)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OptimismViolations {
    /// `(t, h, s, a)` with `Qbar < Q* - tol`.
    pub q: usize,
    /// `(t, h, s)` with `Vbar < V* - tol`.
    pub v: usize,
}

impl OptimismViolations {
    pub fn any(&self) -> bool {
        self.q + self.v > 0
    }
}

/// Streaming version of [`check_optimism`]: feed one snapshot per episode.
#[derive(Debug, Clone)]
pub struct OptimismMonitor {
    optimal: ValueTable,
    violations: OptimismViolations,
}

impl OptimismMonitor {
    pub fn new(optimal: ValueTable) -> Self {
        Self {
            optimal,
            violations: OptimismViolations::default(),
        }
    }

    pub fn observe(&mut self, qbar: &Array3<f64>, vbar: &Array2<f64>) -> Result<()> {
        if qbar.dim() != self.optimal.q.dim() || vbar.dim() != self.optimal.v.dim() {
            return Err(Error::ShapeMismatch(format!(
                "snapshot shapes {:?}/{:?} vs optimal {:?}/{:?}",
                qbar.dim(),
                vbar.dim(),
                self.optimal.q.dim(),
                self.optimal.v.dim()
            )));
        }
        self.violations.q += qbar
            .iter()
            .zip(&self.optimal.q)
            .filter(|(&x, &opt)| x < opt - OPTIMISM_TOLERANCE)
            .count();
        self.violations.v += vbar
            .iter()
            .zip(&self.optimal.v)
            .filter(|(&x, &opt)| x < opt - OPTIMISM_TOLERANCE)
            .count();
        Ok(())
    }

    pub fn violations(&self) -> OptimismViolations {
        self.violations
    }
}

/// Counts pessimistic entries over a trace of `(Qbar, Vbar)` snapshots.
pub fn check_optimism<'a, I>(trace: I, optimal: &ValueTable) -> Result<OptimismViolations>
where
    I: IntoIterator<Item = (&'a Array3<f64>, &'a Array2<f64>)>,
{
    let mut monitor = OptimismMonitor::new(optimal.clone());
    for (qbar, vbar) in trace {
        monitor.observe(qbar, vbar)?;
    }
    Ok(monitor.violations())
}

/// Runs theoretical-bonus UCBMQ on the random MDP of `seed` and returns the
/// optimism violations over all episode boundaries, initial tables included.
pub fn optimism_run(
    states: usize,
    actions: usize,
    horizon: usize,
    episodes: usize,
    delta: f64,
    seed: u64,
) -> Result<OptimismViolations> {
    let mdp = build_random_mdp(states, actions, horizon, seed)?;
    let mut agent = UcbmqState::new(states, actions, horizon, episodes as u64, delta, BonusMode::Theoretical)?;
    let mut monitor = OptimismMonitor::new(backward_induction(&mdp));
    monitor.observe(agent.qbar(), agent.vbar())?;
    run_agent(&mdp, &mut agent, episodes, 0, seed, |_, agent| {
        monitor.observe(agent.qbar(), agent.vbar())
    })?;
    Ok(monitor.violations())
}

/// Left side and the two right sides `4 log(U_{T+1} + 1)` and `8 log(T + 1)`
/// of the count-sum inequality, where `u = (u_1, ..., u_{T+1})`.
pub fn count_lemma_sides(u: &[f64]) -> Result<(f64, f64, f64)> {
    if let Some(bad) = u.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::invalid(format!("count-lemma entry {bad} is outside [0, 1]")));
    }
    let mut cumulative: f64 = 0.0;
    let mut lhs = 0.0;
    for &x in u {
        lhs += x / cumulative.max(1.0);
        cumulative += x;
    }
    Ok((lhs, 4.0 * (cumulative + 1.0).ln(), 8.0 * (u.len() as f64).ln()))
}

pub fn check_count_lemma(u: &[f64]) -> Result<bool> {
    let (lhs, rhs, corollary) = count_lemma_sides(u)?;
    let within = |bound: f64| lhs <= bound * (1.0 + INEQUALITY_SLACK) + INEQUALITY_SLACK;
    Ok(within(rhs) && (u.len() < 2 || within(corollary)))
}

/// Cumulative weights of a visit sequence: every row sums to 1 once the pair
/// has been visited (0 before), and for every column `l`
/// `sum_{k >= l} flag[k] w[k][l] <= (1 + 1/H) flag[l]`.
pub fn check_weight_lemma(flags: &[bool], horizon: usize) -> bool {
    let weights = crate::agents::cumulative_weights(flags, horizon);
    let mut visited = false;
    for (t, row) in weights.rows().into_iter().enumerate() {
        visited |= flags[t];
        let expected = if visited { 1.0 } else { 0.0 };
        if (row.sum() - expected).abs() > ROW_SUM_TOLERANCE {
            return false;
        }
    }
    let cap = 1.0 + 1.0 / horizon as f64;
    (0..flags.len()).all(|l| {
        let column: f64 = (l..flags.len())
            .filter(|&k| flags[k])
            .map(|k| weights[[k, l]])
            .sum();
        let bound = if flags[l] { cap } else { 0.0 };
        column <= bound + ROW_SUM_TOLERANCE
    })
}

/// Exact variance of the return, `sum_traj prob (return - V)^2`, by enumeration.
pub fn enumerated_return_variance(mdp: &TabularMdp, policy: &DeterministicPolicy) -> Result<f64> {
    let value = evaluate_policy(mdp, policy)?.v[[0, mdp.initial_state()]];
    Ok(enumerate_trajectories(mdp, policy)?
        .iter()
        .map(|&(p, ret)| p * (ret - value).powi(2))
        .sum())
}

/// The variance recursion at the initial state agrees with the enumerated
/// return variance.
pub fn check_total_variance(mdp: &TabularMdp, policy: &DeterministicPolicy) -> Result<bool> {
    let recursive = variance_recursion(mdp, policy)?.v_var[[0, mdp.initial_state()]];
    let exact = enumerated_return_variance(mdp, policy)?;
    Ok((recursive - exact).abs() <= TOTAL_VARIANCE_TOLERANCE)
}

/// Outcome of the variance-switch inequalities on one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceSwitch {
    /// `Var_p(f) <= 2 Var_p(g) + 2b p|f - g|`.
    pub shift: bool,
    /// `Var_p(f^2) <= 2b Var_p(f)`.
    pub square: bool,
    /// `Var_p(f^2) <= 4b^2 Var_p(f)`.
    pub square_4b2: bool,
}

pub fn check_variance_switch(p: &[f64], f: &[f64], g: &[f64], b: f64) -> Result<VarianceSwitch> {
    if p.len() != f.len() || p.len() != g.len() {
        return Err(Error::ShapeMismatch(format!(
            "p, f, g have lengths {}, {}, {}",
            p.len(),
            f.len(),
            g.len()
        )));
    }
    if b.is_nan() || b <= 0.0 || f.iter().chain(g).any(|x| !(0.0..=b).contains(x)) {
        return Err(Error::invalid(format!("f and g must take values in [0, {b}]")));
    }
    if p.iter().any(|&x| x < 0.0) || (p.iter().sum::<f64>() - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(Error::invalid("p is not a probability vector"));
    }
    let le = |lhs: f64, rhs: f64| lhs <= rhs * (1.0 + INEQUALITY_SLACK) + INEQUALITY_SLACK;
    let var_f = variance_of(p, f);
    let gap: f64 = p.iter().zip(f.iter().zip(g)).map(|(pi, (fi, gi))| pi * (fi - gi).abs()).sum();
    let squares: Vec<f64> = f.iter().map(|x| x * x).collect();
    let var_sq = variance_of(p, &squares);
    Ok(VarianceSwitch {
        shift: le(var_f, 2.0 * variance_of(p, g) + 2.0 * b * gap),
        square: le(var_sq, 2.0 * b * var_f),
        square_4b2: le(var_sq, 4.0 * b * b * var_f),
    })
}

/// One line of the `check` report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, passed: usize, total: usize) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: passed == total,
        detail: format!("{passed}/{total} instances"),
    }
}

fn random_distribution<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..len).map(|_| 1.0 - rng.gen::<f64>()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Runs every randomized check from `seed` and reports one outcome per check.
pub fn run_suite(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = rng::stream(seed, rng::AGENT_STREAM);
    let mut out = Vec::new();

    let reference = BoundParams { states: 50, actions: 4, horizon: 100, episodes: 3000, delta: 0.1 };
    let bound = theoretical_bound_log10(&reference)?;
    out.push(CheckOutcome {
        name: "regret bound evaluator",
        passed: bound.is_finite() && bound > (100.0f64 * 3000.0).log10(),
        detail: format!("log10 bound = {bound:.6} at S=50 A=4 H=100 T=3000 delta=0.1"),
    });

    let runs = 50;
    let mut violating = 0;
    for r in 0..runs {
        if optimism_run(4, 2, 3, 200, 0.1, seed + r)?.any() {
            violating += 1;
        }
    }
    out.push(CheckOutcome {
        name: "optimism frequency",
        passed: violating as f64 / runs as f64 <= 0.1,
        detail: format!("{violating}/{runs} runs with a pessimistic entry"),
    });

    let total = 1000;
    let mut passed = 0;
    for _ in 0..total {
        let len = rng.gen_range(1..60);
        let u: Vec<f64> = (0..len).map(|_| rng.gen::<f64>()).collect();
        passed += check_count_lemma(&u)? as usize;
    }
    out.push(outcome("count-sum lemma", passed, total));

    let total = 300;
    let mut passed = 0;
    for _ in 0..total {
        let len = rng.gen_range(1..80);
        let rate = rng.gen::<f64>();
        let flags: Vec<bool> = (0..len).map(|_| rng.gen::<f64>() < rate).collect();
        passed += check_weight_lemma(&flags, rng.gen_range(1..20)) as usize;
    }
    out.push(outcome("cumulative weights", passed, total));

    let total = 100usize;
    let mut passed = 0;
    for i in 0..total {
        let (ns, na, h) = (rng.gen_range(1..4), rng.gen_range(1..4), rng.gen_range(1..5));
        let mdp = build_random_mdp(ns, na, h, seed + i as u64)?;
        let actions = Array2::from_shape_fn((h, ns), |_| rng.gen_range(0..na));
        let policy = DeterministicPolicy::new(actions, na)?;
        passed += check_total_variance(&mdp, &policy)? as usize;
    }
    out.push(outcome("law of total variance", passed, total));

    let total = 1000;
    let mut counts = [0usize; 3];
    for _ in 0..total {
        let len = rng.gen_range(2..8);
        let b = rng.gen_range(0.1..10.0);
        let p = random_distribution(&mut rng, len);
        let f: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() * b).collect();
        let g: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() * b).collect();
        let r = check_variance_switch(&p, &f, &g, b)?;
        counts[0] += r.shift as usize;
        counts[1] += r.square as usize;
        counts[2] += r.square_4b2 as usize;
    }
    out.push(outcome("variance switch, shift", counts[0], total));
    out.push(outcome("variance switch, square with 2b", counts[1], total));
    out.push(outcome("variance switch, square with 4b^2", counts[2], total));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{Array3, Array4};

    fn params(states: usize, actions: usize, horizon: usize, episodes: u64) -> BoundParams {
        BoundParams { states, actions, horizon, episodes, delta: 0.1 }
    }

    #[test]
    fn bound_is_vacuous_at_desk_scale() {
        for p in [params(1, 1, 1, 3), params(50, 4, 100, 3000), params(4, 2, 3, 200)] {
            let b = theoretical_bound_log10(&p).unwrap();
            assert!(b > ((p.horizon as u64 * p.episodes) as f64).log10());
            assert!(b > 127.0 / std::f64::consts::LN_10);
        }
    }

    #[test]
    fn bound_is_monotone() {
        let base = params(5, 3, 10, 100);
        let b0 = theoretical_bound_log10(&base).unwrap();
        for p in [
            params(6, 3, 10, 100),
            params(5, 4, 10, 100),
            params(5, 3, 11, 100),
            params(5, 3, 10, 101),
        ] {
            assert!(theoretical_bound_log10(&p).unwrap() >= b0);
        }
    }

    #[test]
    fn bound_rejects_bad_params() {
        assert!(theoretical_bound_log10(&params(5, 3, 10, 2)).is_err());
        assert!(theoretical_bound_log10(&params(0, 3, 10, 5)).is_err());
        assert!(theoretical_bound_log10(&BoundParams { delta: 1.0, ..params(5, 3, 10, 5) }).is_err());
    }

    #[test]
    fn fresh_tables_are_optimistic() {
        let mdp = build_random_mdp(4, 2, 3, 1).unwrap();
        let agent = UcbmqState::new(4, 2, 3, 10, 0.1, BonusMode::Theoretical).unwrap();
        let v = check_optimism([(agent.qbar(), agent.vbar())], &backward_induction(&mdp)).unwrap();
        assert_eq!(v, OptimismViolations::default());
    }

    #[test]
    fn optimism_counts_entries() {
        let mdp = build_random_mdp(2, 2, 2, 3).unwrap();
        let optimal = backward_induction(&mdp);
        let mut q = optimal.q.clone();
        q[[0, 0, 0]] -= 1e-6;
        q[[1, 1, 1]] -= 1e-10;
        let v = optimal.v.mapv(|x| x - 1.0);
        let counts = check_optimism([(&q, &optimal.v), (&q, &v)], &optimal).unwrap();
        assert_eq!(counts.q, 2);
        // terminal row is 0 and also drops below 0
        assert_eq!(counts.v, 6);
    }

    #[test]
    fn optimism_rejects_shape_mismatch() {
        let mdp = build_random_mdp(2, 2, 2, 3).unwrap();
        let optimal = backward_induction(&mdp);
        let q = Array3::zeros((2, 3, 2));
        assert!(matches!(check_optimism([(&q, &optimal.v)], &optimal), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn count_lemma_examples() {
        assert!(check_count_lemma(&[]).unwrap());
        assert!(check_count_lemma(&[0.0; 20]).unwrap());
        let (lhs, rhs, _) = count_lemma_sides(&[1.0; 11]).unwrap();
        let harmonic: f64 = (1..=10).map(|t| 1.0 / t as f64).sum();
        assert_abs_diff_eq!(lhs, 1.0 + harmonic, epsilon = 1e-14);
        assert_abs_diff_eq!(rhs, 4.0 * 12f64.ln(), epsilon = 1e-14);
        assert!(check_count_lemma(&[1.0; 11]).unwrap());
        assert!(check_count_lemma(&[0.5, 1.5]).is_err());
    }

    #[test]
    fn weight_lemma_examples() {
        assert!(check_weight_lemma(&[false; 6], 3));
        assert!(check_weight_lemma(&[true; 4], 1));
        assert!(check_weight_lemma(&[false, true, false, true, true], 5));
    }

    #[test]
    fn total_variance_examples() {
        let det = crate::environments::build_chain(3, 4).unwrap();
        let policy = DeterministicPolicy::constant(4, 3, 1);
        assert_eq!(enumerated_return_variance(&det, &policy).unwrap(), 0.0);
        assert!(check_total_variance(&det, &policy).unwrap());

        let p = Array4::from_elem((2, 2, 1, 2), 0.5);
        let r = Array3::from_shape_fn((2, 2, 1), |(h, s, _)| if h == 1 && s == 1 { 1.0 } else { 0.0 });
        let coin = TabularMdp::new(p, r, 0).unwrap();
        let policy = DeterministicPolicy::constant(2, 2, 0);
        assert_abs_diff_eq!(enumerated_return_variance(&coin, &policy).unwrap(), 0.25, epsilon = 1e-15);
        assert!(check_total_variance(&coin, &policy).unwrap());
    }

    #[test]
    fn total_variance_guard() {
        let mdp = TabularMdp::new(Array4::from_elem((7, 10, 1, 10), 0.1), Array3::zeros((7, 10, 1)), 0).unwrap();
        let policy = DeterministicPolicy::constant(7, 10, 0);
        assert!(matches!(check_total_variance(&mdp, &policy), Err(Error::InstanceTooLarge { .. })));
    }

    #[test]
    fn square_switch_with_2b_has_a_counterexample() {
        let r = check_variance_switch(&[0.5, 0.5], &[0.9, 1.0], &[0.9, 1.0], 1.0).unwrap();
        assert!(r.shift);
        assert!(!r.square);
        assert!(r.square_4b2);
    }

    #[test]
    fn variance_switch_validates_inputs() {
        assert!(check_variance_switch(&[1.0], &[2.0], &[0.0], 1.0).is_err());
        assert!(check_variance_switch(&[0.5, 0.4], &[0.0, 1.0], &[0.0, 1.0], 1.0).is_err());
        assert!(check_variance_switch(&[1.0], &[0.0, 1.0], &[0.0], 1.0).is_err());
    }
}

//! Benchmark MDP constructors.

use ndarray::{Array3, Array4};
use rand::Rng;

use crate::error::{Error, Result};
use crate::mdp::TabularMdp;
use crate::rng;

/// Grid-world actions, in action-index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAction {
    Left = 0,
    Right = 1,
    Up = 2,
    Down = 3,
}

impl GridAction {
    pub const ALL: [GridAction; 4] = [Self::Left, Self::Right, Self::Up, Self::Down];

    fn offset(self) -> (isize, isize) {
        match self {
            Self::Left => (0, -1),
            Self::Right => (0, 1),
            Self::Up => (-1, 0),
            Self::Down => (1, 0),
        }
    }
}

/// Grid-world parameters. Cells are 1-based `(row, col)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWorldSpec {
    pub rows: usize,
    pub cols: usize,
    pub noise: f64,
    pub horizon: usize,
    pub start: (usize, usize),
    pub reward_cell: (usize, usize),
}

impl GridWorldSpec {
    /// 10x5 grid, start in the top-left corner and reward in the opposite one.
    pub fn reference(noise: f64, horizon: usize) -> Self {
        Self {
            rows: 10,
            cols: 5,
            noise,
            horizon,
            start: (1, 1),
            reward_cell: (10, 5),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 || self.horizon == 0 {
            return Err(Error::invalid("grid rows, cols and horizon must be positive"));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::invalid(format!("noise {} is outside [0, 1]", self.noise)));
        }
        for (name, (r, c)) in [("start", self.start), ("reward", self.reward_cell)] {
            if r == 0 || c == 0 || r > self.rows || c > self.cols {
                return Err(Error::invalid(format!(
                    "{name} cell ({r}, {c}) is outside the {}x{} grid",
                    self.rows, self.cols
                )));
            }
        }
        Ok(())
    }

    pub fn state_of(&self, (row, col): (usize, usize)) -> usize {
        (row - 1) * self.cols + (col - 1)
    }

    pub fn cell_of(&self, state: usize) -> (usize, usize) {
        (state / self.cols + 1, state % self.cols + 1)
    }

    fn shift(&self, (row, col): (usize, usize), (dr, dc): (isize, isize)) -> Option<(usize, usize)> {
        let r = row.checked_add_signed(dr)?;
        let c = col.checked_add_signed(dc)?;
        (1..=self.rows).contains(&r).then_some(())?;
        (1..=self.cols).contains(&c).then_some((r, c))
    }

    /// In-grid neighbors of a cell (2 to 4 of them), in action order.
    pub fn neighbors(&self, cell: (usize, usize)) -> Vec<usize> {
        GridAction::ALL
            .iter()
            .filter_map(|a| self.shift(cell, a.offset()))
            .map(|c| self.state_of(c))
            .collect()
    }
}

/// The intended move succeeds with probability `1 - noise` (a blocked move stays
/// put); with probability `noise` the agent jumps to a uniformly chosen grid
/// neighbor regardless of the action. Reward 1 in the reward cell for every
/// action. Transitions are the same at every step.
pub fn build_gridworld(spec: &GridWorldSpec) -> Result<TabularMdp> {
    spec.validate()?;
    let ns = spec.rows * spec.cols;
    let na = GridAction::ALL.len();
    let mut step = Array3::<f64>::zeros((ns, na, ns));
    for s in 0..ns {
        let cell = spec.cell_of(s);
        let neighbors = spec.neighbors(cell);
        for action in GridAction::ALL {
            let a = action as usize;
            let target = spec.shift(cell, action.offset()).map_or(s, |c| spec.state_of(c));
            step[[s, a, target]] += 1.0 - spec.noise;
            if spec.noise > 0.0 {
                let share = spec.noise / neighbors.len() as f64;
                for &n in &neighbors {
                    step[[s, a, n]] += share;
                }
            }
        }
    }
    let transitions = step
        .broadcast((spec.horizon, ns, na, ns))
        .expect("broadcast over steps")
        .to_owned();
    let goal = spec.state_of(spec.reward_cell);
    let rewards = Array3::from_shape_fn((spec.horizon, ns, na), |(_, s, _)| {
        if s == goal {
            1.0
        } else {
            0.0
        }
    });
    TabularMdp::new(transitions, rewards, spec.state_of(spec.start))
}

/// Deterministic line of `length` states. Action 1 advances (the last state is
/// absorbing), action 0 stays. Reward 1 in the last state for any action.
pub fn build_chain(length: usize, horizon: usize) -> Result<TabularMdp> {
    if length < 2 {
        return Err(Error::invalid(format!("chain length {length} must be at least 2")));
    }
    if horizon == 0 {
        return Err(Error::invalid("horizon must be positive"));
    }
    let last = length - 1;
    let mut p = Array4::zeros((horizon, length, 2, length));
    let mut r = Array3::zeros((horizon, length, 2));
    for h in 0..horizon {
        for s in 0..length {
            p[[h, s, 0, s]] = 1.0;
            p[[h, s, 1, (s + 1).min(last)]] = 1.0;
            if s == last {
                r[[h, s, 0]] = 1.0;
                r[[h, s, 1]] = 1.0;
            }
        }
    }
    TabularMdp::new(p, r, 0)
}

/// Random non-stationary MDP: each transition row normalizes positive uniform
/// weights, rewards are uniform in `[0, 1)`, the initial state is 0.
pub fn build_random_mdp(states: usize, actions: usize, horizon: usize, seed: u64) -> Result<TabularMdp> {
    if states == 0 || actions == 0 || horizon == 0 {
        return Err(Error::invalid("states, actions and horizon must be positive"));
    }
    let mut rng = rng::stream(seed, rng::ENV_STREAM);
    let mut p = Array4::zeros((horizon, states, actions, states));
    let mut r = Array3::zeros((horizon, states, actions));
    for h in 0..horizon {
        for s in 0..states {
            for a in 0..actions {
                let weights: Vec<f64> = (0..states).map(|_| 1.0 - rng.gen::<f64>()).collect();
                let total: f64 = weights.iter().sum();
                for (sn, w) in weights.into_iter().enumerate() {
                    p[[h, s, a, sn]] = w / total;
                }
                r[[h, s, a]] = rng.gen::<f64>();
            }
        }
    }
    TabularMdp::new(p, r, 0)
}

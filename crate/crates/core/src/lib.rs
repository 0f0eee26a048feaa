//! Tabular episodic reinforcement learning laboratory.
//!
//! The crate contains an exact finite-horizon MDP toolkit ([`mdp`]), benchmark
//! environment constructors ([`environments`]), the UCB momentum Q-learning agent
//! and its baselines ([`agents`]), a seeded regret harness ([`harness`]) and a set
//! of executable lemma checks ([`checks`]).
//!
//! Steps, states and actions are 0-based throughout. Step `h` in code corresponds
//! to step `h + 1` in the usual 1-based notation, so "remaining steps" at step `h`
//! is `horizon - h`. Value tables carry an extra terminal row `V[horizon] = 0`.

pub mod agents;
pub mod checks;
pub mod environments;
pub mod error;
pub mod harness;
pub mod mdp;
pub mod rng;

pub use error::{Error, Result};

//! Pieces shared by both multiplayer generalizations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::EvalFn;
use crate::fixed::FixedPoint;
use crate::game::{GameGraph, StateId};
use crate::terminal::{check_tie_breaking, TerminalEval, TerminalMax};

use super::{check_root, check_valid, Driver, Policy, SearchError};

/// Everything a multiplayer search reads: the game, `f_theta`, a tie-breaking
/// `f_t` and the cached per-player terminal maxima.
#[derive(Debug, Clone)]
pub struct MultiplayerSearch<'a> {
    pub game: &'a GameGraph,
    pub eval: &'a EvalFn,
    pub teval: &'a TerminalEval,
    pub tmax: TerminalMax,
}

impl<'a> MultiplayerSearch<'a> {
    /// Validates the game and requires `teval` to be tie-breaking.
    pub fn new(
        game: &'a GameGraph,
        eval: &'a EvalFn,
        teval: &'a TerminalEval,
    ) -> Result<Self, SearchError> {
        check_valid(game)?;
        if game.num_players() < 2 {
            return Err(SearchError::TooFewPlayers(game.num_players()));
        }
        SearchError::from_tie_report(check_tie_breaking(game, teval)?)?;
        Self::new_unchecked(game, eval, teval)
    }

    /// Skips the validity and tie-breaking checks. Intended for hand-built
    /// positions in tests and demos.
    pub fn new_unchecked(
        game: &'a GameGraph,
        eval: &'a EvalFn,
        teval: &'a TerminalEval,
    ) -> Result<Self, SearchError> {
        let tmax = TerminalMax::compute(game, teval)?;
        Ok(MultiplayerSearch {
            game,
            eval,
            teval,
            tmax,
        })
    }

    pub fn num_players(&self) -> usize {
        self.game.num_players()
    }

    /// 0-based index of the player to move at `s`.
    pub(crate) fn mover(&self, s: StateId) -> usize {
        self.game.player(s) - 1
    }

    pub(crate) fn check_root(&self, root: StateId) -> Result<(), SearchError> {
        check_root(self.game, root)
    }

    pub(crate) fn zero(&self) -> Vec<i8> {
        vec![0; self.num_players()]
    }

    pub(crate) fn terminal_values(&self, s: StateId) -> (Vec<i8>, Vec<FixedPoint>) {
        (self.game.gains(s), self.teval.vector(s).to_vec())
    }
}

/// Move choice of descent^n at an unresolved root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exploration {
    /// The decision-form best action (most explored among equal values).
    Greedy,
    /// Softmax over `v(s')_j / temperature`, drawn from a seeded generator.
    Softmax { seed: u64, temperature: f64 },
}

impl Exploration {
    /// Samples a child index given each child's heuristic value for the
    /// player to move. `greedy` is returned for [`Exploration::Greedy`].
    pub(crate) fn pick(&self, values: &[FixedPoint], greedy: usize) -> usize {
        match *self {
            Exploration::Greedy => greedy,
            Exploration::Softmax { seed, temperature } => {
                let t = temperature.max(1e-9);
                let top = values
                    .iter()
                    .map(|v| v.to_f64())
                    .fold(f64::NEG_INFINITY, f64::max);
                let weights: Vec<f64> = values
                    .iter()
                    .map(|v| ((v.to_f64() - top) / t).exp())
                    .collect();
                let total: f64 = weights.iter().sum();
                let mut x = ChaCha8Rng::seed_from_u64(seed).random::<f64>() * total;
                for (k, w) in weights.iter().enumerate() {
                    if x < *w {
                        return k;
                    }
                    x -= w;
                }
                weights.len() - 1
            }
        }
    }
}

/// Solve-loop configuration for either multiplayer variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpConfig {
    pub driver: Driver,
    pub policy: Policy,
    pub exploration: Exploration,
}

impl NpConfig {
    pub fn new(driver: Driver) -> Self {
        NpConfig {
            driver,
            policy: Policy::Best,
            exploration: Exploration::Greedy,
        }
    }
}

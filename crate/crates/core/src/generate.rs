//! Seeded random game instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::game::{GameGraph, StateId, StateRecord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub num_players: usize,
    pub num_states: usize,
    pub max_children: usize,
    /// Probability that a non-terminal gets one extra edge to a shared
    /// descendant (a transposition).
    pub dag_density: f64,
    /// Probability that a terminal is a draw outcome.
    pub draw_rate: f64,
}

impl GenParams {
    pub fn new(num_players: usize, num_states: usize) -> Self {
        GenParams {
            num_players,
            num_states,
            max_children: 3,
            dag_density: 0.2,
            draw_rate: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("at least 2 players are required, got {0}")]
    TooFewPlayers(usize),
    #[error("at least 1 state is required")]
    NoStates,
    #[error("max_children must be at least 1")]
    NoChildren,
    #[error("{name} must lie in [0, 1], got {value}")]
    BadRate { name: &'static str, value: f64 },
}

/// Builds a random game whose edges always point from a lower to a higher id.
///
/// A random spanning tree rooted at `s0` is grown first, so every state is
/// reachable from the root; extra edges to later states then create shared
/// descendants.
pub fn generate_random_game(seed: u64, params: &GenParams) -> Result<GameGraph, GenError> {
    if params.num_players < 2 {
        return Err(GenError::TooFewPlayers(params.num_players));
    }
    if params.num_states == 0 {
        return Err(GenError::NoStates);
    }
    if params.max_children == 0 {
        return Err(GenError::NoChildren);
    }
    for (name, value) in [
        ("dag_density", params.dag_density),
        ("draw_rate", params.draw_rate),
    ] {
        if !(0.0..=1.0).contains(&value) {
            return Err(GenError::BadRate { name, value });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = params.num_states;
    let mut children: Vec<Vec<u32>> = vec![Vec::new(); size];

    let mut open: Vec<usize> = Vec::new();
    for i in 1..size {
        open.push(i - 1);
        let pick = rng.random_range(0..open.len());
        let parent = open[pick];
        children[parent].push(i as u32);
        if children[parent].len() >= params.max_children {
            open.swap_remove(pick);
        }
    }

    for (i, kids) in children.iter_mut().enumerate() {
        if kids.is_empty() || kids.len() >= params.max_children || i + 2 >= size {
            continue;
        }
        if rng.random_bool(params.dag_density) {
            let target = rng.random_range(i + 1..size) as u32;
            if !kids.contains(&target) {
                kids.push(target);
            }
        }
    }

    let n = params.num_players;
    let states = children
        .into_iter()
        .map(|mut kids| {
            if kids.is_empty() {
                StateRecord::terminal(random_gain(&mut rng, n, params.draw_rate))
            } else {
                kids.shuffle(&mut rng);
                let player = rng.random_range(1..=n as u32);
                StateRecord::decision(player, kids)
            }
        })
        .collect();
    Ok(GameGraph::new(n, states))
}

fn random_gain(rng: &mut ChaCha8Rng, n: usize, draw_rate: f64) -> Vec<i64> {
    if n == 2 {
        let first = if rng.random_bool(draw_rate) {
            0
        } else if rng.random_bool(0.5) {
            1
        } else {
            -1
        };
        return vec![first, -first];
    }
    if rng.random_bool(draw_rate) {
        // Some non-empty subset of players draws, the others lose.
        let mut gain: Vec<i64> = (0..n)
            .map(|_| if rng.random_bool(0.5) { 0 } else { -1 })
            .collect();
        if gain.iter().all(|&g| g != 0) {
            let j = rng.random_range(0..n);
            gain[j] = 0;
        }
        gain
    } else {
        let winner = rng.random_range(0..n);
        (0..n).map(|j| if j == winner { 1 } else { -1 }).collect()
    }
}

/// A single line `s0 -> s1 -> ... -> s{depth}` of player-1 decisions ending in
/// a terminal with the given first-player gain.
pub fn line_game(depth: usize, gain: i64) -> GameGraph {
    let mut states: Vec<StateRecord> = (0..depth)
        .map(|i| StateRecord::decision(1, [i as u32 + 1]))
        .collect();
    states.push(StateRecord::terminal([gain, -gain]));
    GameGraph::new(2, states)
}

/// Subtraction game on a heap of `heap` tokens where a move removes one of
/// `takes`, encoded as a DAG over (tokens, player to move). The player unable
/// to move loses.
pub fn nim_game(heap: u32, takes: &[u32]) -> GameGraph {
    // id = 2 * (heap - tokens) + (player - 1); root is (heap, player 1).
    let id = |tokens: u32, player: u32| StateId(2 * (heap - tokens) + (player - 1));
    let count = 2 * (heap as usize + 1);
    let mut states = vec![StateRecord::default(); count];
    for tokens in 0..=heap {
        for player in 1..=2u32 {
            let other = 3 - player;
            let kids: Vec<u32> = takes
                .iter()
                .filter(|&&t| t <= tokens && t > 0)
                .map(|&t| id(tokens - t, other).0)
                .collect();
            states[id(tokens, player).index()] = if kids.is_empty() {
                // The player to move has lost.
                let first = if player == 1 { -1 } else { 1 };
                StateRecord::terminal([first, -first])
            } else {
                StateRecord::decision(player, kids)
            };
        }
    }
    GameGraph::new(2, states)
}

//! Exhaustive ground-truth values over the whole game graph.

use serde::Serialize;
use thiserror::Error;

use crate::fixed::FixedPoint;
use crate::game::{validate_game, GameGraph, StateId, Violation};
use crate::terminal::{TerminalError, TerminalEval};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid game: {} violation(s)", .0.len())]
    InvalidGame(Vec<Violation>),
    #[error("minimax needs a 2-player game, got {0} players")]
    NotTwoPlayer(usize),
    #[error(transparent)]
    Terminal(#[from] TerminalError),
}

fn reverse_topo(g: &GameGraph) -> Result<Vec<StateId>, OracleError> {
    let report = validate_game(g);
    match report.topo_order {
        Some(order) if report.violations.is_empty() => Ok(order.into_iter().rev().collect()),
        _ => Err(OracleError::InvalidGame(report.violations)),
    }
}

/// Minimax value of every state, from player 1's point of view.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleValue2P {
    pub m: Vec<i8>,
}

impl OracleValue2P {
    pub fn get(&self, s: StateId) -> i8 {
        self.m[s.index()]
    }
}

/// Player 1 maximizes, player 2 minimizes. Every state is evaluated once,
/// children before parents.
pub fn minimax(g: &GameGraph) -> Result<OracleValue2P, OracleError> {
    if g.num_players() != 2 {
        return Err(OracleError::NotTwoPlayer(g.num_players()));
    }
    let mut m = vec![0i8; g.num_states()];
    for s in reverse_topo(g)? {
        m[s.index()] = if g.is_terminal(s) {
            g.gain(s, 0)
        } else {
            let values = g.children(s).iter().map(|c| m[c.index()]);
            if g.player(s) == 1 {
                values.max()
            } else {
                values.min()
            }
            .expect("decision states have children")
        };
    }
    Ok(OracleValue2P { m })
}

/// Max^n value of one state: the gains and terminal evaluations of the
/// terminal reached by optimal play.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaxnPair {
    pub gain: Vec<i8>,
    pub eval: Vec<FixedPoint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleValueNP {
    pub pairs: Vec<MaxnPair>,
    /// States where two children with different pairs tie on both keys of
    /// the player to move.
    pub ambiguous: Vec<StateId>,
}

impl OracleValueNP {
    pub fn get(&self, s: StateId) -> &MaxnPair {
        &self.pairs[s.index()]
    }

    pub fn unique(&self) -> bool {
        self.ambiguous.is_empty()
    }
}

/// Each decision state takes the pair of the child maximizing
/// `(gain_j, eval_j)` for its player `j`; among ties the smallest child id
/// wins and a tie between different pairs is reported as ambiguous.
pub fn maxn(g: &GameGraph, teval: &TerminalEval) -> Result<OracleValueNP, OracleError> {
    let order = reverse_topo(g)?;
    teval.ensure_covers(g)?;
    let mut pairs: Vec<Option<MaxnPair>> = vec![None; g.num_states()];
    let mut ambiguous = Vec::new();
    for s in order {
        let pair = if g.is_terminal(s) {
            MaxnPair {
                gain: g.gains(s),
                eval: teval.vector(s).to_vec(),
            }
        } else {
            let j = g.player(s) - 1;
            let pair_of = |c: StateId| pairs[c.index()].as_ref().expect("children first");
            let mut children: Vec<StateId> = g.children(s).to_vec();
            children.sort();
            let mut best = pair_of(children[0]);
            let mut tied = false;
            for &c in &children[1..] {
                let p = pair_of(c);
                let key = (p.gain[j], p.eval[j]);
                let best_key = (best.gain[j], best.eval[j]);
                if key > best_key {
                    best = p;
                    tied = false;
                } else if key == best_key && p != best {
                    tied = true;
                }
            }
            if tied {
                ambiguous.push(s);
            }
            best.clone()
        };
        pairs[s.index()] = Some(pair);
    }
    ambiguous.sort();
    Ok(OracleValueNP {
        pairs: pairs.into_iter().map(|p| p.expect("every state visited")).collect(),
        ambiguous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{fixtures::g1, StateRecord};
    use crate::generate::nim_game;
    use crate::terminal::make_tie_breaking_eval;

    #[test]
    fn minimax_small_games() {
        assert_eq!(minimax(&g1()).unwrap().get(StateId(0)), 1);
        assert_eq!(minimax(&nim_game(3, &[1, 2])).unwrap().get(StateId(0)), -1);
        let draws = GameGraph::new(
            2,
            vec![
                StateRecord::decision(2, [1, 2]),
                StateRecord::decision(1, [2]),
                StateRecord::terminal([0, 0]),
            ],
        );
        assert_eq!(minimax(&draws).unwrap().m, vec![0, 0, 0]);
    }

    #[test]
    fn minimax_rejects_bad_input() {
        let three = GameGraph::new(3, vec![StateRecord::terminal([0, 0, 0])]);
        assert_eq!(minimax(&three), Err(OracleError::NotTwoPlayer(3)));
        let cyclic = GameGraph::new(
            2,
            vec![StateRecord::decision(1, [1]), StateRecord::decision(2, [0])],
        );
        assert!(matches!(minimax(&cyclic), Err(OracleError::InvalidGame(_))));
    }

    #[test]
    fn maxn_strict_choice_is_unique() {
        let g = GameGraph::new(
            3,
            vec![
                StateRecord::decision(1, [1, 2]),
                StateRecord::terminal([1, -1, -1]),
                StateRecord::terminal([-1, 1, -1]),
            ],
        );
        let ft = make_tie_breaking_eval(&g, FixedPoint::from_raw(1)).unwrap();
        let value = maxn(&g, &ft).unwrap();
        assert!(value.unique());
        assert_eq!(value.get(StateId(0)).gain, vec![1, -1, -1]);
    }

    #[test]
    fn maxn_detects_ambiguity_without_tie_breaking() {
        let g = GameGraph::new(
            3,
            vec![
                StateRecord::decision(1, [2, 1]),
                StateRecord::terminal([1, -1, 0]),
                StateRecord::terminal([1, 0, -1]),
            ],
        );
        let value = maxn(&g, &TerminalEval::from_gains(&g)).unwrap();
        assert!(!value.unique());
        assert_eq!(value.ambiguous, vec![StateId(0)]);
        assert_eq!(value.get(StateId(0)).gain, vec![1, -1, 0]);
    }
}

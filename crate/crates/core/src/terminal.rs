//! Terminal evaluations: construction, the tie-breaking check, and the
//! per-player global maximum used by the multiplayer resolution rules.

use thiserror::Error;

use crate::fixed::FixedPoint;
use crate::game::{validate_game, GameGraph, StateId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TerminalError {
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(FixedPoint),
    #[error("epsilon {epsilon} times {terminals} terminals is not below 1")]
    BudgetExceeded {
        epsilon: FixedPoint,
        terminals: usize,
    },
    #[error("game is not valid")]
    InvalidGame,
    #[error("no terminal evaluation for terminal {0}")]
    Missing(StateId),
    #[error("terminal evaluation for {state} has {len} components, expected {expected}")]
    Arity {
        state: StateId,
        len: usize,
        expected: usize,
    },
    #[error("game has no terminal state")]
    NoTerminals,
}

/// Per-terminal evaluation vectors `f_t(s)`, indexed by state id. Non-terminal
/// slots are `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminalEval {
    values: Vec<Option<Vec<FixedPoint>>>,
}

impl TerminalEval {
    pub fn from_values(values: Vec<Option<Vec<FixedPoint>>>) -> Self {
        TerminalEval { values }
    }

    /// `f_t = f_b`.
    pub fn from_gains(g: &GameGraph) -> Self {
        let values = g
            .ids()
            .map(|s| {
                g.is_terminal(s)
                    .then(|| g.gains(s).into_iter().map(FixedPoint::from).collect())
            })
            .collect();
        TerminalEval { values }
    }

    /// The evaluation block embedded in the game file, if complete.
    pub fn from_game(g: &GameGraph) -> Option<Self> {
        if !g.has_teval() {
            return None;
        }
        let values = g
            .ids()
            .map(|s| {
                if g.is_terminal(s) {
                    g.record(s).teval.clone()
                } else {
                    None
                }
            })
            .collect();
        Some(TerminalEval { values })
    }

    pub fn get(&self, s: StateId) -> Option<&[FixedPoint]> {
        self.values.get(s.index()).and_then(|v| v.as_deref())
    }

    /// `f_t(s)`; panics if `s` has no entry (checked by [`Self::ensure_covers`]).
    pub fn vector(&self, s: StateId) -> &[FixedPoint] {
        self.get(s).expect("terminal evaluation covers every terminal")
    }

    pub fn component(&self, s: StateId, j: usize) -> FixedPoint {
        self.vector(s)[j]
    }

    pub fn ensure_covers(&self, g: &GameGraph) -> Result<(), TerminalError> {
        for t in g.terminals() {
            let v = self.get(t).ok_or(TerminalError::Missing(t))?;
            if v.len() != g.num_players() {
                return Err(TerminalError::Arity {
                    state: t,
                    len: v.len(),
                    expected: g.num_players(),
                });
            }
        }
        Ok(())
    }
}

/// `f_t(s)_j = f_b(s)_j + epsilon * rank(s)`, where `rank` numbers terminals
/// in the topological order reported by [`validate_game`].
pub fn make_tie_breaking_eval(
    g: &GameGraph,
    epsilon: FixedPoint,
) -> Result<TerminalEval, TerminalError> {
    if epsilon <= FixedPoint::ZERO {
        return Err(TerminalError::NonPositiveEpsilon(epsilon));
    }
    let order = validate_game(g)
        .topo_order
        .ok_or(TerminalError::InvalidGame)?;
    let terminals: Vec<StateId> = order.into_iter().filter(|&s| g.is_terminal(s)).collect();
    let budget_ok = epsilon
        .checked_mul_int(terminals.len() as i64)
        .is_some_and(|total| total < FixedPoint::ONE);
    if !budget_ok {
        return Err(TerminalError::BudgetExceeded {
            epsilon,
            terminals: terminals.len(),
        });
    }
    let mut values = vec![None; g.num_states()];
    for (rank, &t) in terminals.iter().enumerate() {
        let shift = epsilon * rank as i64;
        values[t.index()] = Some(
            g.gains(t)
                .into_iter()
                .map(|gain| FixedPoint::from(gain) + shift)
                .collect(),
        );
    }
    Ok(TerminalEval { values })
}

/// Outcome of [`check_tie_breaking`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TieBreakReport {
    Pass,
    /// First pair (in id order) violating both clauses of the definition.
    Witness(StateId, StateId),
}

impl TieBreakReport {
    pub fn passed(&self) -> bool {
        matches!(self, TieBreakReport::Pass)
    }
}

/// Two distinct terminals are compatible when every player with equal gains
/// has distinct evaluations, or when gains and evaluations are both identical.
pub fn check_tie_breaking(
    g: &GameGraph,
    teval: &TerminalEval,
) -> Result<TieBreakReport, TerminalError> {
    teval.ensure_covers(g)?;
    let terminals: Vec<(StateId, Vec<i8>, &[FixedPoint])> = g
        .terminals()
        .map(|t| (t, g.gains(t), teval.vector(t)))
        .collect();
    for (a, (sa, ga, ea)) in terminals.iter().enumerate() {
        for (sb, gb, eb) in &terminals[a + 1..] {
            let separated = (0..g.num_players()).all(|j| ga[j] != gb[j] || ea[j] != eb[j]);
            let identical = ga == gb && ea == eb;
            if !separated && !identical {
                return Ok(TieBreakReport::Witness(*sa, *sb));
            }
        }
    }
    Ok(TieBreakReport::Pass)
}

/// `max over terminals t of f_t(t)_j`, for every player `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminalMax(Vec<FixedPoint>);

impl TerminalMax {
    pub fn compute(g: &GameGraph, teval: &TerminalEval) -> Result<Self, TerminalError> {
        teval.ensure_covers(g)?;
        let maxima = (0..g.num_players())
            .map(|j| terminal_eval_max(g, teval, j))
            .collect::<Result<_, _>>()?;
        Ok(TerminalMax(maxima))
    }

    /// Maximum for player `j` (0-based).
    pub fn get(&self, j: usize) -> FixedPoint {
        self.0[j]
    }
}

/// Exact maximum of `f_t(.)_j` over all terminal states (player `j` 0-based).
pub fn terminal_eval_max(
    g: &GameGraph,
    teval: &TerminalEval,
    j: usize,
) -> Result<FixedPoint, TerminalError> {
    g.terminals()
        .map(|t| {
            teval
                .get(t)
                .and_then(|v| v.get(j).copied())
                .ok_or(TerminalError::Missing(t))
        })
        .try_fold(None, |best: Option<FixedPoint>, v| {
            let v = v?;
            Ok(Some(best.map_or(v, |b| b.max(v))))
        })?
        .ok_or(TerminalError::NoTerminals)
}

//! Games as explicit finite DAGs of states.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::fixed::FixedPoint;

/// Dense index of a state in `[0, |S|)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for StateId {
    fn from(index: usize) -> Self {
        StateId(index as u32)
    }
}

impl fmt::Debug for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// One state as stored in a game file. The record is kept as written so that
/// [`validate_game`] can report problems instead of the parser rejecting them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StateRecord {
    /// Player to move, 1-based. `None` for terminals.
    pub player: Option<u32>,
    pub children: Vec<StateId>,
    /// Per-player gains, terminals only.
    pub gain: Option<Vec<i64>>,
    /// Optional per-player terminal evaluation.
    pub teval: Option<Vec<FixedPoint>>,
}

impl StateRecord {
    pub fn decision(player: u32, children: impl IntoIterator<Item = u32>) -> Self {
        StateRecord {
            player: Some(player),
            children: children.into_iter().map(StateId).collect(),
            gain: None,
            teval: None,
        }
    }

    pub fn terminal(gain: impl Into<Vec<i64>>) -> Self {
        StateRecord {
            player: None,
            children: Vec::new(),
            gain: Some(gain.into()),
            teval: None,
        }
    }

    pub fn with_teval(mut self, teval: Vec<FixedPoint>) -> Self {
        self.teval = Some(teval);
        self
    }
}

/// A perfect-information game with `num_players` players over a finite DAG.
///
/// Two-player games use `num_players == 2` with zero-sum gain vectors; the
/// two-player engine reads `gain[0]` as the scalar payoff of the first player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameGraph {
    num_players: usize,
    states: Vec<StateRecord>,
}

impl GameGraph {
    pub fn new(num_players: usize, states: Vec<StateRecord>) -> Self {
        GameGraph {
            num_players,
            states,
        }
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[StateRecord] {
        &self.states
    }

    pub fn record(&self, s: StateId) -> &StateRecord {
        &self.states[s.index()]
    }

    pub fn ids(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.states.len()).map(StateId::from)
    }

    pub fn children(&self, s: StateId) -> &[StateId] {
        &self.states[s.index()].children
    }

    pub fn is_terminal(&self, s: StateId) -> bool {
        self.states[s.index()].children.is_empty()
    }

    /// 1-based player to move. Only meaningful on non-terminals of a valid game.
    pub fn player(&self, s: StateId) -> usize {
        self.states[s.index()].player.unwrap_or(1) as usize
    }

    /// Gain of player `j` (0-based) at terminal `s` of a valid game.
    pub fn gain(&self, s: StateId, j: usize) -> i8 {
        self.states[s.index()]
            .gain
            .as_ref()
            .map(|g| g[j] as i8)
            .unwrap_or(0)
    }

    pub fn gains(&self, s: StateId) -> Vec<i8> {
        (0..self.num_players).map(|j| self.gain(s, j)).collect()
    }

    pub fn terminals(&self) -> impl Iterator<Item = StateId> + '_ {
        self.ids().filter(|&s| self.is_terminal(s))
    }

    pub fn has_teval(&self) -> bool {
        self.states.iter().any(|r| r.teval.is_some())
    }

    /// True when no state has more than one parent, i.e. the game is a forest.
    pub fn is_tree_shaped(&self) -> bool {
        let mut seen = vec![false; self.states.len()];
        for record in &self.states {
            for c in &record.children {
                match seen.get_mut(c.index()) {
                    Some(flag) if *flag => return false,
                    Some(flag) => *flag = true,
                    None => {}
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoStates,
    NoPlayers,
    DanglingChild { state: StateId, child: StateId },
    DuplicateChild { state: StateId, child: StateId },
    Cycle { state: StateId },
    MissingPlayer { state: StateId },
    PlayerOutOfRange { state: StateId, player: u32 },
    MissingGain { state: StateId },
    GainOnNonTerminal { state: StateId },
    GainArity { state: StateId, len: usize },
    GainOutOfRange { state: StateId, player: usize, value: i64 },
    NotZeroSum { state: StateId },
    TevalOnNonTerminal { state: StateId },
    TevalArity { state: StateId, len: usize },
    TevalIncomplete { state: StateId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NoStates => write!(f, "empty game: no states"),
            NoPlayers => write!(f, "number of players must be at least 1"),
            DanglingChild { state, child } => write!(f, "{state}: dangling child {child}"),
            DuplicateChild { state, child } => write!(f, "{state}: duplicate child {child}"),
            Cycle { state } => write!(f, "cycle through {state}"),
            MissingPlayer { state } => write!(f, "{state}: non-terminal without player"),
            PlayerOutOfRange { state, player } => {
                write!(f, "{state}: player {player} out of range")
            }
            MissingGain { state } => write!(f, "{state}: terminal without gain"),
            GainOnNonTerminal { state } => write!(f, "{state}: gain on non-terminal"),
            GainArity { state, len } => write!(f, "{state}: gain has {len} components"),
            GainOutOfRange {
                state,
                player,
                value,
            } => write!(
                f,
                "{state}: gain out of range ({value} for player {})",
                player + 1
            ),
            NotZeroSum { state } => write!(f, "{state}: two-player gains are not zero-sum"),
            TevalOnNonTerminal { state } => write!(f, "{state}: teval on non-terminal"),
            TevalArity { state, len } => write!(f, "{state}: teval has {len} components"),
            TevalIncomplete { state } => write!(f, "{state}: terminal without teval"),
        }
    }
}

impl Violation {
    /// Short machine-friendly tag.
    pub fn kind(&self) -> &'static str {
        use Violation::*;
        match self {
            NoStates => "no states",
            NoPlayers => "no players",
            DanglingChild { .. } => "dangling child",
            DuplicateChild { .. } => "duplicate child",
            Cycle { .. } => "cycle",
            MissingPlayer { .. } => "missing player",
            PlayerOutOfRange { .. } => "player out of range",
            MissingGain { .. } => "missing gain",
            GainOnNonTerminal { .. } => "gain on non-terminal",
            GainArity { .. } => "gain arity",
            GainOutOfRange { .. } => "gain out of range",
            NotZeroSum { .. } => "not zero-sum",
            TevalOnNonTerminal { .. } => "teval on non-terminal",
            TevalArity { .. } => "teval arity",
            TevalIncomplete { .. } => "teval incomplete",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Topological order (parents before children, smallest id first among
    /// ready states). Present whenever the edge structure is acyclic.
    pub topo_order: Option<Vec<StateId>>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: &str) -> bool {
        self.violations.iter().any(|v| v.kind() == kind)
    }
}

/// Checks every clause of the game definition. Violations are returned as
/// data; this never fails.
pub fn validate_game(g: &GameGraph) -> ValidationReport {
    let mut violations = Vec::new();
    let n = g.num_players;
    let size = g.states.len();
    if size == 0 {
        violations.push(Violation::NoStates);
    }
    if n == 0 {
        violations.push(Violation::NoPlayers);
    }

    let mut dangling = false;
    let any_teval = g.has_teval();
    for (index, record) in g.states.iter().enumerate() {
        let state = StateId::from(index);
        let mut seen = HashSet::new();
        for &child in &record.children {
            if child.index() >= size {
                dangling = true;
                violations.push(Violation::DanglingChild { state, child });
            } else if !seen.insert(child) {
                violations.push(Violation::DuplicateChild { state, child });
            }
        }
        if record.children.is_empty() {
            match &record.gain {
                None => violations.push(Violation::MissingGain { state }),
                Some(gain) => {
                    if gain.len() != n {
                        violations.push(Violation::GainArity {
                            state,
                            len: gain.len(),
                        });
                    }
                    for (player, &value) in gain.iter().enumerate() {
                        if !(-1..=1).contains(&value) {
                            violations.push(Violation::GainOutOfRange {
                                state,
                                player,
                                value,
                            });
                        }
                    }
                    if n == 2 && gain.len() == 2 && gain[1] != -gain[0] {
                        violations.push(Violation::NotZeroSum { state });
                    }
                }
            }
            match &record.teval {
                Some(teval) if teval.len() != n => violations.push(Violation::TevalArity {
                    state,
                    len: teval.len(),
                }),
                None if any_teval => violations.push(Violation::TevalIncomplete { state }),
                _ => {}
            }
        } else {
            match record.player {
                None => violations.push(Violation::MissingPlayer { state }),
                Some(p) if p == 0 || p as usize > n => {
                    violations.push(Violation::PlayerOutOfRange { state, player: p })
                }
                Some(_) => {}
            }
            if record.gain.is_some() {
                violations.push(Violation::GainOnNonTerminal { state });
            }
            if record.teval.is_some() {
                violations.push(Violation::TevalOnNonTerminal { state });
            }
        }
    }

    let topo_order = if dangling {
        None
    } else {
        match topological_order(g) {
            Ok(order) => Some(order),
            Err(state) => {
                violations.push(Violation::Cycle { state });
                None
            }
        }
    };

    ValidationReport {
        violations,
        topo_order,
    }
}

/// Kahn's algorithm with a min-id ready queue. On a cycle, returns one state
/// that could not be ordered.
fn topological_order(g: &GameGraph) -> Result<Vec<StateId>, StateId> {
    let size = g.states.len();
    let mut indegree = vec![0usize; size];
    for record in &g.states {
        for c in &record.children {
            indegree[c.index()] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> = indegree
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0)
        .map(|(i, _)| Reverse(i))
        .collect();
    let mut order = Vec::with_capacity(size);
    while let Some(Reverse(i)) = ready.pop() {
        order.push(StateId::from(i));
        for c in &g.states[i].children {
            let d = &mut indegree[c.index()];
            *d -= 1;
            if *d == 0 {
                ready.push(Reverse(c.index()));
            }
        }
    }
    if order.len() == size {
        Ok(order)
    } else {
        let stuck = indegree.iter().position(|&d| d > 0).unwrap_or(0);
        Err(StateId::from(stuck))
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn smallest_decision_is_valid() {
        let report = validate_game(&g1());
        assert!(report.is_valid(), "{:?}", report.violations);
        let order = report.topo_order.unwrap();
        assert_eq!(order[0], StateId(0));
        assert_eq!(order.len(), 3);
    }

    #[test]
    fn back_edge_is_a_cycle() {
        let mut states = g1().states().to_vec();
        states[1] = StateRecord::decision(2, [0]);
        let report = validate_game(&GameGraph::new(2, states));
        assert!(report.has("cycle"));
        assert!(report.topo_order.is_none());
    }

    #[test]
    fn gain_two_is_out_of_range() {
        let mut states = g1().states().to_vec();
        states[2] = StateRecord::terminal([2, -2]);
        let report = validate_game(&GameGraph::new(2, states));
        assert!(report.has("gain out of range"));
    }

    #[test]
    fn reports_structural_problems() {
        let g = GameGraph::new(
            3,
            vec![
                StateRecord::decision(4, [1, 1, 7]),
                StateRecord {
                    player: None,
                    children: vec![],
                    gain: None,
                    teval: None,
                },
            ],
        );
        let report = validate_game(&g);
        for kind in [
            "player out of range",
            "duplicate child",
            "dangling child",
            "missing gain",
        ] {
            assert!(report.has(kind), "missing {kind}: {:?}", report.violations);
        }
    }

    #[test]
    fn two_player_requires_zero_sum() {
        let mut states = g1().states().to_vec();
        states[1] = StateRecord::terminal([1, 1]);
        assert!(validate_game(&GameGraph::new(2, states)).has("not zero-sum"));
    }

    #[test]
    fn partial_teval_is_reported() {
        let mut states = g1().states().to_vec();
        states[1] = states[1]
            .clone()
            .with_teval(vec![FixedPoint::ONE, -FixedPoint::ONE]);
        assert!(validate_game(&GameGraph::new(2, states)).has("teval incomplete"));
    }

    #[test]
    fn tree_shape_detection() {
        assert!(g1().is_tree_shaped());
        let dag = GameGraph::new(
            2,
            vec![
                StateRecord::decision(1, [1, 2]),
                StateRecord::decision(2, [2]),
                StateRecord::terminal([0, 0]),
            ],
        );
        assert!(!dag.is_tree_shaped());
        assert!(validate_game(&dag).is_valid());
    }
}

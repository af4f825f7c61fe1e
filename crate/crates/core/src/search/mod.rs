//! Partial game trees and the two iteration drivers (unbounded best-first and
//! descent) shared by the two-player and multiplayer algorithms.
//!
//! One node is stored per [`StateId`]: a state reachable through several
//! parents is a single node of the partial tree. The drivers are iterative,
//! keeping the descended path on an explicit stack and applying backups in
//! reverse path order.

pub mod multiplayer;
pub mod multiplayer_v1;
pub mod multiplayer_v2;
pub mod two_player;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixed::FixedPoint;
use crate::game::{GameGraph, StateId, Violation};
use crate::terminal::{TerminalError, TieBreakReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("empty candidate set at {0}")]
    EmptyCandidates(StateId),
    #[error("{child} (child of {parent}) is not in the partial tree")]
    MissingChild { parent: StateId, child: StateId },
    #[error("{0} has not been expanded")]
    NotExpanded(StateId),
    #[error("{0} is not a child of {1}")]
    NotAChild(StateId, StateId),
    #[error("invalid game: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidGame(Vec<Violation>),
    #[error("two-player search needs a 2-player game, got {0} players")]
    NotTwoPlayer(usize),
    #[error("multiplayer search needs at least 2 players, got {0}")]
    TooFewPlayers(usize),
    #[error("root {0} is not a state of the game")]
    BadRoot(StateId),
    #[error("terminal evaluation is not tie-breaking: {0} and {1} collide")]
    NotTieBreaking(StateId, StateId),
    #[error("iteration budget must be at least 1")]
    ZeroBudget,
    #[error(transparent)]
    Terminal(#[from] TerminalError),
}

impl SearchError {
    pub(crate) fn from_tie_report(report: TieBreakReport) -> Result<(), SearchError> {
        match report {
            TieBreakReport::Pass => Ok(()),
            TieBreakReport::Witness(a, b) => Err(SearchError::NotTieBreaking(a, b)),
        }
    }
}

/// Third selection key: whether a larger visit count `n(s, s')` is preferred
/// (decision form) or a smaller one (exploration form).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tie {
    PreferExplored,
    PreferUnexplored,
}

impl Tie {
    fn signed(self, visits: u32) -> i64 {
        match self {
            Tie::PreferExplored => visits as i64,
            Tie::PreferUnexplored => -(visits as i64),
        }
    }
}

/// Which iteration is repeated by a solve loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Driver {
    /// Extend the principal line of unresolved states by one expansion.
    BestFirst,
    /// Extend the principal line down to a terminal or resolved state.
    Descent,
}

/// Post-search decision rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Best,
    Safest,
}

/// Values stored for one state of the partial tree.
pub trait NodeEntry: Clone + PartialEq {
    fn resolved(&self) -> bool;
    fn update(&self, id: StateId, kind: UpdateKind) -> NodeUpdate;
}

/// The partial game tree `S_p` together with the values `(v, c, r)` and the
/// selection counts `n(s, s')`.
///
/// Values are also kept for frontier states (non-terminal children of
/// expanded states), which are not members until they are expanded.
#[derive(Debug, Clone)]
pub struct SearchTree<E> {
    entries: Vec<Option<E>>,
    member: Vec<bool>,
    visits: Vec<Vec<u32>>,
    members: usize,
    expanded: usize,
}

impl<E: NodeEntry> SearchTree<E> {
    pub fn new(num_states: usize) -> Self {
        SearchTree {
            entries: vec![None; num_states],
            member: vec![false; num_states],
            visits: vec![Vec::new(); num_states],
            members: 0,
            expanded: 0,
        }
    }

    pub fn entry(&self, s: StateId) -> Option<&E> {
        self.entries.get(s.index()).and_then(Option::as_ref)
    }

    pub(crate) fn known(&self, parent: StateId, child: StateId) -> Result<&E, SearchError> {
        self.entry(child)
            .ok_or(SearchError::MissingChild { parent, child })
    }

    pub fn is_member(&self, s: StateId) -> bool {
        self.member.get(s.index()).copied().unwrap_or(false)
    }

    /// True when `s` has been expanded (its children carry values).
    pub fn is_expanded(&self, s: StateId) -> bool {
        !self.visits[s.index()].is_empty()
    }

    pub fn is_resolved(&self, s: StateId) -> bool {
        self.entry(s).is_some_and(NodeEntry::resolved)
    }

    /// `n(s, s')` for the `k`-th child of `s`.
    pub fn visits(&self, s: StateId, k: usize) -> u32 {
        self.visits[s.index()].get(k).copied().unwrap_or(0)
    }

    /// `n(s, child)`, located by id.
    pub fn visit_count(&self, g: &GameGraph, s: StateId, child: StateId) -> u32 {
        g.children(s)
            .iter()
            .position(|&c| c == child)
            .map_or(0, |k| self.visits(s, k))
    }

    pub fn members(&self) -> impl Iterator<Item = StateId> + '_ {
        self.member
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| StateId::from(i))
    }

    pub fn member_count(&self) -> usize {
        self.members
    }

    pub fn nodes_expanded(&self) -> usize {
        self.expanded
    }

    /// Inserts an entry directly, bypassing the algorithms. Used to encode
    /// hand-built positions.
    pub fn set_entry(&mut self, s: StateId, entry: E, member: bool) {
        self.entries[s.index()] = Some(entry);
        if member && !self.member[s.index()] {
            self.member[s.index()] = true;
            self.members += 1;
        }
    }

    /// Marks `s` as expanded with the given per-child visit counts.
    pub fn set_visits(&mut self, s: StateId, visits: Vec<u32>) {
        if self.visits[s.index()].is_empty() && !visits.is_empty() {
            self.expanded += 1;
        }
        self.visits[s.index()] = visits;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateKind {
    /// First values of a frontier state.
    Init,
    /// A terminal entering the tree.
    Terminal,
    /// Values recomputed from the children.
    Backup,
}

/// A write to the values of one state, as recorded in a trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeUpdate {
    pub id: StateId,
    pub kind: UpdateKind,
    pub r: u8,
    pub c: Vec<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cp: Option<Vec<i8>>,
    pub v: Vec<FixedPoint>,
}

/// Evidence emitted by one iteration.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IterationTrace {
    #[serde(rename = "iter")]
    pub iteration: usize,
    /// States that joined the partial tree.
    pub added: Vec<StateId>,
    /// States whose resolution went from 0 to 1.
    pub flips: Vec<StateId>,
    /// States visited from the root downwards.
    pub path: Vec<StateId>,
    pub updates: Vec<NodeUpdate>,
}

/// Algorithm-specific pieces plugged into the drivers.
pub(crate) trait Rules {
    type Entry: NodeEntry;

    fn game(&self) -> &GameGraph;
    fn terminal_entry(&self, s: StateId) -> Self::Entry;
    fn frontier_entry(&self, s: StateId) -> Self::Entry;
    /// Exploration-form choice among unresolved children, given as child
    /// indices of `s`. Returns one of them.
    fn select_unresolved(&self, tree: &SearchTree<Self::Entry>, s: StateId, candidates: &[usize])
        -> usize;
    /// New values of expanded `s` computed from its children.
    fn backup(&self, tree: &SearchTree<Self::Entry>, s: StateId) -> Self::Entry;
}

/// Lexicographic argmax of `key` over child indices, residual ties going to
/// the smallest state id.
pub(crate) fn argbest<K: Ord>(
    g: &GameGraph,
    s: StateId,
    candidates: &[usize],
    key: impl Fn(usize) -> K,
) -> usize {
    let children = g.children(s);
    let mut best = candidates[0];
    let mut best_key = key(best);
    for &k in &candidates[1..] {
        let candidate_key = key(k);
        let better = match candidate_key.cmp(&best_key) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Equal => children[k] < children[best],
            std::cmp::Ordering::Less => false,
        };
        if better {
            best = k;
            best_key = candidate_key;
        }
    }
    best
}

/// Maps a public candidate list of child ids to child indices of `s`.
pub(crate) fn child_indices(
    g: &GameGraph,
    s: StateId,
    candidates: &[StateId],
) -> Result<Vec<usize>, SearchError> {
    if candidates.is_empty() {
        return Err(SearchError::EmptyCandidates(s));
    }
    candidates
        .iter()
        .map(|&c| {
            g.children(s)
                .iter()
                .position(|&x| x == c)
                .ok_or(SearchError::NotAChild(c, s))
        })
        .collect()
}

/// Checks that every child of `s` has values.
pub(crate) fn require_children<E: NodeEntry>(
    g: &GameGraph,
    tree: &SearchTree<E>,
    s: StateId,
) -> Result<(), SearchError> {
    for &c in g.children(s) {
        tree.known(s, c)?;
    }
    Ok(())
}

struct Step<'t, E> {
    tree: &'t mut SearchTree<E>,
    trace: IterationTrace,
}

impl<E: NodeEntry> Step<'_, E> {
    fn write(&mut self, s: StateId, entry: E, kind: UpdateKind) {
        let was_unresolved = self.tree.entry(s).is_some_and(|e| !e.resolved());
        if was_unresolved && entry.resolved() {
            self.trace.flips.push(s);
        }
        self.trace.updates.push(entry.update(s, kind));
        self.tree.entries[s.index()] = Some(entry);
    }

    fn join(&mut self, s: StateId) {
        if !self.tree.member[s.index()] {
            self.tree.member[s.index()] = true;
            self.tree.members += 1;
            self.trace.added.push(s);
        }
    }

    fn enter_terminal<R: Rules<Entry = E>>(&mut self, rules: &R, s: StateId) {
        if !self.tree.is_member(s) {
            self.join(s);
            self.write(s, rules.terminal_entry(s), UpdateKind::Terminal);
        }
    }

    fn expand<R: Rules<Entry = E>>(&mut self, rules: &R, s: StateId) {
        let g = rules.game();
        self.join(s);
        self.tree.visits[s.index()] = vec![0; g.children(s).len()];
        self.tree.expanded += 1;
        for &c in g.children(s) {
            if g.is_terminal(c) {
                self.enter_terminal(rules, c);
            } else if self.tree.entry(c).is_none() {
                self.write(c, rules.frontier_entry(c), UpdateKind::Init);
            }
        }
    }

    fn backup<R: Rules<Entry = E>>(&mut self, rules: &R, s: StateId) {
        let entry = rules.backup(self.tree, s);
        self.write(s, entry, UpdateKind::Backup);
    }

    /// Picks the exploration-best unresolved child and counts the selection.
    fn descend<R: Rules<Entry = E>>(&mut self, rules: &R, s: StateId) -> Option<StateId> {
        let g = rules.game();
        let candidates: Vec<usize> = g
            .children(s)
            .iter()
            .enumerate()
            .filter(|(_, &c)| !self.tree.is_resolved(c))
            .map(|(k, _)| k)
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let k = rules.select_unresolved(self.tree, s, &candidates);
        self.tree.visits[s.index()][k] += 1;
        Some(g.children(s)[k])
    }

    fn start<R: Rules<Entry = E>>(&mut self, rules: &R, root: StateId) {
        if !rules.game().is_terminal(root) && self.tree.entry(root).is_none() {
            self.write(root, rules.frontier_entry(root), UpdateKind::Init);
        }
    }
}

/// One best-first iteration from `root`.
///
/// A newly expanded state is backed up immediately, so that a state whose
/// children are all resolved at expansion time is resolved in the same
/// iteration.
pub(crate) fn best_first_iteration<R: Rules>(
    rules: &R,
    tree: &mut SearchTree<R::Entry>,
    root: StateId,
    iteration: usize,
) -> IterationTrace {
    let g = rules.game();
    let mut step = Step {
        tree,
        trace: IterationTrace {
            iteration,
            ..Default::default()
        },
    };
    step.start(rules, root);
    let mut pending = Vec::new();
    let mut s = root;
    loop {
        step.trace.path.push(s);
        if g.is_terminal(s) {
            step.enter_terminal(rules, s);
            break;
        }
        if !step.tree.is_member(s) {
            step.expand(rules, s);
            step.backup(rules, s);
            break;
        }
        match step.descend(rules, s) {
            Some(child) => {
                pending.push(s);
                s = child;
            }
            None => {
                step.backup(rules, s);
                break;
            }
        }
    }
    for &p in pending.iter().rev() {
        step.backup(rules, p);
    }
    step.trace
}

/// One descent iteration from `root`.
pub(crate) fn descent_iteration<R: Rules>(
    rules: &R,
    tree: &mut SearchTree<R::Entry>,
    root: StateId,
    iteration: usize,
) -> IterationTrace {
    let g = rules.game();
    let mut step = Step {
        tree,
        trace: IterationTrace {
            iteration,
            ..Default::default()
        },
    };
    step.start(rules, root);
    let mut pending = Vec::new();
    let mut s = root;
    loop {
        step.trace.path.push(s);
        if g.is_terminal(s) {
            step.enter_terminal(rules, s);
            break;
        }
        if !step.tree.is_member(s) {
            step.expand(rules, s);
            step.backup(rules, s);
        }
        if step.tree.is_resolved(s) {
            break;
        }
        match step.descend(rules, s) {
            Some(child) => {
                pending.push(s);
                s = child;
            }
            None => {
                // Only reachable through a shared descendant: every child was
                // resolved along another parent's line since `s` was last
                // backed up.
                step.backup(rules, s);
                break;
            }
        }
    }
    for &p in pending.iter().rev() {
        step.backup(rules, p);
    }
    step.trace
}

/// Loop options shared by every solver.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub budget: usize,
    pub record_trace: bool,
    /// Soft wall-clock cap; reaching it stops the loop as if the budget ran
    /// out.
    pub deadline: Option<Instant>,
}

impl SolveOptions {
    pub fn budget(budget: usize) -> Self {
        SolveOptions {
            budget,
            record_trace: false,
            deadline: None,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }
}

/// Outcome of a solve loop. Two-player results carry one-element
/// `completion` and `value` vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub resolved: bool,
    pub completion: Vec<i8>,
    pub value: Vec<FixedPoint>,
    pub iterations: usize,
    pub chosen_action: Option<StateId>,
    pub nodes_expanded: usize,
    pub members: usize,
    #[serde(skip)]
    pub trace: Option<Vec<IterationTrace>>,
}

/// Repeats `iterate` until the root is resolved, the budget is spent or the
/// deadline passes.
pub(crate) fn run_loop<E: NodeEntry>(
    tree: &mut SearchTree<E>,
    root: StateId,
    opts: &SolveOptions,
    mut iterate: impl FnMut(&mut SearchTree<E>, usize) -> IterationTrace,
) -> (usize, Option<Vec<IterationTrace>>) {
    let mut traces = opts.record_trace.then(Vec::new);
    let mut iterations = 0;
    while iterations < opts.budget && !tree.is_resolved(root) {
        if opts.deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        iterations += 1;
        let trace = iterate(tree, iterations);
        if let Some(t) = traces.as_mut() {
            t.push(trace);
        }
    }
    (iterations, traces)
}

pub(crate) fn check_root(g: &GameGraph, root: StateId) -> Result<(), SearchError> {
    if root.index() >= g.num_states() {
        return Err(SearchError::BadRoot(root));
    }
    Ok(())
}

pub(crate) fn check_valid(g: &GameGraph) -> Result<(), SearchError> {
    let report = crate::game::validate_game(g);
    if report.is_valid() {
        Ok(())
    } else {
        Err(SearchError::InvalidGame(report.violations))
    }
}

//! Replays iteration traces against the game and checks the search
//! invariants after every iteration.
//!
//! The checker rebuilds the partial tree from the recorded updates, additions
//! and paths only; it shares no code with the solvers beyond the data types.
//!
//! On a DAG, a state whose child was resolved through another parent is not
//! backed up until it is visited again, so checks that relate a state's
//! values to its children's current values are applied only to states backed
//! up in the iteration. On tree-shaped games they are applied to every
//! member.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::eval::EvalFn;
use crate::fixed::FixedPoint;
use crate::game::{GameGraph, StateId};
use crate::oracle::{maxn, minimax, OracleError, OracleValue2P, OracleValueNP};
use crate::run::{solve, Algo, Variant};
use crate::search::multiplayer::NpConfig;
use crate::search::{IterationTrace, NodeUpdate, SearchError, SolveOptions, SolveResult, UpdateKind};
use crate::terminal::{TerminalError, TerminalEval, TerminalMax};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Terminal(#[from] TerminalError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("root {0} is not a state of the game")]
    BadRoot(StateId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Invariant {
    /// The trace does not describe a run on this game.
    Malformed,
    Frozen,
    /// Recorded flips differ from the replayed 0 to 1 transitions.
    Flips,
    Coupling,
    ZeroCompletion,
    BestChild,
    Progress,
    Bound,
    Exactness,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Invariant::Malformed => "malformed",
            Invariant::Frozen => "frozen",
            Invariant::Flips => "flips",
            Invariant::Coupling => "coupling",
            Invariant::ZeroCompletion => "zero-completion",
            Invariant::BestChild => "best-child",
            Invariant::Progress => "progress",
            Invariant::Bound => "bound",
            Invariant::Exactness => "exactness",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceViolation {
    pub iteration: usize,
    pub state: Option<StateId>,
    pub invariant: Invariant,
    pub detail: String,
}

impl fmt::Display for TraceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "iteration {}: {}", self.iteration, self.invariant)?;
        if let Some(s) = self.state {
            write!(f, " at {s}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub iterations: usize,
    pub root_resolved: bool,
    /// Number of per-state checks performed.
    pub checks: usize,
    pub violations: Vec<TraceViolation>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&TraceViolation> {
        self.violations.first()
    }

    pub fn count(&self, invariant: Invariant) -> usize {
        self.violations
            .iter()
            .filter(|v| v.invariant == invariant)
            .count()
    }
}

#[derive(Debug, Clone)]
enum Reference {
    Minimax(OracleValue2P),
    Maxn(OracleValueNP),
}

#[derive(Debug, Clone, PartialEq)]
struct Values {
    r: bool,
    c: Vec<i8>,
    cp: Option<Vec<i8>>,
    v: Vec<FixedPoint>,
}

impl From<&NodeUpdate> for Values {
    fn from(u: &NodeUpdate) -> Self {
        Values {
            r: u.r == 1,
            c: u.c.clone(),
            cp: u.cp.clone(),
            v: u.v.clone(),
        }
    }
}

/// Checks traces of one variant from one root against one game.
#[derive(Debug, Clone)]
pub struct TraceChecker<'a> {
    game: &'a GameGraph,
    variant: Variant,
    teval: &'a TerminalEval,
    root: StateId,
    tmax: Option<TerminalMax>,
    reference: Reference,
}

struct Replay {
    values: Vec<Option<Values>>,
    member: Vec<bool>,
    visits: Vec<Vec<u32>>,
    violations: Vec<TraceViolation>,
    checks: usize,
    iteration: usize,
}

impl Replay {
    fn flag(&mut self, state: Option<StateId>, invariant: Invariant, detail: impl Into<String>) {
        self.violations.push(TraceViolation {
            iteration: self.iteration,
            state,
            invariant,
            detail: detail.into(),
        });
    }

    fn get(&self, s: StateId) -> Option<&Values> {
        self.values[s.index()].as_ref()
    }

    fn resolved(&self, s: StateId) -> bool {
        self.get(s).is_some_and(|e| e.r)
    }
}

impl<'a> TraceChecker<'a> {
    pub fn new(
        game: &'a GameGraph,
        variant: Variant,
        teval: &'a TerminalEval,
        root: StateId,
    ) -> Result<Self, VerifyError> {
        if root.index() >= game.num_states() {
            return Err(VerifyError::BadRoot(root));
        }
        let (tmax, reference) = match variant {
            Variant::TwoPlayer => (None, Reference::Minimax(minimax(game)?)),
            Variant::V1 | Variant::V2 => (
                Some(TerminalMax::compute(game, teval)?),
                Reference::Maxn(maxn(game, teval)?),
            ),
        };
        Ok(TraceChecker {
            game,
            variant,
            teval,
            root,
            tmax,
            reference,
        })
    }

    fn arity(&self) -> usize {
        match self.variant {
            Variant::TwoPlayer => 1,
            _ => self.game.num_players(),
        }
    }

    fn terminal_values(&self, s: StateId) -> Values {
        let (c, v) = match self.variant {
            Variant::TwoPlayer => (vec![self.game.gain(s, 0)], vec![self.teval.component(s, 0)]),
            _ => (self.game.gains(s), self.teval.vector(s).to_vec()),
        };
        Values {
            r: true,
            cp: (self.variant == Variant::V1).then(|| c.clone()),
            c,
            v,
        }
    }

    pub fn check(&self, traces: &[IterationTrace]) -> VerifyReport {
        let g = self.game;
        let n = g.num_states();
        let mut replay = Replay {
            values: vec![None; n],
            member: vec![false; n],
            visits: g.ids().map(|s| vec![0; g.children(s).len()]).collect(),
            violations: Vec::new(),
            checks: 0,
            iteration: 0,
        };
        let bound = 2 * n;
        let tree_shaped = g.is_tree_shaped();
        for (i, trace) in traces.iter().enumerate() {
            replay.iteration = i + 1;
            if trace.iteration != i + 1 {
                replay.flag(None, Invariant::Malformed, format!("record numbered {}", trace.iteration));
            }
            let root_open = !replay.resolved(self.root);
            if root_open && replay.iteration > bound {
                replay.flag(
                    Some(self.root),
                    Invariant::Bound,
                    format!("root unresolved after {bound} iterations"),
                );
            }
            let backed_up = self.apply(&mut replay, trace);
            if root_open && !g.is_terminal(self.root) && trace.added.is_empty() && trace.flips.is_empty() {
                replay.flag(Some(self.root), Invariant::Progress, "no state added and no resolution flipped");
            }
            self.check_states(&mut replay, &backed_up, tree_shaped);
        }
        VerifyReport {
            iterations: traces.len(),
            root_resolved: replay.resolved(self.root),
            checks: replay.checks,
            violations: replay.violations,
        }
    }

    /// Replays one iteration; returns the states backed up in it.
    fn apply(&self, replay: &mut Replay, trace: &IterationTrace) -> BTreeSet<StateId> {
        let g = self.game;
        let mut flipped = BTreeSet::new();
        let mut backed_up = BTreeSet::new();
        for u in &trace.updates {
            let s = u.id;
            if s.index() >= g.num_states() {
                replay.flag(Some(s), Invariant::Malformed, "unknown state");
                continue;
            }
            let new = Values::from(u);
            if new.c.len() != self.arity()
                || new.v.len() != self.arity()
                || new.cp.is_some() != (self.variant == Variant::V1)
                || new.cp.as_ref().is_some_and(|cp| cp.len() != self.arity())
                || u.r > 1
            {
                replay.flag(Some(s), Invariant::Malformed, "value arity");
                continue;
            }
            match u.kind {
                UpdateKind::Terminal if !g.is_terminal(s) || new != self.terminal_values(s) => {
                    replay.flag(Some(s), Invariant::Malformed, "terminal values differ from the game");
                }
                UpdateKind::Init
                    if g.is_terminal(s)
                        || new.r
                        || new.c.iter().any(|&x| x != 0)
                        || new.cp.as_ref().is_some_and(|cp| cp.iter().any(|&x| x != 0)) =>
                {
                    replay.flag(Some(s), Invariant::Malformed, "frontier state not initialized to zero");
                }
                UpdateKind::Backup if g.is_terminal(s) => {
                    replay.flag(Some(s), Invariant::Malformed, "backup of a terminal");
                }
                _ => {}
            }
            match replay.get(s) {
                Some(old) if old.r && *old != new => {
                    replay.flag(Some(s), Invariant::Frozen, "values of a resolved state changed");
                }
                Some(old) if !old.r && new.r => {
                    flipped.insert(s);
                }
                _ => {}
            }
            if u.kind == UpdateKind::Backup {
                backed_up.insert(s);
            }
            replay.values[s.index()] = Some(new);
        }

        let recorded: BTreeSet<StateId> = trace.flips.iter().copied().collect();
        if recorded != flipped || recorded.len() != trace.flips.len() {
            replay.flag(
                None,
                Invariant::Flips,
                format!("recorded {:?}, replayed {:?}", trace.flips, flipped),
            );
        }
        for &s in &trace.added {
            if s.index() >= g.num_states() || replay.member[s.index()] {
                replay.flag(Some(s), Invariant::Malformed, "added twice or unknown");
                continue;
            }
            replay.member[s.index()] = true;
        }
        if trace.path.first() != Some(&self.root) {
            replay.flag(None, Invariant::Malformed, "path does not start at the root");
        }
        for pair in trace.path.windows(2) {
            let (p, c) = (pair[0], pair[1]);
            match g.children(p).iter().position(|&x| x == c) {
                Some(k) => replay.visits[p.index()][k] += 1,
                None => replay.flag(Some(c), Invariant::Malformed, format!("path step from {p}")),
            }
        }
        for &s in &flipped {
            self.check_exact(replay, s);
        }
        for s in trace.updates.iter().filter(|u| u.kind == UpdateKind::Terminal).map(|u| u.id) {
            if s.index() < g.num_states() && g.is_terminal(s) {
                self.check_exact(replay, s);
            }
        }
        backed_up
    }

    fn check_exact(&self, replay: &mut Replay, s: StateId) {
        let Some(e) = replay.get(s).cloned() else { return };
        replay.checks += 1;
        let ok = match &self.reference {
            Reference::Minimax(m) => e.c == [m.get(s)],
            Reference::Maxn(m) => {
                let pair = m.get(s);
                e.c == pair.gain && e.v == pair.eval
            }
        };
        if !ok {
            let expected = match &self.reference {
                Reference::Minimax(m) => format!("{}", m.get(s)),
                Reference::Maxn(m) => format!("{:?} {:?}", m.get(s).gain, m.get(s).eval),
            };
            let found = format!("{:?} {:?}", e.c, e.v);
            replay.flag(
                Some(s),
                Invariant::Exactness,
                format!("resolved to {found}, oracle {expected}"),
            );
        }
    }

    fn check_states(&self, replay: &mut Replay, backed_up: &BTreeSet<StateId>, tree_shaped: bool) {
        let g = self.game;
        for s in g.ids() {
            let Some(e) = replay.get(s).cloned() else { continue };
            if self.variant == Variant::V1 && !e.r && e.c.iter().any(|&x| x != 0) {
                replay.flag(Some(s), Invariant::ZeroCompletion, format!("c = {:?}", e.c));
            }
            if !replay.member[s.index()] || g.is_terminal(s) {
                continue;
            }
            let children = g.children(s);
            if children.iter().any(|&c| replay.get(c).is_none()) {
                replay.flag(Some(s), Invariant::Malformed, "member with a child without values");
                continue;
            }
            replay.checks += 1;
            let local = tree_shaped || backed_up.contains(&s);
            self.check_coupling(replay, s, &e, local);
            if local {
                self.check_best_child(replay, s, &e);
            }
        }
    }

    fn check_coupling(&self, replay: &mut Replay, s: StateId, e: &Values, local: bool) {
        let g = self.game;
        let children = g.children(s);
        let all_resolved = children.iter().all(|&c| replay.resolved(c));
        let fail = |replay: &mut Replay, what: &str| {
            replay.flag(Some(s), Invariant::Coupling, what.to_string());
        };
        if local && all_resolved && !e.r {
            fail(replay, "all children resolved but r = 0");
        }
        match self.variant {
            Variant::TwoPlayer => {
                let decided = e.c[0].abs() == 1;
                if e.r && !decided && !all_resolved {
                    fail(replay, "r = 1 without |c| = 1 or resolved children");
                }
                if decided && !e.r {
                    fail(replay, "|c| = 1 but r = 0");
                }
            }
            Variant::V1 => {
                let j = g.player(s) - 1;
                let cp = e.cp.as_ref().expect("checked arity");
                let top = self.tmax.as_ref().expect("multiplayer").get(j);
                let winning = cp[j] == 1 && e.v[j] == top;
                if e.r && !winning && !all_resolved {
                    fail(replay, "r = 1 without a top win or resolved children");
                }
                if winning && !e.r {
                    fail(replay, "top win in c' but r = 0");
                }
                if e.r && e.c != *cp {
                    fail(replay, "resolved state with c != c'");
                }
            }
            Variant::V2 => {
                let j = g.player(s) - 1;
                let top = self.tmax.as_ref().expect("multiplayer").get(j);
                let witnessed = e.c[j] == 1
                    && e.v[j] == top
                    && children.iter().any(|&c| {
                        replay
                            .get(c)
                            .is_some_and(|x| x.r && x.c == e.c && x.v == e.v)
                    });
                if e.r && !witnessed && !all_resolved {
                    fail(replay, "r = 1 without a witnessed top win or resolved children");
                }
                if local && witnessed && !e.r {
                    fail(replay, "witnessed top win but r = 0");
                }
            }
        }
    }

    fn check_best_child(&self, replay: &mut Replay, s: StateId, e: &Values) {
        let g = self.game;
        let player = g.player(s);
        let mut order: Vec<(StateId, usize)> =
            g.children(s).iter().copied().enumerate().map(|(k, c)| (c, k)).collect();
        order.sort();
        let key = |c: StateId, k: usize| {
            let x = replay.get(c).expect("checked");
            let n = replay.visits[s.index()][k] as i64;
            match self.variant {
                Variant::TwoPlayer => {
                    let sign = if player == 1 { 1 } else { -1 };
                    (sign * x.c[0] as i64, 0, x.v[0] * sign, n)
                }
                Variant::V1 => (x.c[player - 1] as i64, 0, x.v[player - 1], n),
                Variant::V2 => {
                    let j = player - 1;
                    ((x.r as i64) * x.c[j] as i64, x.c[j] as i64, x.v[j], n)
                }
            }
        };
        let mut best = order[0].0;
        let mut best_key = key(order[0].0, order[0].1);
        for &(c, k) in &order[1..] {
            let candidate = key(c, k);
            if candidate > best_key {
                best = c;
                best_key = candidate;
            }
        }
        let b = replay.get(best).expect("checked");
        let copied = match self.variant {
            Variant::V1 => e.cp.as_ref() == Some(&b.c),
            _ => e.c == b.c,
        };
        if !copied || e.v != b.v {
            replay.flag(
                Some(s),
                Invariant::BestChild,
                format!("values differ from best child {best}"),
            );
        }
    }
}

/// Solves with a recorded trace and checks it.
pub fn verify_run(
    g: &GameGraph,
    root: StateId,
    algo: Algo,
    eval: &EvalFn,
    teval: &TerminalEval,
    budget: usize,
) -> Result<(SolveResult, VerifyReport), VerifyError> {
    let opts = SolveOptions::budget(budget).with_trace();
    let result = solve(g, root, algo, eval, teval, &NpConfig::new(algo.driver()), &opts)?;
    let checker = TraceChecker::new(g, algo.variant(), teval, root)?;
    let mut report = checker.check(result.trace.as_deref().unwrap_or_default());
    let bound = 2 * g.num_states();
    if !result.resolved && budget >= bound {
        report.violations.push(TraceViolation {
            iteration: result.iterations,
            state: Some(root),
            invariant: Invariant::Bound,
            detail: format!("root unresolved after {bound} iterations"),
        });
    }
    Ok((result, report))
}

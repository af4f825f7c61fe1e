//! Second multiplayer generalization.
//!
//! `c(s)` and `v(s)` are always copied from the best child, and selection
//! puts resolved wins first through the key `r(s') * c(s')_j`. Resolution
//! through a winning best child also requires a resolved child carrying the
//! same values. Unlike the first variant, an unresolved state may carry a
//! nonzero completion.

use crate::fixed::FixedPoint;
use crate::game::StateId;

use super::multiplayer::{MultiplayerSearch, NpConfig};
use super::{
    argbest, best_first_iteration, child_indices, descent_iteration, require_children, run_loop,
    Driver, IterationTrace, NodeEntry, NodeUpdate, Policy, Rules, SearchError, SearchTree,
    SolveOptions, SolveResult, Tie, UpdateKind,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryN2 {
    pub r: bool,
    pub c: Vec<i8>,
    pub v: Vec<FixedPoint>,
}

impl EntryN2 {
    fn resolved_completion(&self, j: usize) -> i8 {
        self.r as i8 * self.c[j]
    }
}

impl NodeEntry for EntryN2 {
    fn resolved(&self) -> bool {
        self.r
    }

    fn update(&self, id: StateId, kind: UpdateKind) -> NodeUpdate {
        NodeUpdate {
            id,
            kind,
            r: self.r as u8,
            c: self.c.clone(),
            cp: None,
            v: self.v.clone(),
        }
    }
}

pub type SearchTreeNP2 = SearchTree<EntryN2>;

struct V2<'s, 'a>(&'s MultiplayerSearch<'a>);

fn entry_of(tree: &SearchTreeNP2, s: StateId) -> &EntryN2 {
    tree.entry(s).expect("selection candidates carry values")
}

fn select(
    search: &MultiplayerSearch<'_>,
    tree: &SearchTreeNP2,
    s: StateId,
    candidates: &[usize],
    tie: Tie,
) -> usize {
    let j = search.mover(s);
    let children = search.game.children(s);
    argbest(search.game, s, candidates, |k| {
        let e = entry_of(tree, children[k]);
        (e.resolved_completion(j), e.c[j], e.v[j], tie.signed(tree.visits(s, k)))
    })
}

fn resolution(search: &MultiplayerSearch<'_>, tree: &SearchTreeNP2, s: StateId, c: &[i8], v: &[FixedPoint]) -> bool {
    let j = search.mover(s);
    let children = search.game.children(s);
    let witnessed = c[j] == 1
        && v[j] == search.tmax.get(j)
        && children.iter().any(|&ch| {
            let e = entry_of(tree, ch);
            e.r && e.c == c && e.v == v
        });
    witnessed || children.iter().all(|&ch| tree.is_resolved(ch))
}

/// Argmax over `candidates` of `(r(s') c(s')_j, c(s')_j, v(s')_j, +-n(s, s'))`.
pub fn best_action_n_v2(
    search: &MultiplayerSearch<'_>,
    tree: &SearchTreeNP2,
    s: StateId,
    candidates: &[StateId],
    tie: Tie,
) -> Result<StateId, SearchError> {
    let indices = child_indices(search.game, s, candidates)?;
    for &k in &indices {
        tree.known(s, search.game.children(s)[k])?;
    }
    Ok(search.game.children(s)[select(search, tree, s, &indices, tie)])
}

/// `1` if `c(s)_j = 1`, `v(s)_j` is the terminal maximum for `j` and some
/// resolved child has exactly `(c(s), v(s))`; otherwise the minimum
/// resolution of the children.
pub fn backup_resolution_n_v2(
    search: &MultiplayerSearch<'_>,
    tree: &SearchTreeNP2,
    s: StateId,
) -> Result<bool, SearchError> {
    let entry = tree.entry(s).ok_or(SearchError::NotExpanded(s))?;
    require_children(search.game, tree, s)?;
    Ok(resolution(search, tree, s, &entry.c, &entry.v))
}

impl Rules for V2<'_, '_> {
    type Entry = EntryN2;

    fn game(&self) -> &crate::game::GameGraph {
        self.0.game
    }

    fn terminal_entry(&self, s: StateId) -> EntryN2 {
        let (c, v) = self.0.terminal_values(s);
        EntryN2 { r: true, c, v }
    }

    fn frontier_entry(&self, s: StateId) -> EntryN2 {
        EntryN2 {
            r: false,
            c: self.0.zero(),
            v: self.0.eval.vector(s, self.0.num_players()),
        }
    }

    fn select_unresolved(&self, tree: &SearchTreeNP2, s: StateId, candidates: &[usize]) -> usize {
        select(self.0, tree, s, candidates, Tie::PreferUnexplored)
    }

    fn backup(&self, tree: &SearchTreeNP2, s: StateId) -> EntryN2 {
        let g = self.0.game;
        let all: Vec<usize> = (0..g.children(s).len()).collect();
        let best = entry_of(tree, g.children(s)[select(self.0, tree, s, &all, Tie::PreferExplored)]);
        let c = best.c.clone();
        let v = best.v.clone();
        let r = resolution(self.0, tree, s, &c, &v);
        EntryN2 { r, c, v }
    }
}

/// One unbounded Max^n iteration from `s`.
pub fn umaxn_iteration_v2(
    search: &MultiplayerSearch<'_>,
    tree: &mut SearchTreeNP2,
    s: StateId,
) -> IterationTrace {
    best_first_iteration(&V2(search), tree, s, 0)
}

/// One descent^n iteration from `s`.
pub fn descent_n_iteration_v2(
    search: &MultiplayerSearch<'_>,
    tree: &mut SearchTreeNP2,
    s: StateId,
) -> IterationTrace {
    descent_iteration(&V2(search), tree, s, 0)
}

pub fn iterate_v2(
    search: &MultiplayerSearch<'_>,
    driver: Driver,
    tree: &mut SearchTreeNP2,
    s: StateId,
    iteration: usize,
) -> IterationTrace {
    match driver {
        Driver::BestFirst => best_first_iteration(&V2(search), tree, s, iteration),
        Driver::Descent => descent_iteration(&V2(search), tree, s, iteration),
    }
}

/// Move at an expanded `root`: `best` maximizes `(r c_j, c_j, v_j, n)`,
/// `safest` maximizes `(r c_j, c_j, n, v_j)`.
pub fn decide_v2(
    search: &MultiplayerSearch<'_>,
    tree: &SearchTreeNP2,
    root: StateId,
    policy: Policy,
) -> Result<StateId, SearchError> {
    if !tree.is_expanded(root) {
        return Err(SearchError::NotExpanded(root));
    }
    let g = search.game;
    require_children(g, tree, root)?;
    let all: Vec<usize> = (0..g.children(root).len()).collect();
    let k = match policy {
        Policy::Best => select(search, tree, root, &all, Tie::PreferExplored),
        Policy::Safest => {
            let j = search.mover(root);
            argbest(g, root, &all, |k| {
                let e = entry_of(tree, g.children(root)[k]);
                (e.resolved_completion(j), e.c[j], tree.visits(root, k), e.v[j])
            })
        }
    };
    Ok(g.children(root)[k])
}

/// Descent^n move choice: the `(r c_j, c_j, v_j)` maximizer once the root is
/// resolved, the exploration policy otherwise.
pub fn exploration_action_v2(
    search: &MultiplayerSearch<'_>,
    tree: &SearchTreeNP2,
    root: StateId,
    config: &NpConfig,
) -> Result<StateId, SearchError> {
    if !tree.is_expanded(root) {
        return Err(SearchError::NotExpanded(root));
    }
    let g = search.game;
    require_children(g, tree, root)?;
    let j = search.mover(root);
    let children = g.children(root);
    let all: Vec<usize> = (0..children.len()).collect();
    let k = if tree.is_resolved(root) {
        argbest(g, root, &all, |k| {
            let e = entry_of(tree, children[k]);
            (e.resolved_completion(j), e.c[j], e.v[j])
        })
    } else {
        let greedy = select(search, tree, root, &all, Tie::PreferExplored);
        let values: Vec<FixedPoint> = children.iter().map(|&c| entry_of(tree, c).v[j]).collect();
        config.exploration.pick(&values, greedy)
    };
    Ok(children[k])
}

/// Iterates from `root` on a fresh tree until resolution or budget.
pub fn solve_np_v2(
    search: &MultiplayerSearch<'_>,
    root: StateId,
    config: &NpConfig,
    opts: &SolveOptions,
) -> Result<(SolveResult, SearchTreeNP2), SearchError> {
    search.check_root(root)?;
    if opts.budget == 0 {
        return Err(SearchError::ZeroBudget);
    }
    let mut tree = SearchTreeNP2::new(search.game.num_states());
    let (iterations, trace) = run_loop(&mut tree, root, opts, |tree, i| {
        iterate_v2(search, config.driver, tree, root, i)
    });
    let chosen_action = match (config.driver, config.policy) {
        (Driver::Descent, Policy::Best) => exploration_action_v2(search, &tree, root, config).ok(),
        (_, policy) => decide_v2(search, &tree, root, policy).ok(),
    };
    let entry = tree.entry(root);
    let result = SolveResult {
        resolved: tree.is_resolved(root),
        completion: entry.map_or_else(|| search.zero(), |e| e.c.clone()),
        value: entry.map_or_else(Vec::new, |e| e.v.clone()),
        iterations,
        chosen_action,
        nodes_expanded: tree.nodes_expanded(),
        members: tree.member_count(),
        trace,
    };
    Ok((result, tree))
}

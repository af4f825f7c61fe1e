//! Unbounded best-first minimax and descent with completion, for two-player
//! zero-sum games.
//!
//! Player 1 maximizes and player 2 minimizes `(c, v)` lexicographically. A
//! state is resolved when its completion is a win or a loss (`|c| = 1`) or
//! when every child is resolved.

use crate::eval::EvalFn;
use crate::fixed::FixedPoint;
use crate::game::{GameGraph, StateId};
use crate::terminal::TerminalEval;

use super::{
    argbest, best_first_iteration, check_root, check_valid, child_indices, descent_iteration,
    require_children, run_loop, Driver, IterationTrace, NodeEntry, NodeUpdate, Rules,
    SearchError, SearchTree, SolveOptions, SolveResult, Tie, UpdateKind,
};

/// `(r, c, v)` of one state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry2P {
    pub r: bool,
    pub c: i8,
    pub v: FixedPoint,
}

impl NodeEntry for Entry2P {
    fn resolved(&self) -> bool {
        self.r
    }

    fn update(&self, id: StateId, kind: UpdateKind) -> NodeUpdate {
        NodeUpdate {
            id,
            kind,
            r: self.r as u8,
            c: vec![self.c],
            cp: None,
            v: vec![self.v],
        }
    }
}

pub type SearchTree2P = SearchTree<Entry2P>;

/// Game, adaptive evaluation `f_theta` and terminal evaluation `f_t` for a
/// two-player search. `f_t` is read through its first component.
#[derive(Debug, Clone, Copy)]
pub struct TwoPlayerSearch<'a> {
    pub game: &'a GameGraph,
    pub eval: &'a EvalFn,
    pub teval: &'a TerminalEval,
}

fn orientation(g: &GameGraph, s: StateId) -> i64 {
    if g.player(s) == 1 {
        1
    } else {
        -1
    }
}

fn select(g: &GameGraph, tree: &SearchTree2P, s: StateId, candidates: &[usize], tie: Tie) -> usize {
    let sign = orientation(g, s);
    let children = g.children(s);
    argbest(g, s, candidates, |k| {
        let e = tree
            .entry(children[k])
            .expect("candidates carry values");
        (
            sign * e.c as i64,
            e.v * sign,
            tie.signed(tree.visits(s, k)),
        )
    })
}

/// Best child of `s` among `candidates` by `(c, v, n)`: argmax for player 1,
/// argmin for player 2, with `n` oriented by `tie` (player 2 mirrored, so
/// `PreferExplored` always favours the most selected child).
pub fn completed_best_action(
    g: &GameGraph,
    tree: &SearchTree2P,
    s: StateId,
    candidates: &[StateId],
    tie: Tie,
) -> Result<StateId, SearchError> {
    let indices = child_indices(g, s, candidates)?;
    for &k in &indices {
        tree.known(s, g.children(s)[k])?;
    }
    Ok(g.children(s)[select(g, tree, s, &indices, tie)])
}

/// `1` if `|c(s)| = 1`, otherwise the minimum resolution of the children.
pub fn backup_resolution(
    g: &GameGraph,
    tree: &SearchTree2P,
    s: StateId,
) -> Result<bool, SearchError> {
    let entry = tree.entry(s).ok_or(SearchError::NotExpanded(s))?;
    require_children(g, tree, s)?;
    Ok(resolution(g, tree, s, entry.c))
}

fn resolution(g: &GameGraph, tree: &SearchTree2P, s: StateId, c: i8) -> bool {
    c.abs() == 1 || g.children(s).iter().all(|&k| tree.is_resolved(k))
}

impl Rules for TwoPlayerSearch<'_> {
    type Entry = Entry2P;

    fn game(&self) -> &GameGraph {
        self.game
    }

    fn terminal_entry(&self, s: StateId) -> Entry2P {
        Entry2P {
            r: true,
            c: self.game.gain(s, 0),
            v: self.teval.component(s, 0),
        }
    }

    fn frontier_entry(&self, s: StateId) -> Entry2P {
        Entry2P {
            r: false,
            c: 0,
            v: self.eval.value(s, 0),
        }
    }

    fn select_unresolved(&self, tree: &SearchTree2P, s: StateId, candidates: &[usize]) -> usize {
        select(self.game, tree, s, candidates, Tie::PreferUnexplored)
    }

    fn backup(&self, tree: &SearchTree2P, s: StateId) -> Entry2P {
        let g = self.game;
        let all: Vec<usize> = (0..g.children(s).len()).collect();
        let best = g.children(s)[select(g, tree, s, &all, Tie::PreferExplored)];
        let best = *tree.entry(best).expect("expanded children carry values");
        Entry2P {
            r: resolution(g, tree, s, best.c),
            c: best.c,
            v: best.v,
        }
    }
}

impl TwoPlayerSearch<'_> {
    /// One iteration of unbounded best-first minimax from `s`.
    pub fn ubfm_iteration(&self, tree: &mut SearchTree2P, s: StateId) -> IterationTrace {
        best_first_iteration(self, tree, s, 0)
    }

    /// One iteration of descent from `s`.
    pub fn descent_iteration(&self, tree: &mut SearchTree2P, s: StateId) -> IterationTrace {
        descent_iteration(self, tree, s, 0)
    }

    pub fn iterate(
        &self,
        driver: Driver,
        tree: &mut SearchTree2P,
        s: StateId,
        iteration: usize,
    ) -> IterationTrace {
        match driver {
            Driver::BestFirst => best_first_iteration(self, tree, s, iteration),
            Driver::Descent => descent_iteration(self, tree, s, iteration),
        }
    }

    /// Decision at an expanded state: [`completed_best_action`] over all
    /// children, most explored first among equal `(c, v)`.
    pub fn decide(&self, tree: &SearchTree2P, s: StateId) -> Result<StateId, SearchError> {
        if !tree.is_expanded(s) {
            return Err(SearchError::NotExpanded(s));
        }
        completed_best_action(self.game, tree, s, self.game.children(s), Tie::PreferExplored)
    }

    fn validate(&self, root: StateId) -> Result<(), SearchError> {
        check_valid(self.game)?;
        if self.game.num_players() != 2 {
            return Err(SearchError::NotTwoPlayer(self.game.num_players()));
        }
        check_root(self.game, root)?;
        self.teval.ensure_covers(self.game)?;
        Ok(())
    }

    /// Runs `driver` from `root` until it is resolved or the budget is spent,
    /// on a fresh tree.
    pub fn solve(
        &self,
        root: StateId,
        driver: Driver,
        opts: &SolveOptions,
    ) -> Result<(SolveResult, SearchTree2P), SearchError> {
        self.validate(root)?;
        if opts.budget == 0 {
            return Err(SearchError::ZeroBudget);
        }
        let mut tree = SearchTree2P::new(self.game.num_states());
        let (iterations, trace) = run_loop(&mut tree, root, opts, |tree, i| {
            self.iterate(driver, tree, root, i)
        });
        let entry = tree.entry(root).copied();
        let result = SolveResult {
            resolved: tree.is_resolved(root),
            completion: vec![entry.map_or(0, |e| e.c)],
            value: vec![entry.map_or(FixedPoint::ZERO, |e| e.v)],
            iterations,
            chosen_action: self.decide(&tree, root).ok(),
            nodes_expanded: tree.nodes_expanded(),
            members: tree.member_count(),
            trace,
        };
        Ok((result, tree))
    }
}

/// Solves `root` with the chosen driver and iteration budget.
pub fn solve2p(
    g: &GameGraph,
    root: StateId,
    driver: Driver,
    eval: &EvalFn,
    teval: &TerminalEval,
    opts: &SolveOptions,
) -> Result<SolveResult, SearchError> {
    TwoPlayerSearch {
        game: g,
        eval,
        teval,
    }
    .solve(root, driver, opts)
    .map(|(result, _)| result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::fixtures::{g1, line};
    use crate::game::StateRecord;
    use crate::generate::nim_game;

    fn fx(raw: i64) -> FixedPoint {
        FixedPoint::from_raw(raw)
    }

    fn entry(c: i8, v: i64) -> Entry2P {
        Entry2P {
            r: c != 0,
            c,
            v: fx(v),
        }
    }

    /// Root of the given player over two non-terminal children `a = s1`,
    /// `b = s2`, with hand-set values and visit counts.
    fn pair(player: u32, a: (i8, i64, u32), b: (i8, i64, u32)) -> (GameGraph, SearchTree2P) {
        let g = GameGraph::new(
            2,
            vec![
                StateRecord::decision(player, [1, 2]),
                StateRecord::decision(1, [3]),
                StateRecord::decision(1, [3]),
                StateRecord::terminal([0, 0]),
            ],
        );
        let mut tree = SearchTree2P::new(4);
        tree.set_entry(StateId(0), entry(0, 0), true);
        tree.set_entry(StateId(1), entry(a.0, a.1), false);
        tree.set_entry(StateId(2), entry(b.0, b.1), false);
        tree.set_visits(StateId(0), vec![a.2, b.2]);
        (g, tree)
    }

    fn best(g: &GameGraph, tree: &SearchTree2P, tie: Tie) -> StateId {
        completed_best_action(g, tree, StateId(0), g.children(StateId(0)), tie).unwrap()
    }

    #[test]
    fn completion_dominates_for_player_one() {
        let (g, tree) = pair(1, (0, 500_000, 2), (1, -300_000, 0));
        assert_eq!(best(&g, &tree, Tie::PreferExplored), StateId(2));
    }

    #[test]
    fn player_two_minimizes_value() {
        let (g, tree) = pair(2, (0, 500_000, 2), (0, -300_000, 0));
        assert_eq!(best(&g, &tree, Tie::PreferExplored), StateId(2));
    }

    #[test]
    fn exploration_prefers_fewer_visits() {
        let (g, tree) = pair(1, (0, 400_000, 3), (0, 400_000, 1));
        assert_eq!(best(&g, &tree, Tie::PreferUnexplored), StateId(2));
        assert_eq!(best(&g, &tree, Tie::PreferExplored), StateId(1));
        let (g, tree) = pair(2, (0, 400_000, 3), (0, 400_000, 1));
        assert_eq!(best(&g, &tree, Tie::PreferUnexplored), StateId(2));
        assert_eq!(best(&g, &tree, Tie::PreferExplored), StateId(1));
    }

    #[test]
    fn residual_tie_goes_to_smallest_id() {
        let (g, tree) = pair(1, (0, 100, 1), (0, 100, 1));
        assert_eq!(best(&g, &tree, Tie::PreferExplored), StateId(1));
        assert_eq!(best(&g, &tree, Tie::PreferUnexplored), StateId(1));
    }

    #[test]
    fn empty_candidates_is_an_error() {
        let (g, tree) = pair(1, (0, 0, 0), (0, 0, 0));
        assert_eq!(
            completed_best_action(&g, &tree, StateId(0), &[], Tie::PreferExplored),
            Err(SearchError::EmptyCandidates(StateId(0)))
        );
    }

    #[test]
    fn resolution_backup_branches() {
        let (g, mut tree) = pair(1, (0, 0, 0), (0, 0, 0));
        tree.set_entry(StateId(0), entry(1, 0), true);
        assert_eq!(backup_resolution(&g, &tree, StateId(0)), Ok(true));

        tree.set_entry(StateId(0), entry(0, 0), true);
        tree.set_entry(StateId(1), Entry2P { r: true, c: 0, v: fx(0) }, false);
        tree.set_entry(StateId(2), Entry2P { r: true, c: 0, v: fx(0) }, false);
        assert_eq!(backup_resolution(&g, &tree, StateId(0)), Ok(true));

        tree.set_entry(StateId(2), entry(0, 0), false);
        assert_eq!(backup_resolution(&g, &tree, StateId(0)), Ok(false));
    }

    #[test]
    fn backup_needs_every_child() {
        let g = g1();
        let mut tree = SearchTree2P::new(3);
        tree.set_entry(StateId(0), entry(0, 0), true);
        tree.set_entry(StateId(1), entry(-1, -1_000_000), true);
        assert_eq!(
            backup_resolution(&g, &tree, StateId(0)),
            Err(SearchError::MissingChild {
                parent: StateId(0),
                child: StateId(2)
            })
        );
    }

    fn gains_search(g: &GameGraph) -> (EvalFn, TerminalEval) {
        (EvalFn::Zero, TerminalEval::from_gains(g))
    }

    #[test]
    fn ubfm_resolves_g1_in_one_iteration() {
        let g = g1();
        let (eval, teval) = gains_search(&g);
        let search = TwoPlayerSearch {
            game: &g,
            eval: &eval,
            teval: &teval,
        };
        let mut tree = SearchTree2P::new(3);
        let trace = search.ubfm_iteration(&mut tree, StateId(0));
        assert!((0..3).all(|i| tree.is_member(StateId(i))));
        assert_eq!(
            tree.entry(StateId(0)),
            Some(&Entry2P {
                r: true,
                c: 1,
                v: FixedPoint::ONE
            })
        );
        assert_eq!(trace.flips, vec![StateId(0)]);

        let before = tree.clone();
        let again = search.ubfm_iteration(&mut tree, StateId(0));
        assert!(again.flips.is_empty() && again.added.is_empty());
        for s in g.ids() {
            assert_eq!(tree.entry(s), before.entry(s));
        }
    }

    #[test]
    fn terminal_root() {
        let g = GameGraph::new(2, vec![StateRecord::terminal([-1, 1])]);
        let (eval, teval) = gains_search(&g);
        let search = TwoPlayerSearch {
            game: &g,
            eval: &eval,
            teval: &teval,
        };
        for driver in [Driver::BestFirst, Driver::Descent] {
            let mut tree = SearchTree2P::new(1);
            search.iterate(driver, &mut tree, StateId(0), 1);
            assert_eq!(tree.member_count(), 1);
            assert_eq!(
                tree.entry(StateId(0)),
                Some(&Entry2P {
                    r: true,
                    c: -1,
                    v: -FixedPoint::ONE
                })
            );
        }
    }

    #[test]
    fn descent_resolves_line_in_one_iteration() {
        let g = line();
        let (eval, teval) = gains_search(&g);
        let search = TwoPlayerSearch {
            game: &g,
            eval: &eval,
            teval: &teval,
        };
        let mut tree = SearchTree2P::new(3);
        let trace = search.descent_iteration(&mut tree, StateId(0));
        assert_eq!(trace.path, vec![StateId(0), StateId(1)]);
        assert!(tree.is_resolved(StateId(0)));
        assert_eq!(tree.entry(StateId(0)).unwrap().c, 1);

        let mut tree = SearchTree2P::new(3);
        search.ubfm_iteration(&mut tree, StateId(0));
        assert!(!tree.is_resolved(StateId(0)));
        assert!(!tree.is_member(StateId(1)));
        search.ubfm_iteration(&mut tree, StateId(0));
        assert!(tree.is_resolved(StateId(0)));
    }

    #[test]
    fn solve_g1_and_nim() {
        let g = g1();
        let (eval, teval) = gains_search(&g);
        let result = solve2p(
            &g,
            StateId(0),
            Driver::BestFirst,
            &eval,
            &teval,
            &SolveOptions::budget(10),
        )
        .unwrap();
        assert!(result.resolved);
        assert_eq!(result.iterations, 1);
        assert_eq!(result.completion, vec![1]);
        assert_eq!(result.chosen_action, Some(StateId(2)));

        let nim = nim_game(3, &[1, 2]);
        let (eval, teval) = (EvalFn::Hashed(9), TerminalEval::from_gains(&nim));
        for driver in [Driver::BestFirst, Driver::Descent] {
            let r = solve2p(
                &nim,
                StateId(0),
                driver,
                &eval,
                &teval,
                &SolveOptions::budget(2 * nim.num_states()),
            )
            .unwrap();
            assert!(r.resolved);
            assert_eq!(r.completion, vec![-1]);
        }
    }

    #[test]
    fn solve_rejects_bad_input() {
        let g = g1();
        let (eval, teval) = gains_search(&g);
        let search = TwoPlayerSearch {
            game: &g,
            eval: &eval,
            teval: &teval,
        };
        assert_eq!(
            search
                .solve(StateId(0), Driver::Descent, &SolveOptions::budget(0))
                .unwrap_err(),
            SearchError::ZeroBudget
        );
        assert_eq!(
            search
                .solve(StateId(9), Driver::Descent, &SolveOptions::budget(1))
                .unwrap_err(),
            SearchError::BadRoot(StateId(9))
        );
        let three = GameGraph::new(3, vec![StateRecord::terminal([1, -1, -1])]);
        let teval3 = TerminalEval::from_gains(&three);
        assert_eq!(
            solve2p(
                &three,
                StateId(0),
                Driver::Descent,
                &eval,
                &teval3,
                &SolveOptions::budget(1)
            ),
            Err(SearchError::NotTwoPlayer(3))
        );
    }
}

//! Reference values for the integration tests, computed by explicit-stack
//! depth-first traversal with memoization.

#![allow(dead_code)]

use gametree::game::{GameGraph, StateId};
use gametree::{FixedPoint, TerminalEval};

/// Post-order over the states reachable from `root`.
fn post_order(g: &GameGraph, root: StateId) -> Vec<StateId> {
    let mut done = vec![false; g.num_states()];
    let mut order = Vec::new();
    let mut stack = vec![(root, 0usize)];
    while let Some((s, k)) = stack.pop() {
        if done[s.index()] {
            continue;
        }
        let children = g.children(s);
        match children.get(k) {
            Some(&c) => {
                stack.push((s, k + 1));
                if !done[c.index()] {
                    stack.push((c, 0));
                }
            }
            None => {
                done[s.index()] = true;
                order.push(s);
            }
        }
    }
    order
}

/// Minimax from player 1's side for every state reachable from `root`.
pub fn minimax_ref(g: &GameGraph, root: StateId) -> Vec<Option<i8>> {
    let mut m: Vec<Option<i8>> = vec![None; g.num_states()];
    for s in post_order(g, root) {
        let value = if g.children(s).is_empty() {
            g.gain(s, 0)
        } else {
            let mut best = if g.player(s) == 1 { i8::MIN } else { i8::MAX };
            for c in g.children(s) {
                let x = m[c.index()].unwrap();
                best = if g.player(s) == 1 { best.max(x) } else { best.min(x) };
            }
            best
        };
        m[s.index()] = Some(value);
    }
    m
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefPair {
    pub gain: Vec<i8>,
    pub eval: Vec<FixedPoint>,
    /// Two different pairs tie for the maximum at this state.
    pub tied: bool,
}

/// Max^n pair for every state reachable from `root`; ties keep the first
/// child in id order.
pub fn maxn_ref(g: &GameGraph, teval: &TerminalEval, root: StateId) -> Vec<Option<RefPair>> {
    let mut m: Vec<Option<RefPair>> = vec![None; g.num_states()];
    for s in post_order(g, root) {
        let pair = if g.children(s).is_empty() {
            RefPair {
                gain: g.gains(s),
                eval: teval.vector(s).to_vec(),
                tied: false,
            }
        } else {
            let j = g.player(s) - 1;
            let mut ids = g.children(s).to_vec();
            ids.sort_unstable();
            let mut best: Option<RefPair> = None;
            let mut tied = false;
            for c in ids {
                let p = m[c.index()].clone().unwrap();
                match &best {
                    None => best = Some(p),
                    Some(b) => {
                        let (kp, kb) = ((p.gain[j], p.eval[j]), (b.gain[j], b.eval[j]));
                        if kp > kb {
                            best = Some(p);
                            tied = false;
                        } else if kp == kb && (p.gain != b.gain || p.eval != b.eval) {
                            tied = true;
                        }
                    }
                }
            }
            RefPair {
                tied,
                ..best.unwrap()
            }
        };
        m[s.index()] = Some(pair);
    }
    m
}

/// An epsilon `k * 10^-6` with `k >= 1` derived from `seed` that keeps the
/// rank perturbation below one unit.
pub fn fitting_epsilon(g: &GameGraph, seed: u64) -> FixedPoint {
    let terminals = g.terminals().count() as i64;
    let k_max = ((1_000_000 - 1) / terminals).clamp(1, 1000);
    let k = 1 + (gametree::eval::mix64(seed) % k_max as u64) as i64;
    FixedPoint::from_raw(k)
}

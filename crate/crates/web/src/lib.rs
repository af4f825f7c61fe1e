//! Browser bindings. Every export takes and returns JSON text so the page
//! needs no generated types; the `*_json` functions are the same operations
//! without the wasm wrapper and are what the native tests call.

use std::collections::BTreeMap;

use gametree::format::{parse_game, serialize_game};
use gametree::generate::{generate_random_game, GenParams};
use gametree::oracle::{maxn, minimax};
use gametree::search::multiplayer::NpConfig;
use gametree::search::IterationTrace;
use gametree::{
    make_tie_breaking_eval, solve, validate_game, Algo, EvalFn, FixedPoint, GameGraph,
    SolveOptions, SolveResult, StateId, TerminalEval, Variant,
};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenRequest {
    pub players: usize,
    pub states: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_children")]
    pub max_children: usize,
    #[serde(default)]
    pub dag_density: f64,
    #[serde(default)]
    pub draw_rate: f64,
}

fn default_children() -> usize {
    3
}

#[derive(Debug, Serialize)]
pub struct Generated {
    /// Game file text, ready to hand back to `solve` or `oracle`.
    pub game: String,
    pub players: usize,
    pub nodes: Vec<LayoutNode>,
    pub edges: Vec<(StateId, StateId)>,
}

#[derive(Debug, Serialize)]
pub struct LayoutNode {
    pub id: StateId,
    /// Longest distance from s0.
    pub depth: usize,
    /// Position inside its depth row.
    pub slot: usize,
    pub player: Option<usize>,
    pub gain: Option<Vec<i8>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveRequest {
    pub game: String,
    pub algo: String,
    #[serde(default)]
    pub seed: u64,
    pub budget: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeView {
    pub id: StateId,
    pub r: u8,
    pub c: Vec<i8>,
    pub v: Vec<FixedPoint>,
}

/// The partial tree after one iteration.
#[derive(Debug, Serialize)]
pub struct Frame {
    pub iter: usize,
    pub path: Vec<StateId>,
    pub added: Vec<StateId>,
    pub flips: Vec<StateId>,
    pub nodes: Vec<NodeView>,
}

#[derive(Debug, Serialize)]
pub struct Solved {
    pub result: SolveResult,
    pub frames: Vec<Frame>,
}

#[derive(Debug, Serialize)]
pub struct OracleView {
    pub players: usize,
    pub unique: bool,
    pub ambiguous: Vec<StateId>,
    pub states: Vec<OracleState>,
}

#[derive(Debug, Serialize)]
pub struct OracleState {
    pub id: StateId,
    pub gain: Vec<i8>,
    pub eval: Vec<FixedPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimax: Option<i8>,
}

fn load(text: &str) -> Result<GameGraph, String> {
    let g = parse_game(text).map_err(|e| e.to_string())?;
    let report = validate_game(&g);
    match report.violations.first() {
        None => Ok(g),
        Some(v) => Err(format!("invalid game: {v}")),
    }
}

/// Embedded terminal values when the file has them, otherwise the gains for
/// two-player search and a rank perturbation of the gains for the rest.
fn default_teval(g: &GameGraph, multiplayer: bool) -> Result<TerminalEval, String> {
    match TerminalEval::from_game(g) {
        Some(t) => Ok(t),
        None if multiplayer => make_tie_breaking_eval(g, FixedPoint::EPSILON).map_err(|e| e.to_string()),
        None => Ok(TerminalEval::from_gains(g)),
    }
}

fn layout(g: &GameGraph) -> Vec<LayoutNode> {
    let order = validate_game(g).topo_order.expect("validated game");
    let mut depth = vec![0usize; g.num_states()];
    for &s in &order {
        for &c in g.children(s) {
            depth[c.index()] = depth[c.index()].max(depth[s.index()] + 1);
        }
    }
    let mut rows: BTreeMap<usize, usize> = BTreeMap::new();
    g.ids()
        .map(|s| {
            let row = rows.entry(depth[s.index()]).or_default();
            *row += 1;
            LayoutNode {
                id: s,
                depth: depth[s.index()],
                slot: *row - 1,
                player: (!g.is_terminal(s)).then(|| g.player(s)),
                gain: g.is_terminal(s).then(|| g.gains(s)),
            }
        })
        .collect()
}

pub fn generate_json(request: &str) -> Result<String, String> {
    let req: GenRequest = serde_json::from_str(request).map_err(|e| e.to_string())?;
    let params = GenParams {
        num_players: req.players,
        num_states: req.states,
        max_children: req.max_children,
        dag_density: req.dag_density,
        draw_rate: req.draw_rate,
    };
    let g = generate_random_game(req.seed, &params).map_err(|e| e.to_string())?;
    let edges = g
        .ids()
        .flat_map(|s| g.children(s).iter().map(move |&c| (s, c)))
        .collect();
    let out = Generated {
        game: serialize_game(&g),
        players: g.num_players(),
        nodes: layout(&g),
        edges,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

fn replay(traces: &[IterationTrace]) -> Vec<Frame> {
    let mut current: BTreeMap<StateId, NodeView> = BTreeMap::new();
    traces
        .iter()
        .map(|t| {
            for u in &t.updates {
                let view = NodeView {
                    id: u.id,
                    r: u.r,
                    c: u.c.clone(),
                    v: u.v.clone(),
                };
                current.insert(u.id, view);
            }
            Frame {
                iter: t.iteration,
                path: t.path.clone(),
                added: t.added.clone(),
                flips: t.flips.clone(),
                nodes: current.values().cloned().collect(),
            }
        })
        .collect()
}

pub fn solve_json(request: &str) -> Result<String, String> {
    let req: SolveRequest = serde_json::from_str(request).map_err(|e| e.to_string())?;
    let g = load(&req.game)?;
    let algo: Algo = req.algo.parse()?;
    let multiplayer = algo.variant() != Variant::TwoPlayer;
    if !multiplayer && g.num_players() != 2 {
        return Err(format!("{algo} needs a two-player game"));
    }
    let budget = req.budget.unwrap_or(2 * g.num_states());
    if budget == 0 {
        return Err("budget must be positive".into());
    }
    let teval = default_teval(&g, multiplayer)?;
    let opts = SolveOptions::budget(budget).with_trace();
    let mut result = solve(
        &g,
        StateId(0),
        algo,
        &EvalFn::Hashed(req.seed),
        &teval,
        &NpConfig::new(algo.driver()),
        &opts,
    )
    .map_err(|e| e.to_string())?;
    let frames = replay(result.trace.as_deref().unwrap_or_default());
    result.trace = None;
    serde_json::to_string(&Solved { result, frames }).map_err(|e| e.to_string())
}

/// Max^n values of every state under the same terminal evaluation `solve`
/// uses for the multiplayer algorithms; two-player games also get minimax.
pub fn oracle_json(game: &str) -> Result<String, String> {
    let g = load(game)?;
    let teval = default_teval(&g, true)?;
    let np = maxn(&g, &teval).map_err(|e| e.to_string())?;
    let m = (g.num_players() == 2)
        .then(|| minimax(&g))
        .transpose()
        .map_err(|e| e.to_string())?;
    let states = g
        .ids()
        .map(|s| OracleState {
            id: s,
            gain: np.get(s).gain.clone(),
            eval: np.get(s).eval.clone(),
            minimax: m.as_ref().map(|m| m.get(s)),
        })
        .collect();
    let out = OracleView {
        players: g.num_players(),
        unique: np.unique(),
        ambiguous: np.ambiguous.clone(),
        states,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn generate(request: &str) -> Result<String, JsError> {
    generate_json(request).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = solve)]
pub fn solve_game(request: &str) -> Result<String, JsError> {
    solve_json(request).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn oracle(game: &str) -> Result<String, JsError> {
    oracle_json(game).map_err(|e| JsError::new(&e))
}

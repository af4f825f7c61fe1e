//! Fixed-seed benchmark suite with CSV output.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::eval::EvalFn;
use crate::fixed::FixedPoint;
use crate::game::{GameGraph, StateId};
use crate::generate::{generate_random_game, line_game, nim_game, GenParams};
use crate::run::{solve, Algo, Variant};
use crate::search::multiplayer::NpConfig;
use crate::search::{SearchError, SolveOptions};
use crate::terminal::{make_tie_breaking_eval, TerminalEval};

#[derive(Debug, Clone)]
pub struct BenchCase {
    pub name: String,
    pub game: GameGraph,
    pub algos: Vec<Algo>,
}

impl BenchCase {
    fn new(name: String, game: GameGraph) -> Self {
        let algos = if game.num_players() == 2 {
            vec![Algo::Ubfm, Algo::Descent]
        } else {
            Algo::MULTIPLAYER.to_vec()
        };
        BenchCase { name, game, algos }
    }
}

/// One CSV row. Every column but `wall_ms` is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub game: String,
    pub algo: Algo,
    pub states: usize,
    pub iterations: usize,
    pub resolved: bool,
    pub nodes: usize,
    pub wall_ms: f64,
}

/// Line games, subtraction games and random games of each arity.
pub fn default_suite() -> Vec<BenchCase> {
    let mut cases = Vec::new();
    for depth in [4, 16, 64] {
        cases.push(BenchCase::new(format!("line-d{depth}"), line_game(depth, 1)));
    }
    for heap in [10, 40] {
        cases.push(BenchCase::new(format!("nim-h{heap}"), nim_game(heap, &[1, 2, 3])));
    }
    for players in [2, 3, 4] {
        for (seed, states) in [(1u64, 50usize), (2, 200), (3, 1000)] {
            let params = GenParams::new(players, states);
            let game = generate_random_game(seed, &params).expect("suite parameters are valid");
            cases.push(BenchCase::new(format!("random{players}p-n{states}-s{seed}"), game));
        }
    }
    cases
}

/// Runs every `(case, algo)` pair with budget `2|S|` in parallel; rows come
/// back in suite order.
pub fn run_bench(cases: &[BenchCase], deadline: Option<Instant>) -> Result<Vec<BenchRow>, SearchError> {
    let jobs: Vec<(&BenchCase, Algo)> = cases
        .iter()
        .flat_map(|c| c.algos.iter().map(move |&a| (c, a)))
        .collect();
    jobs.par_iter()
        .map(|&(case, algo)| {
            let g = &case.game;
            let teval = match algo.variant() {
                Variant::TwoPlayer => TerminalEval::from_gains(g),
                _ => make_tie_breaking_eval(g, FixedPoint::EPSILON)?,
            };
            let opts = SolveOptions {
                deadline,
                ..SolveOptions::budget(2 * g.num_states())
            };
            let start = Instant::now();
            let result = solve(
                g,
                StateId(0),
                algo,
                &EvalFn::Hashed(0),
                &teval,
                &NpConfig::new(algo.driver()),
                &opts,
            )?;
            Ok(BenchRow {
                game: case.name.clone(),
                algo,
                states: g.num_states(),
                iterations: result.iterations,
                resolved: result.resolved,
                nodes: result.nodes_expanded,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect()
}

pub fn write_csv<W: Write>(out: W, rows: &[BenchRow]) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

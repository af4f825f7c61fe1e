//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use common::{fitting_epsilon, maxn_ref, minimax_ref};
use gametree::eval::mix64;
use gametree::generate::{generate_random_game, GenParams};
use gametree::oracle::{maxn, minimax};
use gametree::search::multiplayer::{MultiplayerSearch, NpConfig};
use gametree::search::multiplayer_v1::{umaxn_iteration_v1, SearchTreeNP1};
use gametree::search::multiplayer_v2::{umaxn_iteration_v2, SearchTreeNP2};
use gametree::search::{IterationTrace, SolveOptions};
use gametree::verify::{verify_run, Invariant, VerifyReport};
use gametree::{
    check_tie_breaking, make_tie_breaking_eval, solve, Algo, EvalFn, FixedPoint, GameGraph,
    StateId, StateRecord, TerminalEval,
};

/// Every comparison against an oracle is exact: integer completions and
/// fixed-point evaluations must match with zero difference.
const TOLERANCE: i64 = 0;
const TWO_PLAYER_GAMES: u64 = 1000;
const TWO_PLAYER_STATES: (usize, usize) = (20, 200);
const TWO_PLAYER_TIME: Duration = Duration::from_secs(60);
const MULTI_GAMES: u64 = 500;
const MULTI_STATES: (usize, usize) = (20, 150);
const MULTI_TIME: Duration = Duration::from_secs(120);
const NECESSITY_GAMES: usize = 50;
const LIFTED_GAMES: u64 = 200;
const DAG_DENSITY: f64 = 0.3;

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn size_for(seed: u64, (lo, hi): (usize, usize)) -> usize {
    lo + (mix64(seed ^ 0x5151) % (hi - lo + 1) as u64) as usize
}

fn game(seed: u64, players: usize, size: usize, draw_rate: f64) -> GameGraph {
    let params = GenParams {
        dag_density: DAG_DENSITY,
        draw_rate,
        ..GenParams::new(players, size)
    };
    generate_random_game(seed, &params).expect("valid generator parameters")
}

fn fixed_diff(a: &[FixedPoint], b: &[FixedPoint]) -> i64 {
    if a.len() != b.len() {
        return i64::MAX;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.raw() - y.raw()).abs())
        .max()
        .unwrap_or(0)
}

/// FROZEN straight from the updates: after a state's first resolved write,
/// every later write to it repeats the same values.
fn frozen_breaks(traces: &[IterationTrace]) -> usize {
    let mut frozen = std::collections::HashMap::new();
    let mut breaks = 0;
    for t in traces {
        for u in &t.updates {
            match frozen.get(&u.id) {
                Some(first) if first != u => breaks += 1,
                Some(_) => {}
                None if u.r == 1 => {
                    frozen.insert(u.id, u.clone());
                }
                None => {}
            }
        }
    }
    breaks
}

/// PROGRESS straight from the trace: while the root is unresolved, each
/// iteration adds a state or flips one.
fn stalls(traces: &[IterationTrace], root: StateId) -> usize {
    let mut open = true;
    let mut stalls = 0;
    for t in traces {
        if open && t.added.is_empty() && t.flips.is_empty() {
            stalls += 1;
        }
        open &= !t.flips.contains(&root);
    }
    stalls
}

struct TwoPlayerRun {
    ok: bool,
    frozen: usize,
    coupling: usize,
    progress: usize,
}

fn criteria_1_to_3() -> Vec<Outcome> {
    let start = Instant::now();
    let runs: Vec<TwoPlayerRun> = (0..TWO_PLAYER_GAMES)
        .into_par_iter()
        .flat_map_iter(|seed| {
            let draw_rate = if seed % 2 == 0 { 0.0 } else { 0.3 };
            let g = game(seed, 2, size_for(seed, TWO_PLAYER_STATES), draw_rate);
            let reference = minimax_ref(&g, StateId(0))[0].expect("root reachable");
            let teval = TerminalEval::from_gains(&g);
            let eval = EvalFn::Hashed(seed);
            [Algo::Ubfm, Algo::Descent].map(|algo| {
                let budget = 2 * g.num_states();
                let (result, report) = verify_run(&g, StateId(0), algo, &eval, &teval, budget).unwrap();
                let traces = result.trace.as_deref().unwrap();
                let diff = (result.completion[0] as i64 - reference as i64).abs();
                TwoPlayerRun {
                    ok: result.resolved && result.iterations <= budget && diff <= TOLERANCE,
                    frozen: report.count(Invariant::Frozen) + frozen_breaks(traces),
                    coupling: report.count(Invariant::Coupling) + report.count(Invariant::BestChild),
                    progress: report.count(Invariant::Progress) + stalls(traces, StateId(0)),
                }
            })
        })
        .collect();
    let elapsed = start.elapsed();
    let failed = runs.iter().filter(|r| !r.ok).count();
    let frozen: usize = runs.iter().map(|r| r.frozen).sum();
    let coupling: usize = runs.iter().map(|r| r.coupling).sum();
    let progress: usize = runs.iter().map(|r| r.progress).sum();
    vec![
        Outcome {
            id: 1,
            name: "two-player completeness",
            pass: failed == 0 && elapsed < TWO_PLAYER_TIME && runs.len() == 2 * TWO_PLAYER_GAMES as usize,
            detail: format!(
                "{} games x {{ubfm, descent}}, {failed} runs unresolved within 2|S| or off minimax, {:.1} s (limit {} s)",
                TWO_PLAYER_GAMES,
                elapsed.as_secs_f64(),
                TWO_PLAYER_TIME.as_secs()
            ),
        },
        Outcome {
            id: 2,
            name: "frozen + coupling",
            pass: frozen == 0 && coupling == 0,
            detail: format!("{frozen} frozen and {coupling} coupling violations over {} runs", runs.len()),
        },
        Outcome {
            id: 3,
            name: "progress",
            pass: progress == 0,
            detail: format!("{progress} stalled iterations over {} runs", runs.len()),
        },
    ]
}

fn zero_completion_breaks(report: &VerifyReport, traces: &[IterationTrace]) -> usize {
    let direct = traces
        .iter()
        .flat_map(|t| &t.updates)
        .filter(|u| u.r == 0 && u.c.iter().any(|&x| x != 0))
        .count();
    direct + report.count(Invariant::ZeroCompletion)
}

/// Root whose only child `s1` sees a non-maximal win for its player first,
/// so that `s1` and the root are unresolved with a nonzero completion under
/// the second variant.
fn nonzero_unresolved_game() -> GameGraph {
    GameGraph::new(
        3,
        vec![
            StateRecord::decision(1, [1]),
            StateRecord::decision(2, [2, 3]),
            StateRecord::terminal([-1, 1, -1]),
            StateRecord::decision(3, [4]),
            StateRecord::terminal([-1, 1, -1]),
        ],
    )
}

fn criteria_4_and_5() -> Vec<Outcome> {
    let start = Instant::now();
    struct GameResult {
        failures: usize,
        disagreements: usize,
        v1_zero_breaks: usize,
        v1_runs: usize,
    }
    let results: Vec<GameResult> = (0..MULTI_GAMES)
        .into_par_iter()
        .map(|seed| {
            let players = 3 + (seed % 2) as usize;
            let g = game(seed, players, size_for(seed, MULTI_STATES), 0.3);
            let teval = make_tie_breaking_eval(&g, fitting_epsilon(&g, seed)).unwrap();
            assert!(check_tie_breaking(&g, &teval).unwrap().passed());
            let reference = maxn_ref(&g, &teval, StateId(0))[0].clone().unwrap();
            let eval = EvalFn::Hashed(seed.wrapping_mul(31));
            let budget = 2 * g.num_states();
            let mut failures = usize::from(reference.tied);
            let mut roots = Vec::new();
            let mut v1_zero_breaks = 0;
            let mut v1_runs = 0;
            for algo in Algo::MULTIPLAYER {
                let (result, report) = verify_run(&g, StateId(0), algo, &eval, &teval, budget).unwrap();
                let exact = result.completion == reference.gain
                    && fixed_diff(&result.value, &reference.eval) <= TOLERANCE;
                if !(result.resolved && result.iterations <= budget && exact && report.passed()) {
                    failures += 1;
                }
                if matches!(algo, Algo::Umaxn1 | Algo::Descentn1) {
                    v1_runs += 1;
                    v1_zero_breaks += zero_completion_breaks(&report, result.trace.as_deref().unwrap());
                }
                roots.push((result.completion, result.value));
            }
            let disagreements = roots.windows(2).filter(|w| w[0] != w[1]).count();
            GameResult {
                failures,
                disagreements,
                v1_zero_breaks,
                v1_runs,
            }
        })
        .collect();
    let elapsed = start.elapsed();
    let failures: usize = results.iter().map(|r| r.failures).sum();
    let disagreements: usize = results.iter().map(|r| r.disagreements).sum();
    let zero_breaks: usize = results.iter().map(|r| r.v1_zero_breaks).sum();
    let v1_runs: usize = results.iter().map(|r| r.v1_runs).sum();

    // Constructed second-variant run with an unresolved nonzero completion.
    let g = nonzero_unresolved_game();
    let teval = make_tie_breaking_eval(&g, FixedPoint::EPSILON).unwrap();
    let opts = SolveOptions::budget(2).with_trace();
    let v2 = solve(&g, StateId(0), Algo::Umaxn2, &EvalFn::Zero, &teval, &NpConfig::new(Algo::Umaxn2.driver()), &opts)
        .unwrap();
    let witness = v2
        .trace
        .unwrap()
        .iter()
        .flat_map(|t| t.updates.clone())
        .find(|u| u.r == 0 && u.c.iter().any(|&x| x != 0));

    vec![
        Outcome {
            id: 4,
            name: "multiplayer completeness",
            pass: failures == 0 && disagreements == 0 && elapsed < MULTI_TIME,
            detail: format!(
                "{MULTI_GAMES} games (3 and 4 players) x 4 algorithms, {failures} failed runs, {disagreements} v1/v2 disagreements, {:.1} s (limit {} s)",
                elapsed.as_secs_f64(),
                MULTI_TIME.as_secs()
            ),
        },
        Outcome {
            id: 5,
            name: "v1 zero-completion",
            pass: zero_breaks == 0 && v1_runs > 0 && witness.is_some(),
            detail: format!(
                "{zero_breaks} unresolved nonzero completions in {v1_runs} v1 runs; v2 witness {}",
                witness.map_or_else(|| "missing".to_string(), |u| format!("{} with c = {:?}, r = 0", u.id, u.c))
            ),
        },
    ]
}

fn criterion_6() -> Outcome {
    // s' terminal with (0,0,0,-1); s'' unresolved with v = (-1,1,1,1).
    let g = GameGraph::new(
        4,
        vec![
            StateRecord::decision(1, [1, 2]),
            StateRecord::terminal([0, 0, 0, -1]),
            StateRecord::decision(2, [3]),
            StateRecord::terminal([-1, 1, 1, 1]),
        ],
    );
    let ones = |xs: [i64; 4]| xs.map(FixedPoint::from_int).to_vec();
    let teval = TerminalEval::from_gains(&g);
    let eval = EvalFn::Table([(StateId(2), ones([-1, 1, 1, 1]))].into_iter().collect());
    let search = MultiplayerSearch::new(&g, &eval, &teval).unwrap();

    let mut t1 = SearchTreeNP1::new(4);
    umaxn_iteration_v1(&search, &mut t1, StateId(0));
    let s1 = t1.entry(StateId(0)).unwrap().clone();
    let mut t2 = SearchTreeNP2::new(4);
    umaxn_iteration_v2(&search, &mut t2, StateId(0));
    let s2 = t2.entry(StateId(0)).unwrap().clone();

    let v1_ok = s1.cp == [0, 0, 0, -1] && s1.c == [0, 0, 0, 0] && !s1.r;
    let v2_ok = s2.c == [0, 0, 0, -1] && !s2.r;
    Outcome {
        id: 6,
        name: "four-player example golden test",
        pass: v1_ok && v2_ok,
        detail: format!(
            "v1: c' = {:?}, c = {:?}, r = {}; v2: c = {:?} (the stated second-variant vector (0,1,0,-1) does not follow from the child values and is not used as an oracle)",
            s1.cp, s1.c, s1.r as u8, s2.c
        ),
    }
}

fn criterion_7() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut found = Vec::new();
    let mut seed = 0u64;
    while found.len() < NECESSITY_GAMES && seed < 10_000 {
        let players = 3 + (seed % 2) as usize;
        let g = game(seed, players, size_for(seed, MULTI_STATES), 0.5);
        let raw = TerminalEval::from_gains(&g);
        if !check_tie_breaking(&g, &raw).unwrap().passed() {
            found.push((seed, g));
        }
        seed += 1;
    }
    let mut ambiguous = 0;
    let mut refused = 0;
    let mut attempts = 0;
    let binary = env!("CARGO_BIN_EXE_gametree");
    for (i, (seed, g)) in found.iter().enumerate() {
        let raw = TerminalEval::from_gains(g);
        let lib_ambiguous = !maxn(g, &raw).unwrap().unique();
        let ref_ambiguous = maxn_ref(g, &raw, StateId(0))
            .iter()
            .flatten()
            .any(|p| p.tied);
        if lib_ambiguous {
            ambiguous += 1;
        }
        assert_eq!(ref_ambiguous, lib_ambiguous, "seed {seed}: ambiguity differs from the reference");
        let path = dir.path().join(format!("g{seed}.json"));
        std::fs::write(&path, gametree::format::serialize_game(g)).unwrap();
        for algo in Algo::MULTIPLAYER {
            attempts += 1;
            let args = ["solve", path.to_str().unwrap(), "--algo", algo.name(), "--teval", "gains"];
            let code = if i % 10 == 0 {
                Command::new(binary).args(args).output().unwrap().status.code()
            } else {
                let mut sink = Vec::new();
                let mut err = Vec::new();
                let argv = std::iter::once("gametree").chain(args);
                Some(gametree::cli::run(argv, &mut sink, &mut err))
            };
            if code == Some(gametree::cli::EXIT_PRECONDITION) {
                refused += 1;
            }
        }
    }
    Outcome {
        id: 7,
        name: "tie-breaking necessity",
        pass: found.len() >= NECESSITY_GAMES && ambiguous >= 1 && refused == attempts,
        detail: format!(
            "{} games failing the check with f_t = f_b, {ambiguous} with a non-unique Max^n value, {refused}/{attempts} solves refused with exit 3",
            found.len()
        ),
    }
}

fn criterion_8() -> Outcome {
    let mismatches: Vec<(usize, usize)> = (0..LIFTED_GAMES)
        .into_par_iter()
        .map(|seed| {
            let g = game(seed + 77_000, 2, size_for(seed, TWO_PLAYER_STATES), 0.3);
            let teval = make_tie_breaking_eval(&g, fitting_epsilon(&g, seed)).unwrap();
            let m = minimax(&g).unwrap();
            let mx = maxn(&g, &teval).unwrap();
            let m_ref = minimax_ref(&g, StateId(0));
            let mx_ref = maxn_ref(&g, &teval, StateId(0));
            let state_mismatch = g
                .ids()
                .filter(|&s| {
                    let first = mx.get(s).gain[0];
                    first != m.get(s)
                        || m_ref[s.index()] != Some(m.get(s))
                        || mx_ref[s.index()].as_ref().map(|p| p.gain[0]) != Some(first)
                })
                .count();
            let eval = EvalFn::Hashed(seed);
            let budget = SolveOptions::budget(2 * g.num_states());
            let run = |algo: Algo| {
                solve(&g, StateId(0), algo, &eval, &teval, &NpConfig::new(algo.driver()), &budget).unwrap()
            };
            let ubfm = run(Algo::Ubfm);
            let root_mismatch = [Algo::Umaxn1, Algo::Umaxn2]
                .into_iter()
                .filter(|&a| {
                    let r = run(a);
                    !(ubfm.resolved && r.resolved && r.completion[0] == ubfm.completion[0])
                })
                .count();
            (state_mismatch, root_mismatch)
        })
        .collect();
    let states: usize = mismatches.iter().map(|m| m.0).sum();
    let roots: usize = mismatches.iter().map(|m| m.1).sum();
    Outcome {
        id: 8,
        name: "two-player / Max^n consistency",
        pass: states == 0 && roots == 0,
        detail: format!(
            "{LIFTED_GAMES} lifted games, {states} states where Max^n gain_1 differs from minimax, {roots} umaxn roots differing from ubfm"
        ),
    }
}

fn main() -> ExitCode {
    let mut outcomes = criteria_1_to_3();
    outcomes.extend(criteria_4_and_5());
    outcomes.push(criterion_6());
    outcomes.push(criterion_7());
    outcomes.push(criterion_8());
    for o in &outcomes {
        println!(
            "{} [{}] {}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.detail
        );
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("acceptance: {} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

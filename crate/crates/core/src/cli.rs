//! The `gametree` command line.
//!
//! Exit codes: 0 resolved (or success), 1 internal or input error or an
//! invariant violation, 2 budget or time exhausted before resolution, 3
//! terminal evaluation not tie-breaking, 64 usage error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bench::{default_suite, run_bench, write_csv};
use crate::eval::{EvalFn, ValueTable};
use crate::fixed::FixedPoint;
use crate::format::{parse_game, serialize_game};
use crate::game::{validate_game, GameGraph, StateId};
use crate::generate::{generate_random_game, line_game, nim_game, GenParams};
use crate::oracle::{maxn, minimax};
use crate::run::{solve, Algo, Variant};
use crate::search::multiplayer::{Exploration, NpConfig};
use crate::search::{Policy, SearchError, SolveOptions, SolveResult};
use crate::terminal::{check_tie_breaking, make_tie_breaking_eval, TerminalEval};
use crate::trace::{read_trace, write_trace};
use crate::verify::{verify_run, TraceChecker, VerifyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "gametree", version, about = "Best-first game search with completion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a game file.
    Gen(GenArgs),
    /// Run one solver on a game file.
    Solve(SolveArgs),
    /// Exact values by exhaustive traversal.
    Oracle(OracleArgs),
    /// Check search invariants on traces of a game file, a trace file or
    /// generated games.
    Verify(VerifyArgs),
    /// Fixed-seed benchmark suite as CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value_t = 2)]
    players: usize,
    #[arg(long, default_value_t = 30)]
    states: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    max_children: usize,
    #[arg(long, default_value_t = 0.2)]
    dag_density: f64,
    #[arg(long, default_value_t = 0.3)]
    draw_rate: f64,
    /// Emit a line of DEPTH player-1 moves ending in a win instead.
    #[arg(long, conflicts_with = "nim")]
    line: Option<usize>,
    /// Emit the subtraction game on a heap of this size instead.
    #[arg(long)]
    nim: Option<u32>,
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    takes: Vec<u32>,
    /// Output file (stdout if omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
enum EvalSpec {
    Zero,
    Hashed(u64),
    Table(PathBuf),
}

impl FromStr for EvalSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            None if s == "zero" => Ok(EvalSpec::Zero),
            Some(("hashed", seed)) => seed
                .parse()
                .map(EvalSpec::Hashed)
                .map_err(|e| format!("bad seed `{seed}`: {e}")),
            Some(("table", path)) => Ok(EvalSpec::Table(path.into())),
            _ => Err(format!("expected zero, hashed:SEED or table:PATH, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TevalSpec {
    /// The game's embedded block, else raw gains for two-player algorithms
    /// and `tiebreak:0.000001` otherwise.
    Auto,
    Gains,
    Tiebreak(FixedPoint),
    Table(PathBuf),
}

impl FromStr for TevalSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            None if s == "auto" => Ok(TevalSpec::Auto),
            None if s == "gains" => Ok(TevalSpec::Gains),
            Some(("tiebreak", eps)) => eps
                .parse()
                .map(TevalSpec::Tiebreak)
                .map_err(|e| format!("bad epsilon `{eps}`: {e}")),
            Some(("table", path)) => Ok(TevalSpec::Table(path.into())),
            _ => Err(format!(
                "expected auto, gains, tiebreak:EPS or table:PATH, got `{s}`"
            )),
        }
    }
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Frontier evaluation: zero, hashed:SEED or table:PATH.
    #[arg(long, default_value = "hashed:0")]
    eval: EvalSpec,
    /// Terminal evaluation: auto, gains, tiebreak:EPS or table:PATH.
    #[arg(long, default_value = "auto")]
    teval: TevalSpec,
}

#[derive(Debug, Args)]
struct SolveArgs {
    game: PathBuf,
    #[arg(long, default_value = "ubfm")]
    algo: Algo,
    /// Iteration budget (default 2|S|).
    #[arg(long)]
    budget: Option<usize>,
    #[command(flatten)]
    eval: EvalArgs,
    #[arg(long, default_value = "best", value_parser = parse_policy)]
    policy: Policy,
    /// Softmax temperature for the unresolved-root move of descent^n.
    #[arg(long)]
    softmax: Option<f64>,
    #[arg(long, default_value_t = 0)]
    root: u32,
    /// Write the per-iteration trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Soft wall-clock cap; stops early with exit code 2.
    #[arg(long)]
    max_seconds: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct OracleArgs {
    game: PathBuf,
    /// Terminal evaluation for Max^n: auto, gains, tiebreak:EPS or table:PATH.
    #[arg(long, default_value = "auto")]
    teval: TevalSpec,
    #[arg(long, default_value_t = 0)]
    root: u32,
    /// Report every state, not just the root.
    #[arg(long)]
    all: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Game file; omit to check generated games.
    game: Option<PathBuf>,
    /// Check this trace file against GAME instead of running a solver.
    #[arg(long, requires = "game")]
    trace: Option<PathBuf>,
    /// Algorithms to run (default: all that apply).
    #[arg(long, value_delimiter = ',')]
    algo: Vec<Algo>,
    /// Iteration budget (default 2|S|).
    #[arg(long)]
    budget: Option<usize>,
    #[command(flatten)]
    eval: EvalArgs,
    #[arg(long, default_value_t = 0)]
    root: u32,
    #[arg(long, default_value_t = 100)]
    games: usize,
    #[arg(long, default_value_t = 2)]
    players: usize,
    #[arg(long, default_value_t = 20)]
    min_states: usize,
    #[arg(long, default_value_t = 100)]
    max_states: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.2)]
    dag_density: f64,
    #[arg(long, default_value_t = 0.3)]
    draw_rate: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// CSV output file (stdout if omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    max_seconds: Option<f64>,
}

fn parse_policy(s: &str) -> Result<Policy, String> {
    match s {
        "best" => Ok(Policy::Best),
        "safest" => Ok(Policy::Safest),
        _ => Err(format!("expected best or safest, got `{s}`")),
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("terminal evaluation is not tie-breaking: {0} and {1} collide")]
    NotTieBreaking(StateId, StateId),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::NotTieBreaking(..) => EXIT_PRECONDITION,
            CliError::Io { .. } | CliError::Input(_) | CliError::Failed(_) => EXIT_INTERNAL,
        }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::NotTieBreaking(a, b) => CliError::NotTieBreaking(a, b),
            SearchError::ZeroBudget | SearchError::BadRoot(_) | SearchError::NotTwoPlayer(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn load_game(path: &Path) -> Result<GameGraph, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let g = parse_game(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let report = validate_game(&g);
    if !report.is_valid() {
        let list: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(CliError::Input(format!(
            "{}: invalid game: {}",
            path.display(),
            list.join("; ")
        )));
    }
    Ok(g)
}

fn load_table(path: &Path) -> Result<ValueTable, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_eval(spec: &EvalSpec) -> Result<EvalFn, CliError> {
    Ok(match spec {
        EvalSpec::Zero => EvalFn::Zero,
        EvalSpec::Hashed(seed) => EvalFn::Hashed(*seed),
        EvalSpec::Table(path) => EvalFn::Table(load_table(path)?.into_map()),
    })
}

fn load_teval(spec: &TevalSpec, g: &GameGraph, multiplayer: bool) -> Result<TerminalEval, CliError> {
    let tiebreak = |eps| {
        make_tie_breaking_eval(g, eps).map_err(|e| CliError::Usage(format!("--teval: {e}")))
    };
    let teval = match spec {
        TevalSpec::Auto => match TerminalEval::from_game(g) {
            Some(t) => t,
            None if multiplayer => tiebreak(FixedPoint::EPSILON)?,
            None => TerminalEval::from_gains(g),
        },
        TevalSpec::Gains => TerminalEval::from_gains(g),
        TevalSpec::Tiebreak(eps) => tiebreak(*eps)?,
        TevalSpec::Table(path) => {
            let map = load_table(path)?.into_map();
            TerminalEval::from_values(
                g.ids()
                    .map(|s| g.is_terminal(s).then(|| map.get(&s).cloned()).flatten())
                    .collect(),
            )
        }
    };
    teval
        .ensure_covers(g)
        .map_err(|e| CliError::Input(format!("--teval: {e}")))?;
    Ok(teval)
}

fn root_of(g: &GameGraph, root: u32) -> Result<StateId, CliError> {
    let root = StateId(root);
    if root.index() >= g.num_states() {
        return Err(CliError::Usage(format!("--root {root} is not a state of the game")));
    }
    Ok(root)
}

fn check_arity(g: &GameGraph, algo: Algo) -> Result<(), CliError> {
    if algo.variant() == Variant::TwoPlayer && g.num_players() != 2 {
        return Err(CliError::Usage(format!(
            "{algo} needs a 2-player game, got {} players",
            g.num_players()
        )));
    }
    Ok(())
}

fn budget_of(g: &GameGraph, budget: Option<usize>) -> Result<usize, CliError> {
    match budget {
        Some(0) => Err(CliError::Usage("--budget must be at least 1".into())),
        Some(b) => Ok(b),
        None => Ok(2 * g.num_states()),
    }
}

fn deadline(max_seconds: Option<f64>) -> Result<Option<Instant>, CliError> {
    max_seconds
        .map(|s| {
            Duration::try_from_secs_f64(s)
                .map(|d| Instant::now() + d)
                .map_err(|e| CliError::Usage(format!("--max-seconds: {e}")))
        })
        .transpose()
}

fn create(path: &Path) -> Result<io::BufWriter<fs::File>, CliError> {
    fs::File::create(path)
        .map(io::BufWriter::new)
        .map_err(io_err(path))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("reports serialize");
    s.push('\n');
    s
}

fn cmd_gen(args: GenArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let g = if let Some(depth) = args.line {
        line_game(depth, 1)
    } else if let Some(heap) = args.nim {
        if args.takes.is_empty() || args.takes.contains(&0) {
            return Err(CliError::Usage("--takes must list positive amounts".into()));
        }
        nim_game(heap, &args.takes)
    } else {
        let params = GenParams {
            num_players: args.players,
            num_states: args.states,
            max_children: args.max_children,
            dag_density: args.dag_density,
            draw_rate: args.draw_rate,
        };
        generate_random_game(args.seed, &params).map_err(|e| CliError::Usage(e.to_string()))?
    };
    let text = serialize_game(&g);
    match args.out {
        Some(path) => fs::write(&path, text).map_err(io_err(&path))?,
        None => emit(out, &text)?,
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SolveReport<'a> {
    algo: Algo,
    budget: usize,
    resolved: bool,
    completion: &'a [i8],
    value: &'a [FixedPoint],
    iterations: usize,
    chosen_action: Option<StateId>,
    nodes_expanded: usize,
    members: usize,
}

fn cmd_solve(args: SolveArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let g = load_game(&args.game)?;
    check_arity(&g, args.algo)?;
    let root = root_of(&g, args.root)?;
    let budget = budget_of(&g, args.budget)?;
    let eval = load_eval(&args.eval.eval)?;
    let multiplayer = args.algo.variant() != Variant::TwoPlayer;
    let teval = load_teval(&args.eval.teval, &g, multiplayer)?;
    let exploration = match args.softmax {
        Some(temperature) if temperature > 0.0 => Exploration::Softmax {
            seed: match args.eval.eval {
                EvalSpec::Hashed(seed) => seed,
                _ => 0,
            },
            temperature,
        },
        Some(_) => return Err(CliError::Usage("--softmax must be positive".into())),
        None => Exploration::Greedy,
    };
    let config = NpConfig {
        driver: args.algo.driver(),
        policy: args.policy,
        exploration,
    };
    let opts = SolveOptions {
        budget,
        record_trace: args.trace.is_some(),
        deadline: deadline(args.max_seconds)?,
    };
    let result: SolveResult = solve(&g, root, args.algo, &eval, &teval, &config, &opts)?;
    if let Some(path) = &args.trace {
        let traces = result.trace.as_deref().unwrap_or_default();
        write_trace(create(path)?, args.algo.variant(), traces).map_err(io_err(path))?;
    }
    if args.json {
        emit(
            out,
            &to_json(&SolveReport {
                algo: args.algo,
                budget,
                resolved: result.resolved,
                completion: &result.completion,
                value: &result.value,
                iterations: result.iterations,
                chosen_action: result.chosen_action,
                nodes_expanded: result.nodes_expanded,
                members: result.members,
            }),
        )?;
    } else {
        let list = |xs: Vec<String>| xs.join(" ");
        let text = format!(
            "algo       {}\nresolved   {}\nc(root)    {}\nv(root)    {}\niterations {} of {}\naction     {}\nexpanded   {}\n",
            args.algo,
            result.resolved,
            list(result.completion.iter().map(|c| c.to_string()).collect()),
            list(result.value.iter().map(|v| v.to_string()).collect()),
            result.iterations,
            budget,
            result
                .chosen_action
                .map_or_else(|| "-".to_string(), |s| s.to_string()),
            result.nodes_expanded,
        );
        emit(out, &text)?;
    }
    Ok(if result.resolved { EXIT_OK } else { EXIT_BUDGET })
}

#[derive(Serialize)]
struct OracleState {
    id: StateId,
    #[serde(skip_serializing_if = "Option::is_none")]
    minimax: Option<i8>,
    gain: Vec<i8>,
    eval: Vec<FixedPoint>,
}

#[derive(Serialize)]
struct OracleReport {
    tie_breaking: bool,
    unique: bool,
    ambiguous: Vec<StateId>,
    states: Vec<OracleState>,
}

fn cmd_oracle(args: OracleArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let g = load_game(&args.game)?;
    let root = root_of(&g, args.root)?;
    let teval = load_teval(&args.teval, &g, true)?;
    let tie_breaking = check_tie_breaking(&g, &teval)
        .map_err(|e| CliError::Input(e.to_string()))?
        .passed();
    let values = maxn(&g, &teval).map_err(|e| CliError::Input(e.to_string()))?;
    let m = if g.num_players() == 2 {
        Some(minimax(&g).map_err(|e| CliError::Input(e.to_string()))?)
    } else {
        None
    };
    let ids: Vec<StateId> = if args.all { g.ids().collect() } else { vec![root] };
    let report = OracleReport {
        tie_breaking,
        unique: values.unique(),
        ambiguous: values.ambiguous.clone(),
        states: ids
            .into_iter()
            .map(|s| OracleState {
                id: s,
                minimax: m.as_ref().map(|m| m.get(s)),
                gain: values.get(s).gain.clone(),
                eval: values.get(s).eval.clone(),
            })
            .collect(),
    };
    if args.json {
        emit(out, &to_json(&report))?;
    } else {
        let mut text = format!(
            "tie-breaking {}\nunique       {}\n",
            report.tie_breaking, report.unique
        );
        if !report.ambiguous.is_empty() {
            let list: Vec<String> = report.ambiguous.iter().map(|s| s.to_string()).collect();
            text += &format!("ambiguous    {}\n", list.join(" "));
        }
        for s in &report.states {
            let gain: Vec<String> = s.gain.iter().map(|x| x.to_string()).collect();
            let eval: Vec<String> = s.eval.iter().map(|x| x.to_string()).collect();
            text += &format!("{:<6} maxn ({}) ({})", s.id.to_string(), gain.join(" "), eval.join(" "));
            if let Some(m) = s.minimax {
                text += &format!(" minimax {m}");
            }
            text.push('\n');
        }
        emit(out, &text)?;
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct VerifyRun {
    game: String,
    algo: Algo,
    states: usize,
    resolved: bool,
    iterations: usize,
    completion: Vec<i8>,
    value: Vec<FixedPoint>,
    report: VerifyReport,
}

#[derive(Debug, Default, Serialize)]
struct VerifySummary {
    runs: usize,
    resolved: usize,
    checks: usize,
    violations: usize,
    disagreements: Vec<String>,
    first_violation: Option<String>,
}

fn verify_game(
    name: &str,
    g: &GameGraph,
    root: StateId,
    algos: &[Algo],
    eval: &EvalFn,
    teval_spec: &TevalSpec,
    budget: Option<usize>,
) -> Result<Vec<VerifyRun>, CliError> {
    let budget = budget_of(g, budget)?;
    let mut runs = Vec::new();
    for &algo in algos {
        let teval = load_teval(teval_spec, g, algo.variant() != Variant::TwoPlayer)?;
        let (result, report) = verify_run(g, root, algo, eval, &teval, budget).map_err(|e| match e {
            crate::verify::VerifyError::Search(s) => CliError::from(s),
            other => CliError::Input(other.to_string()),
        })?;
        runs.push(VerifyRun {
            game: name.to_string(),
            algo,
            states: g.num_states(),
            resolved: result.resolved,
            iterations: result.iterations,
            completion: result.completion,
            value: result.value,
            report,
        });
    }
    Ok(runs)
}

fn default_algos(players: usize) -> Vec<Algo> {
    if players == 2 {
        vec![Algo::Ubfm, Algo::Descent]
    } else {
        Algo::MULTIPLAYER.to_vec()
    }
}

fn summarize(runs: &[VerifyRun]) -> VerifySummary {
    let mut summary = VerifySummary::default();
    for run in runs {
        summary.runs += 1;
        summary.resolved += run.resolved as usize;
        summary.checks += run.report.checks;
        summary.violations += run.report.violations.len();
        if summary.first_violation.is_none() {
            if let Some(v) = run.report.first() {
                summary.first_violation = Some(format!("{} {}: {v}", run.game, run.algo));
            }
        }
    }
    // Resolved roots of the same game must agree across algorithms.
    for (i, a) in runs.iter().enumerate() {
        for b in &runs[i + 1..] {
            if a.game == b.game && a.resolved && b.resolved {
                let two_a = a.algo.variant() == Variant::TwoPlayer;
                let two_b = b.algo.variant() == Variant::TwoPlayer;
                let agree = match (two_a, two_b) {
                    (false, false) => a.completion == b.completion && a.value == b.value,
                    (true, true) => a.completion == b.completion,
                    _ => a.completion.first() == b.completion.first(),
                };
                if !agree {
                    summary
                        .disagreements
                        .push(format!("{}: {} vs {}", a.game, a.algo, b.algo));
                }
            }
        }
    }
    summary
}

fn cmd_verify(args: VerifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let eval = load_eval(&args.eval.eval)?;
    if let (Some(game), Some(trace_path)) = (&args.game, &args.trace) {
        let g = load_game(game)?;
        let root = root_of(&g, args.root)?;
        let file = fs::File::open(trace_path).map_err(io_err(trace_path))?;
        let (variant, traces) =
            read_trace(BufReader::new(file)).map_err(|e| CliError::Input(e.to_string()))?;
        let variant = variant.ok_or_else(|| CliError::Input("empty trace file".into()))?;
        let teval = load_teval(&args.eval.teval, &g, variant != Variant::TwoPlayer)?;
        let checker = TraceChecker::new(&g, variant, &teval, root)
            .map_err(|e| CliError::Input(e.to_string()))?;
        let report = checker.check(&traces);
        if args.json {
            emit(out, &to_json(&report))?;
        } else {
            let mut text = format!(
                "iterations {}\nresolved   {}\nchecks     {}\nviolations {}\n",
                report.iterations,
                report.root_resolved,
                report.checks,
                report.violations.len()
            );
            if let Some(v) = report.first() {
                text += &format!("first      {v}\n");
            }
            emit(out, &text)?;
        }
        return Ok(if report.passed() { EXIT_OK } else { EXIT_INTERNAL });
    }

    let runs: Vec<VerifyRun> = if let Some(game) = &args.game {
        let g = load_game(game)?;
        let root = root_of(&g, args.root)?;
        let algos = if args.algo.is_empty() {
            default_algos(g.num_players())
        } else {
            args.algo.clone()
        };
        for &algo in &algos {
            check_arity(&g, algo)?;
        }
        verify_game(&game.display().to_string(), &g, root, &algos, &eval, &args.eval.teval, args.budget)?
    } else {
        if args.min_states == 0 || args.min_states > args.max_states {
            return Err(CliError::Usage("need 1 <= --min-states <= --max-states".into()));
        }
        if args.players < 2 {
            return Err(CliError::Usage("--players must be at least 2".into()));
        }
        let algos = if args.algo.is_empty() {
            default_algos(args.players)
        } else {
            args.algo.clone()
        };
        for &algo in &algos {
            if algo.variant() == Variant::TwoPlayer && args.players != 2 {
                return Err(CliError::Usage(format!("{algo} needs --players 2")));
            }
        }
        let span = (args.max_states - args.min_states + 1) as u64;
        let per_game: Result<Vec<Vec<VerifyRun>>, CliError> = (0..args.games as u64)
            .into_par_iter()
            .map(|i| {
                let seed = args.seed.wrapping_add(i);
                let params = GenParams {
                    num_players: args.players,
                    num_states: args.min_states + (crate::eval::mix64(seed) % span) as usize,
                    max_children: 3,
                    dag_density: args.dag_density,
                    draw_rate: args.draw_rate,
                };
                let g = generate_random_game(seed, &params).map_err(|e| CliError::Usage(e.to_string()))?;
                verify_game(&format!("seed {seed}"), &g, StateId(0), &algos, &eval, &args.eval.teval, args.budget)
            })
            .collect();
        per_game?.into_iter().flatten().collect()
    };

    let summary = summarize(&runs);
    if args.json {
        emit(out, &to_json(&summary))?;
    } else {
        let mut text = format!(
            "runs          {}\nresolved      {}\nchecks        {}\nviolations    {}\ndisagreements {}\n",
            summary.runs,
            summary.resolved,
            summary.checks,
            summary.violations,
            summary.disagreements.len()
        );
        if let Some(v) = &summary.first_violation {
            text += &format!("first         {v}\n");
        }
        if let Some(d) = summary.disagreements.first() {
            text += &format!("disagree      {d}\n");
        }
        emit(out, &text)?;
    }
    Ok(if summary.violations > 0 || !summary.disagreements.is_empty() {
        EXIT_INTERNAL
    } else if summary.resolved < summary.runs {
        EXIT_BUDGET
    } else {
        EXIT_OK
    })
}

fn cmd_bench(args: BenchArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let deadline = deadline(args.max_seconds)?;
    let rows = run_bench(&default_suite(), deadline)?;
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows).map_err(|e| CliError::Failed(e.to_string()))?;
    match &args.out {
        Some(path) => fs::write(path, buf).map_err(io_err(path))?,
        None => out.write_all(&buf).map_err(io_err(Path::new("<stdout>")))?,
    }
    Ok(if rows.iter().all(|r| r.resolved) { EXIT_OK } else { EXIT_BUDGET })
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Gen(a) => cmd_gen(a, out),
        Command::Solve(a) => cmd_solve(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "gametree: {e}");
            e.code()
        }
    }
}

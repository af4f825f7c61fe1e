//! Best-first game tree search with completion and resolution values, for
//! two-player zero-sum games and for multiplayer games under Max^n, together
//! with exhaustive oracles and a trace-based invariant checker.
//!
//! Games are explicit acyclic graphs ([`game::GameGraph`]); all evaluations
//! are fixed-point numbers with six decimal places ([`fixed::FixedPoint`]).

pub mod bench;
pub mod cli;
pub mod eval;
pub mod fixed;
pub mod format;
pub mod game;
pub mod generate;
pub mod oracle;
pub mod run;
pub mod search;
pub mod terminal;
pub mod trace;
pub mod verify;

pub use eval::EvalFn;
pub use fixed::FixedPoint;
pub use game::{validate_game, GameGraph, StateId, StateRecord};
pub use run::{solve, Algo, Variant};
pub use search::{Driver, Policy, SearchError, SolveOptions, SolveResult};
pub use terminal::{check_tie_breaking, make_tie_breaking_eval, TerminalEval};
